"""Positive definite binary quadratic forms.

Gauss reduction, class representatives of a negative discriminant, class
numbers, ambiguous classes, and proper automorphism counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Optional

from .lattice import GramMatrix, HalfIntegralMatrix, enumerate_vectors_with_norms


@dataclass(frozen=True)
class BinaryFormClass:
    """Reduced positive definite form a*x^2 + b*x*y + c*y^2 with class data."""

    a: int
    b: int
    c: int
    ambiguous: bool
    gl_partner: Optional[tuple[int, int, int]]  # reduced (a,-b,c) class if distinct

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def triple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def half_matrix(self) -> HalfIntegralMatrix:
        """The index matrix [[a, b/2], [b/2, c]]."""
        return HalfIntegralMatrix(((2 * self.a, self.b), (self.b, 2 * self.c)))

    def even_gram(self) -> GramMatrix:
        """The even Gram matrix of the doubled form, [[2a, b], [b, 2c]]."""
        return GramMatrix(((2 * self.a, self.b), (self.b, 2 * self.c)))

    def to_json(self) -> dict:
        doc = {
            "form": [self.a, self.b, self.c],
            "discriminant": self.discriminant,
            "ambiguous": self.ambiguous,
        }
        if self.gl_partner is not None:
            doc["gl_partner"] = list(self.gl_partner)
        return doc


def _check_definite(a: int, b: int, c: int) -> None:
    if b * b - 4 * a * c >= 0 or a <= 0:
        raise ValueError(f"form ({a},{b},{c}) is not positive definite")


def _reduce_triple(a: int, b: int, c: int) -> tuple[tuple[int, int, int], tuple]:
    """Gauss reduction; returns the reduced triple and the SL2 transform U
    with (a,b,c) composed with U equal to the result."""
    _check_definite(a, b, c)
    u = ((1, 0), (0, 1))

    def apply(u, m):
        return (
            (u[0][0] * m[0][0] + u[0][1] * m[1][0],
             u[0][0] * m[0][1] + u[0][1] * m[1][1]),
            (u[1][0] * m[0][0] + u[1][1] * m[1][0],
             u[1][0] * m[0][1] + u[1][1] * m[1][1]),
        )

    while True:
        if b <= -a or b > a:
            # translate b into (-a, a]
            k = (a - b) // (2 * a)
            b, c = b + 2 * k * a, a * k * k + b * k + c
            u = apply(u, ((1, k), (0, 1)))
        if a > c:
            a, b, c = c, -b, a
            u = apply(u, ((0, -1), (1, 0)))
            continue
        if a == c and b < 0:
            b = -b
            u = apply(u, ((0, -1), (1, 0)))
        return (a, b, c), u


def _is_ambiguous(a: int, b: int, c: int) -> bool:
    return _reduce_triple(a, -b, c)[0] == (a, b, c)


def _make_class(a: int, b: int, c: int) -> BinaryFormClass:
    ambiguous = _is_ambiguous(a, b, c)
    partner = None if ambiguous else _reduce_triple(a, -b, c)[0]
    return BinaryFormClass(a, b, c, ambiguous, partner)


def reduce(a: int, b: int, c: int) -> tuple[BinaryFormClass, tuple]:
    """The unique reduced SL2(Z)-equivalent form, with the transform matrix."""
    triple, u = _reduce_triple(a, b, c)
    return _make_class(*triple), u


def _valid_discriminant(d: int) -> None:
    if d >= 0 or d % 4 not in (0, 1):
        raise ValueError(f"{d} is not a negative discriminant (need 0 or 1 mod 4)")


def class_representatives(d: int) -> list[BinaryFormClass]:
    """All reduced forms of discriminant d < 0: ambiguous classes first, then
    GL2-pairs ordered by (a, |b|, sign of b)."""
    _valid_discriminant(d)
    forms = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a:
                continue
            if b < 0 and (a == c or b == -a):
                continue
            forms.append(_make_class(a, b, c))
        a += 1
    forms.sort(key=lambda f: (not f.ambiguous, f.a, abs(f.b), f.b < 0))
    return forms


def class_number(d: int) -> int:
    """h(d), the number of SL2(Z)-classes of discriminant d < 0."""
    return len(class_representatives(d))


def ambiguous_classes(d: int) -> list[BinaryFormClass]:
    """Classes fixed by (a, b, c) -> (a, -b, c) up to SL2-equivalence."""
    return [f for f in class_representatives(d) if f.ambiguous]


def gl_class_representatives(d: int) -> list[BinaryFormClass]:
    """One representative per GL2(Z)-class: ambiguous classes and the b > 0
    member of each pair, in canonical order."""
    return [f for f in class_representatives(d) if f.ambiguous or f.b > 0]


def _extend_to_unimodular(u: tuple[int, int]) -> Optional[tuple[int, int]]:
    """A vector v with det(u, v) = 1, or None if u is not primitive."""
    x, y = u
    if gcd(x, y) != 1:
        return None
    s, t = _xgcd(x, y)  # s*x + t*y = +-1
    if s * x + t * y < 0:
        s, t = -s, -t
    return (-t, s)


def _xgcd(a: int, b: int) -> tuple[int, int]:
    """(s, t) with s*a + t*b = gcd(a, b)."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, (a, b) = a // b, (b, a % b)
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return s0, t0


def epsilon_plus(t, n: int = 2) -> int:
    """Order of the proper automorphism group {U in SL(n,Z) : T[U] = T}.

    Only n <= 2 is supported; n = 1 always gives the trivial group {1}...
    except that SL(1,Z) = {1}, so the count is 1.
    """
    if n == 1:
        return 1
    if n != 2:
        raise ValueError("epsilon_plus is implemented for n <= 2 only")
    if isinstance(t, BinaryFormClass):
        t = t.half_matrix()
    if not isinstance(t, HalfIntegralMatrix):
        t = HalfIntegralMatrix.from_rational(t)
    two_t = t.two_t
    if two_t[0][0] <= 0 or t.det() <= 0:
        raise ValueError("form must be positive definite")
    gram = GramMatrix(two_t)
    count = 0
    t11 = Fraction(two_t[0][0], 2)
    t12 = Fraction(two_t[0][1], 2)
    t22 = Fraction(two_t[1][1], 2)
    for u1, norm in enumerate_vectors_with_norms(gram.entries, two_t[0][0]):
        if norm != two_t[0][0] or not any(u1):
            continue
        v0 = _extend_to_unimodular(u1)
        if v0 is None:
            continue
        # second column u2 = v0 + k*u1 is pinned by the cross term t12
        cross0 = Fraction(gram.inner(u1, v0), 2)
        k = (t12 - cross0) / t11
        if k.denominator != 1:
            continue
        u2 = (v0[0] + k.numerator * u1[0], v0[1] + k.numerator * u1[1])
        if Fraction(gram.norm(u2), 2) == t22:
            count += 1
    return count
