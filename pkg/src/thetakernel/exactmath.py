"""Exact integer/rational arithmetic primitives.

Legendre/Kronecker/Hilbert symbols, p-adic valuations with half-integer
support, and linear algebra over F_p.  Everything works on Python ints and
fractions.Fraction; no floating point is used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]

#: Label for the archimedean place in Hilbert-symbol computations.
INFINITE_PLACE = float("inf")

Place = Union[int, float]

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 3.3e24 (trial division + Miller-Rabin)."""
    if n < 2:
        return False
    for q in _SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_odd_prime(p: int) -> bool:
    return p != 2 and is_prime(p)


def _require_odd_prime(p: int) -> None:
    if not is_odd_prime(p):
        raise ValueError(f"expected an odd prime, got {p}")


def legendre(a: Rational, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p; a may be a p-integral rational."""
    _require_odd_prime(p)
    a = Fraction(a)
    num, den = a.numerator % p, a.denominator % p
    if den == 0:
        raise ValueError(f"{a} is not p-integral at p={p}")
    r = num * pow(den, -1, p) % p
    if r == 0:
        return 0
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), the full extension of the Jacobi symbol."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    # standard quadratic-reciprocity loop for the Jacobi symbol
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def chi_p(m: int, p: int) -> int:
    """Quadratic character of conductor p: the Kronecker symbol of (-1)^((p-1)/2) * p."""
    _require_odd_prime(p)
    disc = p if p % 4 == 1 else -p
    return kronecker(disc, m)


def _split_unit(x: Fraction, p: int) -> tuple[int, Fraction]:
    """Write x = p^e * u with u a p-unit; return (e, u)."""
    num, den = x.numerator, x.denominator
    e = 0
    while num % p == 0:
        num //= p
        e += 1
    while den % p == 0:
        den //= p
        e -= 1
    return e, Fraction(num, den)


def hilbert_symbol(a: Rational, b: Rational, v: Place) -> int:
    """Hilbert symbol (a, b)_v at a prime v or at INFINITE_PLACE."""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("hilbert_symbol requires nonzero arguments")
    if v == INFINITE_PLACE:
        return -1 if (a < 0 and b < 0) else 1
    p = int(v)
    if not is_prime(p):
        raise ValueError(f"expected a prime place, got {v}")
    alpha, u = _split_unit(a, p)
    beta, w = _split_unit(b, p)
    if p == 2:
        # units mod 8 determine the symbol: eps(u) = (u-1)/2, omega(u) = (u^2-1)/8
        u8 = u.numerator * pow(u.denominator, -1, 8) % 8
        w8 = w.numerator * pow(w.denominator, -1, 8) % 8
        eps_u, eps_w = (u8 - 1) // 2 % 2, (w8 - 1) // 2 % 2
        omg_u, omg_w = (u8 * u8 - 1) // 8 % 2, (w8 * w8 - 1) // 8 % 2
        exponent = eps_u * eps_w + alpha * omg_w + beta * omg_u
        return -1 if exponent % 2 else 1
    sign = 1
    if alpha % 2 and beta % 2 and p % 4 == 3:
        sign = -sign
    if beta % 2 and legendre(u, p) == -1:
        sign = -sign
    if alpha % 2 and legendre(w, p) == -1:
        sign = -sign
    return sign


def relevant_places(a: Rational, b: Rational) -> list[Place]:
    """Places where (a, b)_v can be nontrivial: infinity, 2, and odd primes in a, b."""
    primes: set[int] = {2}
    for x in (Fraction(a), Fraction(b)):
        for n in (abs(x.numerator), x.denominator):
            while n % 2 == 0 and n:
                n //= 2
            d = 3
            while d * d <= n:
                if n % d == 0:
                    primes.add(d)
                    while n % d == 0:
                        n //= d
                else:
                    d += 2
            if n > 2:
                primes.add(n)
    return [INFINITE_PLACE] + sorted(primes)


@dataclass(frozen=True, order=False)
class PadicValue:
    """A value of the normalized valuation nu_p, allowed to be a half-integer.

    The exponent is stored doubled (halves = 2 * nu_p) so that powers like
    p^(-j/2) coming from det^(-j/2) prefactors stay exact.  infinite=True is
    the valuation of 0.
    """

    halves: int = 0
    infinite: bool = False

    @classmethod
    def zero(cls) -> "PadicValue":
        return cls(0, False)

    @classmethod
    def infinity(cls) -> "PadicValue":
        return cls(0, True)

    @classmethod
    def from_integer(cls, e: int) -> "PadicValue":
        return cls(2 * e, False)

    def as_fraction(self) -> Fraction:
        if self.infinite:
            raise ValueError("infinite valuation has no finite value")
        return Fraction(self.halves, 2)

    def __add__(self, other: "PadicValue") -> "PadicValue":
        if self.infinite or other.infinite:
            return PadicValue.infinity()
        return PadicValue(self.halves + other.halves)

    def _key(self) -> tuple[int, int]:
        return (1, 0) if self.infinite else (0, self.halves)

    def __lt__(self, other: "PadicValue") -> bool:
        return self._key() < other._key()

    def __le__(self, other: "PadicValue") -> bool:
        return self._key() <= other._key()

    def __gt__(self, other: "PadicValue") -> bool:
        return self._key() > other._key()

    def __ge__(self, other: "PadicValue") -> bool:
        return self._key() >= other._key()

    def __repr__(self) -> str:
        if self.infinite:
            return "PadicValue(oo)"
        if self.halves % 2 == 0:
            return f"PadicValue({self.halves // 2})"
        return f"PadicValue({self.halves}/2)"


def valuation(x: Rational, p: int) -> PadicValue:
    """nu_p(x) with nu_p(0) = infinity; integer-valued on rationals."""
    _require_odd_prime(p)
    x = Fraction(x)
    if x == 0:
        return PadicValue.infinity()
    e, _ = _split_unit(x, p)
    return PadicValue.from_integer(e)


@dataclass(frozen=True)
class FpMatrix:
    """Rectangular matrix over F_p, entries normalized to [0, p-1]."""

    prime: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        _require_odd_prime(self.prime)
        widths = {len(row) for row in self.entries}
        if len(widths) > 1:
            raise ValueError("ragged matrix")
        for row in self.entries:
            for x in row:
                if not 0 <= x < self.prime:
                    raise ValueError("entry out of range")


def fp_matrix(rows: Iterable[Sequence[Rational]], p: int) -> FpMatrix:
    """Build an FpMatrix from integer/rational rows, reducing mod p."""
    reduced = []
    for row in rows:
        out = []
        for x in row:
            x = Fraction(x)
            if x.denominator % p == 0:
                raise ValueError(f"entry {x} is not p-integral")
            out.append(x.numerator * pow(x.denominator, -1, p) % p)
        reduced.append(tuple(out))
    return FpMatrix(p, tuple(reduced))


def fp_rank(m: FpMatrix) -> int:
    """Rank of m over F_p by Gaussian elimination."""
    p = m.prime
    rows = [list(row) for row in m.entries]
    if not rows or not rows[0]:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank
