"""Even integral lattices: Gram matrices, invariants, and vector enumeration.

Gram matrices are stored exactly as integer matrices; all derived data
(determinants, duals, diagonalizations, short vectors) is computed with
rational arithmetic so that every result is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import isqrt
from typing import Iterable, Sequence

from .exactmath import (
    INFINITE_PLACE,
    Place,
    fp_matrix,
    fp_rank,
    hilbert_symbol,
    is_odd_prime,
)

Vector = tuple[int, ...]
IntMatrix = tuple[tuple[int, ...], ...]
QMatrix = tuple[tuple[Fraction, ...], ...]

AUTOMORPHISM_RANK_GUARD = 12


# ---------------------------------------------------------------------------
# generic exact matrix helpers


def _as_int_matrix(rows: Iterable[Sequence[int]]) -> IntMatrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def _as_q_matrix(rows: Iterable[Sequence]) -> QMatrix:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple:
    cols = list(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a
    )


def mat_vec(a: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a: Sequence[Sequence]) -> tuple:
    return tuple(zip(*a))


def identity_matrix(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def det_exact(rows: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-free Gaussian elimination."""
    m = [[Fraction(x) for x in row] for row in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if m[i][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for i in range(col + 1, n):
            if m[i][col]:
                f = m[i][col] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    return det


def invert_exact(rows: Sequence[Sequence]) -> QMatrix:
    """Exact inverse of a nonsingular matrix over Q."""
    n = len(rows)
    m = [[Fraction(x) for x in row] + [Fraction(i == j) for j in range(n)]
         for i, row in enumerate(rows)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if m[i][col]), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col]:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    return tuple(tuple(row[n:]) for row in m)


def _leading_pivots(rows: Sequence[Sequence]) -> list[Fraction]:
    """Pivots of the LDL-style elimination; all positive iff positive definite."""
    m = [[Fraction(x) for x in row] for row in rows]
    n = len(m)
    pivots = []
    for k in range(n):
        piv = m[k][k]
        pivots.append(piv)
        if piv <= 0:
            break
        for i in range(k + 1, n):
            if m[i][k]:
                f = m[i][k] / piv
                for j in range(k, n):
                    m[i][j] -= f * m[k][j]
    return pivots


def rational_rank(rows: Sequence[Sequence]) -> int:
    m = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for i in range(rank + 1, len(m)):
            if m[i][col]:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class GramMatrix:
    """Even integral positive definite symmetric matrix."""

    entries: IntMatrix

    def __post_init__(self) -> None:
        rows = _as_int_matrix(self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise ValueError("Gram matrix must be square and nonempty")
        for i in range(n):
            if rows[i][i] % 2:
                raise ValueError("diagonal must be even (even integral lattice)")
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise ValueError("Gram matrix must be symmetric")
        pivots = _leading_pivots(rows)
        if len(pivots) < n or any(p <= 0 for p in pivots):
            raise ValueError("Gram matrix must be positive definite")

    @property
    def size(self) -> int:
        return len(self.entries)

    def norm(self, x: Sequence[int]) -> int:
        """S[x] = x^t S x."""
        return sum(xi * si for xi, si in zip(x, mat_vec(self.entries, x)))

    def inner(self, x: Sequence[int], y: Sequence[int]) -> int:
        return sum(xi * si for xi, si in zip(x, mat_vec(self.entries, y)))

    def transform(self, u: Sequence[Sequence[int]]) -> IntMatrix:
        """S[U] = U^t S U."""
        return mat_mul(transpose(u), mat_mul(self.entries, u))


@dataclass(frozen=True)
class HalfIntegralMatrix:
    """Symmetric rational matrix T with integral diagonal and half-integral
    off-diagonal entries, stored through the integer matrix 2T."""

    two_t: IntMatrix

    def __post_init__(self) -> None:
        rows = _as_int_matrix(self.two_t)
        object.__setattr__(self, "two_t", rows)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise ValueError("matrix must be square")
        for i in range(n):
            if rows[i][i] % 2:
                raise ValueError("diagonal of T must be integral")
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise ValueError("matrix must be symmetric")

    @classmethod
    def from_rational(cls, rows: Iterable[Sequence]) -> "HalfIntegralMatrix":
        q = _as_q_matrix(rows)
        doubled = []
        for i, row in enumerate(q):
            out = []
            for j, x in enumerate(row):
                y = 2 * x
                if y.denominator != 1:
                    raise ValueError("entries must be half-integral")
                out.append(y.numerator)
            doubled.append(tuple(out))
        return cls(tuple(doubled))

    @property
    def size(self) -> int:
        return len(self.two_t)

    def matrix(self) -> QMatrix:
        return tuple(tuple(Fraction(x, 2) for x in row) for row in self.two_t)

    def trace(self) -> int:
        return sum(self.two_t[i][i] for i in range(self.size)) // 2

    def det(self) -> Fraction:
        return det_exact(self.matrix())

    def rank(self) -> int:
        return rational_rank(self.two_t)


@dataclass(frozen=True)
class DualGram:
    """Rational Gram matrix of the dual lattice, with the level of the base."""

    base: GramMatrix
    entries: QMatrix
    level: int


@dataclass(frozen=True)
class IsometryCertificate:
    """A Gram matrix together with an order-p isometry without nonzero fixed
    vectors (the witness that the lattice's theta series is 1 mod p)."""

    gram: GramMatrix
    isometry: IntMatrix
    order: int
    fixed_point_free: bool

    def verify(self) -> None:
        u = self.isometry
        if self.gram.transform(u) != self.gram.entries:
            raise ValueError("isometry does not preserve the Gram matrix")
        power = identity_matrix(self.gram.size)
        for _ in range(self.order):
            power = mat_mul(power, u)
        if power != identity_matrix(self.gram.size):
            raise ValueError("isometry does not have the claimed order")
        if u == identity_matrix(self.gram.size):
            raise ValueError("isometry is the identity")
        shifted = tuple(
            tuple(u[i][j] - (i == j) for j in range(self.gram.size))
            for i in range(self.gram.size)
        )
        if det_exact(shifted) == 0:
            if self.fixed_point_free:
                raise ValueError("isometry has a nonzero fixed vector")
        elif not self.fixed_point_free:
            raise ValueError("fixed_point_free flag is wrong")


# ---------------------------------------------------------------------------
# invariants


def det_level(s: GramMatrix) -> tuple[int, int]:
    """Determinant and level (minimal N with N*S^-1 even integral)."""
    det = det_exact(s.entries)
    if det == 0:
        raise ValueError("singular Gram matrix")
    inv = invert_exact(s.entries)
    level = 1
    n = s.size
    for i in range(n):
        for j in range(n):
            entry = inv[i][j] * (Fraction(1, 2) if i == j else 1)
            d = entry.denominator
            level = level * d // _gcd(level, d)
    return int(det), level


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def dual_gram(s: GramMatrix) -> DualGram:
    """Exact dual Gram matrix S^-1 with the recorded level."""
    _, level = det_level(s)
    return DualGram(s, invert_exact(s.entries), level)


def rank_mod_p(s: GramMatrix, p: int) -> int:
    """Rank of S over F_p."""
    return fp_rank(fp_matrix(s.entries, p))


def minors_matrix(t, r: int):
    """Matrix of all r x r minors of t, subsets ordered lexicographically.

    Accepts a HalfIntegralMatrix or any square matrix of rationals; the entry
    at (I, J) is det(t[I, J]).
    """
    rows = t.matrix() if isinstance(t, HalfIntegralMatrix) else _as_q_matrix(t)
    n = len(rows)
    if not 1 <= r <= n:
        raise ValueError(f"minor size {r} out of range for size {n}")
    subsets = list(combinations(range(n), r))
    out = []
    for rows_idx in subsets:
        line = []
        for cols_idx in subsets:
            sub = [[rows[i][j] for j in cols_idx] for i in rows_idx]
            line.append(det_exact(sub))
        out.append(tuple(line))
    return tuple(out)


# ---------------------------------------------------------------------------
# short vectors (exact Fincke-Pohst)


def _floor_sqrt(f: Fraction) -> int:
    if f < 0:
        raise ValueError("negative radicand")
    return isqrt(f.numerator * f.denominator) // f.denominator


def _integer_interval(center: Fraction, radius_sq: Fraction) -> range:
    """All integers x with (x - center)^2 <= radius_sq."""
    if radius_sq < 0:
        return range(0, 0)
    r = _floor_sqrt(radius_sq)
    lo = (center.numerator // center.denominator) - r - 2
    hi = (center.numerator // center.denominator) + r + 2
    while (lo - center) ** 2 > radius_sq:
        lo += 1
        if lo > hi:
            return range(0, 0)
    while (hi - center) ** 2 > radius_sq:
        hi -= 1
    return range(lo, hi + 1)


def _fp_decompose(gram: Sequence[Sequence]) -> list[list[Fraction]]:
    """Rewrite the form as sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2."""
    m = len(gram)
    q = [[Fraction(x) for x in row] for row in gram]
    for i in range(m):
        if q[i][i] <= 0:
            raise ValueError("form is not positive definite")
        for j in range(i + 1, m):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, m):
            for l in range(k, m):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def enumerate_vectors_with_norms(
    gram: Sequence[Sequence], bound: Fraction
) -> list[tuple[Vector, Fraction]]:
    """All x with Q[x] <= bound for a positive definite rational Gram matrix,
    paired with the exact norm, in canonical (norm, vector) order."""
    bound = Fraction(bound)
    m = len(gram)
    if bound < 0:
        return []
    q = _fp_decompose(gram)
    found: list[tuple[Vector, Fraction]] = []
    x = [0] * m

    def recurse(i: int, remaining: Fraction) -> None:
        if i < 0:
            norm = bound - remaining
            found.append((tuple(x), norm))
            return
        center = -sum(q[i][j] * x[j] for j in range(i + 1, m))
        for xi in _integer_interval(center, remaining / q[i][i]):
            x[i] = xi
            recurse(i - 1, remaining - q[i][i] * (xi - center) ** 2)
        x[i] = 0

    recurse(m - 1, bound)
    found.sort()
    found.sort(key=lambda pair: pair[1])
    return found


def enumerate_vectors(s: GramMatrix, bound: int) -> list[Vector]:
    """All x in Z^m with S[x] <= bound, both signs and zero included."""
    return [v for v, _ in enumerate_vectors_with_norms(s.entries, Fraction(bound))]


# ---------------------------------------------------------------------------
# maximality


def _kernel_basis_mod_p(s: GramMatrix, p: int) -> list[Vector]:
    """Basis of the radical of S over F_p."""
    n = s.size
    m = [[x % p for x in row] + [int(i == j) for j in range(n)]
         for i, row in enumerate(s.entries)]
    rank = 0
    for col in range(n):
        pivot = next((i for i in range(rank, n) if m[i][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [x * inv % p for x in m[rank]]
        for i in range(n):
            if i != rank and m[i][col]:
                f = m[i][col]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[rank])]
        rank += 1
    return [tuple(row[n:]) for row in m[rank:]]


def is_p_maximal(s: GramMatrix, p: int) -> bool:
    """Whether no y in (1/p)Z^m \\ Z^m spans an even overlattice with L.

    Candidates y = v/p must pair integrally with L, i.e. v lies in the radical
    of S mod p; y has integral quadratic value iff S[v] = 0 mod 2p^2.
    """
    if not is_odd_prime(p):
        raise ValueError(f"expected an odd prime, got {p}")
    basis = _kernel_basis_mod_p(s, p)
    k = len(basis)
    if k == 0:
        return True
    if p ** k > 10 ** 7:
        raise ValueError("radical too large to enumerate")
    n = s.size
    coeffs = [0] * k
    modulus = 2 * p * p

    def step(idx: int, acc: Vector) -> bool:
        if idx == k:
            if any(acc) and s.norm(acc) % modulus == 0:
                return True
            return False
        for c in range(p):
            nxt = tuple((a + c * b) % p for a, b in zip(acc, basis[idx]))
            if step(idx + 1, nxt):
                return True
        return False

    return not step(0, (0,) * n)


def p_maximal_coset_oracle(s: GramMatrix, p: int) -> bool:
    """Brute-force check of p-maximality over all cosets v in (Z/p)^m."""
    n = s.size
    if p ** n > 10 ** 7:
        raise ValueError("coset space too large for the brute-force oracle")
    modulus = 2 * p * p

    def cosets(idx: int, v: list[int]):
        if idx == n:
            yield tuple(v)
            return
        for c in range(p):
            v[idx] = c
            yield from cosets(idx + 1, v)
        v[idx] = 0

    for v in cosets(0, [0] * n):
        if not any(v):
            continue
        sv = mat_vec(s.entries, v)
        if any(x % p for x in sv):
            continue  # y = v/p would not pair integrally with the lattice
        if s.norm(v) % modulus == 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Hasse-Witt invariant


def _diagonalize_symmetric(rows: Sequence[Sequence]) -> list[Fraction]:
    """Diagonal entries of a symmetric Gram-Schmidt diagonalization over Q."""
    m = [[Fraction(x) for x in row] for row in rows]
    diag: list[Fraction] = []
    while m:
        n = len(m)
        if m[0][0] == 0:
            k = next((i for i in range(n) if m[i][i]), None)
            if k is not None:
                for row in m:
                    row[0], row[k] = row[k], row[0]
                m[0], m[k] = m[k], m[0]
            else:
                pair = next(
                    ((i, j) for i in range(n) for j in range(i + 1, n) if m[i][j]),
                    None,
                )
                if pair is None:
                    raise ValueError("matrix is singular")
                i, j = pair
                for row in m:
                    row[i] += row[j]
                m[i] = [x + y for x, y in zip(m[i], m[j])]
                for row in m:
                    row[0], row[i] = row[i], row[0]
                m[0], m[i] = m[i], m[0]
        d = m[0][0]
        diag.append(d)
        m = [
            [m[i][j] - m[0][i] * m[0][j] / d for j in range(1, n)]
            for i in range(1, n)
        ]
    return diag


def hasse_witt(s, v: Place) -> int:
    """Hasse-Witt invariant at the place v: prod_{i<j} (a_i, a_j)_v over a
    diagonalization diag(a_1, ..., a_m) of the form.

    The product-over-i<j normalization is fixed project-wide; the identity
    s_q(q*S + A_{p-1}) = (-p/q) in analysis.witt_identity_check pins it.
    """
    rows = s.entries if isinstance(s, GramMatrix) else s
    diag = _diagonalize_symmetric(rows)
    result = 1
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            result *= hilbert_symbol(diag[i], diag[j], v)
    return result


def hasse_witt_all_places(s) -> dict[Place, int]:
    """Hasse-Witt invariants at infinity, 2, and all odd primes dividing det."""
    rows = s.entries if isinstance(s, GramMatrix) else s
    det = det_exact(rows)
    places: list[Place] = [INFINITE_PLACE, 2]
    n = abs(det.numerator * det.denominator)
    while n % 2 == 0 and n:
        n //= 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            places.append(d)
            while n % d == 0:
                n //= d
        else:
            d += 2
    if n > 2:
        places.append(n)
    return {v: hasse_witt(rows, v) for v in places}


# ---------------------------------------------------------------------------
# constructions


def scale_gram(s: GramMatrix, c: int) -> GramMatrix:
    if c <= 0:
        raise ValueError("scale factor must be positive")
    return GramMatrix(tuple(tuple(c * x for x in row) for row in s.entries))


def direct_sum(*parts: GramMatrix) -> GramMatrix:
    total = sum(part.size for part in parts)
    rows = [[0] * total for _ in range(total)]
    offset = 0
    for part in parts:
        for i in range(part.size):
            for j in range(part.size):
                rows[offset + i][offset + j] = part.entries[i][j]
        offset += part.size
    return GramMatrix(tuple(tuple(row) for row in rows))


def a_root_lattice(p: int) -> IsometryCertificate:
    """The root lattice A_{p-1} with its order-p cyclic isometry.

    The isometry is the coordinate cycle of the ambient Z^p restricted to the
    sum-zero sublattice, expressed in the basis e_i - e_{i+1}.
    """
    if not is_odd_prime(p):
        raise ValueError(f"expected an odd prime, got {p}")
    n = p - 1
    rows = tuple(
        tuple(2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(n))
        for i in range(n)
    )
    iso = tuple(
        tuple(-1 if j == n - 1 else (1 if i == j + 1 else 0) for j in range(n))
        for i in range(n)
    )
    cert = IsometryCertificate(GramMatrix(rows), iso, p, True)
    cert.verify()
    return cert


class PSpecialConstructionError(ValueError):
    """Raised when the constructed lattice fails its verified contract."""


def _cyclotomic_power_coefficients(p: int, s: int) -> list[int]:
    """Coefficients of (2 - x - x^(p-1))^s modulo x^p - 1."""
    poly = [0] * p
    poly[0] = 1
    base = [0] * p
    base[0] = 2
    base[1] -= 1
    base[p - 1] -= 1
    for _ in range(s):
        nxt = [0] * p
        for i, a in enumerate(poly):
            if a:
                for j, b in enumerate(base):
                    if b:
                        nxt[(i + j) % p] += a * b
        poly = nxt
    return poly


def p_special_lattice(p: int, t: int) -> IsometryCertificate:
    """Even lattice of rank p-1, level p, determinant p^t with a fixed-point-
    free isometry of order p.

    The witness is the ideal (1-zeta)^((t+1)/2) of the p-th cyclotomic field
    with the bilinear form Tr(x * conj(y))/p; multiplication by zeta is the
    isometry.  Only odd t is reachable this way: the norm of any totally
    positive symmetrizing scalar is a rational square, so the p-exponent of
    the determinant of an ideal trace form always has the parity of p-2.
    The full contract is re-verified and failures are reported loudly.
    """
    if not is_odd_prime(p):
        raise ValueError(f"expected an odd prime, got {p}")
    if not 1 <= t <= p - 2:
        raise ValueError(f"determinant exponent {t} out of range 1..{p - 2}")
    if t % 2 == 0:
        raise PSpecialConstructionError(
            f"unsupported t={t}: ideal trace forms only realize odd determinant "
            "exponents"
        )
    s = (t + 1) // 2
    coeffs = _cyclotomic_power_coefficients(p, s)
    n = p - 1
    rows = tuple(tuple(coeffs[(j - i) % p] for j in range(n)) for i in range(n))
    iso = tuple(
        tuple(-1 if j == n - 1 else (1 if i == j + 1 else 0) for j in range(n))
        for i in range(n)
    )
    try:
        gram = GramMatrix(rows)
    except ValueError as exc:
        raise PSpecialConstructionError(f"Gram contract failed: {exc}") from exc
    det, level = det_level(gram)
    if det != p ** t:
        raise PSpecialConstructionError(f"determinant {det} != p^{t}")
    if level != p:
        raise PSpecialConstructionError(f"level {level} != {p}")
    cert = IsometryCertificate(gram, iso, p, True)
    try:
        cert.verify()
    except ValueError as exc:
        raise PSpecialConstructionError(f"isometry contract failed: {exc}") from exc
    return cert


# ---------------------------------------------------------------------------
# automorphisms


@dataclass(frozen=True)
class AutomorphismGroup:
    """Complete automorphism group Aut(S) = {U : S[U] = S} of a small lattice."""

    elements: tuple[IntMatrix, ...]
    order: int
    proper_order: int
    has_improper: bool


def automorphisms(s: GramMatrix) -> AutomorphismGroup:
    """Enumerate Aut(S) by matching columns to vectors of the right norms."""
    n = s.size
    if n > AUTOMORPHISM_RANK_GUARD:
        raise ValueError(f"rank {n} exceeds the automorphism search guard")
    max_norm = max(s.entries[i][i] for i in range(n))
    by_norm: dict[int, list[Vector]] = {}
    for v, norm in enumerate_vectors_with_norms(s.entries, Fraction(max_norm)):
        by_norm.setdefault(int(norm), []).append(v)
    columns: list[Vector] = []
    found: list[IntMatrix] = []

    def extend(k: int) -> None:
        if k == n:
            found.append(transpose(tuple(columns)))  # stacked columns -> matrix
            return
        for cand in by_norm.get(s.entries[k][k], ()):
            if all(
                s.inner(columns[j], cand) == s.entries[j][k] for j in range(k)
            ):
                columns.append(cand)
                extend(k + 1)
                columns.pop()

    extend(0)
    elements = tuple(found)
    proper = sum(1 for u in elements if det_exact(u) == 1)
    return AutomorphismGroup(
        elements=elements,
        order=len(elements),
        proper_order=proper,
        has_improper=proper < len(elements),
    )


# ---------------------------------------------------------------------------
# serialization


def gram_to_json(s: GramMatrix) -> dict:
    return {"size": s.size, "entries": [list(row) for row in s.entries]}


def gram_from_json(doc: dict) -> GramMatrix:
    entries = doc["entries"]
    if len(entries) != doc.get("size", len(entries)):
        raise ValueError("size field does not match the entry matrix")
    return GramMatrix(tuple(tuple(int(x) for x in row) for row in entries))
