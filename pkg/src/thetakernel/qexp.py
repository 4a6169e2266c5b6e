"""Truncated Fourier expansions of Siegel theta series.

A QExpansion of degree n stores exact rational coefficients on symmetric
index matrices T with tr(T) <= bound.  Keys are the upper triangle of the
integer matrix 2*denominator*T in row-major order; the denominator is 1 for
ordinary series and the level p for expansions at a cusp, where the index
block coming from dual vectors picks up p in the denominator.  Absent keys
are zero within the bound; nothing is asserted beyond the bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .exactmath import PadicValue, is_odd_prime, legendre, valuation
from .lattice import (
    GramMatrix,
    HalfIntegralMatrix,
    det_level,
    enumerate_vectors_with_norms,
    hasse_witt,
    invert_exact,
    mat_vec,
)

Key = tuple[int, ...]


def key_from_rows(rows: Sequence[Sequence[int]]) -> Key:
    n = len(rows)
    return tuple(rows[i][j] for i in range(n) for j in range(i, n))


def rows_from_key(key: Key, n: int) -> tuple[tuple[int, ...], ...]:
    rows = [[0] * n for _ in range(n)]
    pos = 0
    for i in range(n):
        for j in range(i, n):
            rows[i][j] = rows[j][i] = key[pos]
            pos += 1
    return tuple(tuple(row) for row in rows)


def key_diagonal_sum(key: Key, n: int) -> int:
    """Sum of diagonal entries of the stored integer matrix (2*den*tr T)."""
    total = 0
    pos = 0
    for i in range(n):
        total += key[pos]
        pos += n - i
    return total


def key_for_index(t: HalfIntegralMatrix) -> Key:
    """Key of a half-integral index in a denominator-1 expansion."""
    return key_from_rows(t.two_t)


@dataclass(frozen=True)
class QExpansion:
    """Truncated Fourier expansion with exact rational coefficients."""

    degree: int
    bound: int
    denominator: int = 1
    prime: Optional[int] = None
    prefactor: PadicValue = field(default_factory=PadicValue.zero)
    gamma: Optional[tuple] = None
    coeffs: dict = field(default_factory=dict)

    def coefficient(self, key: Key) -> Fraction:
        return self.coeffs.get(key, Fraction(0))

    def coefficient_at(self, t: HalfIntegralMatrix) -> Fraction:
        if self.denominator != 1:
            raise ValueError("half-integral lookup needs denominator 1")
        return self.coefficient(key_for_index(t))

    def is_zero(self) -> bool:
        return not self.coeffs

    def canonical_items(self) -> list[tuple[Key, Fraction]]:
        keys = sorted(self.coeffs)
        keys.sort(key=lambda k: key_diagonal_sum(k, self.degree))
        return [(k, self.coeffs[k]) for k in keys]

    def index_matrix(self, key: Key):
        """The index T as a rational matrix."""
        rows = rows_from_key(key, self.degree)
        d = 2 * self.denominator
        return tuple(tuple(Fraction(x, d) for x in row) for row in rows)


def _clean(coeffs: dict) -> dict:
    return {k: v for k, v in coeffs.items() if v != 0}


def constant_series(
    degree: int, bound: int, value=1, denominator: int = 1
) -> QExpansion:
    n = degree
    zero_key = key_from_rows([[0] * n for _ in range(n)])
    coeffs = {zero_key: Fraction(value)} if value else {}
    return QExpansion(degree, bound, denominator, coeffs=coeffs)


# ---------------------------------------------------------------------------
# theta series


def _norm_buckets(gram_rows, cap: int):
    """Vectors of the (integral) Gram with norm <= cap, with S*v precomputed."""
    out = []
    for v, norm in enumerate_vectors_with_norms(gram_rows, Fraction(cap)):
        out.append((v, int(norm), mat_vec(gram_rows, v)))
    return out


def _det_columns(columns) -> Fraction:
    n = len(columns)
    rows = [[Fraction(columns[j][i]) for j in range(n)] for i in range(n)]
    det = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if rows[i][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        inv = 1 / rows[col][col]
        for i in range(col + 1, n):
            if rows[i][col]:
                f = rows[i][col] * inv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[col])]
    return det


def theta_expansion(s: GramMatrix, degree: int, bound: int) -> QExpansion:
    """Degree-n theta series of S: the coefficient at T counts the integer
    matrices X with S[X] = 2T, complete for tr(T) <= bound."""
    return _theta_like(s, degree, bound, weighted=False)


def theta_det_expansion(s: GramMatrix, degree: int, bound: int) -> QExpansion:
    """Theta series weighted by det(X); requires size(S) = degree."""
    if s.size != degree:
        raise ValueError("det-weighted theta needs size(S) equal to the degree")
    return _theta_like(s, degree, bound, weighted=True)


def _theta_like(s: GramMatrix, degree: int, bound: int, weighted: bool) -> QExpansion:
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if bound < 0:
        raise ValueError("bound must be >= 0")
    cap = 2 * bound
    pool = _norm_buckets(s.entries, cap)
    coeffs: dict[Key, Fraction] = {}
    if degree == 1:
        for v, norm, _ in pool:
            key = (norm,)
            if weighted:
                coeffs[key] = coeffs.get(key, 0) + v[0]
            else:
                coeffs[key] = coeffs.get(key, 0) + 1
    elif degree == 2 and not weighted:
        for v1, n1, w1 in pool:
            rem = cap - n1
            for v2, n2, _ in pool:
                if n2 > rem:
                    break  # pool is sorted by norm
                cross = sum(a * b for a, b in zip(v2, w1))
                key = (n1, cross, n2)
                coeffs[key] = coeffs.get(key, 0) + 1
    elif degree == 2 and s.size == 2:
        for v1, n1, w1 in pool:
            rem = cap - n1
            for v2, n2, _ in pool:
                if n2 > rem:
                    break
                weight = v1[0] * v2[1] - v1[1] * v2[0]
                if not weight:
                    continue
                key = (n1, v2[0] * w1[0] + v2[1] * w1[1], n2)
                coeffs[key] = coeffs.get(key, 0) + weight
    else:
        chosen: list[tuple] = []

        def recurse(k: int, budget: int) -> None:
            if k == degree:
                key_rows = [[0] * degree for _ in range(degree)]
                for i in range(degree):
                    key_rows[i][i] = chosen[i][1]
                    for j in range(i + 1, degree):
                        cross = sum(
                            a * b for a, b in zip(chosen[i][0], chosen[j][2])
                        )
                        key_rows[i][j] = key_rows[j][i] = cross
                key = key_from_rows(key_rows)
                weight = _det_columns([c[0] for c in chosen]) if weighted else 1
                if weight:
                    coeffs[key] = coeffs.get(key, 0) + weight
                return
            for item in pool:
                if item[1] > budget:
                    break
                chosen.append(item)
                recurse(k + 1, budget - item[1])
                chosen.pop()

        recurse(0, cap)
    return QExpansion(
        degree=degree, bound=bound, coeffs=_clean({k: Fraction(v) for k, v in coeffs.items()})
    )


def mixed_theta(
    s: GramMatrix, degree: int, j: int, bound: int, det: bool = False
) -> QExpansion:
    """Theta series summed over tuples with the first n-j columns in the
    lattice and the last j in its dual; the dual block of the index matrix
    acquires denominator p = level(S)."""
    if not 0 <= j <= degree:
        raise ValueError(f"cusp index {j} out of range 0..{degree}")
    if det and s.size != degree:
        raise ValueError("det-weighted theta needs size(S) equal to the degree")
    if j == 0:
        return theta_det_expansion(s, degree, bound) if det else theta_expansion(
            s, degree, bound
        )
    _, level = det_level(s)
    if not is_odd_prime(level):
        raise ValueError(f"level {level} is not an odd prime")
    p = level
    cap = 2 * p * bound  # trace budget in units of the stored matrix 2pT
    inv = invert_exact(s.entries)
    dual_rows = tuple(
        tuple(int(p * x) for x in row) for row in inv
    )  # p*S^-1 is even integral because the level is p
    primal = [
        (v, p * norm, tuple(p * x for x in sv))
        for v, norm, sv in _norm_buckets(s.entries, 2 * bound)
    ]
    dual = [
        (v, norm, sv) for v, norm, sv in _norm_buckets(dual_rows, cap)
    ]
    n = degree
    coeffs: dict[Key, Fraction] = {}
    chosen: list[tuple] = []

    def cross_term(i: int, item_i, k: int, item_k) -> int:
        if (i >= n - j) == (k >= n - j):  # same pool: pair with the Gram image
            return sum(a * b for a, b in zip(item_k[0], item_i[2]))
        # lattice vector against a dual parameter: B(u, S^-1 v) = u.v
        return p * sum(a * b for a, b in zip(item_i[0], item_k[0]))

    def column_vector(i: int, item):
        if i >= n - j:  # dual column: the actual vector is S^-1 * v
            return mat_vec(inv, item[0])
        return item[0]

    def recurse(k: int, budget: int) -> None:
        if k == n:
            key_rows = [[0] * n for _ in range(n)]
            for i in range(n):
                key_rows[i][i] = chosen[i][1]
                for l in range(i + 1, n):
                    c = cross_term(i, chosen[i], l, chosen[l])
                    key_rows[i][l] = key_rows[l][i] = c
            key = key_from_rows(key_rows)
            if det:
                weight = _det_columns(
                    [column_vector(i, chosen[i]) for i in range(n)]
                )
            else:
                weight = 1
            if weight:
                coeffs[key] = coeffs.get(key, 0) + weight
            return
        pool = primal if k < n - j else dual
        for item in pool:
            if item[1] > budget:
                break
            chosen.append(item)
            recurse(k + 1, budget - item[1])
            chosen.pop()

    recurse(0, cap)
    return QExpansion(
        degree=degree,
        bound=bound,
        denominator=p,
        prime=p,
        coeffs=_clean({k: Fraction(v) for k, v in coeffs.items()}),
    )


def _gamma_tag(det: int, p: int, power: int) -> Optional[tuple]:
    """Opaque bookkeeping for the eighth-root-of-unity factor at a cusp; it is
    trivial when det(S) is a square in Q_p and never needed as a value."""
    e, unit = 0, det
    while unit % p == 0:
        unit //= p
        e += 1
    if e % 2 == 0 and legendre(unit, p) == 1:
        return None
    return ("gamma_p", p, e % 2, legendre(unit, p), power % 8)


def slash_cusp(
    s: GramMatrix, degree: int, j: int, bound: int, det: bool = False
) -> QExpansion:
    """Expansion of the theta series at the j-th cusp: the mixed series scaled
    by sign(s_p)^j and the half-integer power det(S)^(-j/2) of p, with the
    unit gamma_p recorded as an opaque tag."""
    base = mixed_theta(s, degree, j, bound, det=det)
    if j == 0:
        return base
    det_s, level = det_level(s)
    p = level
    sign = hasse_witt(s, p) ** j
    # nu_p(det(S)^(-j/2)) in halves: -j * nu_p(det S)
    halves = -j * (valuation(det_s, p).halves // 2)
    coeffs = {k: sign * v for k, v in base.coeffs.items()}
    return QExpansion(
        degree=degree,
        bound=bound,
        denominator=base.denominator,
        prime=p,
        prefactor=PadicValue(halves),
        gamma=_gamma_tag(det_s, p, j),
        coeffs=coeffs,
    )


# ---------------------------------------------------------------------------
# linear algebra on expansions


def _common_shape(series: Sequence[QExpansion]) -> tuple[int, int, Optional[int]]:
    degrees = {f.degree for f in series}
    dens = {f.denominator for f in series}
    if len(degrees) != 1 or len(dens) != 1:
        raise ValueError("series have mismatched degree or denominator")
    primes = {f.prime for f in series if f.prime is not None}
    if len(primes) > 1:
        raise ValueError("series belong to different primes")
    gammas = {f.gamma for f in series}
    if len(gammas) > 1:
        raise ValueError("series carry different cusp unit tags")
    return degrees.pop(), dens.pop(), (primes.pop() if primes else None)


def linear_combination(
    weights: Sequence, series: Sequence[QExpansion]
) -> QExpansion:
    """Pointwise linear combination on the common refinable bound, after
    aligning the p-power prefactors to the smallest exponent."""
    if len(weights) != len(series) or not series:
        raise ValueError("need matching nonempty weights and series")
    degree, den, prime = _common_shape(series)
    bound = min(f.bound for f in series)
    halves = [f.prefactor.halves for f in series]
    base = min(halves)
    if any((h - base) % 2 for h in halves):
        raise ValueError("prefactor exponents differ by a half-integer")
    if any(h != base for h in halves) and prime is None:
        raise ValueError("prefactor alignment needs the prime to be set")
    cap = 2 * den * bound
    out: dict[Key, Fraction] = {}
    for w, f, h in zip(weights, series, halves):
        w = Fraction(w)
        if w == 0:
            continue
        scale = w * Fraction(prime) ** ((h - base) // 2) if h != base else w
        for key, value in f.coeffs.items():
            if key_diagonal_sum(key, degree) > cap:
                continue
            out[key] = out.get(key, Fraction(0)) + scale * value
    return QExpansion(
        degree=degree,
        bound=bound,
        denominator=den,
        prime=prime,
        prefactor=PadicValue(base),
        gamma=series[0].gamma,
        coeffs=_clean(out),
    )


def multiply_degree1(f: QExpansion, g: QExpansion) -> QExpansion:
    """Product of two degree-1 expansions on the common bound."""
    if f.degree != 1 or g.degree != 1 or f.denominator != 1 or g.denominator != 1:
        raise ValueError("multiplication is supported for plain degree-1 series")
    if f.gamma is not None or g.gamma is not None:
        raise ValueError("cannot multiply series with cusp unit tags")
    bound = min(f.bound, g.bound)
    out: dict[Key, Fraction] = {}
    for (a,), va in f.coeffs.items():
        if a > 2 * bound:
            continue
        for (b,), vb in g.coeffs.items():
            if a + b > 2 * bound:
                continue
            key = (a + b,)
            out[key] = out.get(key, Fraction(0)) + va * vb
    prime = f.prime or g.prime
    return QExpansion(
        degree=1,
        bound=bound,
        prime=prime,
        prefactor=f.prefactor + g.prefactor,
        coeffs=_clean(out),
    )


def truncate(f: QExpansion, bound: int) -> QExpansion:
    if bound > f.bound:
        raise ValueError("cannot extend a truncated expansion")
    cap = 2 * f.denominator * bound
    coeffs = {
        k: v for k, v in f.coeffs.items() if key_diagonal_sum(k, f.degree) <= cap
    }
    return QExpansion(
        f.degree, bound, f.denominator, f.prime, f.prefactor, f.gamma, coeffs
    )


def reduce_mod_p(f: QExpansion, p: int) -> QExpansion:
    """Coefficientwise reduction mod p after folding in the p-power prefactor.

    Fails with the offending index if some coefficient is not p-integral.
    """
    if not is_odd_prime(p):
        raise ValueError(f"expected an odd prime, got {p}")
    halves = f.prefactor.halves
    if halves % 2 and f.coeffs:
        raise ValueError("half-integer prefactor cannot be reduced mod p")
    scale = Fraction(p) ** (halves // 2) if halves else Fraction(1)
    out: dict[Key, Fraction] = {}
    for key, value in f.canonical_items():
        effective = value * scale
        if effective.denominator % p == 0:
            raise ValueError(
                f"coefficient at index {key} has negative valuation at {p}"
            )
        residue = (
            effective.numerator * pow(effective.denominator, -1, p) % p
        )
        if residue:
            out[key] = Fraction(residue)
    return QExpansion(
        degree=f.degree,
        bound=f.bound,
        denominator=f.denominator,
        prime=p,
        coeffs=out,
    )


def dilate(f: QExpansion, p: int, bound: Optional[int] = None) -> QExpansion:
    """Substitute Z -> pZ: the coefficient at T is the coefficient of f at
    T/p when that is a valid index, else 0."""
    new_bound = p * f.bound if bound is None else min(bound, p * f.bound)
    cap = 2 * f.denominator * new_bound
    out = {}
    for key, value in f.coeffs.items():
        scaled = tuple(p * x for x in key)
        if key_diagonal_sum(scaled, f.degree) <= cap:
            out[scaled] = value
    return QExpansion(
        degree=f.degree,
        bound=new_bound,
        denominator=f.denominator,
        prime=f.prime,
        prefactor=f.prefactor,
        gamma=f.gamma,
        coeffs=out,
    )


def nu_p(f: QExpansion, p: int) -> PadicValue:
    """Minimum valuation over the stored coefficients plus the prefactor.

    This is a within-bound certificate: coefficients beyond the bound are not
    seen.  The zero-within-bound series gets the infinite valuation.
    """
    if f.is_zero():
        return PadicValue.infinity()
    best = min(valuation(v, p) for v in f.coeffs.values())
    return best + f.prefactor


# ---------------------------------------------------------------------------
# serialization


def _fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _parse_fraction(text) -> Fraction:
    return Fraction(text) if isinstance(text, str) else Fraction(int(text))


def expansion_to_json(f: QExpansion) -> dict:
    coeff_list = []
    for key, value in f.canonical_items():
        rows = rows_from_key(key, f.degree)
        index = []
        for row in rows:
            entries = [Fraction(x, f.denominator) for x in row]
            index.append(
                [e.numerator if e.denominator == 1 else _fraction_str(e) for e in entries]
            )
        coeff_list.append({"index_2T": index, "value": _fraction_str(value)})
    doc = {
        "degree": f.degree,
        "bound": f.bound,
        "denominator": f.denominator,
        "prefactor_halves": f.prefactor.halves,
        "coeffs": coeff_list,
    }
    if f.prime is not None:
        doc["prime"] = f.prime
    if f.gamma is not None:
        doc["gamma_tag"] = list(f.gamma)
    return doc


def expansion_from_json(doc: dict) -> QExpansion:
    degree = int(doc["degree"])
    den = int(doc["denominator"])
    coeffs = {}
    for item in doc["coeffs"]:
        rows = [
            [_parse_fraction(x) * den for x in row] for row in item["index_2T"]
        ]
        int_rows = []
        for row in rows:
            if any(x.denominator != 1 for x in row):
                raise ValueError("index does not match the declared denominator")
            int_rows.append([x.numerator for x in row])
        key = key_from_rows(int_rows)
        coeffs[key] = _parse_fraction(item["value"])
    gamma = tuple(doc["gamma_tag"]) if "gamma_tag" in doc else None
    return QExpansion(
        degree=degree,
        bound=int(doc["bound"]),
        denominator=den,
        prime=doc.get("prime"),
        prefactor=PadicValue(int(doc.get("prefactor_halves", 0))),
        gamma=gamma,
        coeffs=_clean(coeffs),
    )
