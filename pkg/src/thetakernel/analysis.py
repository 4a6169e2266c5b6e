"""Cross-cutting verifications.

Koecher-Maass class averages and their divisibilities, F_p-dimensions of
theta families, parabolic coset indices, the local-invariant identity at an
auxiliary prime, the cusp-uniform series built from special lattices, and
congruence checks between expansions.  Every verdict is exact and stamped
with the bound it was verified at.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence

from . import bqf
from .exactmath import (
    INFINITE_PLACE,
    PadicValue,
    fp_matrix,
    fp_rank,
    is_odd_prime,
    legendre,
    valuation,
)
from .lattice import (
    GramMatrix,
    a_root_lattice,
    det_level,
    direct_sum,
    hasse_witt,
    hasse_witt_all_places,
    p_special_lattice,
    scale_gram,
)
from .qexp import (
    QExpansion,
    constant_series,
    key_diagonal_sum,
    linear_combination,
    nu_p,
    reduce_mod_p,
    slash_cusp,
    theta_expansion,
    truncate,
)


# ---------------------------------------------------------------------------
# Koecher-Maass averages


def km_required_bound(d: int) -> int:
    """Trace bound needed to see every reduced class with det(2T) = d."""
    best = 0
    a = 1
    while 3 * a * a <= d:
        for b in (0, 1):
            if (b * b + d) % (4 * a) == 0:
                c = (b * b + d) // (4 * a)
                if c >= a:
                    best = max(best, a + c)
        a += 1
    return best


def km_average(f: QExpansion, d: int) -> Fraction:
    """Class average a_d(f) = sum over SL2-classes with det(2T) = d of
    a(T)/epsilon_plus(T); degree 1 reads off the single coefficient."""
    if d <= 0:
        raise ValueError("d must be positive")
    if f.denominator != 1:
        raise ValueError("class averages need a denominator-1 expansion")
    if f.prefactor.halves % 2:
        raise ValueError("half-integer prefactor has no rational average")
    if f.prefactor.halves and f.prime is None:
        raise ValueError("prefactor set without a prime")
    scale = Fraction(f.prime) ** (f.prefactor.halves // 2) if f.prefactor.halves else Fraction(1)
    if f.degree == 1:
        if d % 2:
            return Fraction(0)
        if d // 2 > f.bound:
            raise ValueError(f"bound {f.bound} insufficient for d={d}")
        return f.coefficient((d,)) * scale
    if f.degree != 2:
        raise ValueError("class averages are implemented for degree <= 2")
    if (-d) % 4 not in (0, 1):
        return Fraction(0)
    classes = bqf.class_representatives(-d)
    needed = max((cls.a + cls.c for cls in classes), default=0)
    if needed > f.bound:
        raise ValueError(
            f"bound {f.bound} insufficient for d={d} (needs {needed})"
        )
    total = Fraction(0)
    for cls in classes:
        value = f.coefficient((2 * cls.a, cls.b, 2 * cls.c))
        if value:
            total += Fraction(value, bqf.epsilon_plus(cls))
    return total * scale


def x_sum_average(det_2s: int, d: int) -> int:
    """Koecher-Maass coefficient of a doubled-form theta series from the
    matrix-orbit side: the number of SL2-orbits of integer matrices X with
    det(2S) * det(X)^2 = d, enumerated through Hermite normal forms."""
    q, r = divmod(d, det_2s)
    if r:
        return 0
    m = isqrt(q)
    if m * m != q or m == 0:
        return 0
    orbits = []
    for a in range(1, m + 1):
        if m % a:
            continue
        dd = m // a
        for b in range(dd):
            orbits.append(((a, 0), (b, dd)))  # det +m
            orbits.append(((-a, 0), (b, dd)))  # det -m
    return len(orbits)


@dataclass(frozen=True)
class Report:
    claim: str
    parameters: dict
    verdict: str  # "pass" | "fail"
    bound: Optional[int] = None
    witness: Optional[dict] = None
    details: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        doc = {
            "claim": self.claim,
            "parameters": self.parameters,
            "verdict": self.verdict,
            "bound": self.bound,
        }
        if self.witness is not None:
            doc["witness"] = self.witness
        if self.details is not None:
            doc["details"] = self.details
        return doc


def km_divisibility_check(
    coeffs: Sequence,
    thetas: Sequence[QExpansion],
    p: int,
    d_max: int,
    det_series: bool = False,
) -> Report:
    """For f = sum a_i theta_i verify nu_p(a_d(f)) >= 1 for all d <= d_max
    (requires sum a_i = 0 mod p); for det-weighted input verify a_d = 0."""
    combo = linear_combination(coeffs, thetas)
    weight_sum = sum(Fraction(c) for c in coeffs)
    witness = None
    if not det_series and valuation(weight_sum, p) < PadicValue.from_integer(1):
        witness = {"reason": "coefficient sum is a p-unit", "sum": str(weight_sum)}
    if witness is None:
        for d in range(1, d_max + 1):
            a_d = km_average(combo, d)
            if det_series:
                ok = a_d == 0
            else:
                ok = valuation(a_d, p) >= PadicValue.from_integer(1)
            if not ok:
                witness = {"d": d, "a_d": f"{a_d.numerator}/{a_d.denominator}"}
                break
    return Report(
        claim=(
            "class averages of the det-weighted theta vanish identically"
            if det_series
            else "class averages of the combination are divisible by p"
        ),
        parameters={
            "p": p,
            "d_max": d_max,
            "coefficients": [str(Fraction(c)) for c in coeffs],
        },
        verdict="fail" if witness else "pass",
        bound=min(f.bound for f in thetas),
        witness=witness,
    )


# ---------------------------------------------------------------------------
# F_p dimensions


def fp_dimension(
    family: Sequence[QExpansion], p: int, bound: Optional[int] = None
) -> int:
    """Rank over F_p of the coefficient vectors of the family (canonical
    index order), within the stated bound."""
    if not family:
        return 0
    degrees = {f.degree for f in family}
    dens = {f.denominator for f in family}
    if len(degrees) != 1 or dens != {1}:
        raise ValueError("family must share a degree and have denominator 1")
    if bound is not None:
        family = [truncate(f, bound) for f in family]
    if len({f.bound for f in family}) != 1:
        raise ValueError("family must share a common bound")
    reduced = [reduce_mod_p(f, p) for f in family]
    keys = sorted({k for f in reduced for k in f.coeffs})
    keys.sort(key=lambda k: key_diagonal_sum(k, family[0].degree))
    rows = [[int(f.coefficient(k)) for k in keys] for f in reduced]
    if not keys:
        return 0
    return fp_rank(fp_matrix(rows, p))


# ---------------------------------------------------------------------------
# parabolic coset index


def coset_index_d(n: int, j: int, p: int) -> int:
    """Index of the (n-j, j) parabolic in GL(n, F_p):
    prod_{i=1..j} (p^(j+i) - 1)/(p^i - 1); always 1 mod p."""
    if not 0 <= j <= n:
        raise ValueError(f"parabolic index {j} out of range 0..{n}")
    value = Fraction(1)
    for i in range(1, j + 1):
        value *= Fraction(p ** (j + i) - 1, p ** i - 1)
    if value.denominator != 1:
        raise ArithmeticError("coset index is not integral")
    result = value.numerator
    if result % p != 1 % p:
        raise ArithmeticError("coset index is not 1 mod p")
    return result


def parabolic_index_bruteforce(n: int, j: int, p: int) -> int:
    """[GL(n, F_p) : P_{n,j}] by enumerating the full matrix space."""
    if p ** (n * n) > 10 ** 6:
        raise ValueError("matrix space too large for brute force")
    from itertools import product as iproduct

    def invertible(rows) -> bool:
        m = [list(r) for r in rows]
        rank = 0
        for col in range(n):
            piv = next((i for i in range(rank, n) if m[i][col] % p), None)
            if piv is None:
                continue
            m[rank], m[piv] = m[piv], m[rank]
            inv = pow(m[rank][col], -1, p)
            m[rank] = [x * inv % p for x in m[rank]]
            for i in range(n):
                if i != rank and m[i][col] % p:
                    f = m[i][col]
                    m[i] = [(x - f * y) % p for x, y in zip(m[i], m[rank])]
            rank += 1
        return rank == n

    total = 0
    parabolic = 0
    for flat in iproduct(range(p), repeat=n * n):
        rows = tuple(flat[i * n : (i + 1) * n] for i in range(n))
        if not invertible(rows):
            continue
        total += 1
        # lower-left (n-j) x j block must vanish
        if all(rows[i][k] == 0 for i in range(j, n) for k in range(j)):
            parabolic += 1
    return total // parabolic


# ---------------------------------------------------------------------------
# local invariants at an auxiliary prime


def witt_identity_check(s: GramMatrix, p: int, q: int) -> Report:
    """For det(S) = p and L = A_{p-1}, verify that the invariant of q*S + L
    at q equals (-p/q), that the infinite place gives +1, and that the
    product formula pins the invariant at p."""
    det_s, _ = det_level(s)
    if det_s != p:
        raise ValueError(f"need det(S) = {p}, got {det_s}")
    if not is_odd_prime(q) or q == p:
        raise ValueError("auxiliary prime must be odd and different from p")
    n = s.size
    lattice = direct_sum(scale_gram(s, q), a_root_lattice(p).gram)
    target = legendre(-p, q)
    s_q = hasse_witt(lattice, q)
    s_inf = hasse_witt(lattice, INFINITE_PLACE)
    s_p = hasse_witt(lattice, p)
    factorized = (
        hasse_witt(s, q)
        * legendre(-1, q) ** (n * (n - 1) // 2)
        * legendre(p, q) ** (n - 1)
    )
    everywhere = hasse_witt_all_places(lattice)
    product = 1
    for value in everywhere.values():
        product *= value
    ok = (
        s_q == target
        and factorized == target
        and s_inf == 1
        and product == 1
        and (target != -1 or s_p == -1)
    )
    return Report(
        claim="invariant of the q-scaled sum with the root lattice equals (-p/q)",
        parameters={"p": p, "q": q, "rank": n + p - 1},
        verdict="pass" if ok else "fail",
        details={
            "s_q": s_q,
            "s_infinity": s_inf,
            "s_p": s_p,
            "legendre(-p,q)": target,
            "all_places": {str(k): v for k, v in everywhere.items()},
        },
    )


# ---------------------------------------------------------------------------
# the cusp-uniform combination of special-lattice theta series


def erratum_h_series(p: int, n: int, bound: int) -> Report:
    """Build h = sum_j (-1)^j p^((j^2+j)/2) theta^n(L_j) over special lattices
    with det(L_j) = p^(2j+1) and verify: h = 1 mod p; the exact constant-term
    cancellation at each cusp; and nu_p(h at cusp i) >= -i^2/2 + 1 within the
    bound."""
    if p < 2 * n + 3:
        raise ValueError(f"need p >= 2n+3, got p={p}, n={n}")
    lattices = []
    for j in range(n + 1):
        try:
            lattices.append(p_special_lattice(p, 2 * j + 1))
        except ValueError as exc:
            raise ValueError(f"missing lattice witness for t={2 * j + 1}") from exc
    weights = [
        Fraction((-1) ** j * p ** ((j * j + j) // 2)) for j in range(n + 1)
    ]
    thetas = [theta_expansion(cert.gram, n, bound) for cert in lattices]
    h = linear_combination(weights, thetas)
    items: dict[str, bool] = {}
    cong = congruence_check(h, constant_series(n, bound, 1), p)
    items["h_is_1_mod_p"] = cong.passed

    # exact constant-term identity at each cusp: the j = i-1 and j = i terms
    # carry opposite signs and the same half-integer exponent -i^2/2
    exact_ok = True
    for i in range(1, n + 1):
        halves_prev = (i - 1) ** 2 + (i - 1) - i * (2 * i - 1)
        halves_here = i * i + i - i * (2 * i + 1)
        signs_cancel = ((-1) ** (i - 1)) + ((-1) ** i) == 0
        exact_ok = exact_ok and halves_prev == halves_here == -i * i and signs_cancel
    items["constant_term_identity"] = exact_ok

    exponent_table = []
    cusp_valuations = {}
    for i in range(1, n + 1):
        cusp_terms = [
            slash_cusp(cert.gram, n, i, bound) for cert in lattices
        ]
        combined = linear_combination(weights, cusp_terms)
        zero_key = tuple(0 for _ in range(n * (n + 1) // 2))
        items[f"cusp_{i}_constant_term_zero"] = combined.coefficient(zero_key) == 0
        value = nu_p(combined, p)
        needed = PadicValue(-i * i + 2)
        items[f"cusp_{i}_valuation"] = value >= needed
        cusp_valuations[i] = "oo" if value.infinite else f"{value.halves}/2"
        # relative p-exponents of the individual terms above the floor -i^2/2:
        # exactly the pair j = i-1, i sits on the floor, the rest are higher
        offsets = [((j - i) ** 2 + (j - i)) // 2 for j in range(n + 1)]
        exponent_table.append(offsets)
        items[f"cusp_{i}_exponent_pattern"] = (
            min(offsets) == 0
            and offsets.count(0) == 2
            and all(x >= 1 for k, x in enumerate(offsets) if k not in (i - 1, i))
        )
    ok = all(items.values())
    return Report(
        claim="special-lattice combination is 1 mod p with controlled cusp "
        "valuations",
        parameters={"p": p, "degree": n},
        verdict="pass" if ok else "fail",
        bound=bound,
        details={
            "checks": items,
            "cusp_valuations": cusp_valuations,
            "exponent_offsets": exponent_table,
        },
    )


# ---------------------------------------------------------------------------
# congruences


@dataclass(frozen=True)
class CongruenceVerdict:
    passed: bool
    nu_f_halves: Optional[int]
    nu_diff_halves: Optional[int]
    witness: Optional[dict] = None


def congruence_check(
    f: QExpansion, g: QExpansion, p: int, bound: Optional[int] = None
) -> CongruenceVerdict:
    """The normalized congruence f = g mod p: nu_p(f - g) >= 1 + nu_p(f),
    checked coefficientwise within the common bound."""
    if bound is not None:
        f, g = truncate(f, bound), truncate(g, bound)
    common = min(f.bound, g.bound)
    f, g = truncate(f, common), truncate(g, common)
    diff = linear_combination([1, -1], [f, g])
    base = nu_p(f, p)
    diff_val = nu_p(diff, p)
    if base.infinite:
        passed = diff.is_zero()
    else:
        passed = diff_val >= PadicValue(base.halves + 2)
    witness = None
    if not passed:
        threshold = None if base.infinite else PadicValue(base.halves + 2)
        for key, value in diff.canonical_items():
            val = valuation(value, p) + diff.prefactor
            if threshold is None or val < threshold:
                witness = {
                    "index_key": list(key),
                    "difference": f"{value.numerator}/{value.denominator}",
                }
                break
    return CongruenceVerdict(
        passed=passed,
        nu_f_halves=None if base.infinite else base.halves,
        nu_diff_halves=None if diff_val.infinite else diff_val.halves,
        witness=witness,
    )
