"""Coefficientwise theta operators and mod-p kernel certificates.

The rank-r operator maps a coefficient a(T) to the matrix of all r x r
minors of T times a(T); for r = n it multiplies by det(T).  All checks are
congruences on the stored coefficients within the expansion's bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exactmath import PadicValue, valuation
from .lattice import (
    HalfIntegralMatrix,
    automorphisms,
    minors_matrix,
    rational_rank,
)
from .qexp import (
    QExpansion,
    key_for_index,
    nu_p,
    rows_from_key,
    theta_expansion,
)


@dataclass(frozen=True)
class VectorValuedExpansion:
    """Coefficient map of a minor-weighted series: each index T carries the
    matrix T^[r] * a(T) of size C(n,r) x C(n,r)."""

    degree: int
    minor_size: int
    bound: int
    prefactor: PadicValue
    coeffs: dict

    def coefficient(self, key) -> tuple:
        return self.coeffs[key]


def theta_operator(f: QExpansion, r: int) -> VectorValuedExpansion:
    """Apply the rank-r operator coefficientwise: a(T) -> T^[r] a(T)."""
    if not 1 <= r <= f.degree:
        raise ValueError(f"operator rank {r} out of range 1..{f.degree}")
    if f.denominator != 1:
        raise ValueError("theta operators act on denominator-1 expansions")
    out = {}
    for key, value in f.coeffs.items():
        t_rows = f.index_matrix(key)
        minors = minors_matrix(t_rows, r)
        out[key] = tuple(tuple(value * m for m in row) for row in minors)
    return VectorValuedExpansion(
        degree=f.degree,
        minor_size=r,
        bound=f.bound,
        prefactor=f.prefactor,
        coeffs=out,
    )


@dataclass(frozen=True)
class KernelCertificate:
    """Verification record for 'Theta^[r](f) = 0 mod p within the bound'."""

    r: int
    p: int
    bound: int
    verdict: str  # "pass" | "fail"
    nonzero_mod_p: bool
    witness: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "p": self.p,
            "bound": self.bound,
            "verdict": self.verdict,
            "witness": self.witness,
            "nonzero_mod_p": self.nonzero_mod_p,
        }


def _canonical_keys(f: QExpansion):
    return [key for key, _ in f.canonical_items()]


def kernel_check(f: QExpansion, r: int, p: int, bound: Optional[int] = None) -> KernelCertificate:
    """PASS iff f is nonzero mod p and every entry of every coefficient of
    Theta^[r](f) has valuation >= 1 + nu_p(f), both within the bound.

    FAIL is a result, not an error; the certificate carries the first
    offending index and entry in canonical order.
    """
    from .qexp import truncate

    if bound is not None and bound < f.bound:
        f = truncate(f, bound)
    check_bound = f.bound if bound is None else bound
    base = nu_p(f, p)
    threshold = PadicValue(base.halves + 2) if not base.infinite else None
    nonzero = (not base.infinite) and _has_unit_content(f, p, base)
    witness = None
    for key in _canonical_keys(f):
        value = f.coeffs[key]
        t_rows = f.index_matrix(key)
        minors = minors_matrix(t_rows, r)
        for i, row in enumerate(minors):
            for j, m in enumerate(row):
                entry = value * m
                if entry == 0:
                    continue
                val = valuation(entry, p) + f.prefactor
                if threshold is None or val < threshold:
                    witness = {
                        "index_2T": [list(rw) for rw in rows_from_key(key, f.degree)],
                        "entry": [i, j],
                        "value": f"{entry.numerator}/{entry.denominator}",
                        "valuation_halves": val.halves,
                    }
                    break
            if witness:
                break
        if witness:
            break
    verdict = "pass" if (witness is None and nonzero) else "fail"
    return KernelCertificate(
        r=r, p=p, bound=check_bound, verdict=verdict,
        nonzero_mod_p=nonzero, witness=witness,
    )


def _has_unit_content(f: QExpansion, p: int, base: PadicValue) -> bool:
    """Whether some coefficient achieves the minimal valuation exactly, i.e.
    the normalized series is nonzero mod p within the bound."""
    return any(
        valuation(v, p) + f.prefactor == base for v in f.coeffs.values()
    )


def kernel_monotonicity_check(f: QExpansion, r: int, p: int, bound: Optional[int] = None) -> bool:
    """PASS at rank r must imply PASS at every larger rank; returns the
    conjunction of the implied checks."""
    first = kernel_check(f, r, p, bound)
    if not first.passed:
        return True  # nothing to propagate
    return all(
        kernel_check(f, higher, p, bound).passed
        for higher in range(r + 1, f.degree + 1)
    )


@dataclass(frozen=True)
class SingularRankResult:
    status: str  # "singular" | "not_singular" | "zero"
    rank: Optional[int]
    weight_congruent: Optional[bool]


def singular_rank_mod_p(
    f: QExpansion, p: int, bound: Optional[int], weight: int
) -> SingularRankResult:
    """Smallest l such that all coefficients at indices of rank > l vanish
    mod p within the bound while some rank-l coefficient survives, together
    with the weight congruence 2k = l mod (p-1)."""
    from .qexp import reduce_mod_p, truncate

    if bound is not None and bound < f.bound:
        f = truncate(f, bound)
    reduced = reduce_mod_p(f, p)
    if reduced.is_zero():
        return SingularRankResult("zero", None, None)
    max_rank = 0
    for key in reduced.coeffs:
        rank = rational_rank(rows_from_key(key, f.degree))
        max_rank = max(max_rank, rank)
    if max_rank == f.degree:
        return SingularRankResult("not_singular", None, None)
    flag = (2 * weight - max_rank) % (p - 1) == 0
    return SingularRankResult("singular", max_rank, flag)


def leading_coefficient_check(
    s: HalfIntegralMatrix, r: int, p: int, bound: int
) -> bool:
    """For the doubled form 2S, verify that the operator coefficient at the
    index S equals #Aut(S) * S^[r], and that it survives mod p whenever the
    automorphism count is a p-unit and S^[r] is nonzero mod p."""
    from .lattice import GramMatrix

    even = GramMatrix(s.two_t)
    if s.trace() > bound:
        raise ValueError("bound too small to see the coefficient at S")
    f = theta_expansion(even, s.size, bound)
    op = theta_operator(f, r)
    key = key_for_index(s)
    aut = automorphisms(even)
    expected = tuple(
        tuple(aut.order * m for m in row) for row in minors_matrix(s, r)
    )
    got = op.coeffs.get(key)
    if got != expected:
        return False
    if aut.order % p == 0:
        return True  # no nonvanishing conclusion available
    minors = minors_matrix(s, r)
    minor_nonzero = any(
        valuation(m, p) == PadicValue(0) for row in minors for m in row if m != 0
    )
    if not minor_nonzero:
        return True  # S^[r] = 0 mod p: nonvanishing is correctly not drawn
    survives = any(
        valuation(x, p) == PadicValue(0)
        for row in got
        for x in row
        if x != 0
    )
    return survives
