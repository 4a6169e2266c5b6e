"""Named verification suites driven by the CLI and the acceptance tests.

Each suite is a list of (name, thunk) tasks producing Reports; run_tasks
executes them (optionally on a thread pool) with order-stable aggregation.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from . import analysis, bqf, qexp, thetaop
from .analysis import Report
from .exactmath import is_odd_prime, legendre
from .lattice import (
    GramMatrix,
    a_root_lattice,
    direct_sum,
    is_p_maximal,
    p_maximal_coset_oracle,
    p_special_lattice,
    scale_gram,
)

Task = tuple[str, Callable[[], Report]]


@dataclass(frozen=True)
class TimedReport:
    name: str
    report: Report
    elapsed_ms: int


def run_tasks(tasks: Sequence[Task], threads: int = 1) -> list[TimedReport]:
    def run_one(task: Task) -> TimedReport:
        name, thunk = task
        start = time.monotonic()
        report = thunk()
        return TimedReport(name, report, int((time.monotonic() - start) * 1000))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run_one, tasks))
    return [run_one(task) for task in tasks]


def _bool_report(claim: str, params: dict, ok: bool, bound=None, witness=None,
                 details=None) -> Report:
    return Report(
        claim=claim,
        parameters=params,
        verdict="pass" if ok else "fail",
        bound=bound,
        witness=witness,
        details=details,
    )


# ---------------------------------------------------------------------------
# kernel suite


def kernel_tasks(p: int, bound: int) -> list[Task]:
    """Kernel certificates for every class of discriminant -p, the witness
    coefficient at the class index, and the dilated series."""
    tasks: list[Task] = []
    classes = bqf.class_representatives(-p)

    def make_theta_task(cls):
        def thunk() -> Report:
            f = qexp.theta_expansion(cls.even_gram(), 2, bound)
            pass2 = thetaop.kernel_check(f, 2, p)
            fail1 = thetaop.kernel_check(f, 1, p)
            # the coefficient at the index S itself sits at trace(S), which
            # can exceed the certificate bound (p = 47, ambiguous class)
            coeff_bound = max(bound, cls.half_matrix().trace())
            leading = thetaop.leading_coefficient_check(
                cls.half_matrix(), 1, p, coeff_bound
            )
            ok = pass2.passed and not fail1.passed and fail1.nonzero_mod_p and leading
            return _bool_report(
                "theta of the doubled form is killed by the rank-2 operator "
                "mod p but not by rank 1",
                {"p": p, "form": list(cls.triple())},
                ok,
                bound=bound,
                witness=fail1.witness,
                details={"rank2": pass2.to_json(), "rank1": fail1.to_json()},
            )

        return thunk

    def make_det_task(cls):
        def thunk() -> Report:
            f = qexp.theta_det_expansion(cls.even_gram(), 2, bound)
            if cls.ambiguous:
                ok = f.is_zero()
                return _bool_report(
                    "det-weighted theta of the ambiguous class vanishes "
                    "identically (improper automorphism)",
                    {"p": p, "form": list(cls.triple())},
                    ok,
                    bound=bound,
                )
            cert = thetaop.kernel_check(f, 2, p)
            return _bool_report(
                "det-weighted theta is killed by the rank-2 operator mod p",
                {"p": p, "form": list(cls.triple())},
                cert.passed,
                bound=bound,
                details=cert.to_json(),
            )

        return thunk

    for cls in classes:
        tasks.append((f"kernel[{p}]{cls.triple()}", make_theta_task(cls)))
        tasks.append((f"kernel-det[{p}]{cls.triple()}", make_det_task(cls)))

    def dilate_thunk() -> Report:
        cls = classes[0]
        f = qexp.theta_expansion(cls.even_gram(), 2, bound)
        dil = qexp.dilate(f, p, bound=bound * p)
        ok = (
            thetaop.kernel_check(dil, 1, p).passed
            and thetaop.kernel_check(dil, 2, p).passed
        )
        return _bool_report(
            "the index-dilated theta series is killed by every operator mod p",
            {"p": p, "form": list(cls.triple())},
            ok,
            bound=bound * p,
        )

    tasks.append((f"kernel-dilate[{p}]", dilate_thunk))
    return tasks


# ---------------------------------------------------------------------------
# dimensions suite


def dimensions_tasks(p: int, bound: int) -> list[Task]:
    """Coefficient table and F_p-dimensions of the theta families mod p."""
    h = bqf.class_number(-p)
    expected_theta = (h + 1) // 2
    expected_det = (h - 1) // 2

    def table_thunk() -> Report:
        reps = bqf.gl_class_representatives(-p)
        thetas = [qexp.theta_expansion(c.even_gram(), 2, bound) for c in reps]
        table = [
            [int(t.coefficient_at(c.half_matrix())) for c in reps] for t in thetas
        ]
        want = [
            [
                (4 if i == 0 else 2) if i == j else 0
                for j in range(len(reps))
            ]
            for i in range(len(reps))
        ]
        return _bool_report(
            "coefficient table at the class indices is diag(4, 2, ..., 2)",
            {"p": p},
            table == want,
            bound=bound,
            details={"table": table},
        )

    def dim_thunk() -> Report:
        classes = bqf.class_representatives(-p)
        fam = [qexp.theta_expansion(c.even_gram(), 2, bound) for c in classes]
        famd = [qexp.theta_det_expansion(c.even_gram(), 2, bound) for c in classes]
        got = analysis.fp_dimension(fam, p)
        gotd = analysis.fp_dimension(famd, p)
        stabilized_at = None
        for small in range(2, bound + 1):
            if (
                analysis.fp_dimension(fam, p, bound=small) == expected_theta
                and analysis.fp_dimension(famd, p, bound=small) == expected_det
            ):
                stabilized_at = small
                break
        ok = got == expected_theta and gotd == expected_det
        return _bool_report(
            "mod-p dimensions of the theta families are (h+1)/2 and (h-1)/2",
            {"p": p, "h": h},
            ok,
            bound=bound,
            details={
                "dim_theta": got,
                "dim_theta_det": gotd,
                "stabilized_at_bound": stabilized_at,
            },
        )

    return [
        (f"table[{p}]", table_thunk),
        (f"dimensions[{p}]", dim_thunk),
    ]


# ---------------------------------------------------------------------------
# Koecher-Maass suite


def _km_combinations(p: int) -> list[tuple[list[int], list[int]]]:
    """Weight vectors over class indices (GL representatives) used by the
    known degree-2 congruences; every weight sum is 0 mod p."""
    if p == 47:
        return [([1, -9, 8], [0, 1, 2]), ([1, -1], [1, 2])]
    return [([1, -1], [0, 1])]


def km_tasks(p: int, d_max: int) -> list[Task]:
    tasks: list[Task] = []
    bound = analysis.km_required_bound(d_max) + 1

    def make_combo(weights, indices):
        def thunk() -> Report:
            reps = bqf.gl_class_representatives(-p)
            thetas = [
                qexp.theta_expansion(reps[i].even_gram(), 2, bound)
                for i in indices
            ]
            return analysis.km_divisibility_check(weights, thetas, p, d_max)

        return thunk

    for weights, indices in _km_combinations(p):
        tasks.append((f"km[{p}]{weights}", make_combo(weights, indices)))

    def det_thunk() -> Report:
        reps = bqf.gl_class_representatives(-p)
        det_series = qexp.theta_det_expansion(reps[1].even_gram(), 2, bound)
        return analysis.km_divisibility_check(
            [1], [det_series], p, d_max, det_series=True
        )

    tasks.append((f"km-det[{p}]", det_thunk))

    def oracle_thunk() -> Report:
        reps = bqf.gl_class_representatives(-p)
        small_bound = analysis.km_required_bound(25 * p) + 1
        failures = []
        for cls in reps:
            f = qexp.theta_expansion(cls.even_gram(), 2, small_bound)
            for m in range(1, 6):
                direct = analysis.km_average(f, p * m * m)
                oracle = analysis.x_sum_average(p, p * m * m)
                if direct != oracle:
                    failures.append({"form": list(cls.triple()), "m": m})
        ok = not failures and analysis.km_average(
            qexp.theta_expansion(reps[0].even_gram(), 2, small_bound), p
        ) == 2
        return _bool_report(
            "class averages match the Hermite-normal-form orbit count",
            {"p": p, "m_max": 5},
            ok,
            bound=small_bound,
            witness={"failures": failures} if failures else None,
        )

    tasks.append((f"km-oracle[{p}]", oracle_thunk))
    return tasks


# ---------------------------------------------------------------------------
# local invariants suite


def witt_tasks(p: int, q_values: Optional[Sequence[int]] = None) -> list[Task]:
    if q_values is None:
        q_values = [q for q in (3, 5, 7) if q != p]
    tasks: list[Task] = []
    form = bqf.gl_class_representatives(-p)[1]

    def make(q):
        def thunk() -> Report:
            return analysis.witt_identity_check(form.even_gram(), p, q)

        return thunk

    for q in q_values:
        tasks.append((f"witt[{p},{q}]", make(q)))

    def search_thunk() -> Report:
        found = next(
            (
                q
                for q in range(3, 50)
                if q != p and is_odd_prime(q) and legendre(-p, q) == -1
            ),
            None,
        )
        return _bool_report(
            "an auxiliary prime q < 50 with (-p/q) = -1 exists",
            {"p": p},
            found is not None,
            details={"q": found},
        )

    tasks.append((f"witt-search[{p}]", search_thunk))
    return tasks


# ---------------------------------------------------------------------------
# erratum suite


def erratum_tasks(p: int, degree: int, bound: int) -> list[Task]:
    return [
        (
            f"erratum[{p},n={degree}]",
            lambda: analysis.erratum_h_series(p, degree, bound),
        )
    ]


# ---------------------------------------------------------------------------
# parabolic index suite


def dj_tasks() -> list[Task]:
    def formula_thunk() -> Report:
        bad = []
        for p in (3, 5, 7, 23):
            for n in range(0, 5):
                for j in range(0, n + 1):
                    if analysis.coset_index_d(n, j, p) % p != 1 % p:
                        bad.append((n, j, p))
        return _bool_report(
            "parabolic coset indices are 1 mod p for all n <= 4",
            {"primes": [3, 5, 7, 23]},
            not bad,
            witness={"failed": bad} if bad else None,
        )

    def brute_thunk() -> Report:
        formula = analysis.coset_index_d(2, 1, 3)
        brute = analysis.parabolic_index_bruteforce(2, 1, 3)
        return _bool_report(
            "formula value matches the brute-force group index for GL(2, F_3)",
            {"n": 2, "j": 1, "p": 3},
            formula == brute == 4,
            details={"formula": formula, "brute_force": brute},
        )

    return [("dj-formula", formula_thunk), ("dj-brute", brute_thunk)]


# ---------------------------------------------------------------------------
# special lattices / maximality suite


def special_tasks() -> list[Task]:
    tasks: list[Task] = []

    def a4_thunk() -> Report:
        theta = qexp.theta_expansion(a_root_lattice(5).gram, 1, 50)
        verdict = analysis.congruence_check(
            theta, qexp.constant_series(1, 50, 1), 5
        )
        return _bool_report(
            "degree-1 theta of the rank-4 root lattice is 1 mod 5",
            {"p": 5, "degree": 1},
            verdict.passed,
            bound=50,
        )

    def a6_thunk() -> Report:
        theta = qexp.theta_expansion(a_root_lattice(7).gram, 2, 8)
        verdict = analysis.congruence_check(
            theta, qexp.constant_series(2, 8, 1), 7
        )
        return _bool_report(
            "degree-2 theta of the rank-6 root lattice is 1 mod 7",
            {"p": 7, "degree": 2},
            verdict.passed,
            bound=8,
        )

    tasks.append(("special-a4", a4_thunk))
    tasks.append(("special-a6", a6_thunk))

    def make_witness(p, t):
        def thunk() -> Report:
            cert = p_special_lattice(p, t)
            theta = qexp.theta_expansion(cert.gram, 1, 12)
            verdict = analysis.congruence_check(
                theta, qexp.constant_series(1, 12, 1), p
            )
            return _bool_report(
                "special lattice witness verifies its contract and its theta "
                "series is 1 mod p",
                {"p": p, "det_exponent": t},
                verdict.passed,
                bound=12,
            )

        return thunk

    for (p, t) in ((5, 1), (5, 3), (7, 1), (7, 5)):
        tasks.append((f"special-witness[{p},{t}]", make_witness(p, t)))

    def maximality_thunk() -> Report:
        failures = []
        for p in (23, 31, 47):
            for cls in bqf.class_representatives(-p):
                gram = cls.even_gram()
                if not is_p_maximal(gram, p):
                    failures.append({"p": p, "form": list(cls.triple())})
                if p_maximal_coset_oracle(gram, p) != is_p_maximal(gram, p):
                    failures.append(
                        {"p": p, "form": list(cls.triple()), "oracle": "disagrees"}
                    )
        scaled = scale_gram(GramMatrix(((2, 1), (1, 2))), 3)
        if is_p_maximal(scaled, 3) or p_maximal_coset_oracle(scaled, 3):
            failures.append({"p": 3, "form": "3*A2"})
        s11 = bqf.gl_class_representatives(-11)[0].even_gram()
        rank12 = direct_sum(s11, a_root_lattice(11).gram)
        if not is_p_maximal(rank12, 11):
            failures.append({"p": 11, "form": "2*S_11_0 + A_10"})
        return _bool_report(
            "maximality detection agrees with the coset oracle and the known "
            "witnesses",
            {"primes": [23, 31, 47, 3, 11]},
            not failures,
            witness={"failures": failures} if failures else None,
        )

    tasks.append(("special-maximality", maximality_thunk))
    return tasks
