"""Acceptance criteria, runnable from ``pfext corpus run`` and the test suite.

Every criterion returns a :class:`CriterionResult` with a one line detail
string. Reference values come from independent oracles: adaptive
quadrature for contour integrals and for Abel's formula, indicial
exponents, and the classical monodromy of the hypergeometric equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .continuation import PathPolyline, companion_system, transfer
from .errors import NumericalFailure
from .extension import (
    NONTRIVIAL,
    TRIVIAL,
    Cocycle,
    InhomogeneousProblem,
    class_equal,
    cocycle_by_block,
    cocycle_by_continuation,
    cocycle_identity,
    extended_operator,
    is_coboundary,
    relation_word,
    shift_by_coboundary,
)
from .monodromy import (
    admissibility_check,
    generator_loops,
    infinity_path,
    local_consistency_check,
    monodromy_representation,
    relation_check,
)
from .odeops import DifferentialOperator, Polynomial, RationalFunction
from .pipeline import Pipeline, ProblemFile, load_corpus

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.title} ({self.detail})"


class CorpusData:
    """Pipelines for the corpus problems, built on demand and shared."""

    def __init__(self, directory: str | Path | None = None, seed: int = 0):
        self.problems: dict[str, ProblemFile] = {p.name: p for _, p in load_corpus(directory)}
        self.seed = seed
        self._pipes: dict[str, Pipeline] = {}

    def pipeline(self, name: str) -> Pipeline:
        if name not in self._pipes:
            self._pipes[name] = Pipeline(self.problems[name])
        return self._pipes[name]

    def runnable(self) -> list[str]:
        """Problems expected to produce a representation."""
        return [n for n, p in self.problems.items() if p.expect.get("exit_code", 0) == 0]

    def inhomogeneous(self) -> list[str]:
        return [n for n in self.runnable() if self.problems[n].inhomogeneity is not None]


# oracles


def contour_integral(f: Callable[[complex], complex], path: PathPolyline) -> complex:
    """``integral of f dt`` along a polyline by adaptive quadrature per segment."""
    total = 0j
    for a, b in path.segments():
        d = b - a
        re = quad(lambda s: (f(a + s * d) * d).real, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        im = quad(lambda s: (f(a + s * d) * d).imag, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        total += complex(re, im)
    return total


def abel_determinant(op: DifferentialOperator, path: PathPolyline) -> complex:
    """``exp(-integral p_{n-1} / p_n)``, the Wronskian ratio along ``path``."""
    ratio = op.coefficient(op.order - 1) / op.leading
    return complex(np.exp(-contour_integral(ratio, path)))


def random_fuchsian(rng: np.random.Generator, order: int | None = None) -> tuple[DifferentialOperator, list[complex]]:
    """A random Fuchsian operator with one or two finite singular points.

    With ``P = prod (t - s_j)`` the coefficients are ``p_n = P^n`` and
    ``p_i = P^i q_i`` with ``deg q_i <= (k - 1)(n - i)``, which keeps every
    point (infinity included) regular singular.
    """
    n = int(order or rng.integers(1, 4))
    k = int(rng.integers(1, 3))
    points: list[complex] = []
    while len(points) < k:
        s = complex(int(rng.integers(-2, 3)), int(rng.integers(-1, 2)))
        if all(abs(s - p) >= 1 for p in points):
            points.append(s)
    big_p = Polynomial.from_roots(points)
    coeffs = []
    for i in range(n):
        deg = (k - 1) * (n - i)
        q = Polynomial(rng.integers(-4, 5, size=deg + 1) / 4.0 + 0j)
        if q.is_zero():
            q = Polynomial([0.5])
        coeffs.append(RationalFunction(big_p**i * q))
    coeffs.append(RationalFunction(big_p**n))
    return DifferentialOperator(coeffs), points


def random_inhomogeneity(rng: np.random.Generator, avoid: list[complex]) -> RationalFunction:
    """``c (t - z)^a / (t - w)^b`` with ``a, b`` in ``{0, 1}`` away from ``avoid``."""
    taken = list(avoid)

    def fresh() -> complex:
        while True:
            z = complex(rng.integers(-6, 7) / 2, rng.integers(-4, 5) / 2)
            if all(abs(z - p) >= 0.75 for p in taken):
                taken.append(z)
                return z

    c = complex(rng.integers(1, 4), rng.integers(-2, 3)) / 2
    num = Polynomial([c])
    den = Polynomial([1])
    shape = int(rng.integers(0, 4))
    if shape in (1, 3):
        num = num * Polynomial([-fresh(), 1])
    if shape in (2, 3):
        den = den * Polynomial([-fresh(), 1])
    return RationalFunction(num, den)


# criteria


def criterion_1(data: CorpusData) -> CriterionResult:
    title = "log extension a = 2 pi i by both routes, class nontrivial"
    pipe = data.pipeline("log")
    inh, rep = pipe.inhomogeneous, pipe.representation
    cont = cocycle_by_continuation(inh, rep)
    blk = cocycle_by_block(inh, rep).cocycle
    oracle = contour_integral(lambda t: 1 / t, rep.plan.loops[0].path)
    e_cont = abs(cont.vectors[0][0] - oracle)
    e_blk = abs(blk.vectors[0][0] - oracle)
    e_oracle = abs(oracle - TWO_PI_I)
    verdict = is_coboundary(rep, cont).verdict
    ok = e_cont < 1e-9 and e_blk < 1e-9 and e_oracle < 1e-9 and verdict == NONTRIVIAL
    return CriterionResult(
        1, title, ok,
        f"|a_cont - oracle| = {e_cont:.1e}, |a_block - oracle| = {e_blk:.1e}, "
        f"|oracle - 2 pi i| = {e_oracle:.1e}, verdict {verdict}",
    )


def criterion_2(data: CorpusData) -> CriterionResult:
    title = "route agreement on every inhomogeneous corpus problem"
    worst, failures = 0.0, []
    names = data.inhomogeneous()
    for name in names:
        pipe = data.pipeline(name)
        inh, rep = pipe.inhomogeneous, pipe.representation
        cont = cocycle_by_continuation(inh, rep)
        blk = cocycle_by_block(inh, rep).cocycle
        for a, b, ea, eb in zip(cont.vectors, blk.vectors, cont.errors, blk.errors):
            d = float(np.linalg.norm(a - b))
            worst = max(worst, d / max(ea + eb, 1e-300))
            if d > ea + eb:
                failures.append(f"{name}: vectors differ by {d:.1e} > {ea + eb:.1e}")
        eq = class_equal(rep, cont, blk)
        if eq.verdict != TRIVIAL:
            failures.append(f"{name}: class_equal {eq.verdict}")
    ok = bool(names) and not failures
    detail = f"{len(names)} problems, max distance / combined error = {worst:.1e}"
    return CriterionResult(2, title, ok, detail if ok else detail + "; " + "; ".join(failures))


def criterion_3(data: CorpusData) -> CriterionResult:
    title = "Legendre monodromy"
    pipe = data.pipeline("legendre")
    rep, profile = pipe.representation, pipe.profile
    m0, m1 = rep.matrix_for(0), rep.matrix_for(1)
    eye = np.eye(2)
    tr0 = abs(np.trace(m0) - 2)
    tr1 = abs(np.trace(m1) - 2)
    sq0 = float(np.linalg.norm((m0 - eye) @ (m0 - eye), 2))
    sq1 = float(np.linalg.norm((m1 - eye) @ (m1 - eye), 2))
    product = rep.product_relation_residual()
    direct = relation_check(rep).residual
    # indicial oracle for the exponents, then eigenvalues against exp(2 pi i rho)
    expected = {0j: [0, 0], 1 + 0j: [0, 0], "infinity": [0.5, 0.5]}
    exps_ok = all(
        np.allclose(sorted(np.real(profile.point_at(loc).exponent_multiset)), ref, atol=1e-12)
        and len(profile.point_at(loc).exponent_multiset) == 2
        for loc, ref in expected.items()
    )
    cons = local_consistency_check(rep, profile)
    # classical monodromy of 2F1(1/2, 1/2; 1): conjugate to [[1, 2], [0, 1]], [[1, 0], [-2, 1]]
    tr_word = abs(np.trace(m1 @ m0) + 2)
    ok = (
        tr0 < 1e-7 and tr1 < 1e-7 and sq0 < 1e-7 and sq1 < 1e-7
        and product < 1e-8 and direct < 1e-8 and exps_ok and cons.passed and tr_word < 1e-7
    )
    ev = max(p.eigenvalue_distance for p in cons.points)
    cp = max(p.charpoly_distance for p in cons.points)
    return CriterionResult(
        3, title, ok,
        f"|tr M0 - 2| = {tr0:.1e}, |tr M1 - 2| = {tr1:.1e}, |(M0-I)^2| = {sq0:.1e}, |(M1-I)^2| = {sq1:.1e}, "
        f"relation {product:.1e} (direct loop {direct:.1e}), exponents ok {exps_ok}, "
        f"charpoly distance {cp:.1e}, eigenvalue distance {ev:.1e}, |tr M1 M0 + 2| = {tr_word:.1e}",
    )


def random_instances(count: int = 20, seed: int = 20240601):
    """Seeded ``(problem, representation, pair)`` triples of order <= 3."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        op, points = random_fuchsian(rng)
        g = random_inhomogeneity(rng, points)
        inh = InhomogeneousProblem(op, g, 1)
        plan = generator_loops(inh.working_profile())
        rep = monodromy_representation(op, plan)
        k = len(plan.loops)
        if k >= 2:
            i, j = (int(x) for x in rng.choice(k, size=2, replace=False))
        else:
            i = j = 0
        out.append((inh, rep, (i, j)))
    return out


def criterion_4(data: CorpusData, count: int = 20) -> CriterionResult:
    title = f"cocycle identity on {count} random instances"
    failures = []
    worst_id = worst_rel = 0.0
    orders = []
    for idx, (inh, rep, (i, j)) in enumerate(random_instances(count, data.seed + 20240601)):
        orders.append(inh.operator.order)
        a = cocycle_by_continuation(inh, rep)
        chk = cocycle_identity(inh, rep, a, i, j)
        rw = relation_word(inh, rep, a)
        worst_id = max(worst_id, chk.deviation / chk.error_estimate)
        worst_rel = max(worst_rel, rw.deviation / rw.error_estimate)
        if not chk.deviation < 10 * chk.error_estimate:
            failures.append(f"#{idx} identity {chk.deviation:.1e} vs {chk.error_estimate:.1e}")
        if not rw.deviation < 10 * rw.error_estimate:
            failures.append(f"#{idx} relation {rw.deviation:.1e} vs {rw.error_estimate:.1e}")
    detail = (
        f"orders {sorted(set(orders))}, max identity deviation / error = {worst_id:.1e}, "
        f"max relation deviation / error = {worst_rel:.1e}"
    )
    return CriterionResult(4, title, not failures, detail if not failures else detail + "; " + "; ".join(failures))


def criterion_5(data: CorpusData, count: int = 10) -> CriterionResult:
    title = f"lifting independence for {count} random initial jets"
    rng = np.random.default_rng(data.seed + 5)
    worst, failures = 0.0, []
    for name in ("legendre_rational", "legendre_g1"):
        pipe = data.pipeline(name)
        inh, rep = pipe.inhomogeneous, pipe.representation
        base = cocycle_by_continuation(inh, rep)
        verdict = is_coboundary(rep, base).verdict
        for _ in range(count):
            v = rng.standard_normal(rep.dimension) + 1j * rng.standard_normal(rep.dimension)
            moved = cocycle_by_continuation(inh, rep, v)
            d = moved.distance(shift_by_coboundary(base, v))
            worst = max(worst, d)
            if d >= 1e-8:
                failures.append(f"{name}: distance {d:.1e}")
            new = is_coboundary(rep, moved).verdict
            if new != verdict:
                failures.append(f"{name}: verdict {verdict} -> {new}")
    detail = f"2 problems x {count} jets, max distance {worst:.1e}"
    return CriterionResult(5, title, not failures, detail if not failures else detail + "; " + "; ".join(failures))


def _kernel_residual(rep, diff: np.ndarray) -> float:
    return max(float(np.linalg.norm((m - np.eye(rep.dimension)) @ diff)) for m in rep.matrices)


def criterion_6(data: CorpusData, count: int = 10) -> CriterionResult:
    title = f"triviality oracle on {count} random coboundaries"
    rng = np.random.default_rng(data.seed + 6)
    names = ["legendre_rational", "euler_half_inhomogeneous", "log", "hypergeometric"]
    worst_res = worst_ker = 0.0
    failures = []
    for k in range(count):
        rep = data.pipeline(names[k % len(names)]).representation
        n = rep.dimension
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        vecs = tuple((m - np.eye(n)) @ c for m in rep.matrices)
        a = Cocycle(rep, vecs, tuple(0.0 for _ in vecs), "coboundary")
        res = is_coboundary(rep, a)
        ker = _kernel_residual(rep, res.witness - c) / max(1.0, float(np.linalg.norm(c)))
        worst_res = max(worst_res, res.residual if res.residual == res.residual else math.inf)
        worst_ker = max(worst_ker, ker)
        # a zero cocycle (every M_i = I) reports its norm, which is 0 here
        if res.verdict != TRIVIAL or not res.residual < 1e-10 or not ker < 1e-9:
            failures.append(f"#{k} {res.verdict} residual {res.residual:.1e} kernel {ker:.1e}")
    log = data.pipeline("log")
    log_verdict = is_coboundary(log.representation, cocycle_by_continuation(log.inhomogeneous, log.representation)).verdict
    if log_verdict != NONTRIVIAL:
        failures.append(f"log cocycle {log_verdict}")
    detail = f"max relative residual {worst_res:.1e}, witness off kernel by {worst_ker:.1e}, log cocycle {log_verdict}"
    return CriterionResult(6, title, not failures, detail if not failures else detail + "; " + "; ".join(failures))


def _paths_and_systems(data: CorpusData):
    """Every loop of every runnable corpus problem, with each relevant system."""
    for name in data.runnable():
        pipe = data.pipeline(name)
        rep = pipe.representation
        ops = [pipe.operator]
        if pipe.inhomogeneous is not None and not pipe.inhomogeneous.degenerate:
            ops.append(extended_operator(pipe.inhomogeneous))
        paths = [l.path for l in rep.plan.loops]
        if rep.plan.loops:
            paths.append(infinity_path(rep.plan))
        for op in ops:
            system = companion_system(op)
            for path in paths:
                yield name, op, system, path, rep


def criterion_7(data: CorpusData) -> CriterionResult:
    title = "continuation integrity on all corpus paths"
    worst_rev = worst_half = worst_abel = 0.0
    failures = []
    count = 0
    for name, op, system, path, rep in _paths_and_systems(data):
        count += 1
        cfg = rep.config
        clearance = rep.plan.clearance
        fwd = transfer(system, path, cfg, clearance=clearance)
        back = transfer(system, path.reversed(), cfg, clearance=clearance)
        rev = float(np.linalg.norm(back.matrix @ fwd.matrix - np.eye(system.dimension), 2))
        half = transfer(system, path, replace(cfg, theta=cfg.theta / 2), clearance=clearance)
        diff = float(np.linalg.norm(half.matrix - fwd.matrix, 2))
        abel = abel_determinant(op, path)
        det = complex(np.linalg.det(fwd.matrix))
        abel_err = abs(det - abel) / abs(abel)
        worst_rev = max(worst_rev, rev)
        worst_half = max(worst_half, diff / max(fwd.error_estimate, 1e-300))
        worst_abel = max(worst_abel, abel_err)
        if not rev < 1e-9:
            failures.append(f"{name}: reversal {rev:.1e}")
        if not diff < fwd.error_estimate:
            failures.append(f"{name}: refinement {diff:.1e} vs estimate {fwd.error_estimate:.1e}")
        if not abel_err < 1e-8:
            failures.append(f"{name}: Abel {abel_err:.1e}")
    detail = (
        f"{count} paths, max |T_rev T - I| = {worst_rev:.1e}, max refinement change / estimate = {worst_half:.1e}, "
        f"max Wronskian error = {worst_abel:.1e}"
    )
    return CriterionResult(7, title, not failures, detail if not failures else detail + "; " + "; ".join(failures[:5]))


def criterion_8(data: CorpusData) -> CriterionResult:
    title = "admissibility: Legendre passes, Euler 1/2 fails unipotency"
    leg = data.pipeline("legendre")
    adm = admissibility_check(leg.representation, [0j, 1 + 0j], seed=data.seed)
    eul = data.pipeline("euler_half")
    bad = admissibility_check(eul.representation, [0j], seed=data.seed)
    ok = adm.unipotent_ok and adm.irreducible is True and adm.irreducibility_heuristic and not bad.unipotent_ok
    devs = ", ".join(f"{k}: {v['deviation']:.1e}" for k, v in adm.unipotent.items())
    return CriterionResult(
        8, title, ok,
        f"Legendre unipotent deviations {devs}, irreducible {adm.irreducible} (heuristic flag {adm.irreducibility_heuristic}, "
        f"algebra dimension {adm.algebra_dimension}); Euler 1/2 unipotent {bad.unipotent_ok}",
    )


CRITERIA: tuple[Callable[[CorpusData], CriterionResult], ...] = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
)


def run_criterion(number: int, data: CorpusData) -> CriterionResult:
    fn = CRITERIA[number - 1]
    try:
        return fn(data)
    except NumericalFailure as exc:
        return CriterionResult(number, fn.__name__, False, f"{type(exc).__name__}: {exc}")


def run_all(directory: str | Path | None = None, seed: int = 0) -> list[CriterionResult]:
    data = CorpusData(directory, seed)
    return [run_criterion(k, data) for k in range(1, len(CRITERIA) + 1)]
