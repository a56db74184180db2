"""Problem files, report assembly and the staged analysis behind the CLI.

A problem file is a JSON object::

    {
      "name": "legendre_g1",
      "operator": "t*(1-t)*D^2 + (1-2*t)*D - 1/4",
      "inhomogeneity": "1",
      "base_point": "1/2 + i",
      "twist": 1,
      "overrides": {"theta": 0.3}
    }

Only ``name`` and ``operator`` are required. ``base_point`` may be a number,
an ``[re, im]`` pair, a constant expression or ``"auto"``. Optional keys
``boundary`` (points tested for unipotency), ``initial_jet`` (anchor of the
particular solution) and ``expect`` (corpus bookkeeping) are also accepted.

A report is a JSON object holding the echoed problem and effective
settings, so any report can itself be fed back in as a problem file.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from . import __version__
from .continuation import ContinuationConfig
from .errors import NonFuchsian, NumericalFailure, ParseError, PfextError, RootIsolationFailure
from .extension import (
    CLASS_TOL,
    COCYCLE_CONVENTION,
    INCONCLUSIVE,
    NONTRIVIAL,
    TRIVIAL,
    Cocycle,
    InhomogeneousProblem,
    class_equal,
    cocycle_by_block,
    cocycle_by_continuation,
    is_coboundary,
    relation_word,
    shift_by_coboundary,
)
from .monodromy import (
    MonodromyRepresentation,
    admissibility_check,
    conventions,
    generator_loops,
    local_consistency_check,
    monodromy_representation,
    relation_check,
)
from .odeops import (
    DifferentialOperator,
    RationalFunction,
    SingularityProfile,
    parse_function,
    parse_number,
    parse_operator,
    singularities,
)
from .odeops.singular import INFINITY, is_infinity
from .report import cmatrix, cnum, cvector, finite, from_cmatrix, from_cnum, from_cvector, location

REPORT_FORMAT = "pfext-report/1"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_NON_FUCHSIAN = 3
EXIT_NUMERICAL = 4
EXIT_INCONCLUSIVE = 5

PROBLEM_KEYS = ("name", "operator", "inhomogeneity", "base_point", "twist", "boundary", "initial_jet", "overrides", "expect")
OVERRIDE_KEYS = ("theta", "taylor_order", "precision_target", "clearance", "tol_class", "seed")


# problem files


@dataclass(frozen=True)
class ProblemFile:
    name: str
    operator: str
    inhomogeneity: str | None = None
    base_point: Any = None
    twist: int | None = None
    boundary: tuple | None = None
    initial_jet: tuple | None = None
    overrides: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemFile":
        if not isinstance(data, dict):
            raise ParseError("a problem file must hold a JSON object")
        unknown = sorted(set(data) - set(PROBLEM_KEYS))
        if unknown:
            raise ParseError(f"unknown problem keys: {', '.join(unknown)}")
        for key in ("name", "operator"):
            if not isinstance(data.get(key), str) or not data[key].strip():
                raise ParseError(f"problem key {key!r} must be a non-empty string")
        inhom = data.get("inhomogeneity")
        if inhom is not None and not isinstance(inhom, str):
            raise ParseError("'inhomogeneity' must be a string expression")
        twist = data.get("twist")
        if twist is not None and (isinstance(twist, bool) or not isinstance(twist, int)):
            raise ParseError("'twist' must be an integer")
        overrides = data.get("overrides") or {}
        if not isinstance(overrides, dict):
            raise ParseError("'overrides' must be an object")
        bad = sorted(set(overrides) - set(OVERRIDE_KEYS))
        if bad:
            raise ParseError(f"unknown override keys: {', '.join(bad)}")
        boundary = data.get("boundary")
        jet = data.get("initial_jet")
        return cls(
            name=data["name"],
            operator=data["operator"],
            inhomogeneity=inhom,
            base_point=data.get("base_point"),
            twist=twist,
            boundary=None if boundary is None else tuple(boundary),
            initial_jet=None if jet is None else tuple(jet),
            overrides=dict(overrides),
            expect=dict(data.get("expect") or {}),
        )

    def as_dict(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "operator": self.operator}
        if self.inhomogeneity is not None:
            out["inhomogeneity"] = self.inhomogeneity
        if self.base_point is not None:
            out["base_point"] = self.base_point
        if self.twist is not None:
            out["twist"] = self.twist
        if self.boundary is not None:
            out["boundary"] = list(self.boundary)
        if self.initial_jet is not None:
            out["initial_jet"] = list(self.initial_jet)
        if self.overrides:
            out["overrides"] = dict(self.overrides)
        if self.expect:
            out["expect"] = dict(self.expect)
        return out


def problem_from_json(data: dict) -> ProblemFile:
    """Accept a problem object or a report (whose echo is used)."""
    if isinstance(data, dict) and data.get("format") == REPORT_FORMAT:
        echo = dict(data["problem"])
        settings = data.get("settings") or {}
        defaults = Settings().as_dict()
        overrides = {k: settings[k] for k in OVERRIDE_KEYS if settings.get(k) is not None and settings[k] != defaults[k]}
        echo.pop("overrides", None)
        if overrides:
            echo["overrides"] = overrides
        return ProblemFile.from_dict(echo)
    return ProblemFile.from_dict(data)


def load_problem(path: str | Path) -> ProblemFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return problem_from_json(data)


def corpus_dir() -> Path:
    return Path(str(resources.files("pfext") / "corpus"))


def load_corpus(directory: str | Path | None = None) -> list[tuple[Path, ProblemFile]]:
    root = Path(directory) if directory is not None else corpus_dir()
    return [(p, load_problem(p)) for p in sorted(root.glob("*.json"))]


# settings


@dataclass(frozen=True)
class Settings:
    theta: float = 0.4
    taylor_order: int = 64
    precision_target: float = 1e-16
    clearance: float | None = None
    tol_class: float = CLASS_TOL
    seed: int = 0

    def updated(self, values: dict) -> "Settings":
        clean = {k: v for k, v in values.items() if v is not None}
        try:
            out = replace(self, **clean)
        except TypeError as exc:
            raise ParseError(str(exc)) from None
        out.validate()
        return out

    def validate(self) -> None:
        if not 0 < self.theta < 1:
            raise ParseError("theta must lie in (0, 1)")
        if int(self.taylor_order) != self.taylor_order or self.taylor_order < 4:
            raise ParseError("taylor order must be an integer >= 4")
        if not self.precision_target > 0:
            raise ParseError("precision target must be positive")
        if self.clearance is not None and not self.clearance > 0:
            raise ParseError("clearance must be positive")
        if not self.tol_class > 0:
            raise ParseError("class tolerance must be positive")

    def continuation(self) -> ContinuationConfig:
        order = int(self.taylor_order)
        return ContinuationConfig(
            theta=float(self.theta),
            order_start=min(24, order),
            order_max=order,
            tail_tol=float(self.precision_target),
            clearance=self.clearance,
        )

    def as_dict(self) -> dict:
        return {
            "theta": self.theta,
            "taylor_order": self.taylor_order,
            "precision_target": self.precision_target,
            "clearance": self.clearance,
            "tol_class": self.tol_class,
            "seed": self.seed,
        }


def effective_settings(problem: ProblemFile, flags: dict | None = None) -> Settings:
    """Defaults, then the file's overrides, then command line flags."""
    return Settings().updated(problem.overrides).updated(flags or {})


# pipeline


def _parse_point(value: Any) -> complex | None:
    if value is None or (isinstance(value, str) and value.strip().lower() == "auto"):
        return None
    if isinstance(value, bool):
        raise ParseError("base point must be a number, a [re, im] pair or an expression")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    if isinstance(value, str):
        return parse_number(value)
    raise ParseError(f"cannot read a point from {value!r}")


def _parse_location(value: Any) -> complex | str:
    if isinstance(value, str) and value.strip().lower() in ("infinity", "inf", "oo"):
        return INFINITY
    z = _parse_point(value)
    if z is None:
        raise ParseError(f"cannot read a point from {value!r}")
    return z


def _point_dict(p) -> dict:
    return {
        "location": location(p.location),
        "kind": p.kind,
        "regular": p.is_regular,
        "root_multiplicity": p.root_multiplicity,
        "exponents": cvector(p.exponents),
        "exponent_multiplicities": list(p.exponent_multiplicities),
    }


def _class_dict(res) -> dict:
    return {
        "verdict": res.verdict,
        "relative_residual": finite(res.residual),
        "witness": cvector(res.witness),
        "tolerance": res.tolerance,
    }


def _cocycle_dict(a: Cocycle) -> dict:
    return {"route": a.route.split("+")[0], "vectors": [cvector(v) for v in a.vectors], "errors": list(a.errors)}


class Pipeline:
    """Lazily evaluated stages for one problem; each stage reuses the earlier ones."""

    def __init__(self, problem: ProblemFile, settings: Settings | None = None):
        self.problem = problem
        self.settings = settings or effective_settings(problem)
        self.config = self.settings.continuation()

    @cached_property
    def operator(self) -> DifferentialOperator:
        op = parse_operator(self.problem.operator)
        if op.order < 1:
            raise ParseError("operator order must be at least 1")
        return op

    @cached_property
    def g(self) -> RationalFunction | None:
        if self.problem.inhomogeneity is None:
            return None
        return parse_function(self.problem.inhomogeneity)

    @cached_property
    def base_point(self) -> complex | None:
        return _parse_point(self.problem.base_point)

    @cached_property
    def initial_jet(self) -> np.ndarray | None:
        if self.problem.initial_jet is None:
            return None
        jet = np.array([_parse_location_number(v) for v in self.problem.initial_jet], dtype=complex)
        if len(jet) != self.operator.order:
            raise ParseError(f"initial jet needs {self.operator.order} entries, got {len(jet)}")
        return jet

    @cached_property
    def profile(self) -> SingularityProfile:
        return singularities(self.operator)

    @cached_property
    def inhomogeneous(self) -> InhomogeneousProblem | None:
        if self.g is None:
            return None
        return InhomogeneousProblem(self.operator, self.g, self.problem.twist)

    @cached_property
    def working_profile(self) -> SingularityProfile:
        if self.inhomogeneous is None:
            return self.profile
        return self.inhomogeneous.working_profile()

    @cached_property
    def representation(self) -> MonodromyRepresentation:
        if not self.profile.fuchsian:
            raise NonFuchsian("operator is not Fuchsian: " + self._irregular_text())
        plan = generator_loops(self.working_profile, self.base_point, self.settings.clearance)
        return monodromy_representation(self.operator, plan, self.config, check_fuchsian=False)

    def parse(self) -> None:
        """Parse every expression so that syntax errors surface first."""
        self.operator, self.g, self.base_point, self.initial_jet  # noqa: B018
        for b in self.problem.boundary or ():
            _parse_location(b)

    def _irregular_text(self) -> str:
        bad = [p.location for p in self.profile.points if not p.is_regular]
        return "irregular at " + ", ".join(str(b) if is_infinity(b) else f"t = {b:.6g}" for b in bad)

    # report sections

    def cmd_analyze(self) -> dict:
        profile = self.profile
        section: dict[str, Any] = {
            "status": "ok",
            "operator": self.problem.operator,
            "normalized": str(profile.operator),
            "order": profile.operator.order,
            "fuchsian": profile.fuchsian,
            "separation": finite(profile.separation),
            "points": [_point_dict(p) for p in profile.points],
        }
        if not profile.fuchsian:
            section["diagnostic"] = self._irregular_text()
        if self.g is not None:
            inh = self.inhomogeneous
            section["inhomogeneity"] = {
                "expression": self.problem.inhomogeneity,
                "canonical": str(self.g),
                "degenerate": inh.degenerate,
                "zeros": [cnum(z) for z, _ in self.g.zeros()] if not inh.degenerate else [],
                "poles": [cnum(z) for z, _ in self.g.poles()],
                "punctures": [cnum(p.location) for p in self.working_profile.finite_points if p.kind == "puncture"],
            }
        return section

    def boundary(self) -> list:
        if self.problem.boundary is not None:
            return [_parse_location(b) for b in self.problem.boundary]
        return [p.location for p in self.profile.finite_points if p.kind == "singular"]

    def cmd_monodromy(self) -> dict:
        rep = self.representation
        plan = rep.plan
        section: dict[str, Any] = {
            "status": "ok",
            "conventions": conventions(),
            "config": self.config.as_dict(),
            "trivial": not plan.loops,
            "plan": plan.as_dict(),
            "generators": [
                {
                    "point": cnum(l.point),
                    "kind": self.working_profile.point_at(l.point).kind,
                    "matrix": cmatrix(m),
                    "error_estimate": e,
                    "trace": cnum(np.trace(m)),
                }
                for l, m, e in zip(plan.loops, rep.matrices, rep.errors)
            ],
            "infinity": {"matrix": cmatrix(rep.infinity), "definition": "inverse of M_k ... M_1"},
            "product_relation_residual": rep.product_relation_residual(),
        }
        if plan.loops:
            section["relation_check"] = self._relation_section(rep)
        cons = local_consistency_check(rep, self.working_profile)
        section["local_consistency"] = {
            "tolerance": cons.tolerance,
            "passed": cons.passed,
            "points": [
                {
                    "location": location(p.location),
                    "exponents": cvector(p.exponents),
                    "expected_eigenvalues": cvector(p.expected),
                    "eigenvalues": cvector(p.eigenvalues),
                    "eigenvalue_distance": finite(p.eigenvalue_distance),
                    "charpoly_distance": finite(p.charpoly_distance),
                    "determinant_distance": finite(p.determinant_distance),
                    "passed": p.passed,
                }
                for p in cons.points
            ],
        }
        adm = admissibility_check(rep, self.boundary(), seed=self.settings.seed)
        section["admissibility"] = {
            "boundary": [location(b) for b in self.boundary()],
            "unipotent": adm.unipotent,
            "unipotent_ok": adm.unipotent_ok,
            "irreducible": adm.irreducible,
            "irreducibility_heuristic": adm.irreducibility_heuristic,
            "algebra_dimension": adm.algebra_dimension,
            "common_invariant_line": adm.common_invariant_line,
            "tolerance": adm.tolerance,
            "seed": self.settings.seed,
            "passed": adm.passed,
        }
        return section

    def _relation_section(self, rep: MonodromyRepresentation) -> dict:
        try:
            rc = relation_check(rep)
        except NumericalFailure as exc:
            return {"status": "error", "error": type(exc).__name__, "message": str(exc)}
        return {
            "status": "ok",
            "direct_big_loop": cmatrix(rc.direct),
            "direct_residual": rc.residual,
            "error_estimate": rc.error_estimate,
            "infinity_eigenvalues": cvector(rc.infinity_eigenvalues),
            "pulled_back_eigenvalues": cvector(rc.pulled_back_eigenvalues),
            "eigenvalue_distance": finite(rc.eigenvalue_distance),
        }

    def cmd_extension(self) -> dict:
        inh = self.inhomogeneous
        if inh is None:
            return {"status": "skipped", "reason": "problem has no inhomogeneity"}
        rep = self.representation
        tol = self.settings.tol_class
        jet = self.initial_jet
        cont = cocycle_by_continuation(inh, rep, jet)
        block = cocycle_by_block(inh, rep)
        blk = block.cocycle if jet is None else shift_by_coboundary(block.cocycle, jet)
        cls = is_coboundary(rep, cont, tol)
        blk_cls = is_coboundary(rep, blk, tol)
        eq = class_equal(rep, cont, blk, tol)
        combined = [a + b for a, b in zip(cont.errors, blk.errors)]
        dists = [float(np.linalg.norm(a - b)) for a, b in zip(cont.vectors, blk.vectors)]
        vectors_agree = all(d <= max(c, 1e-300) for d, c in zip(dists, combined))
        section: dict[str, Any] = {
            "status": "ok",
            "twist": inh.twist,
            "degenerate": inh.degenerate,
            "conventions": {"cocycle": COCYCLE_CONVENTION, **conventions()},
            "extended_operator": None if block.extended_operator is None else str(block.extended_operator),
            "initial_jet": cvector(np.zeros(rep.dimension) if jet is None else jet),
            "continuation": _cocycle_dict(cont),
            "block": {
                **_cocycle_dict(blk),
                "blocks": [cmatrix(b) for b in block.blocks],
                "bottom_deviations": list(block.bottom_deviations),
                "diagonal_deviations": list(block.diagonal_deviations),
                "frame_condition": block.frame_condition,
            },
            "class": _class_dict(cls),
            "block_class": _class_dict(blk_cls),
            "route_agreement": {
                "distances": dists,
                "combined_errors": combined,
                "vectors_agree": vectors_agree,
                "class_equal": _class_dict(eq),
                "passed": vectors_agree and eq.verdict == TRIVIAL,
            },
        }
        if rep.plan.loops:
            rw = relation_word(inh, rep, cont)
            section["relation_word"] = {
                "value": cvector(rw.relation_value),
                "deviation": rw.deviation,
                "error_estimate": rw.error_estimate,
            }
        if inh.degenerate:
            section["diagnostic"] = "g is identically zero; the extension is split"
        return section


def _parse_location_number(value: Any) -> complex:
    z = _parse_point(value)
    if z is None:
        raise ParseError(f"cannot read a number from {value!r}")
    return z


# running


@dataclass
class RunResult:
    report: dict
    exit_code: int

    @property
    def name(self) -> str:
        return self.report["problem"]["name"]


STAGES = ("analyze", "monodromy", "extension")


def versions() -> dict:
    return {"pfext": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _error_entry(stage: str, exc: Exception) -> dict:
    return {"stage": stage, "error": type(exc).__name__, "message": str(exc)}


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, NonFuchsian):
        return EXIT_NON_FUCHSIAN
    if isinstance(exc, (NumericalFailure, RootIsolationFailure)):
        return EXIT_NUMERICAL
    if isinstance(exc, (PfextError, ValueError)):
        return EXIT_PARSE
    raise exc


def run(problem: ProblemFile, stage: str = "extension", flags: dict | None = None, timings: bool = False) -> RunResult:
    """Run the stages up to ``stage`` and assemble a report.

    Failures become diagnostics; later stages are skipped with the reason.
    """
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    report: dict[str, Any] = {"format": REPORT_FORMAT, "versions": versions(), "problem": problem.as_dict()}
    diagnostics: list[dict] = []
    clock: dict[str, float] = {}
    try:
        settings = effective_settings(problem, flags)
    except PfextError as exc:
        report["settings"] = None
        report["diagnostics"] = [_error_entry("settings", exc)]
        report["exit_code"] = EXIT_PARSE
        return RunResult(report, EXIT_PARSE)
    report["settings"] = settings.as_dict()
    pipe = Pipeline(problem, settings)
    code = EXIT_OK
    wanted = STAGES[: STAGES.index(stage) + 1]
    steps = [("parse", pipe.parse)] + [(s, getattr(pipe, f"cmd_{s}")) for s in wanted]
    failed: str | None = None
    for name, fn in steps:
        if failed is not None:
            if name != "parse":
                report[_section_name(name)] = {"status": "skipped", "reason": failed}
            continue
        start = time.perf_counter()
        try:
            out = fn()
        except Exception as exc:  # noqa: BLE001 - mapped to exit codes, unexpected ones re-raised
            code = exit_code_for(exc)
            diagnostics.append(_error_entry(name, exc))
            failed = f"{name} failed: {type(exc).__name__}"
            if name != "parse":
                report[_section_name(name)] = {"status": "error", "error": type(exc).__name__, "message": str(exc)}
            continue
        finally:
            clock[name] = time.perf_counter() - start
        if name != "parse":
            report[_section_name(name)] = out
    ext = report.get("extension")
    if code == EXIT_OK and isinstance(ext, dict) and ext.get("status") == "ok":
        verdicts = (ext["class"]["verdict"], ext["route_agreement"]["class_equal"]["verdict"])
        if INCONCLUSIVE in verdicts:
            code = EXIT_INCONCLUSIVE
            diagnostics.append({"stage": "extension", "error": "Inconclusive", "message": "class verdict is inconclusive"})
    report["diagnostics"] = diagnostics
    report["exit_code"] = code
    if timings:
        report["timings"] = clock
    return RunResult(report, code)


def _section_name(stage: str) -> str:
    return {"analyze": "analysis"}.get(stage, stage)


def default_stage(problem: ProblemFile) -> str:
    return "extension" if problem.inhomogeneity is not None else "monodromy"


# comparing reports


@dataclass(frozen=True)
class _StoredRepresentation:
    matrices: tuple[np.ndarray, ...]

    @property
    def dimension(self) -> int:
        return self.matrices[0].shape[0] if self.matrices else 0


def _stored_cocycle(rep: _StoredRepresentation, ext: dict) -> Cocycle:
    part = ext["continuation"]
    return Cocycle(rep, tuple(from_cvector(v) for v in part["vectors"]), tuple(part["errors"]), "stored")


def cmd_compare(report_a: dict, report_b: dict, tol: float = CLASS_TOL) -> dict:
    """Compare the stored continuation cocycles of two extension reports."""
    out: dict[str, Any] = {"format": "pfext-compare/1", "a": _describe(report_a), "b": _describe(report_b)}
    for tag, rep in (("a", report_a), ("b", report_b)):
        ext = rep.get("extension") if isinstance(rep, dict) else None
        if not isinstance(ext, dict) or ext.get("status") != "ok":
            out.update(verdict="not comparable", reason=f"report {tag} has no extension data")
            return out
    ana_a, ana_b = report_a["analysis"], report_b["analysis"]
    mon_a, mon_b = report_a["monodromy"], report_b["monodromy"]
    if ana_a["normalized"] != ana_b["normalized"]:
        out.update(verdict="not comparable", reason="different operators")
        return out
    base_a = from_cnum(mon_a["plan"]["base_point"])
    base_b = from_cnum(mon_b["plan"]["base_point"])
    if abs(base_a - base_b) > 1e-12 * max(1.0, abs(base_a)):
        out.update(verdict="not comparable", reason="different base points")
        return out
    pts_a = [from_cnum(g["point"]) for g in mon_a["generators"]]
    pts_b = [from_cnum(g["point"]) for g in mon_b["generators"]]
    if len(pts_a) != len(pts_b) or any(abs(p - q) > 1e-8 * (1 + abs(p)) for p, q in zip(pts_a, pts_b)):
        out.update(verdict="not comparable", reason="different generator loops")
        return out
    mats_a = tuple(from_cmatrix(g["matrix"]) for g in mon_a["generators"])
    mats_b = tuple(from_cmatrix(g["matrix"]) for g in mon_b["generators"])
    errs = [ga["error_estimate"] + gb["error_estimate"] for ga, gb in zip(mon_a["generators"], mon_b["generators"])]
    mismatch = max((float(np.linalg.norm(a - b)) - 10 * e for a, b, e in zip(mats_a, mats_b, errs)), default=0.0)
    if mismatch > 0:
        out.update(verdict="not comparable", reason="monodromy matrices differ beyond their error estimates")
        return out
    rep = _StoredRepresentation(mats_a)
    a = _stored_cocycle(rep, report_a["extension"])
    b = _stored_cocycle(rep, report_b["extension"])
    res = class_equal(rep, a, b, tol)
    verdict = {TRIVIAL: "equal", NONTRIVIAL: "not equal", INCONCLUSIVE: "inconclusive"}[res.verdict]
    out.update(verdict=verdict, difference=_class_dict(res))
    return out


def _describe(report: Any) -> dict:
    if not isinstance(report, dict) or "problem" not in report:
        return {}
    prob = report["problem"]
    return {"name": prob.get("name"), "operator": prob.get("operator"), "inhomogeneity": prob.get("inhomogeneity")}


def compare_exit_code(result: dict) -> int:
    return EXIT_INCONCLUSIVE if result["verdict"] == "inconclusive" else EXIT_OK


def summary_lines(result: RunResult) -> list[str]:
    """Short human readable summary of a report."""
    rep = result.report
    lines = [f"{rep['problem']['name']}: exit {result.exit_code}"]
    ana = rep.get("analysis")
    if isinstance(ana, dict) and ana.get("status") == "ok":
        pts = []
        for p in ana["points"]:
            if p["kind"] == "ordinary":
                continue
            loc = p["location"] if isinstance(p["location"], str) else _fmt(from_cnum(p["location"]))
            ex = ", ".join(_fmt(from_cnum(e)) for e, m in zip(p["exponents"], p["exponent_multiplicities"]) for _ in range(m))
            pts.append(f"{loc} {{{ex}}}" if p["regular"] else f"{loc} irregular")
        lines.append(f"  singular points: {'; '.join(pts) or 'none'}; fuchsian: {ana['fuchsian']}")
    mon = rep.get("monodromy")
    if isinstance(mon, dict) and mon.get("status") == "ok":
        traces = ", ".join(f"{_fmt(from_cnum(g['point']))}: {_fmt(from_cnum(g['trace']))}" for g in mon["generators"])
        lines.append(f"  traces: {traces or 'trivial monodromy'}")
        lines.append(
            f"  local consistency: {'pass' if mon['local_consistency']['passed'] else 'FAIL'}; "
            f"admissible: {mon['admissibility']['passed']}"
        )
    ext = rep.get("extension")
    if isinstance(ext, dict) and ext.get("status") == "ok":
        ra = ext["route_agreement"]
        lines.append(
            f"  class: {ext['class']['verdict']}; routes agree: {ra['passed']} "
            f"(max distance {max(ra['distances'], default=0.0):.2e})"
        )
    for d in rep.get("diagnostics", []):
        lines.append(f"  {d['stage']}: {d['error']}: {d['message']}")
    return lines


def _fmt(z: complex) -> str:
    re = 0.0 if abs(z.real) < 1e-12 else z.real
    im = 0.0 if abs(z.imag) < 1e-12 else z.imag
    if im == 0:
        return f"{re:.6g}"
    if re == 0:
        return f"{im:.6g}i"
    return f"{re:.6g}{im:+.6g}i"


def check_expectations(result: RunResult, expect: dict) -> list[str]:
    """Mismatches between a run and the ``expect`` block of its problem file."""
    rep = result.report
    problems = []
    want_code = expect.get("exit_code", EXIT_OK)
    if result.exit_code != want_code:
        problems.append(f"exit code {result.exit_code}, expected {want_code}")
    mon = rep.get("monodromy")
    if "admissible" in expect and isinstance(mon, dict) and mon.get("status") == "ok":
        got = mon["admissibility"]["passed"]
        if got != expect["admissible"]:
            problems.append(f"admissible {got}, expected {expect['admissible']}")
    ext = rep.get("extension")
    if "class" in expect:
        got = ext["class"]["verdict"] if isinstance(ext, dict) and ext.get("status") == "ok" else None
        if got != expect["class"]:
            problems.append(f"class {got}, expected {expect['class']}")
    if isinstance(ext, dict) and ext.get("status") == "ok" and not ext["route_agreement"]["passed"]:
        problems.append("continuation and block routes disagree")
    return problems
