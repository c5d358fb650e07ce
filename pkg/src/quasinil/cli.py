"""Command-line front end: ``quasinil <command> <scenario.json> [names...] [flags]``.

Exit codes: 0 success, 2 analytic negative, 3 validation or parse error,
4 numerical failure. Reports go to stdout, diagnostics to stderr. Nothing is
read from the environment; identical arguments give identical bytes (the
optional ``--timing`` field is the one exception and is off by default).
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .calibration import is_quotient_bounded, phat, require_quotient_bounded
from .corpus import KINDS, generate_corpus
from .equivalence import DEFAULT_TOL_REL, bracket_sequence, cutoff, decide_equivalence
from .errors import (
    AnalyticNegative,
    NotEquivalent,
    NumericalFailure,
    OracleDisagreement,
    QuasinilError,
    ValidationError,
)
from .local import SUPPORT_TOL, LocalAnalysis, transfer_local_resolvent
from .scenario import Scenario, parse_scenario
from .spectral import neumann_series, qp_spectrum, radius_estimate, radius_exact

EXIT_OK = 0
EXIT_NEGATIVE = 2
EXIT_INVALID = 3
EXIT_NUMERICAL = 4

DEFAULT_RADIUS_N = 64
DECAY_HEADER = ["n", "b_n", "root_n", "seminorm"]

COMMANDS = {
    "validate": [],
    "analyze": ["op"],
    "spectrum": ["op"],
    "radius": ["op"],
    "neumann": ["op"],
    "equiv": ["op1", "op2"],
    "decay": ["op1", "op2"],
    "local": ["op", "vec"],
    "transfer": ["op1", "op2", "vec", "lam"],
}


@dataclass
class Report:
    command: List[str]
    input_digest: Optional[str]
    tolerances: Dict[str, Any]
    results: Dict[str, Any]
    exit_code: int = EXIT_OK
    table: Optional[List[List[Any]]] = None
    wall_time: Optional[float] = None
    diagnostics: List[str] = field(default_factory=list)

    def as_dict(self) -> Dict[str, Any]:
        out = {
            "command": self.command,
            "input_digest": self.input_digest,
            "tolerances": self.tolerances,
            "results": self.results,
            "exit_code": self.exit_code,
        }
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here that code means an analytic negative."""

    def error(self, message):
        raise ValidationError(message, "argv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quasinil", description="Quasi-nilpotent equivalence and spectral analysis of matrices.")
    parser.add_argument("command", choices=[*COMMANDS, "gen"])
    parser.add_argument("args", nargs="*", help="scenario path and operator/vector names (gen: corpus kind)")
    parser.add_argument("--tol-rel", type=float, default=None)
    parser.add_argument("--n-max", type=int, default=None)
    parser.add_argument("--cluster-tol", type=float, default=None)
    parser.add_argument("--format", choices=["text", "csv", "json"], default="text")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dim", type=int, default=3, help="dimension for gen")
    parser.add_argument("--timing", action="store_true", help="add wall time to the report")
    return parser


# -- conversion ------------------------------------------------------------------------


def plain(value):
    """Python containers and scalars only; complex values stay complex."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return complex(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def jsonable(value):
    """JSON-safe form: complex as ``[re, im]`` always, non-finite floats as strings."""
    value = plain(value)
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, list):
        return [jsonable(v) for v in value]
    if isinstance(value, complex):
        return [_finite(value.real), _finite(value.imag)]
    if isinstance(value, float):
        return _finite(value)
    return value


def _finite(x: float):
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def parse_complex(text: str, path: str = "lam") -> complex:
    """``"2"``, ``"0.5-0.5j"`` or ``"[0.5,-0.5]"``."""
    text = text.strip()
    try:
        if text.startswith("["):
            re_, im = json.loads(text)
            z = complex(float(re_), float(im))
        else:
            z = complex(text.replace("i", "j"))
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"cannot read {text!r} as a complex number", path) from exc
    if not cmath.isfinite(z):
        raise ValidationError(f"{text!r} is not finite", path)
    return z


# -- command implementations ------------------------------------------------------------


class Context:
    def __init__(self, scenario: Scenario, opts):
        self.scenario = scenario
        settings = scenario.settings
        self.tol_rel = opts.tol_rel if opts.tol_rel is not None else settings.get("tol_rel", DEFAULT_TOL_REL)
        self.n_max = opts.n_max if opts.n_max is not None else settings.get("n_max")
        self.cluster_tol = opts.cluster_tol if opts.cluster_tol is not None else settings.get("cluster_tol")
        self.support_tol = settings.get("support_tol", SUPPORT_TOL)
        for name in ("tol_rel", "cluster_tol", "support_tol"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ValidationError("must be a positive finite number", name)
        if self.n_max is not None and self.n_max < 1:
            raise ValidationError("must be positive", "n_max")
        self.P = scenario.build_calibration()

    def tolerances(self) -> Dict[str, Any]:
        return {
            "tol_rel": self.tol_rel,
            "n_max": self.n_max,
            "cluster_tol": self.cluster_tol,
            "support_tol": self.support_tol,
        }


def _cluster_rows(report):
    return [{"value": c.value, "seminorms": c.seminorms} for c in report.qp_spectrum]


def cmd_validate(ctx: Context, names) -> Dict[str, Any]:
    sc = ctx.scenario
    ops = {}
    for name, T in sc.operators.items():
        decision = is_quotient_bounded(T, ctx.P)
        ops[name] = {"quotient_bounded": decision.bounded, "p_hat": decision.certificates}
    return {
        "space_dim": sc.space_dim,
        "seminorms": [{"name": p.name, "rank": p.rank} for p in ctx.P],
        "separating": ctx.P.is_separating(),
        "operators": ops,
        "vectors": sorted(sc.vectors),
    }


def cmd_spectrum(ctx: Context, names) -> Dict[str, Any]:
    T = ctx.scenario.operator(names[0])
    rep = qp_spectrum(T, ctx.P, ctx.cluster_tol)
    return {
        "operator": names[0],
        "qp_spectrum": _cluster_rows(rep),
        "ambient_spectrum": [
            {"value": v, "multiplicity": m} for v, m in zip(rep.ambient_spectrum, rep.ambient_multiplicities)
        ],
        "radius_of_boundedness": rep.radius_of_boundedness,
        "per_seminorm_radii": rep.per_seminorm_radii,
        "regular": rep.regular,
    }


def cmd_radius(ctx: Context, names) -> Dict[str, Any]:
    T = ctx.scenario.operator(names[0])
    n_max = ctx.n_max or DEFAULT_RADIUS_N
    exact = radius_exact(T, ctx.P)
    estimates = radius_estimate(T, ctx.P, n_max)
    return {
        "operator": names[0],
        "radius_exact": exact,
        "estimates": estimates,
        "n_max": n_max,
        "estimate_error": abs(estimates[-1] - exact),
    }


def cmd_neumann(ctx: Context, names) -> Dict[str, Any]:
    T = ctx.scenario.operator(names[0])
    res = neumann_series(T, ctx.P)
    return {
        "operator": names[0],
        "terms": res.terms,
        "certificate_power": res.certificate_power,
        "certificate_ratio": res.certificate_ratio,
        "tail_bound": res.tail_bound,
        "residual": res.residual,
        "inverse": res.inverse,
    }


def cmd_analyze(ctx: Context, names) -> Dict[str, Any]:
    T = ctx.scenario.operator(names[0])
    decision = require_quotient_bounded(T, ctx.P, name=names[0])
    out = {"operator": names[0], "p_hat": decision.certificates}
    out.update({k: v for k, v in cmd_spectrum(ctx, names).items() if k != "operator"})
    radius = cmd_radius(ctx, names)
    out["radius_exact"] = radius["radius_exact"]
    out["radius_estimate"] = radius["estimates"][-1]
    out["neumann_applies"] = radius["radius_exact"] < 1 - 1e-9
    return out


def _verdict_dict(v) -> Dict[str, Any]:
    return {
        "status": v.status,
        "equivalent": v.equivalent,
        "cutoff": v.cutoff,
        "residual": list(v.residual),
        "residual_reverse": list(v.residual_reverse),
        "threshold": v.threshold,
        "oracle_equivalent": v.oracle_equivalent,
        "oracle_distance": v.oracle_distance,
        "decay_curve": v.decay_curve,
        "decay_curve_reverse": v.decay_curve_reverse,
    }


def cmd_equiv(ctx: Context, names, report: Report) -> Dict[str, Any]:
    T, S = (ctx.scenario.operator(n) for n in names)
    v = decide_equivalence(T, S, ctx.P, ctx.tol_rel, ctx.cluster_tol)
    if not v.oracle_agrees:
        report.exit_code = EXIT_NUMERICAL
        report.diagnostics.append(str(OracleDisagreement(
            f"bracket decision ({v.equivalent}) and semisimple-part oracle ({v.oracle_equivalent}) disagree"
        )))
    elif not v.equivalent:
        report.exit_code = EXIT_NEGATIVE
        report.diagnostics.append(f"{names[0]} and {names[1]} are not quasi-nilpotent equivalent")
    return {"operators": list(names), **_verdict_dict(v)}


def decay_rows(T, S, P, n_max: int) -> List[List[Any]]:
    """Rows ``[n, b_n, b_n^(1/n), seminorm]`` per seminorm, then the max over seminorms."""
    require_quotient_bounded(T, P, name="T")
    require_quotient_bounded(S, P, name="S")
    seq = bracket_sequence(T, S, P, n_max, check=False)
    rows = []
    for p in P:
        for n, X in enumerate(seq.terms):
            b = phat(X, p, check=False)
            rows.append([n, b, b ** (1.0 / n) if n else None, p.name])
    for n, b in enumerate(seq.norms):
        rows.append([n, b, b ** (1.0 / n) if n else None, "max"])
    return rows


def cmd_decay(ctx: Context, names, report: Report) -> Dict[str, Any]:
    T, S = (ctx.scenario.operator(n) for n in names)
    n_max = ctx.n_max or cutoff(T.shape[0]) + 2
    rows = decay_rows(T, S, ctx.P, n_max)
    report.table = rows
    return {"operators": list(names), "n_max": n_max, "columns": DECAY_HEADER, "rows": rows}


def cmd_local(ctx: Context, names) -> Dict[str, Any]:
    T = ctx.scenario.operator(names[0])
    x = ctx.scenario.vector(names[1])
    a = LocalAnalysis(T, x, ctx.support_tol, ctx.cluster_tol)
    return {
        "operator": names[0],
        "vector": names[1],
        "local_spectrum": a.spectrum.points,
        "empty": a.spectrum.empty,
        "cluster_values": a.decomposition.eigenvalues,
        "cluster_weights": a.spectrum.weights,
    }


def cmd_transfer(ctx: Context, names, report: Report) -> Dict[str, Any]:
    T, S = (ctx.scenario.operator(n) for n in names[:2])
    x = ctx.scenario.vector(names[2])
    lam = parse_complex(names[3])
    v = decide_equivalence(T, S, ctx.P, ctx.tol_rel, ctx.cluster_tol)
    if not v.oracle_agrees:
        raise OracleDisagreement("bracket decision and semisimple-part oracle disagree")
    if not v.equivalent:
        raise NotEquivalent(f"{names[0]} and {names[1]} are not quasi-nilpotent equivalent")
    analysis = LocalAnalysis(T, x, ctx.support_tol, ctx.cluster_tol)
    x_tilde = analysis.value(lam)
    x1 = transfer_local_resolvent(T, S, x, lam, ctx.n_max, verdict=v, analysis=analysis)
    n = T.shape[0]
    residual = float(np.linalg.norm((lam * np.eye(n) - S) @ x1 - x))
    return {
        "operators": list(names[:2]),
        "vector": names[2],
        "lambda": lam,
        "local_resolvent": x_tilde,
        "x1": x1,
        "residual": residual,
        "residual_relative": residual / max(float(np.linalg.norm(x)), 1e-300),
    }


# -- rendering --------------------------------------------------------------------------


def _fmt_scalar(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        sign = "-" if math.copysign(1.0, v.imag) < 0 else "+"
        return f"{v.real!r}{sign}{abs(v.imag)!r}j"
    return repr(v) if isinstance(v, float) else str(v)


def _is_leaf(v) -> bool:
    if isinstance(v, dict):
        return not v
    if isinstance(v, list):
        return all(not isinstance(t, (dict, list)) for t in v)
    return True


def _leaf(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_fmt_scalar(t) for t in v) + "]"
    if isinstance(v, dict):
        return "{}"
    return _fmt_scalar(v)


def _render_text(value, indent: int = 0) -> List[str]:
    pad = "  " * indent
    items = value.items() if isinstance(value, dict) else ((None, v) for v in value)
    lines = []
    for key, v in items:
        head = f"{pad}{key}:" if key is not None else f"{pad}-"
        if _is_leaf(v):
            lines.append(f"{head} {_leaf(v)}")
        else:
            lines.append(head)
            lines.extend(_render_text(v, indent + 1))
    return lines


def _flatten(prefix: str, value, out: List[List[str]]):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append([prefix, _fmt_scalar(value)])


def render(report: Report, fmt: str) -> str:
    doc = plain(report.as_dict())
    if fmt == "json":
        return json.dumps(jsonable(doc), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if report.table is not None:
            writer.writerow(DECAY_HEADER)
            for n, b, root, name in plain(report.table):
                writer.writerow([n, repr(b), "" if root is None else repr(root), name])
        else:
            writer.writerow(["key", "value"])
            rows: List[List[str]] = []
            _flatten("", doc, rows)
            writer.writerows(rows)
        return buf.getvalue()
    return "\n".join(_render_text(doc)) + "\n"


# -- dispatch ---------------------------------------------------------------------------


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, AnalyticNegative):
        return EXIT_NEGATIVE
    if isinstance(exc, ValidationError):
        return EXIT_INVALID
    if isinstance(exc, NumericalFailure):
        return EXIT_NUMERICAL
    raise exc


def run_command(cmd: str, scenario: Scenario, names: Sequence[str], opts) -> Report:
    """Run one analysis command; library errors propagate to the caller."""
    if cmd not in COMMANDS:
        raise ValidationError(f"unknown command {cmd!r}", "command")
    expected = COMMANDS[cmd]
    if len(names) != len(expected):
        raise ValidationError(f"{cmd} expects {len(expected)} name(s): {' '.join(expected) or '(none)'}", "argv")
    ctx = Context(scenario, opts)
    report = Report(
        command=[cmd, *names],
        input_digest=scenario.digest(),
        tolerances=ctx.tolerances(),
        results={},
    )
    handlers = {
        "validate": cmd_validate,
        "analyze": cmd_analyze,
        "spectrum": cmd_spectrum,
        "radius": cmd_radius,
        "neumann": cmd_neumann,
        "local": cmd_local,
    }
    if cmd in handlers:
        report.results = handlers[cmd](ctx, names)
    else:
        report.results = {"equiv": cmd_equiv, "decay": cmd_decay, "transfer": cmd_transfer}[cmd](ctx, names, report)
    return report


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    started = time.perf_counter()
    try:
        opts = build_parser().parse_args(list(sys.argv[1:] if argv is None else argv))
        if opts.command == "gen":
            if len(opts.args) != 1:
                raise ValidationError(f"gen expects one corpus kind ({', '.join(KINDS)})", "argv")
            stdout.write(generate_corpus(opts.seed, opts.dim, opts.args[0]).dumps())
            return EXIT_OK
        if not opts.args:
            raise ValidationError("missing scenario path", "argv")
        scenario = parse_scenario(opts.args[0])
        report = run_command(opts.command, scenario, opts.args[1:], opts)
        if opts.timing:
            report.wall_time = time.perf_counter() - started
        stdout.write(render(report, opts.format))
        for line in report.diagnostics:
            stderr.write(f"quasinil: {line}\n")
        return report.exit_code
    except QuasinilError as exc:
        stderr.write(f"quasinil: {type(exc).__name__}: {exc}\n")
        return exit_code_for(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
