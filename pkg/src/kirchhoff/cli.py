"""Command-line front end.

    kirchhoff threshold --h "1 + 2*t" --N 3
    kirchhoff solve --preset brezis-nirenberg-n4 --lambda-frac 0.5
    kirchhoff sweep --preset n4-subthreshold --vary "h=1 + 0.1*t, 1 + 0.2*t"

Settings are resolved as defaults < preset < config file < flags.  Each run
writes ``<out>/<command>-<timestamp>/report.json`` (plus CSVs); the report
carries the resolved config and no timestamp, so equal inputs give
byte-identical reports.

Exit codes: 0 success, 1 configuration error, 2 precondition failure,
3 numerical non-convergence (artifacts are still written).
"""

from __future__ import annotations

import argparse
import itertools
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from .errors import (BadParameters, ConditionA3Violated, ConfigError, GeometryViolated,
                     KirchhoffError, MissingEigenvalue, NoDivergenceDetected,
                     SecondSolutionNotFound, UnsupportedCase)
from .functional import ProblemSpec
from .mesh import DEFAULT_M, bubble_asymptotics, build_radial_grid
from .nonlinearity import PowerNonlinearity
from .nonlocal_term import check_conditions, make_power_sum
from .serialize import dumps, format_float, write_csv
from .sobolev import critical_coefficient
from .spectra import ball_dirichlet_eigenvalues, linear_lambda1, nonlinear_lambda1
from .threshold import threshold_report

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_NONCONVERGENCE = 0, 1, 2, 3
BUBBLE_M = 8192
COMMANDS = ("threshold", "conditions", "eigen", "solve", "bubble", "sweep")

DEFAULTS = {
    "h": None, "N": 3, "lambda": None, "lambda-frac": None, "lambda-window": None,
    "mu": 0.0, "nu": 0.0, "q": 3.0, "gamma-f": 1.5, "gamma": None,
    "grid": None, "grading": 2.0, "tol": 1e-6, "max-iter": 20000, "seed": 0,
    "mode": "auto", "out": "runs", "format": "json", "workers": 1,
    "task": "threshold", "vary": None,
}

TYPES = {
    "h": str, "N": int, "lambda": float, "lambda-frac": float, "lambda-window": int,
    "mu": float, "nu": float, "q": float, "gamma-f": float, "gamma": float,
    "grid": int, "grading": float, "tol": float, "max-iter": int, "seed": int,
    "mode": str, "out": str, "format": str, "workers": int, "task": str, "vary": str,
    "preset": str,
}

# h strings may use "Sc" for S^{-2*/2}; "lambda-frac" scales a*lambda_1 (lambda_1
# when a = 0); "lambda-window = k" puts lambda at a(lambda_k + lambda_{k+1})/2
PRESETS = {
    "n3-linear": {"N": 3, "h": "1 + 2*t"},
    "n4-subthreshold": {"N": 4, "h": "1 + 0.5*Sc*t"},
    "n4-coercive": {"N": 4, "h": "1 + 2*Sc*t"},
    "n5-linear": {"N": 5, "h": "1 + 0.05*t"},
    "brezis-nirenberg-n4": {"N": 4, "h": "1", "lambda-frac": 0.5},
    "mountain-pass-n4": {"N": 4, "h": "1 + 0.5*Sc*t", "lambda-frac": 0.5},
    "negative-min-n4": {"N": 4, "h": "2*Sc*t", "lambda-frac": 0.5},
    "two-solutions-n4": {"N": 4, "h": "1 + 2*Sc*t", "lambda-window": 1},
    "two-solutions-n4-sqrt": {"N": 4, "h": "1 + Sc*t + t^0.5", "lambda-window": 1},
}


# ------------------------------------------------------------- h grammar

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<sym>Sc|t|[-+*^()])"
                    r"|(?P<bad>\S))")


def _pointer(text, pos, msg):
    return ConfigError(f"{msg}\n  h = {text}\n      {' ' * pos}^")


def _tokens(text):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group("bad") is not None:
            raise _pointer(text, m.start("bad"), f"unexpected character {m.group('bad')!r}")
        kind = "num" if m.group("num") is not None else m.group("sym")
        start = m.start("num") if kind == "num" else m.start("sym")
        out.append((kind, m.group(kind if kind == "num" else "sym"), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


def parse_h(text: str, N: int):
    """Parse a sum of terms ``c*t^e`` into a NonlocalTerm.

    Terms are products of decimal literals, ``Sc`` (= S^{-2*/2}) and powers
    ``t`` or ``t^e`` with e >= 0 the exponent of h, i.e. gamma - 1.
    """
    if not isinstance(text, str) or not text.strip():
        raise ConfigError("h is empty")
    toks = _tokens(text)
    i = 0
    terms = []
    while True:
        coef, expo, seen = 1.0, 0.0, False
        while True:
            kind, val, pos = toks[i]
            if kind == "num":
                coef *= float(val)
            elif kind == "Sc":
                coef *= critical_coefficient(N)
            elif kind == "t":
                if toks[i + 1][0] == "^":
                    k2, v2, p2 = toks[i + 2]
                    if k2 != "num":
                        raise _pointer(text, p2, "expected a nonnegative exponent after '^'")
                    expo += float(v2)
                    i += 2
                else:
                    expo += 1.0
            else:
                raise _pointer(text, pos, "expected a number, 'Sc' or 't'"
                               if kind != "end" else "expression ends early")
            seen = True
            i += 1
            if toks[i][0] != "*":
                break
            i += 1
        if seen:
            terms.append((coef, expo + 1.0))
        kind, _, pos = toks[i]
        if kind == "end":
            break
        if kind != "+":
            raise _pointer(text, pos, "expected '+' between terms")
        i += 1
    try:
        return make_power_sum(terms)
    except KirchhoffError as exc:
        raise ConfigError(f"invalid h = {text!r}: {exc}") from exc


# ------------------------------------------------------------------ config


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)
    preset: Optional[str] = None

    def __getitem__(self, key):
        return self.values[key]

    def to_dict(self):
        d = {"command": self.command, "preset": self.preset}
        d.update(self.values)
        return d


def _coerce(key, value, where):
    key = key.strip().replace("_", "-")
    if key == "lam":
        key = "lambda"
    if key not in TYPES:
        raise ConfigError(f"{where}: unknown key {key!r}")
    if value is None:
        return key, None
    typ = TYPES[key]
    try:
        if typ is int:
            v = float(value)
            if v != int(v):
                raise ValueError
            return key, int(v)
        return key, typ(value.strip() if isinstance(value, str) and typ is str else value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: {key} expects {typ.__name__}, got {value!r}") from None


def read_config_file(path):
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for n, line in enumerate(lines, start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError(f"{path}:{n}: expected 'key = value', got {line!r}")
        k, v = s.split("=", 1)
        key, val = _coerce(k, v.strip(), f"{path}:{n}")
        out[key] = val
    return out


def resolve(command, flags: dict, config_file=None) -> RunConfig:
    """Merge defaults, preset, config file and flags (later wins) and validate."""
    file_vals = read_config_file(config_file) if config_file else {}
    preset = flags.get("preset") or file_vals.get("preset")
    values = dict(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        values.update(PRESETS[preset])
    values.update({k: v for k, v in file_vals.items() if k != "preset"})
    values.update({k: v for k, v in flags.items() if v is not None and k != "preset"})
    cfg = RunConfig(command=command, values=values, preset=preset)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    v = cfg.values
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if v["N"] < 3:
        raise ConfigError(f"N: dimension must be >= 3, got {v['N']}")
    if v["grid"] is not None and v["grid"] < 64:
        raise ConfigError(f"grid: need at least 64 cells, got {v['grid']}")
    for key in ("grading", "tol"):
        if not v[key] > 0:
            raise ConfigError(f"{key}: must be > 0, got {v[key]}")
    for key in ("mu", "nu"):
        if v[key] < 0:
            raise ConfigError(f"{key}: must be >= 0, got {v[key]}")
    if v["lambda"] is not None and v["lambda"] < 0:
        raise ConfigError(f"lambda: must be >= 0, got {v['lambda']}")
    given = [k for k in ("lambda", "lambda-frac", "lambda-window") if v[k] is not None]
    if len(given) > 1:
        # an explicit flag beats a preset's lambda rule
        keep = "lambda" if "lambda" in given else given[-1]
        for k in given:
            if k != keep:
                v[k] = None
    if v["lambda-window"] is not None and v["lambda-window"] < 1:
        raise ConfigError("lambda-window: must be >= 1")
    if v["mode"] not in ("auto", "minimize", "mountain-pass", "two"):
        raise ConfigError(f"mode: expected auto|minimize|mountain-pass|two, got {v['mode']!r}")
    if v["format"] not in ("json", "csv"):
        raise ConfigError(f"format: expected json or csv, got {v['format']!r}")
    if v["workers"] < 1 or v["max-iter"] < 1:
        raise ConfigError("workers and max-iter must be >= 1")
    if cfg.command == "sweep":
        if v["task"] not in ("threshold", "eigen", "solve"):
            raise ConfigError(f"task: sweep runs threshold|eigen|solve, got {v['task']!r}")
        _vary(v["vary"])
    if cfg.command in ("threshold", "conditions", "solve") or (
            cfg.command == "sweep" and "h" not in _vary(v["vary"])):
        if v["h"] is None:
            raise ConfigError("h: a nonlocal term is required (--h or --preset)")
    if v["h"] is not None:
        parse_h(v["h"], v["N"])
    if cfg.command in ("conditions", "solve"):
        try:
            _nonlin(v, None).validate(v["N"])
        except BadParameters as exc:
            raise ConfigError(f"nonlinearity: {exc}") from exc


def _vary(text):
    """'key=v1,v2; key2=w1,w2' -> {key: [v1, v2], ...} (h values split on ',')."""
    if text is None:
        raise ConfigError("vary: sweep needs --vary 'key=v1,v2,...'")
    out = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(f"vary: expected key=v1,v2 in {part!r}")
        k, vals = part.split("=", 1)
        items = [s.strip() for s in vals.split(",") if s.strip()]
        key, _ = _coerce(k, None, "vary")
        if not items:
            raise ConfigError(f"vary: no values for {key}")
        out[key] = [_coerce(key, s, "vary")[1] for s in items]
    return out


# ------------------------------------------------------------------ building


def _lambda_value(v, term, N):
    a = term.coefficient_of(1.0)
    if v["lambda"] is not None:
        return float(v["lambda"])
    if v["lambda-frac"] is not None:
        lam1 = ball_dirichlet_eigenvalues(N, 1)[0].value
        return float(v["lambda-frac"]) * (a if a > 0 else 1.0) * lam1
    if v["lambda-window"] is not None:
        k = v["lambda-window"]
        vals = []
        for e in ball_dirichlet_eigenvalues(N, 40):
            if not vals or e.value > vals[-1] * (1 + 1e-12):
                vals.append(e.value)
        return (a if a > 0 else 1.0) * 0.5 * (vals[k - 1] + vals[k])
    return 0.0


def _nonlin(v, term):
    lam = _lambda_value(v, term, v["N"]) if term is not None else (v["lambda"] or 0.0)
    return PowerNonlinearity(lam=lam, mu=v["mu"], gamma_f=v["gamma-f"], nu=v["nu"], q=v["q"])


def build_problem(cfg: RunConfig) -> ProblemSpec:
    v = cfg.values
    term = parse_h(v["h"], v["N"])
    grid = build_radial_grid(v["N"], v["grid"] or DEFAULT_M, v["grading"])
    return ProblemSpec(term, _nonlin(v, term), grid)


# ---------------------------------------------------------------- commands


@dataclass
class Outcome:
    result: dict
    code: int = EXIT_OK
    csvs: dict = field(default_factory=dict)  # name -> (header, rows)
    fields: dict = field(default_factory=dict)  # name -> Field
    summary: tuple = ((), ())  # (header, rows) for --format csv and sweeps


def _eigen_map(v, term):
    nl = _nonlin(v, term)
    grid = build_radial_grid(v["N"], v["grid"] or DEFAULT_M, v["grading"])
    gammas = {1.0}
    if nl.mu:
        gammas.add(nl.gamma_f)
    if nl.nu:
        gammas.add(nl.q / 2)
    out = {}
    for g in sorted(gammas):
        if g == 1.0:
            out[g] = linear_lambda1(grid).value
        else:
            out[g] = nonlinear_lambda1(grid, g, levels=1).value
    return out


def cmd_threshold(cfg):
    v = cfg.values
    rep = threshold_report(parse_h(v["h"], v["N"]), v["N"])
    return Outcome(result=rep.to_dict(), summary=(rep.CSV_HEADER, [rep.csv_row()]))


def cmd_conditions(cfg):
    v = cfg.values
    term = parse_h(v["h"], v["N"])
    nl = _nonlin(v, term)
    eig = _eigen_map(v, term)
    rep = check_conditions(term, nl, v["N"], eig, tol=1e-9)
    d = rep.to_dict()
    d["eigenvalues"] = [{"gamma": g, "lambda_1": x} for g, x in sorted(eig.items())]
    d["lambda"] = nl.lam
    head = ("A1", "A2", "A3", "A4", "A4_clause")
    row = (rep.a1.value, rep.a2.value, rep.a3.value, rep.a4.value, rep.a4_clause or "")
    return Outcome(result=d, summary=(head, [row]))


def cmd_eigen(cfg):
    v = cfg.values
    N = v["N"]
    grid = build_radial_grid(N, v["grid"] or DEFAULT_M, v["grading"])
    radial = [linear_lambda1(grid, k) for k in (1, 2, 3)]
    ball = ball_dirichlet_eigenvalues(N, 6)
    res = {"radial": [r.to_dict() for r in radial],
           "ball": [{"value": e.value, "degree": e.degree, "index": e.index,
                     "multiplicity": e.multiplicity} for e in ball]}
    out = Outcome(result=res, fields={"eigenfunction_1": radial[0].minimizer})
    code = EXIT_OK if all(r.status == "converged" for r in radial) else EXIT_NONCONVERGENCE
    head = ["lambda_1", "lambda_2_radial", "lambda_2_ball"]
    row = [radial[0].value, radial[1].value, ball[1].value]
    if v["gamma"] is not None:
        nl = nonlinear_lambda1(grid, v["gamma"], tol=min(v["tol"], 1e-8))
        res["nonlinear"] = nl.to_dict()
        out.fields["nonlinear_minimizer"] = nl.minimizer
        out.csvs["refinement"] = (("M", "value"), nl.refinement_trace)
        if nl.attained and nl.status != "converged":
            code = EXIT_NONCONVERGENCE
        head.append("lambda_1_gamma")
        row.append(nl.value)
    out.code = code
    out.summary = (tuple(head), [tuple(row)])
    return out


def _solve(p, v):
    from .solver import minimize, mountain_pass, two_solutions

    mode = v["mode"]
    reg = p.regime()
    if mode == "auto":
        if reg.has_threshold:
            mode = "mountain-pass"
        elif reg.is_coercive and p.a > 0 and p.nonlin.lam > p.a * ball_dirichlet_eigenvalues(
                p.N, 1)[0].value:
            mode = "two"
        else:
            mode = "minimize"
    kw = {"tol": v["tol"], "max_iter": v["max-iter"], "seed": v["seed"]}
    if mode == "mountain-pass":
        return mode, [mountain_pass(p, **kw)]
    if mode == "minimize":
        return mode, [minimize(p, **kw)]
    return mode, list(two_solutions(p, **kw))


def cmd_solve(cfg):
    v = cfg.values
    p = build_problem(cfg)
    out = Outcome(result={"problem": p.to_dict(), "regime": p.regime().to_dict()})
    try:
        mode, results = _solve(p, v)
    except SecondSolutionNotFound as exc:
        results = [exc.first] if exc.first is not None else []
        out.result.update({"mode": "two", "error": str(exc), "error_type": type(exc).__name__,
                           "attempts": exc.attempts})
        out.code = EXIT_NONCONVERGENCE
        mode = "two"
    out.result["mode"] = mode
    out.result["solutions"] = [r.to_dict() for r in results]
    for i, r in enumerate(results, start=1):
        out.fields[f"solution_{i}"] = r.u
        out.csvs[f"trace_{i}"] = (("iteration", "energy", "residual"),
                                  [(k, e, s) for k, (e, s) in enumerate(r.trace)])
        if not r.converged:
            out.code = EXIT_NONCONVERGENCE
    head = ("mode", "solution", "kind", "energy", "residual", "c_star", "status")
    rows = [(mode, i, r.kind, r.energy, r.residual, r.c_star, r.status)
            for i, r in enumerate(results, start=1)]
    out.csvs["solutions"] = (head, rows)
    out.summary = (head, rows)
    return out


def cmd_bubble(cfg):
    v = cfg.values
    M = v["grid"] or BUBBLE_M
    ba = bubble_asymptotics(v["N"], v["q"], M=M, grading=v["grading"])
    head = ("eps", "grad_sq_minus_S", "q_integral")
    out = Outcome(result=ba.to_dict(), csvs={"bubble": (head, ba.table())})
    out.summary = (("grad_exponent", "q_exponent", "expected_grad", "expected_q", "log_detected"),
                   [(ba.grad_fit.exponent, ba.q_fit.exponent, ba.expected_grad, ba.expected_q,
                     ba.log_detected)])
    return out


def _sweep_case(args):
    task, values = args
    cfg = RunConfig(command=task, values=values)
    try:
        validate(cfg)
        oc = HANDLERS[task](cfg)
        head, rows = oc.summary
        return dict(zip(head, rows[0])) if rows else {}, oc.code, ""
    except ConfigError as exc:
        return {}, EXIT_CONFIG, str(exc)
    except KirchhoffError as exc:
        return {}, _error_code(exc), f"{type(exc).__name__}: {exc}"


def cmd_sweep(cfg):
    v = cfg.values
    grid = _vary(v["vary"])
    keys = list(grid)
    cases = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        vals = dict(v)
        vals.update(zip(keys, combo))
        if "lambda" in keys:
            vals["lambda-frac"] = vals["lambda-window"] = None
        elif "lambda-frac" in keys:
            vals["lambda"] = vals["lambda-window"] = None
        cases.append((v["task"], vals))
    if v["workers"] > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=v["workers"]) as pool:
            results = list(pool.map(_sweep_case, cases))
    else:
        results = [_sweep_case(c) for c in cases]
    cols = []
    for row, _, _ in results:
        cols += [c for c in row if c not in cols and c not in keys]
    head = tuple(keys) + tuple(cols) + ("exit_code", "error")
    rows = [tuple(vals[k] for k in keys) + tuple(row.get(c, "") for c in cols) + (code, err)
            for (_, vals), (row, code, err) in zip(cases, results)]
    summary = [dict(zip(head, r)) for r in rows]
    worst = max((code for _, code, _ in results), default=EXIT_OK)
    return Outcome(result={"task": v["task"], "vary": grid, "cases": summary},
                   csvs={"sweep": (head, rows)}, summary=(head, rows),
                   code=EXIT_NONCONVERGENCE if worst == EXIT_NONCONVERGENCE else
                   (EXIT_PRECONDITION if worst else EXIT_OK))


HANDLERS = {"threshold": cmd_threshold, "conditions": cmd_conditions, "eigen": cmd_eigen,
            "solve": cmd_solve, "bubble": cmd_bubble, "sweep": cmd_sweep}


def _error_code(exc):
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (UnsupportedCase, GeometryViolated, NoDivergenceDetected,
                        ConditionA3Violated, MissingEigenvalue, BadParameters)):
        return EXIT_PRECONDITION
    return EXIT_NONCONVERGENCE


# ------------------------------------------------------------------ output


def _run_dir(out, command):
    stamp = time.strftime("%Y%m%d-%H%M%S")
    base = os.path.join(out, f"{command}-{stamp}")
    path, n = base, 1
    while os.path.exists(path):
        n += 1
        path = f"{base}-{n}"
    os.makedirs(path)
    return path


def write_artifacts(cfg, oc: Outcome, error=None):
    """Write report.json (and CSVs) to a fresh run directory; returns its path."""
    path = _run_dir(cfg["out"], cfg.command)
    report = {"command": cfg.command, "version": __version__, "exit_code": oc.code,
              "config": cfg.to_dict(), "defaults": DEFAULTS, "result": oc.result}
    if error is not None:
        report["error"] = error
    with open(os.path.join(path, "report.json"), "w") as fh:
        fh.write(dumps(report))
    for name, (head, rows) in oc.csvs.items():
        write_csv(os.path.join(path, f"{name}.csv"), head, rows)
    for name, f in oc.fields.items():
        f.to_csv(os.path.join(path, f"{name}.csv"))
    if cfg["format"] == "csv" and oc.summary[0]:
        write_csv(os.path.join(path, "summary.csv"), *oc.summary)
    return path


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute a resolved config, write artifacts and return the exit code."""
    stdout = stdout or sys.stdout
    error = None
    try:
        oc = HANDLERS[cfg.command](cfg)
    except ConfigError:
        raise
    except KirchhoffError as exc:
        error = {"type": type(exc).__name__, "message": str(exc)}
        oc = Outcome(result={}, code=_error_code(exc))
    path = write_artifacts(cfg, oc, error)
    if cfg["format"] == "csv" and oc.summary[0]:
        stdout.write(",".join(oc.summary[0]) + "\n")
        for row in oc.summary[1]:
            stdout.write(",".join(format_float(x) if isinstance(x, float) else str(x)
                                  for x in row) + "\n")
    else:
        with open(os.path.join(path, "report.json")) as fh:
            stdout.write(fh.read())
    if error is not None:
        print(f"error: {error['type']}: {error['message']}", file=sys.stderr)
    print(f"artifacts: {path}", file=sys.stderr)
    return oc.code


# ------------------------------------------------------------------ parser


def build_parser():
    parser = argparse.ArgumentParser(prog="kirchhoff", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--h", help='nonlocal term, for example "1 + 2*t" or "1 + 0.5*Sc*t"')
        sp.add_argument("--N", type=str)
        sp.add_argument("--lambda", dest="lambda_", type=str)
        sp.add_argument("--lambda-frac", type=str, help="lambda = frac * a * lambda_1")
        sp.add_argument("--lambda-window", type=str,
                        help="lambda = a (lambda_k + lambda_{k+1}) / 2 for this k")
        sp.add_argument("--mu", type=str)
        sp.add_argument("--gamma-f", type=str, help="mu-term is mu |u|^{2 gamma_f - 2} u")
        sp.add_argument("--nu", type=str)
        sp.add_argument("--q", type=str)
        sp.add_argument("--gamma", type=str, help="eigen: also compute lambda_1(gamma)")
        sp.add_argument("--grid", type=str, help="number of radial cells M (default 1024, bubble 8192)")
        sp.add_argument("--grading", type=str)
        sp.add_argument("--tol", type=str)
        sp.add_argument("--max-iter", type=str)
        sp.add_argument("--seed", type=str)
        sp.add_argument("--mode", help="solve: auto | minimize | mountain-pass | two")
        sp.add_argument("--out", help="output directory (default: runs)")
        sp.add_argument("--format", choices=("json", "csv"))
        sp.add_argument("--workers", type=str, help="sweep: process pool size")
        sp.add_argument("--task", help="sweep: threshold | eigen | solve")
        sp.add_argument("--vary", help="sweep: 'key=v1,v2; key2=w1,w2'")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    raw = vars(args)
    flags = {}
    try:
        for key, val in raw.items():
            if key in ("command", "config") or val is None:
                continue
            name = "lambda" if key == "lambda_" else key.replace("_", "-")
            k, v = _coerce(name, val, f"--{name}")
            flags[k] = v
        cfg = resolve(args.command, flags, args.config)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
