"""Command-line experiment runner.

Each subcommand drives one scenario, prints a verdict table and optionally
writes CSV/JSON records.  Settings resolve as built-in defaults, then a flat
``key = value`` config file (``--config``), then command-line flags; the
thread count falls back to ``AMALGAM_LAB_THREADS``.

Exit status: 0 if every verdict passes, 1 if any fails, 2 on a configuration
or precondition error (in which case no output file is written).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

from . import lab, oracle
from .errors import AmalgamLabError, ConfigError
from .grid import INF, ExponentPair, Grid, make_complex_gaussian, parse_exponent
from .lab import Engine, Family, Regime, ScenarioResult, Verdict
from .norms import NormSpec, Side, Space, Window
from .oracle import Relation

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ("scenario", "family", "engine", "p", "q", "lambda", "norm")
VERDICT_COLUMNS = ("scenario", "measured_alpha", "predicted_alpha", "tolerance", "r2", "pass")
THREADS_ENV = "AMALGAM_LAB_THREADS"

SCENARIOS = ("dilation", "convolution", "product", "inclusion", "schrodinger", "oracle", "norm", "equivalence")
_EXPONENT_KEYS = ("p", "q", "p1", "q1", "p2", "q2")
_FLOAT_KEYS = ("eps", "a", "b", "t0", "dx", "oracle_fit", "numeric_fit", "bound_slack")
_INT_KEYS = ("d", "n", "points", "threads", "count")
_WINDOW_KEYS = ("lam_window", "small_window", "large_window", "t_window")
_BOOL_KEYS = ("weak",)
_CHOICES = {
    "regime": ("small", "large"),
    "family": ("gaussian", "witness"),
    "engine": ("oracle", "numeric"),
    "window": ("gaussian", "box"),
    "side": ("time", "frequency"),
    "space": tuple(s.value for s in Space),
}


@dataclass
class RunConfig:
    scenario: str = ""
    p: float = 2.0
    q: float = 2.0
    p1: float = 2.0
    q1: float = 2.0
    p2: float = 2.0
    q2: float = 2.0
    regime: str = "small"
    family: str = "gaussian"
    engine: str = "oracle"
    eps: float = 0.05
    window: str | None = None
    weak: bool = False
    a: float = 1.0
    b: float = 0.0
    d: int = 1
    space: str = Space.W_FLP_LQ.value
    side: str = "time"
    t0: float = 1.0
    n: int | None = None
    dx: float | None = None
    lam_window: tuple[float, float] | None = None
    small_window: tuple[float, float] | None = None
    large_window: tuple[float, float] | None = None
    t_window: tuple[float, float] | None = None
    count: int | None = None
    points: int | None = None
    oracle_fit: float | None = None
    numeric_fit: float | None = None
    bound_slack: float | None = None
    threads: int = 1
    sweep_csv: str | None = None
    verdict_csv: str | None = None
    json: str | None = None

    def grid(self) -> Grid | None:
        if (self.n is None) != (self.dx is None):
            raise ConfigError("n and dx must be given together")
        return None if self.n is None else Grid(1, self.n, self.dx)

    def tolerances(self) -> lab.Tolerances:
        over = {k: getattr(self, k) for k in ("oracle_fit", "numeric_fit", "bound_slack") if getattr(self, k) is not None}
        if self.points is not None:
            over["points_per_decade"] = self.points
        return dataclasses.replace(lab.DEFAULTS, **over)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f"{f.name} = {_format_value(value)}")
        return "\n".join(lines) + "\n"


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "inf" if value == INF else repr(value)
    if isinstance(value, tuple):
        return ",".join(repr(v) for v in value)
    return str(value)


def _num(x: float) -> str:
    if x == INF:
        return "inf"
    return format(float(x), ".17g")


def _parse_window(text: str) -> tuple[float, float]:
    parts = [s.strip() for s in str(text).split(",")]
    if len(parts) != 2:
        raise ConfigError(f"expected 'lo,hi', got {text!r}")
    try:
        lo, hi = (float(Fraction(s)) for s in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad window {text!r}") from exc
    if not 0 < lo < hi:
        raise ConfigError(f"window needs 0 < lo < hi, got {text!r}")
    return lo, hi


def coerce(key: str, value):
    """Convert a config value (string from a file, or an argparse value) to its field type."""
    names = {f.name for f in fields(RunConfig)}
    if key not in names:
        raise ConfigError(f"unknown configuration key {key!r}")
    if value is None:
        return None
    try:
        if key in _EXPONENT_KEYS:
            return parse_exponent(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            if isinstance(value, str) and not value.strip().lstrip("-").isdigit():
                raise ValueError(value)
            return int(value)
    except (ValueError, AmalgamLabError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    if key in _WINDOW_KEYS:
        return value if isinstance(value, tuple) else _parse_window(value)
    if key in _BOOL_KEYS:
        if isinstance(value, bool):
            return value
        low = str(value).strip().lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"bad boolean for {key}: {value!r}")
        return low in ("true", "1", "yes")
    value = str(value).strip()
    if key in _CHOICES and value not in _CHOICES[key]:
        raise ConfigError(f"{key} must be one of {', '.join(_CHOICES[key])}; got {value!r}")
    return value


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = coerce(key, value)
    return out


def resolve_config(scenario: str, file_values: dict, flag_values: dict, env=None) -> RunConfig:
    env = os.environ if env is None else env
    values = {}
    if THREADS_ENV in env and env[THREADS_ENV].strip():
        values["threads"] = coerce("threads", env[THREADS_ENV])
    values.update(file_values)
    values.update({k: coerce(k, v) for k, v in flag_values.items()})
    if values.get("scenario", scenario) != scenario:
        raise ConfigError(f"config file is for scenario {values['scenario']!r}, not {scenario!r}")
    values["scenario"] = scenario
    cfg = RunConfig(**values)
    if cfg.threads < 1:
        raise ConfigError("threads must be at least 1")
    return cfg


# --- running -------------------------------------------------------------------


def _engine(cfg: RunConfig) -> Engine:
    return Engine(cfg.engine)


def _windows(cfg: RunConfig) -> dict:
    out = {}
    if cfg.small_window:
        out[Regime.SMALL_LAMBDA] = cfg.small_window
    if cfg.large_window:
        out[Regime.LARGE_LAMBDA] = cfg.large_window
    return out


def _grids(cfg: RunConfig) -> dict | None:
    grid = cfg.grid()
    return None if grid is None else {Regime.SMALL_LAMBDA: grid, Regime.LARGE_LAMBDA: grid}


def _run_dilation(cfg: RunConfig) -> ScenarioResult:
    engine, tol = _engine(cfg), cfg.tolerances()
    if cfg.weak:
        return lab.scenario_weak_dilation_bounds(cfg.p, cfg.q, engine, tol, cfg.threads, _grids(cfg))
    regime = Regime(cfg.regime)
    if cfg.family == "witness":
        family = Family.WITNESS_SMALL if regime is Regime.SMALL_LAMBDA else Family.WITNESS_LARGE
    else:
        family = Family.GAUSSIAN_U0
    window = Window(cfg.window) if cfg.window else None
    return lab.scenario_dilation(cfg.p, cfg.q, regime, family, engine, cfg.grid(), cfg.eps, window,
                                 cfg.lam_window, tol, cfg.threads)


def _run_bilinear(cfg: RunConfig) -> ScenarioResult:
    fn = lab.scenario_convolution if cfg.scenario == "convolution" else lab.scenario_product
    return fn(cfg.p, cfg.q, cfg.p1, cfg.p2, cfg.q1, cfg.q2, _engine(cfg), cfg.tolerances(),
              _windows(cfg), _grids(cfg), cfg.threads)


def _run_inclusion(cfg: RunConfig) -> ScenarioResult:
    return lab.scenario_inclusion(cfg.p1, cfg.q1, cfg.p2, cfg.q2, _engine(cfg), cfg.tolerances(),
                                  _windows(cfg), _grids(cfg), cfg.threads)


def _run_schrodinger(cfg: RunConfig) -> ScenarioResult:
    return lab.scenario_schrodinger(cfg.p, cfg.q, cfg.t0, _engine(cfg), cfg.tolerances(), cfg.lam_window,
                                    cfg.t_window, cfg.grid(), cfg.threads)


def _run_equivalence(cfg: RunConfig) -> ScenarioResult:
    return lab.scenario_equivalence([(cfg.p, cfg.q)], Side(cfg.side), cfg.lam_window, cfg.count,
                                    cfg.grid(), cfg.tolerances(), cfg.threads)


def _run_norm(cfg: RunConfig) -> ScenarioResult:
    """Numeric norm of ``G_(a+ib)`` against its closed form (2% relative)."""
    space = Space(cfg.space)
    window = Window(cfg.window or "gaussian") if space in (Space.W_LP_LQ, Space.W_FLP_LQ, Space.MPQ) else None
    spec = NormSpec(space, ExponentPair(cfg.p, cfg.q), window)
    grid = cfg.grid() or Grid(1, 1024, 1 / 32)
    f = make_complex_gaussian(grid, cfg.a, cfg.b)
    value = spec.evaluate(f)
    exact = lab.oracle_complex_norm(spec, cfg.a, cfg.b, 1)
    name = f"norm/{space.value}/{lab._tag(p=spec.p, q=spec.q, a=cfg.a, b=cfg.b)}"
    result = ScenarioResult(name)
    rel = abs(value / exact - 1)
    result.verdicts.append(Verdict(name, value, exact, Relation.EQUAL, 0.02, rel <= 0.02, Engine.NUMERIC,
                                   detail=f"relative error {rel:.3e}"))
    return result


def _run_oracle(cfg: RunConfig) -> float:
    params = oracle.ComplexGaussianParams(cfg.a, cfg.b, cfg.d)
    return oracle.amalgam_flp_norm_exact(params, cfg.p, cfg.q)


_RUNNERS = {
    "dilation": _run_dilation,
    "convolution": _run_bilinear,
    "product": _run_bilinear,
    "inclusion": _run_inclusion,
    "schrodinger": _run_schrodinger,
    "norm": _run_norm,
    "equivalence": _run_equivalence,
}


def run(cfg: RunConfig) -> list[ScenarioResult]:
    if cfg.scenario not in _RUNNERS:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    return [_RUNNERS[cfg.scenario](cfg)]


# --- output ----------------------------------------------------------------------


def sweep_rows(results) -> list[dict]:
    rows = []
    for res in results:
        for rec in res.sweeps:
            for lam, norm in rec.points:
                rows.append({
                    "scenario": rec.scenario, "family": rec.family.value, "engine": rec.engine.value,
                    "p": rec.p, "q": rec.q, "lambda": lam, "norm": norm,
                })
    return rows


def verdict_rows(results) -> list[dict]:
    rows = []
    for res in results:
        for v in res.verdicts:
            rows.append({
                "scenario": v.scenario, "measured_alpha": v.measured, "predicted_alpha": v.predicted,
                "tolerance": v.tolerance, "r2": v.r2, "pass": v.passed,
            })
    return rows


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _num(value)
    return str(value)


def format_csv(results, kind: str = "sweeps") -> str:
    if kind == "sweeps":
        columns, rows = SWEEP_COLUMNS, sweep_rows(results)
    elif kind == "verdicts":
        columns, rows = VERDICT_COLUMNS, verdict_rows(results)
    else:
        raise ValueError(f"unknown CSV kind {kind!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def emit_csv(results, path, kind: str = "sweeps") -> None:
    Path(path).write_text(format_csv(results, kind))


def _json_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "null"
        if math.isinf(value):
            return json.dumps("inf" if value > 0 else "-inf")
        return format(value, ".17g")
    return json.dumps(value)


def format_json(results) -> str:
    """JSON with the CSV schema; floats carry 17 significant digits, infinite exponents are ``"inf"``."""
    def block(rows, columns):
        items = []
        for row in rows:
            inner = ", ".join(f"{json.dumps(c)}: {_json_value(row[c])}" for c in columns)
            items.append("    {" + inner + "}")
        return "[\n" + ",\n".join(items) + "\n  ]" if items else "[]"

    return (
        "{\n"
        f'  "version": {SCHEMA_VERSION},\n'
        f'  "sweeps": {block(sweep_rows(results), SWEEP_COLUMNS)},\n'
        f'  "verdicts": {block(verdict_rows(results), VERDICT_COLUMNS)}\n'
        "}\n"
    )


def emit_json(results, path) -> None:
    Path(path).write_text(format_json(results))


def verdict_table(results) -> str:
    lines = [f"{'verdict':<7} {'measured':>12} {'rel':>3} {'predicted':>12} {'tol':>8}  scenario"]
    for res in results:
        for v in res.verdicts:
            status = "PASS" if v.passed else "FAIL"
            lines.append(
                f"{status:<7} {v.measured:>12.6f} {v.relation.value:>3} {v.predicted:>12.6f} {v.tolerance:>8.1e}  {v.scenario}"
                + (f"  ({v.detail})" if v.detail else "")
            )
    return "\n".join(lines) + "\n"


def gnuplot_hints(cfg: RunConfig) -> str:
    path = cfg.sweep_csv or "sweeps.csv"
    return (
        "set datafile separator ','\n"
        "set logscale xy\n"
        "set xlabel 'lambda'\n"
        "set ylabel 'norm'\n"
        "set key outside\n"
        f"plot for [s in system(\"tail -n +2 {path} | cut -d, -f1 | uniq\")] \\\n"
        f"    '< grep \"^'.s.',\" {path}' using 6:7 with linespoints title s\n"
    )


# --- argument parsing ---------------------------------------------------------------


def _add(parser, *names, **kw):
    parser.add_argument(*names, default=argparse.SUPPRESS, **kw)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add(common, "--config", dest="config_file", help="flat key = value file")
    _add(common, "--threads", type=int, help=f"worker cap (fallback: ${THREADS_ENV})")
    _add(common, "--engine", choices=_CHOICES["engine"])
    _add(common, "--n", type=int, help="grid size (power of two)")
    _add(common, "--dx", type=float, help="grid spacing")
    _add(common, "--points", type=int, help="sweep points per decade")
    _add(common, "--oracle-fit", dest="oracle_fit", type=float)
    _add(common, "--numeric-fit", dest="numeric_fit", type=float)
    _add(common, "--bound-slack", dest="bound_slack", type=float)
    _add(common, "--sweep-csv", dest="sweep_csv", help="write sweep records here")
    _add(common, "--verdict-csv", dest="verdict_csv", help="write verdicts here")
    _add(common, "--json", help="write sweeps and verdicts as JSON")
    common.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    common.add_argument("--gnuplot-hints", action="store_true", help="print a log-log plot recipe and exit")

    def pq(sp):
        _add(sp, "--p")
        _add(sp, "--q")

    def indices(sp, names):
        for name in names:
            _add(sp, f"--{name}")

    parser = argparse.ArgumentParser(prog="amalgam-lab", description="Scaling experiments for amalgam and modulation norms.")
    sub = parser.add_subparsers(dest="scenario", required=True)

    sp = sub.add_parser("dilation", parents=[common], help="dilation exponents in W(L^p, L^q)")
    pq(sp)
    _add(sp, "--regime", choices=_CHOICES["regime"])
    _add(sp, "--family", choices=_CHOICES["family"])
    _add(sp, "--eps", type=float)
    _add(sp, "--window", choices=_CHOICES["window"])
    _add(sp, "--lam-window", dest="lam_window", help="lo,hi")
    sp.add_argument("--weak", action="store_const", const=True, default=argparse.SUPPRESS,
                    help="check the weak envelope for Gaussians in both regimes")

    for name, text in (("convolution", "self-convolution of Gaussians in M^{p,q}"),
                       ("product", "pointwise square of Gaussians in M^{p,q}")):
        sp = sub.add_parser(name, parents=[common], help=text)
        pq(sp)
        indices(sp, ("p1", "q1", "p2", "q2"))
        _add(sp, "--small-window", dest="small_window", help="lo,hi")
        _add(sp, "--large-window", dest="large_window", help="lo,hi")

    sp = sub.add_parser("inclusion", parents=[common], help="M^{p1,q1} inside M^{p2,q2}")
    indices(sp, ("p1", "q1", "p2", "q2"))
    _add(sp, "--small-window", dest="small_window", help="lo,hi")
    _add(sp, "--large-window", dest="large_window", help="lo,hi")

    sp = sub.add_parser("schrodinger", parents=[common], help="free Schrödinger flow on M^{p,q}")
    pq(sp)
    _add(sp, "--t0", type=float)
    _add(sp, "--lam-window", dest="lam_window", help="lo,hi")
    _add(sp, "--t-window", dest="t_window", help="lo,hi")

    sp = sub.add_parser("oracle", parents=[common], help="closed-form W(FL^p, L^q) norm of G_(a+ib)")
    pq(sp)
    _add(sp, "--a", type=float)
    _add(sp, "--b", type=float)
    _add(sp, "--d", type=int)

    sp = sub.add_parser("norm", parents=[common], help="numeric norm of G_(a+ib) against its closed form")
    pq(sp)
    _add(sp, "--a", type=float)
    _add(sp, "--b", type=float)
    _add(sp, "--space", choices=_CHOICES["space"])
    _add(sp, "--window", choices=_CHOICES["window"])

    sp = sub.add_parser("equivalence", parents=[common], help="M^{p,q} against FL^q or L^p for compact supports")
    pq(sp)
    _add(sp, "--side", choices=_CHOICES["side"])
    _add(sp, "--lam-window", dest="lam_window", help="lo,hi")
    _add(sp, "--count", type=int)
    return parser


def main(argv=None, env=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = vars(args).copy()
    scenario = flags.pop("scenario")
    print_config = flags.pop("print_config")
    hints = flags.pop("gnuplot_hints")
    config_file = flags.pop("config_file", None)
    try:
        file_values = read_config_file(config_file) if config_file else {}
        cfg = resolve_config(scenario, file_values, flags, env)
        if print_config:
            sys.stdout.write(cfg.to_text())
            return 0
        if hints:
            sys.stdout.write(gnuplot_hints(cfg))
            return 0
        if scenario == "oracle":
            sys.stdout.write(_num(_run_oracle(cfg)) + "\n")
            return 0
        results = run(cfg)
    except (AmalgamLabError, ValueError) as exc:
        print(f"amalgam-lab: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(verdict_table(results))
    if cfg.sweep_csv:
        emit_csv(results, cfg.sweep_csv, "sweeps")
    if cfg.verdict_csv:
        emit_csv(results, cfg.verdict_csv, "verdicts")
    if cfg.json:
        emit_json(results, cfg.json)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
