"""Parameter sweeps, log-log exponent fits and verdicts against the predicted exponents."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .errors import ConfigError, DegenerateFit, GridInadequate, InvalidParam, TailTruncation
from .grid import (
    TAIL_TOL,
    Convention,
    ExponentPair,
    GaussianFamilyParam,
    Grid,
    SampledFunction,
    WitnessKind,
    WitnessSpec,
    bump,
    conjugate,
    dilate,
    edge_ratio,
    format_exponent,
    make_complex_gaussian,
    make_bump,
    make_gaussian,
    make_witness,
    reciprocal,
)
from .norms import (
    NormSpec,
    Side,
    Space,
    Window,
    amalgam_norm,
    equivalence_reports,
    flp_norm,
    lp_norm,
    modulation_norm,
)
from .oracle import Relation, Scenario, theoretical_exponents
from .schrodinger import evolve
from .transforms import convolve, fourier, inverse_fourier, pointwise_product


class Family(enum.Enum):
    GAUSSIAN_PHI = "gaussian_phi"
    GAUSSIAN_U0 = "gaussian_u0"
    COMPLEX_GAUSSIAN = "complex_gaussian"
    WITNESS_SMALL = "witness_small"
    WITNESS_LARGE = "witness_large"
    USER_FUNCTION = "user_function"
    BUMP_TIME = "bump_time"  # bump(lam x), equivalence bands only
    BUMP_FREQUENCY = "bump_frequency"  # transform bump(xi/lam), equivalence bands only


class Regime(enum.Enum):
    SMALL_LAMBDA = "small"
    LARGE_LAMBDA = "large"
    LARGE_T = "large_t"


class Engine(enum.Enum):
    NUMERIC = "numeric"
    ORACLE = "oracle"


class Operation(enum.Enum):
    NONE = "none"
    SELF_CONVOLUTION = "self_convolution"
    SELF_PRODUCT = "self_product"
    EVOLVE = "evolve"


@dataclass(frozen=True)
class Tolerances:
    """Every tolerance and default window used by the scenarios."""

    oracle_fit: float = 1e-3
    numeric_fit: float = 0.05
    bound_slack: float = 0.05
    points_per_decade: int = 16
    min_points_per_decade: int = 8
    min_samples_across: int = 16
    small_window: tuple[float, float] = (1e-2, 1e-1)
    large_window: tuple[float, float] = (10.0, 100.0)
    oracle_small_window: tuple[float, float] = (1e-5, 1e-3)
    oracle_large_window: tuple[float, float] = (1e3, 1e5)
    schrodinger_lambda_window: tuple[float, float] = (1e-3, 1e-2)
    schrodinger_t_window: tuple[float, float] = (1e2, 1e4)
    schrodinger_numeric_window: tuple[float, float] = (2e-2, 2e-1)
    equivalence_time_window: tuple[float, float] = (1.0, 16.0)
    equivalence_frequency_window: tuple[float, float] = (1 / 16, 1.0)
    equivalence_points: int = 5
    equivalence_band: float = 10.0
    equivalence_tail: float = 1e-6

    def fit_tolerance(self, engine: Engine) -> float:
        return self.oracle_fit if engine is Engine.ORACLE else self.numeric_fit


DEFAULTS = Tolerances()

# Numeric grids used when a scenario is not handed one explicitly.
DEFAULT_GRIDS = {
    ("dilation", Regime.SMALL_LAMBDA): Grid(1, 16384, 1 / 16),
    ("dilation", Regime.LARGE_LAMBDA): Grid(1, 8192, 1 / 1024),
    ("modulation", Regime.SMALL_LAMBDA): Grid(1, 1024, 1 / 8),
    ("modulation", Regime.LARGE_LAMBDA): Grid(1, 2048, 1 / 128),
    ("schrodinger", Regime.SMALL_LAMBDA): Grid(1, 4096, 1 / 8),
    ("equivalence", Side.TIME): Grid(1, 8192, 1 / 1024),
    ("equivalence", Side.FREQUENCY): Grid(1, 8192, 1 / 8),
}


def decade_points(lo: float, hi: float, per_decade: int = DEFAULTS.points_per_decade) -> int:
    return int(round(per_decade * math.log10(hi / lo))) + 1


@dataclass(frozen=True)
class SweepPlan:
    family: Family
    norm: NormSpec
    lam_min: float
    lam_max: float
    count: int
    regime: Regime
    engine: Engine = Engine.ORACLE
    grid: Grid | None = None
    d: int = 1
    eps: float = 0.05  # witness families
    b: float = 0.0  # COMPLEX_GAUSSIAN sweeps G_(lam + ib)
    operation: Operation = Operation.NONE
    time: float = 0.0  # EVOLVE at fixed time; LARGE_T sweeps time instead of lam
    scale: float = 1.0  # fixed lam of a LARGE_T sweep
    user_function: SampledFunction | None = None
    threads: int = 1

    def __post_init__(self):
        if not (self.lam_min > 0 and self.lam_max >= self.lam_min):
            raise InvalidParam("need 0 < lam_min <= lam_max")
        if self.count < 1:
            raise InvalidParam("count must be positive")
        if self.count > 1:
            if self.lam_max == self.lam_min:
                raise InvalidParam("several points need lam_min < lam_max")
            density = (self.count - 1) / math.log10(self.lam_max / self.lam_min)
            if density < DEFAULTS.min_points_per_decade - 1e-9:
                raise InvalidParam(f"{density:.2f} points per decade; need at least {DEFAULTS.min_points_per_decade}")
        if self.regime is Regime.SMALL_LAMBDA and self.lam_max > 1:
            raise InvalidParam("small-lambda regime needs lam_max <= 1")
        if self.regime in (Regime.LARGE_LAMBDA, Regime.LARGE_T) and self.lam_min < 1:
            raise InvalidParam(f"{self.regime.value} regime needs lam_min >= 1")
        if self.family is Family.WITNESS_SMALL and self.regime is not Regime.SMALL_LAMBDA:
            raise InvalidParam("WITNESS_SMALL belongs to the small-lambda regime")
        if self.family is Family.WITNESS_LARGE and self.regime is not Regime.LARGE_LAMBDA:
            raise InvalidParam("WITNESS_LARGE belongs to the large-lambda regime")
        if self.family in (Family.WITNESS_SMALL, Family.WITNESS_LARGE):
            if self.norm.space is not Space.W_LP_LQ:
                raise InvalidParam("witness families are measured in W(L^p, L^q)")
            if self.engine is Engine.ORACLE:
                raise ConfigError("witness families have no closed form; use the numeric engine")
        if self.regime is Regime.LARGE_T and self.operation is not Operation.EVOLVE:
            raise InvalidParam("time sweeps need the EVOLVE operation")
        if self.engine is Engine.NUMERIC and self.grid is None:
            if self.user_function is None:
                raise InvalidParam("numeric engine needs a grid")
            object.__setattr__(self, "grid", self.user_function.grid)
        if self.family in (Family.BUMP_TIME, Family.BUMP_FREQUENCY):
            raise InvalidParam("bump families are only used by scenario_equivalence")
        if self.family is Family.USER_FUNCTION:
            if self.user_function is None:
                raise InvalidParam("USER_FUNCTION needs user_function")
            if self.engine is Engine.ORACLE:
                raise ConfigError("user functions have no closed form; use the numeric engine")

    def parameters(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.lam_min)])
        return np.geomspace(self.lam_min, self.lam_max, self.count)


# --- evaluation ----------------------------------------------------------------


def _gaussian_rate(plan: SweepPlan, lam: float) -> float:
    """Coefficient ``c`` of ``exp(-pi c |x|^2)`` for the Gaussian families."""
    if plan.regime is Regime.LARGE_T:
        lam = plan.scale
    return lam if plan.family is Family.GAUSSIAN_PHI else lam * lam


def _oracle_gaussian(norm: NormSpec, rate: float, d: int) -> float:
    p, q = norm.p, norm.q
    if norm.space is Space.LP:
        return oracle.lp_norm_gaussian_exact(rate, p, d)
    if norm.space is Space.FLP:
        return oracle.flp_norm_gaussian_exact(rate, p, d)
    if norm.window is not Window.GAUSSIAN:
        raise ConfigError("closed forms exist only for the Gaussian window")
    if norm.space is Space.W_LP_LQ:
        return oracle.amalgam_lp_norm_gaussian_exact(rate, p, q, d)
    if norm.space is Space.W_FLP_LQ:
        # phi_c = c^{-d/2} G_(1/c)
        return rate ** (-d / 2) * oracle.amalgam_flp_norm_exact(oracle.ComplexGaussianParams(1 / rate, 0.0, d), p, q)
    return oracle.window_l2_scale(d) * oracle.modulation_norm_gaussian_exact(rate, p, q, d).exact


def oracle_complex_norm(norm: NormSpec, a: float, b: float, d: int = 1) -> float:
    """Closed-form norm of ``G_(a+ib)``; the modulation norm uses the unit-``L^2`` window."""
    c = complex(a, b)
    p, q = norm.p, norm.q
    mod = abs(c) ** (-d / 2)
    if norm.space is Space.LP:
        return mod * oracle.lp_norm_gaussian_exact(a / abs(c) ** 2, p, d)
    if norm.window is not Window.GAUSSIAN and norm.space is not Space.FLP:
        raise ConfigError("closed forms exist only for the Gaussian window")
    if norm.space is Space.W_FLP_LQ:
        return oracle.amalgam_flp_norm_exact(oracle.ComplexGaussianParams(a, b, d), p, q)
    if norm.space is Space.MPQ:
        # transform is exp(-pi c xi^2) = (1/c)^{d/2} G_(1/c)
        r = 1 / c
        return oracle.window_l2_scale(d) * mod * oracle.amalgam_flp_norm_exact(
            oracle.ComplexGaussianParams(r.real, r.imag, d), p, q
        )
    if norm.space is Space.FLP:
        return oracle.lp_norm_gaussian_exact(a, p, d)
    raise ConfigError(f"no closed form for {norm.space.value} of a complex Gaussian")


def _oracle_value(plan: SweepPlan, lam: float) -> float:
    d, norm = plan.d, plan.norm
    if plan.family is Family.COMPLEX_GAUSSIAN:
        if plan.operation is not Operation.NONE:
            raise ConfigError("complex Gaussian sweeps take no operation")
        return oracle_complex_norm(norm, lam, plan.b, d)
    rate = _gaussian_rate(plan, lam)
    if plan.operation is Operation.SELF_CONVOLUTION:
        scale, new = oracle.conv_gaussian_exact(rate, d)
        return scale * _oracle_gaussian(norm, new, d)
    if plan.operation is Operation.SELF_PRODUCT:
        return _oracle_gaussian(norm, oracle.product_gaussian_exact(rate), d)
    if plan.operation is Operation.EVOLVE:
        if norm.space is not Space.MPQ or norm.window is not Window.GAUSSIAN:
            raise ConfigError("evolved Gaussians have a closed form only in M^{p,q} with the Gaussian window")
        t = lam if plan.regime is Regime.LARGE_T else plan.time
        return oracle.window_l2_scale(d) * oracle.schrodinger_mpq_norm_exact(math.sqrt(rate), t, norm.p, norm.q, d)
    return _oracle_gaussian(norm, rate, d)


def _witness_spec(plan: SweepPlan) -> WitnessSpec:
    if plan.family is Family.WITNESS_SMALL:
        return WitnessSpec(WitnessKind.SMALL_LAMBDA, plan.norm.p, plan.eps)
    return WitnessSpec(WitnessKind.LARGE_LAMBDA, plan.norm.q, plan.eps)


def _base_function(plan: SweepPlan, lam: float) -> SampledFunction:
    grid = plan.grid
    fam = plan.family
    if fam in (Family.GAUSSIAN_PHI, Family.GAUSSIAN_U0):
        conv = Convention.PHI if fam is Family.GAUSSIAN_PHI else Convention.U0
        fixed = plan.scale if plan.regime is Regime.LARGE_T else lam
        return make_gaussian(grid, GaussianFamilyParam(fixed, conv))
    if fam is Family.COMPLEX_GAUSSIAN:
        return make_complex_gaussian(grid, lam, plan.b)
    if fam in (Family.WITNESS_SMALL, Family.WITNESS_LARGE):
        return make_witness(grid, _witness_spec(plan), lam)
    return dilate(plan.user_function, lam)


def _apply_operation(plan: SweepPlan, f: SampledFunction, lam: float) -> SampledFunction:
    op = plan.operation
    if op is Operation.SELF_CONVOLUTION:
        return convolve(f, f)
    if op is Operation.SELF_PRODUCT:
        return pointwise_product(f, f)
    if op is Operation.EVOLVE:
        return evolve(f, lam if plan.regime is Regime.LARGE_T else plan.time)
    return f


def _evaluate_norm(norm: NormSpec, h: SampledFunction) -> float:
    if norm.space is Space.LP:
        return lp_norm(h, norm.p)
    if norm.space is Space.FLP:
        return flp_norm(h, norm.p)
    if norm.space is Space.W_LP_LQ:
        return amalgam_norm(h, Space.LP, norm.p, norm.q, norm.window)
    if norm.space is Space.W_FLP_LQ:
        return amalgam_norm(h, Space.FLP, norm.p, norm.q, norm.window)
    # tails were checked by check_grid
    return modulation_norm(h, norm.p, norm.q, norm.window, tail_tol=None)


def _effective_width(plan: SweepPlan, lam: float, f: SampledFunction) -> float:
    if plan.family in (Family.WITNESS_SMALL, Family.WITNESS_LARGE):
        return 2.0 / lam  # support, or the hole around the origin
    mag = np.abs(f.values)
    return np.count_nonzero(mag >= math.exp(-math.pi) * mag.max()) * f.grid.dx


def check_grid(plan: SweepPlan, lam: float) -> None:
    """Raise :class:`GridInadequate` if ``plan.grid`` cannot resolve the point ``lam``."""
    grid = plan.grid
    try:
        f = _base_function(plan, lam)
        h = _apply_operation(plan, f, lam)
    except TailTruncation as exc:
        raise GridInadequate(lam, str(exc)) from exc
    if not np.any(f.values):
        raise GridInadequate(lam, "function vanishes on the grid")
    width = _effective_width(plan, lam, f)
    if width / grid.dx < DEFAULTS.min_samples_across:
        raise GridInadequate(lam, f"only {width / grid.dx:.1f} samples across the effective width")
    if plan.family is Family.WITNESS_SMALL:
        if 1.0 / lam + 1.0 >= grid.extent:
            raise GridInadequate(lam, "witness support does not fit inside the grid")
    elif plan.family is not Family.WITNESS_LARGE:
        r = edge_ratio(h.values)
        if r >= TAIL_TOL:
            raise GridInadequate(lam, f"boundary value {r:.2e} of the peak")
    if plan.norm.space in (Space.FLP, Space.W_FLP_LQ, Space.MPQ):
        r = edge_ratio(fourier(h).values)
        if r >= TAIL_TOL:
            raise GridInadequate(lam, f"spectrum is {r:.2e} of its peak at the frequency edge")


def _numeric_value(plan: SweepPlan, lam: float) -> float:
    f = _base_function(plan, lam)
    return _evaluate_norm(plan.norm, _apply_operation(plan, f, lam))


def run_sweep(plan: SweepPlan) -> list[tuple[float, float]]:
    """``[(lam, norm), ...]`` in increasing ``lam``; deterministic for a fixed plan."""
    lams = plan.parameters()
    if plan.engine is Engine.ORACLE:
        evaluate = lambda lam: _oracle_value(plan, lam)  # noqa: E731
    else:
        for lam in (lams[0], lams[-1]):
            check_grid(plan, float(lam))
        evaluate = lambda lam: _numeric_value(plan, lam)  # noqa: E731
    if plan.threads > 1 and lams.size > 1:
        with ThreadPoolExecutor(max_workers=plan.threads) as pool:
            values = list(pool.map(evaluate, lams.tolist()))
    else:
        values = [evaluate(lam) for lam in lams.tolist()]
    return [(float(lam), float(v)) for lam, v in zip(lams, values)]


# --- fitting -----------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    alpha: float
    intercept: float
    r2: float
    max_rel_residual: float
    lam_min: float
    lam_max: float
    count: int


def fit_exponent(points) -> ScalingFit:
    """Ordinary least squares of ``log norm`` on ``log lam``."""
    pts = list(points)
    if len(pts) < 4:
        raise DegenerateFit(f"need at least 4 points, got {len(pts)}")
    lam = np.array([p[0] for p in pts], dtype=float)
    val = np.array([p[1] for p in pts], dtype=float)
    if np.any(lam <= 0) or np.any(~(val > 0)) or not np.all(np.isfinite(val)):
        raise DegenerateFit("all parameters and norms must be positive and finite")
    x, y = np.log(lam), np.log(val)
    if np.ptp(x) == 0:
        raise DegenerateFit("parameters must not all coincide")
    A = np.stack([x, np.ones_like(x)], axis=1)
    (alpha, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (alpha * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ScalingFit(
        float(alpha), float(intercept), r2, float(np.max(np.abs(np.expm1(resid)))),
        float(lam.min()), float(lam.max()), len(pts),
    )


# --- verdicts ----------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    scenario: str
    measured: float
    predicted: float
    relation: Relation
    tolerance: float
    passed: bool
    engine: Engine
    r2: float = math.nan
    detail: str = ""


def compare(
    scenario: str, measured: float, predicted: float, relation: Relation, tol: float,
    engine: Engine, r2: float = math.nan, detail: str = "",
) -> Verdict:
    """Equality within ``tol``, or a one-sided bound with ``tol`` slack."""
    if relation is Relation.EQUAL:
        ok = abs(measured - predicted) <= tol
    elif relation is Relation.AT_LEAST:
        ok = measured >= predicted - tol
    else:
        ok = measured <= predicted + tol
    return Verdict(scenario, measured, predicted, relation, tol, bool(ok), engine, r2, detail)


def index_verdict(
    scenario: str, measured: float, bound: float, relation: Relation, tol: float, engine: Engine,
    index_holds: bool, index_name: str,
) -> Verdict:
    """Pass iff the measured exponent comparison agrees with the index relation."""
    cmp = compare(scenario, measured, bound, relation, tol, engine)
    detail = f"{index_name} holds={index_holds}; exponent comparison holds={cmp.passed}"
    return Verdict(scenario, measured, bound, relation, tol, cmp.passed == index_holds, engine, math.nan, detail)


@dataclass(frozen=True)
class SweepRecord:
    scenario: str
    family: Family
    engine: Engine
    p: float
    q: float
    points: tuple[tuple[float, float], ...]
    fit: ScalingFit | None


@dataclass
class ScenarioResult:
    name: str
    verdicts: list[Verdict] = field(default_factory=list)
    sweeps: list[SweepRecord] = field(default_factory=list)
    bands: list = field(default_factory=list)  # EquivalenceBand records

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def fit(self, scenario: str) -> ScalingFit:
        for rec in self.sweeps:
            if rec.scenario == scenario and rec.fit is not None:
                return rec.fit
        raise KeyError(scenario)

    def extend(self, other: "ScenarioResult") -> None:
        self.verdicts.extend(other.verdicts)
        self.sweeps.extend(other.sweeps)
        self.bands.extend(other.bands)


def _tag(**kw) -> str:
    parts = []
    for k, v in kw.items():
        parts.append(f"{k}={format_exponent(v) if isinstance(v, float) else v}")
    return ",".join(parts)


def _sweep(result: ScenarioResult, name: str, plan: SweepPlan) -> ScalingFit:
    points = run_sweep(plan)
    fit = fit_exponent(points)
    result.sweeps.append(SweepRecord(name, plan.family, plan.engine, plan.norm.p, plan.norm.q, tuple(points), fit))
    return fit


def _window(engine: Engine, regime: Regime, tol: Tolerances, override=None) -> tuple[float, float]:
    if override is not None:
        return override
    if engine is Engine.ORACLE:
        return tol.oracle_small_window if regime is Regime.SMALL_LAMBDA else tol.oracle_large_window
    return tol.small_window if regime is Regime.SMALL_LAMBDA else tol.large_window


def _plan(family, norm, window, regime, engine, tol, **kw) -> SweepPlan:
    lo, hi = window
    return SweepPlan(family, norm, lo, hi, decade_points(lo, hi, tol.points_per_decade), regime, engine, **kw)


# --- scenarios -----------------------------------------------------------------

_REGIMES = (Regime.SMALL_LAMBDA, Regime.LARGE_LAMBDA)


def scenario_dilation(
    p: float, q: float, regime: Regime, family: Family = Family.GAUSSIAN_U0,
    engine: Engine = Engine.NUMERIC, grid: Grid | None = None, eps: float = 0.05,
    window: Window | None = None, lam_window=None, tol: Tolerances = DEFAULTS, threads: int = 1,
) -> ScenarioResult:
    """Dilation exponent of ``W(L^p, L^q)`` for Gaussians or the sharpness witnesses."""
    pair = ExponentPair(p, q)
    p, q = pair.p, pair.q
    if regime not in _REGIMES:
        raise InvalidParam("dilation needs the small- or large-lambda regime")
    if family is Family.GAUSSIAN_PHI:
        family = Family.GAUSSIAN_U0
    witness = family in (Family.WITNESS_SMALL, Family.WITNESS_LARGE)
    if family not in (Family.GAUSSIAN_U0, Family.WITNESS_SMALL, Family.WITNESS_LARGE):
        raise InvalidParam(f"dilation scenario does not support {family.value}")
    if witness and not p < q:
        raise InvalidParam("witness functions apply to p < q")
    if window is None:
        window = Window.BOX if witness else Window.GAUSSIAN
    if engine is Engine.NUMERIC and grid is None:
        grid = DEFAULT_GRIDS[("dilation", regime)]
    small = regime is Regime.SMALL_LAMBDA
    name = f"dilation/{regime.value}/{family.value}/{_tag(p=p, q=q)}"
    norm = NormSpec(Space.W_LP_LQ, pair, window)
    plan = _plan(family, norm, _window(engine, regime, tol, lam_window), regime, engine, tol,
                 grid=grid if engine is Engine.NUMERIC else None, eps=eps, threads=threads)
    result = ScenarioResult(name)
    fit = _sweep(result, name, plan)
    if witness:
        pred = theoretical_exponents(Scenario.WITNESS_SMALL if small else Scenario.WITNESS_LARGE, p, q, 1, eps)
    else:
        pred = theoretical_exponents(Scenario.DIL_GAUSS_SMALL if small else Scenario.DIL_GAUSS_LARGE, p, q)
    result.verdicts.append(compare(name, fit.alpha, pred.value, Relation.EQUAL, tol.fit_tolerance(engine), engine, fit.r2))
    bounds = (
        (Scenario.DIL_SMALL_UPPER, Scenario.DIL_SMALL_LOWER) if small
        else (Scenario.DIL_LARGE_LOWER, Scenario.DIL_LARGE_UPPER)
    )
    for sc in bounds:
        b = theoretical_exponents(sc, p, q)
        result.verdicts.append(
            compare(f"{name}/{sc.value}", fit.alpha, b.value, b.relation, tol.bound_slack, engine, fit.r2)
        )
    return result


def scenario_weak_dilation_bounds(
    p: float, q: float, engine: Engine = Engine.NUMERIC, tol: Tolerances = DEFAULTS, threads: int = 1,
    grids: dict | None = None,
) -> ScenarioResult:
    """Sharp envelope inside the weak one, and measured Gaussian exponents inside both."""
    pair = ExponentPair(p, q)
    p, q = pair.p, pair.q
    result = ScenarioResult(f"weak_dilation/{_tag(p=p, q=q)}")
    pairs = {
        Regime.SMALL_LAMBDA: (Scenario.DIL_SMALL_UPPER, Scenario.DIL_SMALL_WEAK),
        Regime.LARGE_LAMBDA: (Scenario.DIL_LARGE_UPPER, Scenario.DIL_LARGE_WEAK),
    }
    for regime, (sharp_sc, weak_sc) in pairs.items():
        sharp = theoretical_exponents(sharp_sc, p, q)
        weak = theoretical_exponents(weak_sc, p, q)
        name = f"{result.name}/{regime.value}"
        # the sharp bound is the stronger statement
        result.verdicts.append(compare(f"{name}/envelope", sharp.value, weak.value, weak.relation, 0.0, engine))
        grid = (grids or {}).get(regime)
        sub = scenario_dilation(p, q, regime, Family.GAUSSIAN_U0, engine, grid=grid, tol=tol, threads=threads)
        fit = sub.sweeps[0].fit
        result.sweeps.extend(sub.sweeps)
        result.verdicts.append(compare(f"{name}/measured", fit.alpha, weak.value, weak.relation, tol.bound_slack, engine, fit.r2))
    return result


def _mpq_plan(family, pair, regime, engine, tol, window, grid, operation=Operation.NONE, **kw):
    norm = NormSpec(Space.MPQ, ExponentPair(*pair), Window.GAUSSIAN)
    return _plan(family, norm, _window(engine, regime, tol, window), regime, engine, tol,
                 grid=grid if engine is Engine.NUMERIC else None, operation=operation, **kw)


def _grid_for(engine: Engine, regime: Regime, grids: dict | None) -> Grid | None:
    if engine is Engine.ORACLE:
        return None
    if grids and regime in grids:
        return grids[regime]
    return DEFAULT_GRIDS[("modulation", regime)]


def _bilinear(
    kind: str, operation: Operation, p, q, p1, p2, q1, q2, engine, tol, windows, grids, threads,
) -> ScenarioResult:
    outer, ps, qs = ExponentPair(p, q), ExponentPair(p1, p2), ExponentPair(q1, q2)
    p, q, p1, p2, q1, q2 = outer.p, outer.q, ps.p, ps.q, qs.p, qs.q
    ip, iq, ip1, ip2, iq1, iq2 = map(reciprocal, (p, q, p1, p2, q1, q2))
    name = f"{kind}/{_tag(p=p, q=q, p1=p1, p2=p2, q1=q1, q2=q2)}"
    result = ScenarioResult(name)
    ftol = tol.fit_tolerance(engine)
    if kind == "convolution":
        small_sc, large_sc = Scenario.CONV_SMALL, Scenario.CONV_LARGE
        small_holds = ip + 1 <= ip1 + ip2 + 1e-12
        large_holds = iq <= iq1 + iq2 + 1e-12
        small_index, large_index = "1/p+1<=1/p1+1/p2", "1/q<=1/q1+1/q2"
    else:
        small_sc, large_sc = Scenario.PRODUCT_SMALL, Scenario.PRODUCT_LARGE
        small_holds = ip <= ip1 + ip2 + 1e-12
        large_holds = iq + 1 <= iq1 + iq2 + 1e-12
        small_index, large_index = "1/p<=1/p1+1/p2", "1/q+1<=1/q1+1/q2"
    for regime, sc, holds, index, rel in (
        (Regime.SMALL_LAMBDA, small_sc, small_holds, small_index, Relation.AT_LEAST),
        (Regime.LARGE_LAMBDA, large_sc, large_holds, large_index, Relation.AT_MOST),
    ):
        grid = _grid_for(engine, regime, grids)
        win = (windows or {}).get(regime)
        tag = f"{name}/{regime.value}"
        left = _sweep(result, f"{tag}/left",
                      _mpq_plan(Family.GAUSSIAN_PHI, (p, q), regime, engine, tol, win, grid, operation, threads=threads))
        pred = theoretical_exponents(sc, p, q)
        result.verdicts.append(compare(f"{tag}/left", left.alpha, pred.value, Relation.EQUAL, ftol, engine, left.r2))
        right = 0.0
        for i, pair in enumerate(((p1, q1), (p2, q2)), start=1):
            fit = _sweep(result, f"{tag}/factor{i}",
                         _mpq_plan(Family.GAUSSIAN_PHI, pair, regime, engine, tol, win, grid, threads=threads))
            gsc = Scenario.GAUSS_MPQ_SMALL if regime is Regime.SMALL_LAMBDA else Scenario.GAUSS_MPQ_LARGE
            gp = theoretical_exponents(gsc, *pair)
            result.verdicts.append(compare(f"{tag}/factor{i}", fit.alpha, gp.value, Relation.EQUAL, ftol, engine, fit.r2))
            right += fit.alpha
        # boundedness needs lam^left <~ lam^right in the limit
        result.verdicts.append(index_verdict(f"{tag}/index", left.alpha, right, rel, 2 * ftol, engine, holds, index))
    return result


def scenario_convolution(
    p, q, p1, p2, q1, q2, engine: Engine = Engine.ORACLE, tol: Tolerances = DEFAULTS,
    windows: dict | None = None, grids: dict | None = None, threads: int = 1,
) -> ScenarioResult:
    """``||phi_lam * phi_lam||_{M^{p,q}}`` against ``||phi_lam||_{M^{p1,q1}} ||phi_lam||_{M^{p2,q2}}``."""
    return _bilinear("convolution", Operation.SELF_CONVOLUTION, p, q, p1, p2, q1, q2, engine, tol, windows, grids, threads)


def scenario_product(
    p, q, p1, p2, q1, q2, engine: Engine = Engine.ORACLE, tol: Tolerances = DEFAULTS,
    windows: dict | None = None, grids: dict | None = None, threads: int = 1,
) -> ScenarioResult:
    """Pointwise version: ``phi_lam^2 = phi_{2 lam}``."""
    return _bilinear("product", Operation.SELF_PRODUCT, p, q, p1, p2, q1, q2, engine, tol, windows, grids, threads)


def scenario_inclusion(
    p1, q1, p2, q2, engine: Engine = Engine.ORACLE, tol: Tolerances = DEFAULTS,
    windows: dict | None = None, grids: dict | None = None, threads: int = 1,
) -> ScenarioResult:
    """Whether ``M^{p1,q1}`` embeds in ``M^{p2,q2}``, read off from Gaussian exponents."""
    a, b = ExponentPair(p1, q1), ExponentPair(p2, q2)
    name = f"inclusion/{_tag(p1=a.p, q1=a.q, p2=b.p, q2=b.q)}"
    result = ScenarioResult(name)
    ftol = tol.fit_tolerance(engine)
    for regime, holds, index, rel in (
        (Regime.SMALL_LAMBDA, a.p <= b.p, "p1<=p2", Relation.AT_LEAST),
        (Regime.LARGE_LAMBDA, a.q <= b.q, "q1<=q2", Relation.AT_MOST),
    ):
        grid = _grid_for(engine, regime, grids)
        win = (windows or {}).get(regime)
        tag = f"{name}/{regime.value}"
        gsc = Scenario.GAUSS_MPQ_SMALL if regime is Regime.SMALL_LAMBDA else Scenario.GAUSS_MPQ_LARGE
        fits = []
        for label, pair in (("source", a), ("target", b)):
            fit = _sweep(result, f"{tag}/{label}",
                         _mpq_plan(Family.GAUSSIAN_PHI, (pair.p, pair.q), regime, engine, tol, win, grid, threads=threads))
            pred = theoretical_exponents(gsc, pair.p, pair.q)
            result.verdicts.append(compare(f"{tag}/{label}", fit.alpha, pred.value, Relation.EQUAL, ftol, engine, fit.r2))
            fits.append(fit)
        result.verdicts.append(index_verdict(f"{tag}/index", fits[1].alpha, fits[0].alpha, rel, 2 * ftol, engine, holds, index))
    return result


def scenario_schrodinger(
    p, q, t0: float = 1.0, engine: Engine = Engine.ORACLE, tol: Tolerances = DEFAULTS,
    lam_window=None, t_window=None, grid: Grid | None = None, threads: int = 1,
) -> ScenarioResult:
    """Data and evolved-solution exponents as ``lam -> 0`` and the decay rate in ``t``.

    The ``t``-sweep always uses the oracle: the wave leaves any fixed grid.
    """
    pair = ExponentPair(p, q)
    p, q = pair.p, pair.q
    pc = conjugate(p)
    name = f"schrodinger/{_tag(p=p, q=q)}"
    result = ScenarioResult(name)
    ftol = tol.fit_tolerance(engine)
    lam_window = lam_window or (
        tol.schrodinger_lambda_window if engine is Engine.ORACLE else tol.schrodinger_numeric_window
    )
    if engine is Engine.NUMERIC and grid is None:
        grid = DEFAULT_GRIDS[("schrodinger", Regime.SMALL_LAMBDA)]
    g = grid if engine is Engine.NUMERIC else None
    data = _sweep(result, f"{name}/data",
                  _mpq_plan(Family.GAUSSIAN_U0, (pc, q), Regime.SMALL_LAMBDA, engine, tol, lam_window, g, threads=threads))
    pred = theoretical_exponents(Scenario.SCHRO_DATA_SMALL, p, q)
    result.verdicts.append(compare(f"{name}/data", data.alpha, pred.value, Relation.EQUAL, ftol, engine, data.r2))
    evolved = _sweep(result, f"{name}/evolved",
                     _mpq_plan(Family.GAUSSIAN_U0, (p, q), Regime.SMALL_LAMBDA, engine, tol, lam_window, g,
                               Operation.EVOLVE, time=t0, threads=threads))
    pred = theoretical_exponents(Scenario.SCHRO_EVOLVED_SMALL, p, q)
    result.verdicts.append(compare(f"{name}/evolved", evolved.alpha, pred.value, Relation.EQUAL, ftol, engine, evolved.r2))
    decay = _sweep(result, f"{name}/decay",
                   _mpq_plan(Family.GAUSSIAN_U0, (p, q), Regime.LARGE_T, Engine.ORACLE, tol,
                             t_window or tol.schrodinger_t_window, None, Operation.EVOLVE, scale=1.0))
    pred = theoretical_exponents(Scenario.SCHRO_DECAY, p, q)
    result.verdicts.append(compare(f"{name}/decay", decay.alpha, pred.value, Relation.EQUAL, tol.oracle_fit, Engine.ORACLE, decay.r2))
    # a fixed-time bound M^{p',q} -> M^{p,q} forces evolved >= data, i.e. p >= 2
    result.verdicts.append(index_verdict(f"{name}/necessity", evolved.alpha, data.alpha, Relation.AT_LEAST,
                                         2 * ftol, engine, p >= 2, "p>=2"))
    return result


@dataclass(frozen=True)
class EquivalenceBand:
    p: float
    q: float
    side: Side
    lo: float  # smallest ratio ||f||_{M^{p,q}} / reference over the family
    hi: float

    @property
    def width(self) -> float:
        return self.hi / self.lo


def bump_family(side: Side, grid: Grid, lam: float) -> SampledFunction:
    """``bump(lam x)`` (time side) or the function whose transform is ``bump(xi/lam)``."""
    if side is Side.TIME:
        return make_bump(grid, 1.0, lam)
    xi = grid.reciprocal()
    spectrum = SampledFunction(xi, bump(np.sqrt(xi.radius_squared()) / lam))
    return inverse_fourier(spectrum, grid)


def scenario_equivalence(
    pairs, side: Side = Side.TIME, lam_window=None, count: int | None = None, grid: Grid | None = None,
    tol: Tolerances = DEFAULTS, threads: int = 1,
) -> ScenarioResult:
    """Ratio of ``M^{p,q}`` to ``FL^q`` (time support) or ``L^p`` (frequency support).

    The supports stay inside the unit ball for every ``lam`` of the window, so
    the ratio should stay in a band independent of ``lam``; the verdict bounds
    the band width ``hi/lo`` by ``tol.equivalence_band``.
    """
    pairs = [(ExponentPair(p, q).p, ExponentPair(p, q).q) for p, q in pairs]
    if not pairs:
        raise InvalidParam("need at least one exponent pair")
    if lam_window is None:
        lam_window = tol.equivalence_time_window if side is Side.TIME else tol.equivalence_frequency_window
    lo, hi = lam_window
    if side is Side.TIME and lo < 1 or side is Side.FREQUENCY and hi > 1:
        raise InvalidParam("the family must keep its support inside the unit ball")
    count = count or tol.equivalence_points
    grid = grid or DEFAULT_GRIDS[("equivalence", side)]
    lams = np.geomspace(lo, hi, count) if count > 1 else np.array([float(lo)])

    def job(lam: float):
        f = bump_family(side, grid, lam)
        return equivalence_reports(f, pairs, side, 1.0, tail_tol=tol.equivalence_tail)

    if threads > 1 and lams.size > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(job, lams.tolist()))
    else:
        reports = [job(lam) for lam in lams.tolist()]
    family = Family.BUMP_TIME if side is Side.TIME else Family.BUMP_FREQUENCY
    result = ScenarioResult(f"equivalence/{side.value}")
    for i, (p, q) in enumerate(pairs):
        ratios = [rep[i].ratio for rep in reports]
        band = EquivalenceBand(p, q, side, min(ratios), max(ratios))
        tag = f"{result.name}/{_tag(p=p, q=q)}"
        points = tuple((float(lam), float(r)) for lam, r in zip(lams, ratios))
        result.sweeps.append(SweepRecord(f"{tag}/ratio", family, Engine.NUMERIC, p, q, points, None))
        result.bands.append(band)
        detail = f"band [{band.lo:.6g}, {band.hi:.6g}]"
        result.verdicts.append(compare(f"{tag}/band", band.width, tol.equivalence_band, Relation.AT_MOST, 0.0,
                                       Engine.NUMERIC, detail=detail))
    return result
