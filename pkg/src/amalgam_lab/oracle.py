"""Closed-form Gaussian norms, Schrödinger evolution of Gaussians, and exponent tables.

Every value here is for the raw Gaussian window ``exp(-pi|x|^2)``.  The
numerical modulation engine uses the unit-``L^2`` window by default, which
multiplies modulation norms by ``2**(d/4)`` (see :func:`window_l2_scale`).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InvalidParam
from .grid import INF, check_exponent, conjugate, reciprocal


def _pos(name: str, value: float) -> None:
    if not value > 0:
        raise InvalidParam(f"{name} must be positive, got {value}")


def _self_power(x: float, d: int) -> float:
    """``x**(d/(2x))`` with its limit 1 at ``x = inf``."""
    return 1.0 if x == INF else x ** (d / (2 * x))


def window_l2_scale(d: int = 1) -> float:
    """Factor between unit-``L^2`` and raw Gaussian window norms."""
    return 2.0 ** (d / 4)


@dataclass(frozen=True)
class ComplexGaussianParams:
    a: float
    b: float = 0.0
    d: int = 1

    def __post_init__(self):
        _pos("a", self.a)
        if self.d < 1:
            raise InvalidParam(f"dimension must be positive, got {self.d}")


def amalgam_flp_norm_exact(params: ComplexGaussianParams, p: float, q: float) -> float:
    """``||G_(a+ib)||_{W(FL^p, L^q)}`` with the Gaussian window."""
    check_exponent(p)
    check_exponent(q)
    a, b, d = params.a, params.b, params.d
    ip, iq = reciprocal(p), reciprocal(q)
    num = ((a + 1) ** 2 + b**2) ** (d / 2 * (ip - 0.5))
    aq = 1.0 if q == INF else (a * q) ** (d / (2 * q))
    den = _self_power(p, d) * aq * (a * (a + 1) + b**2) ** (d / 2 * (ip - iq))
    return num / den


def amalgam_lp_norm_gaussian_exact(rate: float, p: float, q: float, d: int = 1) -> float:
    """``||exp(-pi*rate|x|^2)||_{W(L^p, L^q)}`` with the Gaussian window.

    The product with a translated window is again a Gaussian, giving
    ``(p(1+rate))^{-d/2p} (q*rate/(1+rate))^{-d/2q}``.
    """
    _pos("rate", rate)
    check_exponent(p)
    check_exponent(q)
    local = 1.0 if p == INF else (p * (1 + rate)) ** (-d / (2 * p))
    glob = 1.0 if q == INF else (q * rate / (1 + rate)) ** (-d / (2 * q))
    return local * glob


def lp_norm_gaussian_exact(rate: float, p: float, d: int = 1) -> float:
    """``||exp(-pi*rate|x|^2)||_{L^p}``."""
    _pos("rate", rate)
    check_exponent(p)
    return 1.0 if p == INF else (p * rate) ** (-d / (2 * p))


def flp_norm_gaussian_exact(rate: float, p: float, d: int = 1) -> float:
    """``||exp(-pi*rate|x|^2)||_{FL^p}``; the transform is ``rate^{-d/2} exp(-pi|xi|^2/rate)``."""
    _pos("rate", rate)
    return rate ** (-d / 2) * lp_norm_gaussian_exact(1 / rate, p, d)


@dataclass(frozen=True)
class GaussianModulationNorm:
    exact: float  # ||phi_lam||_{M^{p,q}}, raw Gaussian window
    expression: float  # the (lam+1)-power expression, equal to `exact` up to a lam-independent factor


def modulation_norm_gaussian_exact(lam: float, p: float, q: float, d: int = 1) -> GaussianModulationNorm:
    """Modulation norm of ``phi_lam = exp(-pi*lam|x|^2)``.

    The transform of ``phi_lam`` is exactly ``G_(lam)``, and with a Gaussian
    window ``||f||_{M^{p,q}} = ||f^||_{W(FL^p, L^q)}``, so the norm equals the
    amalgam formula at ``a = lam, b = 0``.
    """
    _pos("lambda", lam)
    check_exponent(p)
    check_exponent(q)
    exact = amalgam_flp_norm_exact(ComplexGaussianParams(lam, 0.0, d), p, q)
    ip, iq = reciprocal(p), reciprocal(q)
    expression = (lam + 1) ** (d * (ip - 0.5)) / (
        lam ** (d * iq / 2) * (lam**2 + lam) ** ((ip - iq) * d / 2)
    )
    return GaussianModulationNorm(exact, expression)


def conv_gaussian_exact(lam: float, d: int = 1) -> tuple[float, float]:
    """``phi_lam * phi_lam = scale * phi_{new}``; returns ``(scale, new)``."""
    _pos("lambda", lam)
    return (2 * lam) ** (-d / 2), lam / 2


def product_gaussian_exact(lam: float) -> float:
    _pos("lambda", lam)
    return 2 * lam


@dataclass(frozen=True)
class SchrodingerGaussianState:
    """Reciprocal parameters ``1/(lam^-2 + 4 pi i t) = a + ib`` of the evolved Gaussian."""

    lam: float
    t: float

    def __post_init__(self):
        _pos("lambda", self.lam)

    @property
    def _den(self) -> float:
        return self.lam**-4 + (4 * math.pi * self.t) ** 2

    @property
    def a(self) -> float:
        return self.lam**-2 / self._den

    @property
    def b(self) -> float:
        return -4 * math.pi * self.t / self._den


@dataclass(frozen=True)
class SchrodingerGaussian:
    prefactor: float
    params: ComplexGaussianParams  # u(lam^2 t, lam x) = prefactor * G_(params)(x)
    state: SchrodingerGaussianState


def schrodinger_gaussian_exact(lam: float, t: float, d: int = 1) -> SchrodingerGaussian:
    """Evolution of ``u_0(lam x) = exp(-pi lam^2 |x|^2)`` in the dilated frame."""
    _pos("lambda", lam)
    return SchrodingerGaussian(
        lam ** (-d),
        ComplexGaussianParams(lam**-2, 4 * math.pi * t, d),
        SchrodingerGaussianState(lam, t),
    )


def schrodinger_mpq_norm_exact(lam: float, t: float, p: float, q: float, d: int = 1) -> float:
    """``||u(lam^2 t, lam .)||_{M^{p,q}}`` with the raw Gaussian window.

    The transform of ``lam^-d G_(c)`` is ``lam^-d (1/c)^{d/2} G_(1/c)``, so the
    norm is ``lam^-d (a^2+b^2)^{d/4} ||G_(a+ib)||_{W(FL^p,L^q)}``.
    """
    st = SchrodingerGaussianState(lam, t)
    a, b = st.a, st.b
    return lam ** (-d) * (a * a + b * b) ** (d / 4) * amalgam_flp_norm_exact(
        ComplexGaussianParams(a, b, d), p, q
    )


# --- predicted exponents -----------------------------------------------------


class Scenario(enum.Enum):
    DIL_SMALL_UPPER = "dil_small_upper"  # W(L^p,L^q), lam -> 0, sharp upper bound
    DIL_LARGE_UPPER = "dil_large_upper"  # lam -> inf
    DIL_SMALL_LOWER = "dil_small_lower"
    DIL_LARGE_LOWER = "dil_large_lower"
    DIL_SMALL_WEAK = "dil_small_weak"
    DIL_LARGE_WEAK = "dil_large_weak"
    DIL_GAUSS_SMALL = "dil_gauss_small"
    DIL_GAUSS_LARGE = "dil_gauss_large"
    WITNESS_SMALL = "witness_small"
    WITNESS_LARGE = "witness_large"
    GAUSS_MPQ_SMALL = "gauss_mpq_small"
    GAUSS_MPQ_LARGE = "gauss_mpq_large"
    CONV_SMALL = "conv_small"
    CONV_LARGE = "conv_large"
    PRODUCT_SMALL = "product_small"
    PRODUCT_LARGE = "product_large"
    SCHRO_DECAY = "schro_decay"
    SCHRO_DATA_SMALL = "schro_data_small"
    SCHRO_EVOLVED_SMALL = "schro_evolved_small"


class Relation(enum.Enum):
    EQUAL = "=="
    AT_MOST = "<="  # measured exponent must not exceed the value
    AT_LEAST = ">="


@dataclass(frozen=True)
class ExponentPrediction:
    scenario: Scenario
    value: float
    relation: Relation = Relation.EQUAL


def theoretical_exponents(
    scenario: Scenario, p: float = 2.0, q: float = 2.0, d: int = 1, eps: float = 0.0
) -> ExponentPrediction:
    """Predicted scaling exponent for ``scenario``.

    Dilation scenarios use ``f_lam(x) = f(lam x)`` on ``W(L^p, L^q)``; Gaussian
    modulation scenarios use ``phi_lam``; the Schrödinger decay is in ``t``.
    """
    check_exponent(p)
    check_exponent(q)
    ip, iq = reciprocal(p), reciprocal(q)
    hi, lo = max(ip, iq), min(ip, iq)
    S = Scenario
    table = {
        # bounds on the exponent alpha with ||f_lam|| <~ lam^alpha ||f||
        S.DIL_SMALL_UPPER: (-d * hi, Relation.AT_LEAST),
        S.DIL_LARGE_UPPER: (-d * lo, Relation.AT_MOST),
        S.DIL_SMALL_LOWER: (-d * lo, Relation.AT_MOST),
        S.DIL_LARGE_LOWER: (-d * hi, Relation.AT_LEAST),
        S.DIL_SMALL_WEAK: (-d * (ip + iq), Relation.AT_LEAST),
        S.DIL_LARGE_WEAK: (d * (1 - ip - iq), Relation.AT_MOST),
        S.DIL_GAUSS_SMALL: (-d * iq, Relation.EQUAL),
        S.DIL_GAUSS_LARGE: (-d * ip, Relation.EQUAL),
        S.WITNESS_SMALL: (-ip + eps, Relation.EQUAL),
        S.WITNESS_LARGE: (-iq - eps, Relation.EQUAL),
        S.GAUSS_MPQ_SMALL: (-d * ip / 2, Relation.EQUAL),
        S.GAUSS_MPQ_LARGE: (-d / 2 * (1 - iq), Relation.EQUAL),
        S.CONV_SMALL: (-(1 + ip) * d / 2, Relation.EQUAL),
        S.CONV_LARGE: (-d * (1 - iq / 2), Relation.EQUAL),
        S.PRODUCT_SMALL: (-d * ip / 2, Relation.EQUAL),
        S.PRODUCT_LARGE: (-d / 2 * (1 - iq), Relation.EQUAL),
        S.SCHRO_DECAY: (-d * (0.5 - ip), Relation.EQUAL),
        S.SCHRO_DATA_SMALL: (-d * reciprocal(conjugate(p)), Relation.EQUAL),
        S.SCHRO_EVOLVED_SMALL: (-d * ip, Relation.EQUAL),
    }
    value, rel = table[scenario]
    return ExponentPrediction(scenario, value, rel)
