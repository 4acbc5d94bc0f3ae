"""Closed-form profiles and Rényi curves of the Gaussian and randomized response mechanisms."""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from lapdp import errors
from lapdp.core import FLOOR, DiscretePair, PrivacyProfile, RenyiCurve, rho_from_moment


def _check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not kappa > 0.0 or not math.isfinite(kappa):
        raise errors.DegenerateParameterError(f"kappa must be positive and finite, got {kappa}")
    return kappa


def _check_rr(eps0: float, delta0: float):
    eps0, delta0 = float(eps0), float(delta0)
    if not eps0 >= 0.0 or not math.isfinite(eps0):
        raise errors.DegenerateParameterError(f"eps0 must be >= 0 and finite, got {eps0}")
    if not 0.0 <= delta0 <= 1.0:
        raise errors.DegenerateParameterError(f"delta0 must lie in [0, 1], got {delta0}")
    return eps0, delta0


# ---------------------------------------------------------------------------
# Gaussian mechanism, parametrized by κ = Δ² / (2σ²).


def gaussian_profile(kappa: float, eps):
    """δ(ε) = Φ̄((ε-κ)/√(2κ)) - e^ε Φ̄((ε+κ)/√(2κ)), evaluated in log space."""
    kappa = _check_kappa(kappa)
    e = np.asarray(eps, dtype=float)
    s = math.sqrt(2.0 * kappa)
    a = (e - kappa) / s
    b = (e + kappa) / s
    la = special.log_ndtr(-a)
    lb = special.log_ndtr(-b)
    # For a > 0 the exponent ε + log Φ̄(b) - log Φ̄(a) equals a ratio of scaled
    # complementary error functions, which avoids cancelling two large logs.
    a_pos = np.maximum(a, 0.0) / math.sqrt(2.0)
    b_pos = np.maximum(b, 0.0) / math.sqrt(2.0)
    r_tail = np.log(special.erfcx(b_pos)) - np.log(special.erfcx(a_pos))
    r = np.minimum(np.where(a > 0.0, r_tail, e + lb - la), 0.0)
    out = -np.exp(la) * np.expm1(r)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(eps) == 0 else out


def gaussian_profile_derivative(kappa: float, eps):
    """δ'(ε) = -e^ε Φ̄((ε+κ)/√(2κ))."""
    kappa = _check_kappa(kappa)
    e = np.asarray(eps, dtype=float)
    s = math.sqrt(2.0 * kappa)
    out = -np.exp(e + special.log_ndtr(-(e + kappa) / s))
    return float(out) if np.ndim(eps) == 0 else out


def gaussian_curve(kappa: float) -> PrivacyProfile:
    """Profile of the Gaussian mechanism as a PrivacyProfile (floor when κ = 0)."""
    if float(kappa) == 0.0:
        return FLOOR
    kappa = _check_kappa(kappa)

    def func(e):
        return gaussian_profile(kappa, e)

    def deriv(e):
        return gaussian_profile_derivative(kappa, e)

    return PrivacyProfile(
        func=func, knots=(), kind="analytic", reverse_func=func,
        derivative=deriv, reverse_derivative=deriv,
        limit=0.0, reverse_limit=0.0, label=f"gaussian(kappa={kappa:g})",
    )


def gaussian_renyi(kappa: float, q):
    """ρ_q = κ q for the Gaussian mechanism (any complex q off {0, 1})."""
    kappa = _check_kappa(kappa)
    qc = complex(q)
    if qc == 0.0 or qc == 1.0:
        raise errors.SingularOrderError(f"order q={qc} is singular")
    return kappa * q


def gaussian_renyi_curve(kappa: float) -> RenyiCurve:
    """Moment E_q = exp((q-1) κ q); entire in q."""
    kappa = _check_kappa(kappa)
    return RenyiCurve(
        moment=lambda q: np.exp((np.asarray(q, dtype=complex) - 1.0) * kappa * np.asarray(q, dtype=complex)),
        roc=(-math.inf, math.inf),
        label=f"gaussian(kappa={kappa:g})",
        log_moment=lambda q: (np.asarray(q, dtype=complex) - 1.0) * kappa * np.asarray(q, dtype=complex),
    )


# ---------------------------------------------------------------------------
# Randomized response with a δ0 failure event.


def rr_profile(eps0: float, delta0: float, t):
    """Profile of randomized response with parameters (ε0, δ0).

    δ0 for t > ε0, 1 - (e^t + 1)(1 - δ0)/(e^ε0 + 1) on (-ε0, ε0], and
    1 - e^t (1 - δ0) for t ≤ -ε0.
    """
    eps0, delta0 = _check_rr(eps0, delta0)
    tt = np.asarray(t, dtype=float)
    mid = 1.0 - (np.exp(tt) + 1.0) * (1.0 - delta0) / (math.exp(eps0) + 1.0)
    left = 1.0 - np.exp(tt) * (1.0 - delta0)
    out = np.where(tt > eps0, delta0, np.where(tt > -eps0, mid, left))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(t) == 0 else out


def rr_profile_derivative(eps0: float, delta0: float, t):
    """Left derivative of rr_profile."""
    eps0, delta0 = _check_rr(eps0, delta0)
    tt = np.asarray(t, dtype=float)
    et = np.exp(np.minimum(tt, eps0))
    out = np.where(tt > eps0, 0.0,
                   np.where(tt > -eps0, -et * (1.0 - delta0) / (math.exp(eps0) + 1.0), -et * (1.0 - delta0)))
    return float(out) if np.ndim(t) == 0 else out


def rr_pair(eps0: float, delta0: float) -> DiscretePair:
    """Four-outcome pair realizing the (ε0, δ0) randomized response profile."""
    eps0, delta0 = _check_rr(eps0, delta0)
    a = (1.0 - delta0) / (1.0 + math.exp(eps0))
    b = (1.0 - delta0) * math.exp(eps0) / (1.0 + math.exp(eps0))
    p = np.array([delta0, b, a, 0.0])
    q = np.array([0.0, a, b, delta0])
    return DiscretePair(p, q)


def rr_curve(eps0: float, delta0: float) -> PrivacyProfile:
    eps0, delta0 = _check_rr(eps0, delta0)

    def func(t):
        return rr_profile(eps0, delta0, t)

    def deriv(t):
        return rr_profile_derivative(eps0, delta0, t)

    knots = (0.0,) if eps0 == 0.0 else (-eps0, eps0)
    return PrivacyProfile(
        func=func, knots=knots, kind="analytic", reverse_func=func,
        derivative=deriv, reverse_derivative=deriv,
        limit=delta0, reverse_limit=delta0,
        label=f"randomized_response(eps0={eps0:g}, delta0={delta0:g})",
    )


def dominating_profile_for_point_dp(eps0: float, delta0: float) -> PrivacyProfile:
    """Smallest profile dominating every mechanism satisfying (ε0, δ0)-DP."""
    eps0, delta0 = _check_rr(eps0, delta0)
    if eps0 == 0.0 and delta0 == 0.0:
        return FLOOR
    return rr_curve(eps0, delta0)


def _rr_moment(eps0: float, q):
    """E_q = (e^ε0 e^{-q ε0} + e^{q ε0}) / (1 + e^ε0) as a complex log-sum-exp."""
    q = np.asarray(q, dtype=complex)
    w1 = -math.log1p(math.exp(-eps0))  # log(e^ε0 / (1 + e^ε0))
    w2 = -math.log1p(math.exp(eps0))   # log(1 / (1 + e^ε0))
    a = w1 - q * eps0
    b = w2 + q * eps0
    shift = np.maximum(a.real, b.real)
    return shift, np.exp(a - shift) + np.exp(b - shift)


def rr_renyi(eps0: float, q):
    """Rényi divergence of pure randomized response on the principal branch."""
    eps0, _ = _check_rr(eps0, 0.0)
    qc = complex(q)
    if qc.real in (0.0, 1.0):
        raise errors.SingularOrderError(f"order q={qc} is singular")
    shift, s = _rr_moment(eps0, qc)
    log_e = complex(shift + np.log(s))
    if qc.imag == 0.0:
        return log_e.real / (qc.real - 1.0)
    return log_e / (qc - 1.0)


def rr_renyi_curve(eps0: float) -> RenyiCurve:
    eps0, _ = _check_rr(eps0, 0.0)

    def moment(q):
        shift, s = _rr_moment(eps0, q)
        return np.exp(shift) * s

    def log_moment(q):
        shift, s = _rr_moment(eps0, q)
        return shift + np.log(s)

    return RenyiCurve(moment=moment, roc=(-math.inf, math.inf),
                      label=f"randomized_response(eps0={eps0:g})", log_moment=log_moment)


def renyi_rho(curve: RenyiCurve, q):
    return rho_from_moment(curve.E(q), q)
