"""Privacy amplification by Poisson subsampling.

The operator acts in the remove direction, i.e. on the pair
(λ P_in + (1 - λ) Q, Q). The add direction is obtained only by reversing
the resulting profile.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from lapdp import errors
from lapdp.core import PrivacyProfile


@dataclasses.dataclass(frozen=True)
class SubsampleParams:
    lam: float

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise errors.DegenerateParameterError(f"lambda must lie in (0, 1], got {self.lam}")


def _lam(params) -> float:
    return params.lam if isinstance(params, SubsampleParams) else SubsampleParams(float(params)).lam


def poisson_subsample_profile(prof_in: PrivacyProfile, params) -> PrivacyProfile:
    """ε ↦ λ δ_in(log(1 + (e^ε - 1)/λ)) above log(1 - λ), and 1 - e^ε below."""
    lam = _lam(params)
    if lam == 1.0:
        return prof_in
    seam = math.log1p(-lam)

    def inner(e):
        return np.log1p(np.expm1(e) / lam)

    def func(eps):
        e = np.asarray(eps, dtype=float)
        above = e > seam
        safe = np.where(above, e, seam + 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = lam * np.asarray(prof_in(inner(safe)))
        return np.where(above, val, -np.expm1(np.minimum(e, 0.0)))

    deriv = None
    if prof_in.derivative is not None:
        def deriv(eps):
            e = np.asarray(eps, dtype=float)
            above = e > seam
            safe = np.where(above, e, seam + 1.0)
            x = inner(safe)
            # d/dε of inner(ε) = e^ε / (λ + e^ε - 1) = e^ε / (λ e^x).
            dx = np.exp(safe - x) / lam
            return np.where(above, lam * np.asarray(prof_in.deriv(x)) * dx, -np.exp(np.minimum(e, 0.0)))

    knots = sorted({seam, *[float(np.log1p(lam * np.expm1(k))) for k in prof_in.knots]})
    return PrivacyProfile(
        func=func,
        knots=tuple(knots),
        kind=prof_in.kind,
        derivative=deriv,
        limit=lam * prof_in.tail_limit(),
        reverse_limit=None,
        label=f"subsampled({prof_in.label}, lambda={lam:g})",
    )


def subsampled_reverse_profile(prof_in: PrivacyProfile, params) -> PrivacyProfile:
    """Add-direction curve: the reversal of the subsampled remove-direction curve."""
    return poisson_subsample_profile(prof_in, params).reversed()


def pointwise_two_sided_guarantee(prof_in: PrivacyProfile, params, eps):
    """max of the two directions at ε, with no symmetrized curve."""
    fwd = poisson_subsample_profile(prof_in, params)
    rev = fwd.reversed()
    out = np.maximum(np.asarray(fwd(eps)), np.asarray(rev(eps)))
    return float(out) if np.ndim(eps) == 0 else out
