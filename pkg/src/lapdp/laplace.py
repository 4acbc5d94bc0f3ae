"""Bilateral Laplace transforms of privacy profiles and their Bromwich inverse.

For a profile δ of a pair (P, Q) the bilateral transform

    B(s) = ∫ e^{-st} δ(t) dt

is linked to the Rényi moment E_q = ∫ P^q Q^{1-q} by E_q = q(q-1) B(1-q).
Splitting the integral at t = 0 and rewriting the left half through the
reversed profile δ_rev(u) = 1 - e^u + e^u δ(-u) gives

    B(s) = 1/(s(s-1)) + R_δ(s) + R_rev(1-s),   R_h(s) = ∫_0^∞ e^{-st} h(t) dt,

which treats the left tail exactly and continues B analytically past Re(s) = 0.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import warnings
from typing import Callable, Optional

import numpy as np

from lapdp import errors, quadrature
from lapdp.core import PrivacyProfile, RenyiCurve

LIMIT_TOL = 1e-14
_T_HORIZON = 5000.0


@dataclasses.dataclass(frozen=True)
class BromwichConfig:
    """Settings of the Bromwich contour integral.

    Attributes:
      gamma: Real abscissa of the contour in s. The corresponding order is
        q = 1 - gamma.
      omega_max: Fixed truncation of the imaginary range. None doubles the
        range from omega_start until the result settles.
      quad_tol: Absolute tolerance on the recovered δ.
      omega_start: First truncation used by the adaptive schedule.
      omega_cap: Largest truncation the adaptive schedule may reach.
    """

    gamma: float = -1.0
    omega_max: Optional[float] = None
    quad_tol: float = 1e-8
    omega_start: float = 64.0
    omega_cap: float = 2.0 ** 17

    def __post_init__(self):
        if self.gamma in (0.0, 1.0) or not math.isfinite(self.gamma):
            raise errors.SingularOrderError(f"gamma={self.gamma} maps to a singular order")
        if self.omega_max is not None and not self.omega_max >= 10.0:
            raise ValueError(f"omega_max must be >= 10, got {self.omega_max}")
        if not self.quad_tol > 0.0:
            raise ValueError("quad_tol must be positive")


@dataclasses.dataclass(frozen=True)
class ROC:
    """Open interval (lo, hi) of Re(s); empty when lo >= hi."""

    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi

    def __contains__(self, re_s: float) -> bool:
        return self.lo < re_s < self.hi

    def __iter__(self):
        return iter((self.lo, self.hi))


# ---------------------------------------------------------------------------
# Forward transform.


def _limits(prof: PrivacyProfile):
    lim = prof.tail_limit()
    rlim = prof.reverse_tail_limit()
    return (0.0 if lim < LIMIT_TOL else lim), (0.0 if rlim < LIMIT_TOL else rlim)


def _check_admissible(prof: PrivacyProfile, s: complex):
    lim, rlim = _limits(prof)
    if lim > 0.0 and rlim > 0.0:
        raise errors.EmptyROCError(
            f"{prof.label or 'profile'}: both δ(+∞)={lim:g} and δ_rev(+∞)={rlim:g} are positive; "
            "no order has a finite moment")
    if lim > 0.0 and s.real <= 0.0:
        raise errors.DivergenceError(f"Re(s)={s.real:g} outside the strip: δ(+∞)={lim:g} > 0")
    if rlim > 0.0 and s.real >= 1.0:
        raise errors.DivergenceError(f"Re(s)={s.real:g} outside the strip: δ_rev(+∞)={rlim:g} > 0")
    return lim, rlim


def _panel_edges(a: float, b: float, width: float) -> np.ndarray:
    n = max(1, int(math.ceil((b - a) / width)))
    return np.linspace(a, b, n + 1)


def one_sided_transform(h: Callable, s: complex, knots=(), limit: float = 0.0,
                        quad_tol: float = 1e-10) -> complex:
    """∫_0^∞ e^{-st} h(t) dt with h(t) → limit as t → ∞.

    A positive limit is integrated analytically as limit/s and needs
    Re(s) > 0. The remainder is integrated adaptively over [0, max knot]
    and then over doubling panels until both the panel contribution and the
    integrand at its right end fall below quad_tol relative to the total.

    Raises:
      DivergenceError: if the tail does not decay.
    """
    s = complex(s)
    const = 0.0
    if limit > 0.0:
        if s.real <= 0.0:
            raise errors.DivergenceError(f"Re(s)={s.real:g} <= 0 with a non-vanishing tail")
        const = limit / s

    def g(t):
        t = np.asarray(t, dtype=float)
        v = np.asarray(h(t), dtype=float) - limit
        # Log space keeps e^{-st} from overflowing where v is tiny.
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            w = np.sign(v) * np.exp(np.log(np.abs(v)) - s * t)
        return np.where(v == 0.0, 0.0, w)

    width = min(1.0, math.pi / max(1.0, abs(s.imag)))
    pts = sorted({0.0, *[float(k) for k in knots if k > 0.0]})
    total = 0.0 + 0.0j
    sub_tol = 0.01 * quad_tol
    for a, b in zip(pts[:-1], pts[1:]):
        r = quadrature.integrate(g, _panel_edges(a, b, width), abs_tol=sub_tol * abs(total), rel_tol=sub_tol)
        total += r.value
    a = pts[-1]
    length = 1.0
    quiet = 0
    while True:
        b = a + length
        r = quadrature.integrate(g, _panel_edges(a, b, width), abs_tol=sub_tol * abs(total), rel_tol=sub_tol)
        if not np.isfinite(r.value):
            raise errors.DivergenceError(f"tail integral overflowed at t={b:g} (s={s})")
        total += r.value
        end = abs(complex(g(np.array([b]))[0]))
        scale = max(abs(total), 1e-300)
        if abs(r.value) <= quad_tol * scale and end * length <= quad_tol * scale:
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
        a = b
        length = min(2.0 * length, 16.0)
        if a > _T_HORIZON:
            raise errors.DivergenceError(f"tail did not decay by t={a:g} (s={s})")
    return complex(total + const)


def _transform_parts(prof: PrivacyProfile, s: complex, quad_tol: float):
    lim, rlim = _check_admissible(prof, s)
    rev = prof.reversed()
    r_main = one_sided_transform(prof, s, prof.knots, lim, quad_tol)
    r_rev = one_sided_transform(rev, 1.0 - s, rev.knots, rlim, quad_tol)
    return r_main, r_rev


def bilateral_laplace_of_profile(prof: PrivacyProfile, s, quad_tol: float = 1e-10) -> complex:
    """B(s) = ∫ e^{-st} δ(t) dt, continued analytically off its strip.

    Raises:
      SingularOrderError: at the poles s ∈ {0, 1}.
      EmptyROCError: when neither direction is absolutely continuous.
      DivergenceError: when Re(s) lies outside the admissible strip.
    """
    s = complex(s)
    if s == 0.0 or s == 1.0:
        raise errors.SingularOrderError(f"s={s} is a pole of the transform")
    r_main, r_rev = _transform_parts(prof, s, quad_tol)
    return 1.0 / (s * (s - 1.0)) + r_main + r_rev


def renyi_from_profile(prof: PrivacyProfile, q, quad_tol: float = 1e-10) -> complex:
    """Rényi moment E_q = q(q-1) B(1-q) of the pair behind a profile.

    Convert to a divergence with core.rho_from_moment.
    """
    q = complex(q)
    if q == 0.0 or q == 1.0:
        raise errors.SingularOrderError(f"order q={q} is singular")
    r_main, r_rev = _transform_parts(prof, 1.0 - q, quad_tol)
    return 1.0 + q * (q - 1.0) * (r_main + r_rev)


def bilateral_laplace(h: Callable, s, knots=(), quad_tol: float = 1e-10) -> complex:
    """∫ e^{-st} h(t) dt for a function decaying on both sides."""
    s = complex(s)
    right = one_sided_transform(h, s, [k for k in knots if k > 0], 0.0, quad_tol)
    left = one_sided_transform(lambda u: h(-np.asarray(u)), -s, [-k for k in knots if k < 0], 0.0, quad_tol)
    return right + left


def _tail_decays(h: Callable, sigma: float, start: float) -> bool:
    """Whether e^{-σt} h(t) decays to negligible size on [start, ∞)."""
    t = start + np.linspace(0.0, 400.0, 4001)
    with np.errstate(divide="ignore"):
        logv = -sigma * t + np.log(np.abs(np.asarray(h(t), dtype=float)))
    if np.all(np.isneginf(logv)):
        return True
    peak = np.max(logv)
    tail = logv[-400:]
    return bool(np.all(tail < peak - 30.0) and tail[-1] <= tail[0])


def estimate_roc(prof: PrivacyProfile) -> ROC:
    """Strip of Re(s) on which the transform converges.

    The right tail of e^{-st}δ(t) is probed on a logarithmic sweep of
    Re(s) < 0. The branch with δ(+∞) = 0 converges on (σ_min, 0). If only
    the swapped direction vanishes at +∞ the strip is (0, 1), reached
    through the reversed profile. When both δ(+∞) and δ_rev(+∞) are positive
    the interval is empty.
    """
    lim, rlim = _limits(prof)
    if lim > 0.0 and rlim > 0.0:
        return ROC(0.0, 0.0)
    if lim > 0.0:
        return ROC(0.0, 1.0)
    start = max([0.0, *prof.knots])
    lo = -math.inf
    for sigma in -np.logspace(-3, 2.5, 23):
        if not _tail_decays(prof, float(sigma), start):
            lo = float(sigma)
            break
    if lo == -math.inf or lo < -1e-3:
        return ROC(lo, 0.0)
    return ROC(0.0, 0.0)


# ---------------------------------------------------------------------------
# Vectorized moment of a profile for many orders at once.


_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def _composite_nodes(breaks, width):
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        e = _panel_edges(a, b, width)
        mid = 0.5 * (e[1:] + e[:-1])
        half = 0.5 * (e[1:] - e[:-1])
        xs.append((mid[:, None] + half[:, None] * _GL_X[None, :]).ravel())
        ws.append((half[:, None] * _GL_W[None, :]).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def _horizon(h: Callable, limit: float, sigma: float, start: float) -> float:
    """Point beyond which e^{-σt}|h(t) - limit| stays below e^{-42} of its peak.

    The tail is probed in blocks of 16 nats so cheap cases stop early.
    """
    peak = -math.inf
    last_big = start
    quiet = 0
    a = start
    while a < start + 2000.0:
        t = a + np.linspace(0.0, 16.0, 129)
        with np.errstate(divide="ignore"):
            logv = -sigma * t + np.log(np.abs(np.asarray(h(t), dtype=float) - limit))
        finite = np.isfinite(logv)
        if finite.any():
            peak = max(peak, float(logv[finite].max()))
            big = np.nonzero(logv > peak - 42.0)[0]
            if big.size:
                last_big = float(t[big[-1]])
        if peak == -math.inf or t[-1] - last_big > 8.0:
            quiet += 1
            if quiet >= 2:
                return (last_big if peak > -math.inf else start) + 1.0
        else:
            quiet = 0
        a += 16.0
    raise errors.DivergenceError(f"tail does not decay for Re(s)={sigma:g}")


class _FixedRuleTransform:
    """R_h(s) for arrays of s by composite Gauss-Legendre in t."""

    def __init__(self, h: PrivacyProfile, limit: float):
        self.h = h
        self.limit = limit
        self.start = max([0.0, *[k for k in h.knots if k > 0]])
        self.breaks = sorted({0.0, *[float(k) for k in h.knots if k > 0]})

    @functools.lru_cache(maxsize=64)
    def nodes(self, sigma_bucket: float, width: float):
        end = _horizon(self.h, self.limit, sigma_bucket, self.start)
        x, w = _composite_nodes(self.breaks + [end], width)
        vals = np.asarray(self.h(x), dtype=float) - self.limit
        keep = vals != 0.0
        return x[keep], np.sign(vals[keep]), np.log(w[keep] * np.abs(vals[keep]))

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=complex).ravel()
        if s.size == 0:
            return s
        sigma = math.floor(float(s.real.min()) * 4.0) / 4.0
        wmax = float(np.abs(s.imag).max())
        width = 0.25 / 2 ** max(0, math.ceil(math.log2(max(1.0, wmax * 0.25 / 4.0))))
        x, sign, logw = self.nodes(sigma, width)
        out = np.empty(s.shape, dtype=complex)
        for lo in range(0, s.size, 512):
            ch = s[lo:lo + 512]
            with np.errstate(over="ignore", invalid="ignore"):
                out[lo:lo + 512] = np.exp(logw[None, :] - np.outer(ch, x)) @ sign
        if self.limit > 0.0:
            out = out + self.limit / s
        return out


def renyi_curve_from_profile(prof: PrivacyProfile) -> RenyiCurve:
    """Numeric Rényi moment curve of a profile, vectorized over orders.

    The convergence strip in q is (-∞, ∞) when both directions vanish at
    +∞, (0, ∞) when only δ(+∞) = 0 and (-∞, 1) when only δ_rev(+∞) = 0.

    Raises:
      EmptyROCError: when both δ(+∞) and δ_rev(+∞) are positive.
    """
    lim, rlim = _limits(prof)
    if lim > 0.0 and rlim > 0.0:
        raise errors.EmptyROCError(f"{prof.label or 'profile'}: empty region of convergence")
    rev = prof.reversed()
    main = _FixedRuleTransform(prof, lim)
    other = _FixedRuleTransform(rev, rlim)
    lo = 0.0 if rlim > 0.0 else -math.inf
    hi = 1.0 if lim > 0.0 else math.inf

    def moment(q):
        q = np.asarray(q, dtype=complex)
        flat = q.ravel()
        out = 1.0 + flat * (flat - 1.0) * (main(1.0 - flat) + other(flat))
        return out.reshape(q.shape)

    return RenyiCurve(moment=moment, roc=(lo, hi), label=f"numeric({prof.label})")


# ---------------------------------------------------------------------------
# Bromwich inversion.


def _bromwich_integrand(curve: RenyiCurve, eps: float, gamma: float):
    def f(omega):
        omega = np.asarray(omega, dtype=float)
        s = gamma + 1j * np.concatenate([omega, -omega])
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.exp(s * eps) * np.asarray(curve.E(1.0 - s)) / (s * (s - 1.0))
        n = omega.size
        return vals[:n] + vals[n:]
    return f


def _integrate_range(f, a, b, width, tol):
    edges = _panel_edges(a, b, width)
    return quadrature.integrate(f, edges, abs_tol=tol, rel_tol=0.0).value


def profile_from_renyi(curve: RenyiCurve, eps, cfg: BromwichConfig = BromwichConfig()):
    """Recovers δ(ε) from the Rényi moment curve by a Bromwich contour integral.

    δ(ε) = (1/2π) ∫ e^{sε} E_{1-s} / (s(s-1)) dω along s = γ + iω, folded
    onto ω ≥ 0 by conjugate symmetry.

    Raises:
      DivergenceError: if 1 - γ lies outside the curve's convergence strip.
      NonConvergenceError: if the truncation error estimate exceeds quad_tol.
    """
    if np.ndim(eps) > 0:
        return np.array([profile_from_renyi(curve, float(e), cfg) for e in np.ravel(eps)]).reshape(np.shape(eps))
    eps = float(eps)
    gamma = cfg.gamma
    if not curve.contains(1.0 - gamma):
        raise errors.DivergenceError(f"gamma={gamma} maps to q={1 - gamma}, outside {curve.roc}")
    f = _bromwich_integrand(curve, eps, gamma)
    width = math.pi / (4.0 * max(1.0, abs(eps)))
    two_pi = 2.0 * math.pi
    seg_tol = 0.05 * cfg.quad_tol * two_pi
    if cfg.omega_max is not None:
        omega = float(cfg.omega_max)
        half = _integrate_range(f, 0.0, omega / 2.0, width, seg_tol)
        upper = _integrate_range(f, omega / 2.0, omega, width, seg_tol)
        total = half + upper
        if abs(upper) / two_pi > cfg.quad_tol:
            raise errors.NonConvergenceError(
                f"truncation estimate {abs(upper) / two_pi:.3g} exceeds quad_tol at omega_max={omega:g}")
    else:
        omega = cfg.omega_start
        total = _integrate_range(f, 0.0, omega, width, seg_tol)
        quiet = 0
        while True:
            seg = _integrate_range(f, omega, 2.0 * omega, width, seg_tol)
            total += seg
            omega *= 2.0
            if abs(seg) / two_pi < cfg.quad_tol:
                quiet += 1
                if quiet >= 2:
                    break
            else:
                quiet = 0
            if omega >= cfg.omega_cap:
                raise errors.NonConvergenceError(
                    f"no convergence by omega={omega:g}; last change {abs(seg) / two_pi:.3g}")
    value = complex(total) / two_pi
    if abs(value.imag) > 100.0 * cfg.quad_tol:
        warnings.warn(f"imaginary residue {value.imag:.3g} at eps={eps:g}", errors.ImaginaryResidueWarning)
    return float(min(1.0, max(0.0, value.real)))
