"""Core objects: (ε, δ) guarantees, privacy profiles, PLDs and Rényi curves.

A privacy profile is the hockey-stick curve

    δ(ε) = sup_S P(S) - e^ε Q(S) = Σ max(0, p - e^ε q)

of an ordered pair (P, Q). It is evaluated left-continuously at knots. A
privacy loss distribution (PLD) is the law of Z = log(P/Q) under P, with
possible mass at +∞ where Q vanishes.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional, Sequence

import numpy as np

from lapdp import errors

MERGE_TOL = 1e-12
MASS_TOL = 1e-12

ArrayFn = Callable[[np.ndarray], np.ndarray]


def floor_profile(eps):
    """The smallest valid profile, max(0, 1 - e^ε) (identical distributions)."""
    eps = np.asarray(eps, dtype=float)
    return np.maximum(0.0, -np.expm1(np.minimum(eps, 0.0))) + 0.0


def _floor_derivative(eps):
    eps = np.asarray(eps, dtype=float)
    return np.where(eps <= 0.0, -np.exp(np.minimum(eps, 0.0)), 0.0)


def _as_output(x, like):
    if np.ndim(like) == 0:
        return float(np.asarray(x).reshape(()))
    return np.asarray(x)


@dataclasses.dataclass(frozen=True)
class EpsDelta:
    """A point (ε, δ) of a privacy profile; ε may be negative."""

    epsilon: float
    delta: float

    def __post_init__(self):
        if not math.isfinite(self.epsilon):
            raise errors.DegenerateParameterError(f"epsilon must be finite, got {self.epsilon}")
        if not 0.0 <= self.delta <= 1.0:
            raise errors.DegenerateParameterError(f"delta must lie in [0, 1], got {self.delta}")


@dataclasses.dataclass(frozen=True, eq=False)
class DiscretePair:
    """Two probability vectors on a common finite outcome space.

    Outcomes where both vectors vanish are dropped on construction.
    """

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).ravel()
        q = np.asarray(self.q, dtype=float).ravel()
        if p.shape != q.shape:
            raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
        if np.any(p < 0) or np.any(q < 0) or not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > MASS_TOL or abs(q.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"vectors must sum to 1 (got {p.sum()!r}, {q.sum()!r})")
        keep = (p > 0) | (q > 0)
        object.__setattr__(self, "p", p[keep])
        object.__setattr__(self, "q", q[keep])

    @property
    def size(self) -> int:
        return self.p.size

    def swapped(self) -> "DiscretePair":
        return DiscretePair(self.q, self.p)

    def knots(self) -> np.ndarray:
        """Finite log-likelihood ratios log(p/q), sorted and unique."""
        both = (self.p > 0) & (self.q > 0)
        return np.unique(np.log(self.p[both]) - np.log(self.q[both]))

    def pld(self) -> "PLD":
        """Privacy loss distribution of log(P/Q) under P."""
        both = (self.p > 0) & (self.q > 0)
        z = np.log(self.p[both]) - np.log(self.q[both])
        m_inf = float(self.p[(self.p > 0) & (self.q == 0)].sum())
        return PLD.from_atoms(z, self.p[both], mass_pos_inf=m_inf)


def profile_from_discrete(pair: DiscretePair, eps):
    """Direct evaluation of Σ max(0, p - e^ε q)."""
    e = np.asarray(eps, dtype=float)
    flat = e.reshape(-1)
    out = np.empty(flat.shape)
    for lo in range(0, flat.size, 4096):
        chunk = flat[lo:lo + 4096]
        diff = pair.p[None, :] - np.exp(chunk)[:, None] * pair.q[None, :]
        out[lo:lo + 4096] = np.maximum(diff, 0.0).sum(axis=1)
    out = np.clip(out, 0.0, 1.0).reshape(e.shape)
    return _as_output(out, eps)


# ---------------------------------------------------------------------------
# Privacy loss distributions.


@dataclasses.dataclass(frozen=True, eq=False)
class GridPart:
    """Masses on the uniform lattice z_min + j * step."""

    z_min: float
    step: float
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float).ravel()
        if not self.step > 0:
            raise errors.InvalidPLDError("grid step must be positive")
        if np.any(m < 0):
            raise errors.InvalidPLDError("grid masses must be non-negative")
        object.__setattr__(self, "masses", m)

    @property
    def points(self) -> np.ndarray:
        return self.z_min + self.step * np.arange(self.masses.size)


@dataclasses.dataclass(frozen=True, eq=False)
class PLD:
    """A privacy loss distribution.

    Attributes:
      z: Sorted finite atom locations.
      mass: Atom masses, same length as z.
      grid: Optional masses on a uniform lattice.
      mass_pos_inf: Mass of the atom at +∞.
      mass_error: Total mass adjustment made by a lossy operation (e.g. FFT
        renormalization). Zero for exact constructions.
    """

    z: np.ndarray
    mass: np.ndarray
    grid: Optional[GridPart] = None
    mass_pos_inf: float = 0.0
    mass_error: float = 0.0

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float).ravel()
        m = np.asarray(self.mass, dtype=float).ravel()
        if z.shape != m.shape:
            raise errors.InvalidPLDError("atom locations and masses differ in length")
        if np.any(~np.isfinite(z)):
            raise errors.InvalidPLDError("atom locations must be finite")
        if np.any(m < 0) or self.mass_pos_inf < 0:
            raise errors.InvalidPLDError("masses must be non-negative")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "mass", m)
        total = self.total_mass
        if abs(total - 1.0) > MASS_TOL:
            raise errors.InvalidPLDError(f"total mass {total!r} differs from 1")

    @classmethod
    def from_atoms(cls, z, mass, mass_pos_inf: float = 0.0, grid: Optional[GridPart] = None,
                   merge_tol: float = MERGE_TOL, mass_error: float = 0.0) -> "PLD":
        """Builds a PLD, sorting atoms and merging locations within merge_tol."""
        z, mass = merge_atoms(z, mass, merge_tol)
        keep = mass > 0
        return cls(z[keep], mass[keep], grid, float(mass_pos_inf), mass_error)

    @property
    def total_mass(self) -> float:
        g = 0.0 if self.grid is None else float(self.grid.masses.sum())
        return float(self.mass.sum()) + g + float(self.mass_pos_inf)

    def support(self):
        """All finite (location, mass) pairs sorted by location."""
        if self.grid is None:
            return self.z, self.mass
        z = np.concatenate([self.z, self.grid.points])
        m = np.concatenate([self.mass, self.grid.masses])
        order = np.argsort(z, kind="stable")
        return z[order], m[order]


def merge_atoms(z, mass, tol: float = MERGE_TOL):
    """Sorts atoms and merges neighbours closer than tol, keeping the first location."""
    z = np.asarray(z, dtype=float).ravel()
    mass = np.asarray(mass, dtype=float).ravel()
    if z.size == 0:
        return z, mass
    order = np.argsort(z, kind="stable")
    z, mass = z[order], mass[order]
    new_cluster = np.empty(z.size, dtype=bool)
    new_cluster[0] = True
    new_cluster[1:] = np.diff(z) > tol
    ids = np.cumsum(new_cluster) - 1
    merged_mass = np.bincount(ids, weights=mass)
    # The first location of each cluster is kept; clusters are at most a few ulps wide.
    merged_z = z[new_cluster]
    return merged_z, merged_mass


def _hockey_sum(z: np.ndarray, m: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Σ_{z > ε} m (1 - e^{ε - z}) for sorted z, vectorized over ε."""
    if z.size == 0:
        return np.zeros(eps.shape)
    if z.size * eps.size <= 4_000_000:
        diff = -np.expm1(eps[:, None] - z[None, :])
        return (m[None, :] * np.maximum(diff, 0.0)).sum(axis=1)
    # Suffix sums; the e^{-z} weights are accumulated in log space.
    s1 = np.concatenate([np.cumsum(m[::-1])[::-1], [0.0]])
    with np.errstate(divide="ignore"):
        logw = np.log(m) - z
    s2 = np.concatenate([np.logaddexp.accumulate(logw[::-1])[::-1], [-np.inf]])
    idx = np.searchsorted(z, eps, side="right")
    return np.maximum(s1[idx] - np.exp(eps + s2[idx]), 0.0)


def profile_from_pld(pld: PLD, eps):
    """δ(ε) = E[(1 - e^{ε - Z})_+] + Pr[Z = +∞]."""
    e = np.asarray(eps, dtype=float)
    z, m = pld.support()
    out = _hockey_sum(z, m, e.reshape(-1)).reshape(e.shape) + pld.mass_pos_inf
    return _as_output(np.clip(out, 0.0, 1.0), eps)


def reverse_pld(pld: PLD) -> PLD:
    """PLD of the swapped pair: each atom (z, m) maps to (-z, m e^{-z})."""
    mapped = pld.mass * np.exp(-pld.z)
    grid = None
    total = float(mapped.sum())
    if pld.grid is not None:
        g = pld.grid
        pts = g.points
        gm = (g.masses * np.exp(-pts))[::-1]
        grid = GridPart(-pts[-1], g.step, gm)
        total += float(gm.sum())
    if total > 1.0 + 1e-9:
        raise errors.InvalidPLDError(f"reversed masses sum to {total!r} > 1")
    if total > 1.0:
        scale = 1.0 / total
        mapped = mapped * scale
        if grid is not None:
            grid = GridPart(grid.z_min, grid.step, grid.masses * scale)
        total = 1.0
    return PLD.from_atoms(-pld.z, mapped, mass_pos_inf=max(0.0, 1.0 - total), grid=grid)


def profile_from_pld_tails(pld: PLD, eps):
    """Tail form Pr[Z > ε] - e^ε Pr[Z' < -ε], Z' the reversed privacy loss."""
    e = np.asarray(eps, dtype=float).reshape(-1)
    z, m = pld.support()
    rev = reverse_pld(pld)
    zr, mr = rev.support()
    upper = (m[None, :] * (z[None, :] > e[:, None])).sum(axis=1) + pld.mass_pos_inf
    lower = (mr[None, :] * (zr[None, :] < -e[:, None])).sum(axis=1)
    out = np.clip(upper - np.exp(e) * lower, 0.0, 1.0)
    return _as_output(out.reshape(np.shape(eps)), eps)


def _pld_moment(pld: PLD, q: complex) -> complex:
    z, m = pld.support()
    return complex(np.sum(m * np.exp((q - 1.0) * z)))


def renyi_from_pld(pld: PLD, q) -> complex:
    """Rényi moment E_q = E[e^{(q-1) Z}] = ∫ P^q Q^{1-q}.

    Mass at +∞ makes the moment diverge for Re(q) > 1. Outcomes where P
    vanishes but Q does not make it diverge for Re(q) < 0.
    """
    q = complex(q)
    if pld.mass_pos_inf > MASS_TOL:
        if q.real > 1.0 or (q.real == 1.0 and q != 1.0):
            raise errors.DivergenceError(f"moment diverges at q={q}: mass at +inf")
        if q == 1.0:
            return complex(pld.total_mass)
    z, m = pld.support()
    q_covered = float(np.sum(m * np.exp(-z)))
    if q_covered < 1.0 - 1e-9:
        if q.real < 0.0 or (q.real == 0.0 and q != 0.0):
            raise errors.DivergenceError(f"moment diverges at q={q}: Q has mass where P vanishes")
        if q == 0.0:
            return complex(q_covered)
    return _pld_moment(pld, q)


def rho_from_moment(moment, q):
    """ρ_q = log(E_q) / (q - 1) on the principal branch."""
    q = complex(q)
    if q == 0.0 or q == 1.0:
        raise errors.SingularOrderError(f"order q={q} is singular")
    moment = complex(moment)
    if q.imag == 0.0 and moment.imag == 0.0:
        if moment.real == math.inf:
            return math.inf
        if moment.real > 0:
            return math.log(moment.real) / (q.real - 1.0)
    return np.log(moment) / (q - 1.0)


# ---------------------------------------------------------------------------
# Privacy profiles.


@dataclasses.dataclass(frozen=True, eq=False)
class PrivacyProfile:
    """A privacy profile δ(ε) with optional analytic side information.

    Attributes:
      func: Vectorized evaluation of δ on a float array.
      knots: Points where δ is not smooth.
      kind: "analytic", "discrete", "tabulated" or "composed".
      reverse_func: Exact profile of the swapped pair, if known.
      derivative: Vectorized left derivative of δ, if known.
      reverse_derivative: Left derivative of the swapped profile, if known.
      limit: δ(+∞), i.e. the mass of P where Q vanishes.
      reverse_limit: δ_rev(+∞), the mass of Q where P vanishes.
      label: Free-form description.
    """

    func: ArrayFn
    knots: tuple = ()
    kind: str = "analytic"
    reverse_func: Optional[ArrayFn] = None
    derivative: Optional[ArrayFn] = None
    reverse_derivative: Optional[ArrayFn] = None
    limit: Optional[float] = None
    reverse_limit: Optional[float] = None
    label: str = ""

    def __call__(self, eps):
        e = np.asarray(eps, dtype=float)
        d = np.asarray(self.func(e), dtype=float)
        d = np.clip(d, floor_profile(e), 1.0)
        return _as_output(d, eps)

    def deriv(self, eps):
        """Left derivative, from the analytic form or centered differences."""
        e = np.asarray(eps, dtype=float)
        if self.derivative is not None:
            return _as_output(np.asarray(self.derivative(e), dtype=float), eps)
        h = 1e-5
        return _as_output((self(e + h) - self(e - h)) / (2 * h), eps)

    def reversed(self) -> "PrivacyProfile":
        """Profile of the swapped pair, 1 - e^ε + e^ε δ(-ε)."""
        if self.reverse_func is not None:
            rfunc = self.reverse_func
        else:
            def rfunc(e, _f=self):
                e = np.asarray(e, dtype=float)
                return -np.expm1(e) + np.exp(e) * _f(-e)
        rderiv = self.reverse_derivative
        if rderiv is None and self.derivative is not None:
            def rderiv(e, _f=self):
                e = np.asarray(e, dtype=float)
                return -np.exp(e) + np.exp(e) * _f(-e) - np.exp(e) * _f.deriv(-e)
        return PrivacyProfile(
            func=rfunc,
            knots=tuple(sorted(-k for k in self.knots)),
            kind=self.kind,
            reverse_func=self.func,
            derivative=rderiv,
            reverse_derivative=self.derivative,
            limit=self.reverse_limit,
            reverse_limit=self.limit,
            label=f"reversed({self.label})" if self.label else "reversed",
        )

    def tail_limit(self) -> float:
        """δ(+∞), from the stored value or a far-right evaluation."""
        if self.limit is not None:
            return float(self.limit)
        t = max([0.0, *self.knots]) + 200.0
        return float(self(t))

    def reverse_tail_limit(self) -> float:
        if self.reverse_limit is not None:
            return float(self.reverse_limit)
        return self.reversed().tail_limit()

    def survival(self, t):
        """Pr[Z > t] under P, including mass at +∞, computed as δ - δ'."""
        t = np.asarray(t, dtype=float)
        return self(t) - self.deriv(t + 0.0)

    def cdf(self, t):
        """Pr[Z ≤ t], computed as -e^t δ_rev'(-t) to avoid cancellation for t < 0."""
        t = np.asarray(t, dtype=float)
        rev = self.reversed()
        if rev.derivative is None:
            return 1.0 - self.survival(t)
        return -np.exp(t) * rev.deriv(-t)

    def tabulate(self, lo: float, hi: float, max_step: float = 0.01):
        """Samples δ on [lo, hi] at a uniform grid merged with the knots."""
        n = max(2, int(math.ceil((hi - lo) / max_step)) + 1)
        grid = np.linspace(lo, hi, n)
        ks = [k for k in self.knots if lo < k < hi]
        grid = np.unique(np.concatenate([grid, ks]))
        return grid, np.asarray(self(grid))

    @classmethod
    def tabulated(cls, eps, delta, label: str = "") -> "PrivacyProfile":
        """Monotone piecewise-linear profile through samples.

        Left of the table the curve follows 1 - c e^ε, which keeps it a valid
        profile; right of it the last value is held.
        """
        eps = np.asarray(eps, dtype=float)
        delta = np.minimum.accumulate(np.clip(np.asarray(delta, dtype=float), 0.0, 1.0))
        if eps.ndim != 1 or eps.size < 2 or np.any(np.diff(eps) <= 0):
            raise ValueError("table must have at least two increasing ε values")
        c = (1.0 - delta[0]) * math.exp(-eps[0])

        def func(e):
            e = np.asarray(e, dtype=float)
            out = np.interp(e, eps, delta)
            left = e < eps[0]
            out = np.where(left, 1.0 - c * np.exp(np.minimum(e, eps[0])), out)
            return out

        return cls(func=func, knots=tuple(eps.tolist()), kind="tabulated",
                   limit=float(delta[-1]), label=label)

    @classmethod
    def from_pair(cls, pair: DiscretePair, label: str = "") -> "PrivacyProfile":
        """Exact profile of a discrete pair."""
        swapped = pair.swapped()
        pld = pair.pld()
        rpld = swapped.pld()

        def deriv_from(pl):
            def d(e):
                e = np.asarray(e, dtype=float)
                flat = e.reshape(-1)
                # Left derivative: atoms with z ≥ ε contribute -m e^{ε-z}.
                w = (pl.z[None, :] >= flat[:, None]) * np.exp(flat[:, None] - pl.z[None, :])
                return -(w * pl.mass[None, :]).sum(axis=1).reshape(e.shape)
            return d

        return cls(
            func=lambda e: profile_from_discrete(pair, np.asarray(e, dtype=float)),
            knots=tuple(pair.knots().tolist()),
            kind="discrete",
            reverse_func=lambda e: profile_from_discrete(swapped, np.asarray(e, dtype=float)),
            derivative=deriv_from(pld),
            reverse_derivative=deriv_from(rpld),
            limit=pld.mass_pos_inf,
            reverse_limit=rpld.mass_pos_inf,
            label=label or "discrete",
        )

    @classmethod
    def from_pld(cls, pld: PLD, label: str = "") -> "PrivacyProfile":
        """Profile induced by a PLD, with the reversed PLD built lazily."""
        cache = {}

        def rev():
            if "r" not in cache:
                cache["r"] = reverse_pld(pld)
            return cache["r"]

        def deriv_of(get):
            def d(e):
                e = np.asarray(e, dtype=float)
                flat = e.reshape(-1)
                z, m = get().support()
                out = np.empty(flat.shape)
                for lo in range(0, flat.size, 256):
                    ch = flat[lo:lo + 256]
                    w = (z[None, :] >= ch[:, None]) * np.exp(np.minimum(ch[:, None] - z[None, :], 0.0))
                    out[lo:lo + 256] = -(w * m[None, :]).sum(axis=1)
                return out.reshape(e.shape)
            return d

        return cls(
            func=lambda e: profile_from_pld(pld, np.asarray(e, dtype=float)),
            knots=tuple(pld.z.tolist()),
            kind="composed",
            reverse_func=lambda e: profile_from_pld(rev(), np.asarray(e, dtype=float)),
            derivative=deriv_of(lambda: pld),
            reverse_derivative=deriv_of(rev),
            limit=pld.mass_pos_inf,
            reverse_limit=None,
            label=label or "pld",
        )


FLOOR = PrivacyProfile(
    func=floor_profile,
    knots=(0.0,),
    kind="analytic",
    reverse_func=floor_profile,
    derivative=_floor_derivative,
    reverse_derivative=_floor_derivative,
    limit=0.0,
    reverse_limit=0.0,
    label="floor",
)


def reverse_profile(prof: PrivacyProfile) -> PrivacyProfile:
    """Returns ε ↦ 1 - e^ε + e^ε prof(-ε), the profile of the swapped pair."""
    return prof.reversed()


# ---------------------------------------------------------------------------
# Rényi curves.


@dataclasses.dataclass(frozen=True, eq=False)
class RenyiCurve:
    """A Rényi moment q ↦ E_q with the real-part strip where it converges.

    Attributes:
      moment: Vectorized E_q on complex arrays.
      roc: Open interval (lo, hi) of Re(q) where the moment converges.
      label: Free-form description.
      log_moment: Optional log E_q, used by rho to avoid overflow at large q.
    """

    moment: Callable[[np.ndarray], np.ndarray]
    roc: tuple = (-math.inf, math.inf)
    label: str = ""
    log_moment: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def contains(self, re_q: float) -> bool:
        return self.roc[0] < re_q < self.roc[1]

    def E(self, q):
        qa = np.asarray(q, dtype=complex)
        out = np.asarray(self.moment(qa), dtype=complex)
        return complex(out.reshape(())) if np.ndim(q) == 0 else out

    def rho(self, q):
        """ρ_q with +∞ for real orders outside the convergence strip."""
        qc = complex(q)
        if qc == 0.0 or qc == 1.0:
            raise errors.SingularOrderError(f"order q={qc} is singular")
        if not self.contains(qc.real):
            if qc.imag == 0.0 and qc.real > 1.0:
                return math.inf
            raise errors.DivergenceError(f"q={qc} is outside the convergence strip {self.roc}")
        if self.log_moment is not None:
            log_e = complex(np.asarray(self.log_moment(np.asarray(qc))).reshape(()))
            if qc.imag == 0.0:
                return log_e.real / (qc.real - 1.0)
            return log_e / (qc - 1.0)
        return rho_from_moment(self.E(qc), qc)

    @classmethod
    def from_pld(cls, pld: PLD, label: str = "") -> "RenyiCurve":
        z, m = pld.support()
        hi = 1.0 if pld.mass_pos_inf > MASS_TOL else math.inf
        lo = 0.0 if float(np.sum(m * np.exp(-z))) < 1.0 - 1e-9 else -math.inf

        def moment(q):
            q = np.asarray(q, dtype=complex)
            return (m[None, :] * np.exp((q.reshape(-1, 1) - 1.0) * z[None, :])).sum(axis=1).reshape(q.shape)

        def log_moment(q):
            q = np.asarray(q, dtype=complex)
            with np.errstate(divide="ignore"):
                a = np.log(m)[None, :] + (q.reshape(-1, 1) - 1.0) * z[None, :]
            shift = a.real.max(axis=1, keepdims=True)
            out = shift[:, 0] + np.log(np.exp(a - shift).sum(axis=1))
            return out.reshape(q.shape)

        return cls(moment=moment, roc=(lo, hi), label=label or "pld", log_moment=log_moment)


def total_variation(pair: DiscretePair) -> float:
    return float(0.5 * np.abs(pair.p - pair.q).sum())


def as_pair(p: Sequence[float], q: Sequence[float]) -> DiscretePair:
    return DiscretePair(np.asarray(p, dtype=float), np.asarray(q, dtype=float))


# ---------------------------------------------------------------------------
# Trade-off curves of discrete pairs.


def _tradeoff_vertices(pair: DiscretePair):
    """Vertices (α, β) of the Neyman-Pearson curve of testing P against Q.

    A test rejects P on a set S. Outcomes enter S in decreasing order of q/p,
    so the curve is piecewise linear through (P(S), 1 - Q(S)).
    """
    p, q = pair.p, pair.q
    free = p == 0
    pp, qq = p[~free], q[~free]
    order = np.argsort(-(qq / pp), kind="stable")
    alpha = np.concatenate([[0.0], np.cumsum(pp[order])])
    # Suffix sums keep β exactly zero once all Q-mass is rejected.
    beta = np.concatenate([np.cumsum(qq[order][::-1])[::-1], [0.0]])
    alpha[-1] = 1.0
    return alpha, beta


def tradeoff_from_discrete(pair: DiscretePair, alpha):
    """Smallest type II error β at type I error α, randomized tests allowed."""
    a = np.asarray(alpha, dtype=float)
    if np.any((a < 0) | (a > 1)):
        raise ValueError("alpha must lie in [0, 1]")
    xs, ys = _tradeoff_vertices(pair)
    out = np.interp(a, xs, ys)
    return _as_output(out, alpha)


def tradeoff_inverse(pair: DiscretePair, beta):
    """Left-continuous inverse f^{-1}(β) = inf{α : f(α) ≤ β}."""
    b = np.asarray(beta, dtype=float)
    xs, ys = _tradeoff_vertices(pair)
    flat = b.reshape(-1)
    out = np.empty(flat.shape)
    for i, bv in enumerate(flat):
        if ys[0] <= bv:
            out[i] = 0.0
            continue
        j = int(np.argmax(ys <= bv))
        x0, x1, y0, y1 = xs[j - 1], xs[j], ys[j - 1], ys[j]
        out[i] = x1 if y0 == y1 else x0 + (y0 - bv) * (x1 - x0) / (y0 - y1)
    # Interpolation roundoff can leave [0, 1] by an ulp.
    return _as_output(np.clip(out, 0.0, 1.0).reshape(b.shape), beta)


def check_tradeoff_reversal(pair: DiscretePair, grid, tol: float = 1e-9) -> bool:
    """Whether f_{P|Q}^{-1}(β) = f_{Q|P}(β) on the grid."""
    grid = np.asarray(grid, dtype=float)
    lhs = np.asarray(tradeoff_inverse(pair, grid))
    rhs = np.asarray(tradeoff_from_discrete(pair.swapped(), grid))
    return bool(np.all(np.abs(lhs - rhs) <= tol))
