"""Brute-force and grid accountants used to cross-check the analytic routes."""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Optional, Sequence

import numpy as np
from scipy import signal, special

from lapdp import errors
from lapdp.core import (
    MERGE_TOL,
    PLD,
    DiscretePair,
    GridPart,
    PrivacyProfile,
    RenyiCurve,
    profile_from_pld,
)

SUPPORT_CAP = 10 ** 6
_LATTICE_SLACK = 1e-9
_TAIL_TRIM = 1e-30
_DIRECT_LIMIT = 2_000_000


# ---------------------------------------------------------------------------
# Product pairs and PLD convolution.


def product_pair(pairs: Sequence[DiscretePair], cap: int = SUPPORT_CAP) -> DiscretePair:
    """Outer product of the pairs, outcome order row-major in the input order."""
    if not pairs:
        raise ValueError("need at least one pair")
    size = math.prod(pr.size for pr in pairs)
    if size > cap:
        raise errors.SupportOverflowError(f"product support {size} exceeds the cap {cap}")
    p, q = pairs[0].p, pairs[0].q
    for pr in pairs[1:]:
        p = np.outer(p, pr.p).ravel()
        q = np.outer(q, pr.q).ravel()
    return DiscretePair(p, q)


def _lattice_index(z_min: float, step: float) -> int:
    j = z_min / step
    r = round(j)
    if abs(j - r) > 1e-6:
        raise errors.GridMismatchError(f"grid origin {z_min!r} is not on the lattice of step {step!r}")
    return int(r)


def _combine_inf(a: float, b: float) -> float:
    # Same as 1 - (1-a)(1-b) without the cancellation for small masses.
    return a + b - a * b


def _convolve_atoms(a: PLD, b: PLD, cap: int) -> PLD:
    if a.z.size * b.z.size > cap:
        raise errors.SupportOverflowError(
            f"{a.z.size} x {b.z.size} atoms exceeds the cap {cap}; discretize first")
    z = (a.z[:, None] + b.z[None, :]).ravel()
    m = (a.mass[:, None] * b.mass[None, :]).ravel()
    inf = _combine_inf(a.mass_pos_inf, b.mass_pos_inf)
    return PLD.from_atoms(z, m, mass_pos_inf=inf, merge_tol=MERGE_TOL,
                          mass_error=a.mass_error + b.mass_error)


def _trim(masses: np.ndarray, tiny: float):
    """Indices [i0, i1) outside which the cumulative mass is below tiny."""
    c = np.cumsum(masses)
    i0 = int(np.searchsorted(c, tiny, side="right"))
    r = np.cumsum(masses[::-1])
    i1 = masses.size - int(np.searchsorted(r, tiny, side="right"))
    if i1 <= i0:
        return 0, masses.size
    return i0, i1


def _lattice_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Direct sum over nonzero cells when sparse, FFT with negatives clipped otherwise."""
    ia, ib = np.flatnonzero(a), np.flatnonzero(b)
    if ia.size * ib.size <= _DIRECT_LIMIT:
        idx = (ia[:, None] + ib[None, :]).ravel()
        w = (a[ia][:, None] * b[ib][None, :]).ravel()
        return np.bincount(idx, weights=w, minlength=a.size + b.size - 1)
    conv = signal.fftconvolve(a, b)
    return np.where(conv < 0.0, 0.0, conv)


def _convolve_grids(a: PLD, b: PLD, trim: float) -> PLD:
    if a.z.size or b.z.size:
        raise errors.GridMismatchError("grid convolution needs pure-grid PLDs; discretize first")
    ga, gb = a.grid, b.grid
    if not math.isclose(ga.step, gb.step, rel_tol=1e-9):
        raise errors.GridMismatchError(f"grid steps differ: {ga.step!r} vs {gb.step!r}")
    step = ga.step
    j0 = _lattice_index(ga.z_min, step) + _lattice_index(gb.z_min, step)
    conv = _lattice_convolve(ga.masses, gb.masses)
    inf = _combine_inf(a.mass_pos_inf, b.mass_pos_inf)
    target = float(ga.masses.sum()) * float(gb.masses.sum())
    total = float(conv.sum())
    error = abs(total - target)
    if total > 0:
        conv *= target / total
    if trim > 0:
        i0, i1 = _trim(conv, trim)
        low, high = float(conv[:i0].sum()), float(conv[i1:].sum())
        conv = conv[i0:i1].copy()
        # Low tail moves up into the first kept cell; high tail goes to +∞.
        conv[0] += low
        inf += high
        j0 += i0
    finite = 1.0 - inf
    s = float(conv.sum())
    if s > 0:
        error += abs(s - finite)
        conv *= finite / s
    grid = GridPart(j0 * step, step, conv)
    return PLD(np.empty(0), np.empty(0), grid, inf, a.mass_error + b.mass_error + error)


def convolve_plds(a: PLD, b: PLD, cap: int = SUPPORT_CAP, trim: float = _TAIL_TRIM) -> PLD:
    """PLD of Z_1 + Z_2 for independent privacy losses.

    Atom-only inputs are convolved exactly. Grid inputs must share a step
    and lattice; they are convolved by FFT with negatives clipped, and the
    renormalization is recorded in mass_error.
    """
    if a.grid is None and b.grid is None:
        return _convolve_atoms(a, b, cap)
    if a.grid is None or b.grid is None:
        raise errors.GridMismatchError("cannot convolve an atom PLD with a grid PLD; discretize first")
    return _convolve_grids(a, b, trim)


def discretize(pld: PLD, step: float) -> PLD:
    """Rounds every finite location up to the lattice j * step.

    Rounding up never decreases δ, so the result upper-bounds the input
    profile. Points already on the lattice stay put.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    z, m = pld.support()
    if z.size == 0:
        return PLD(np.empty(0), np.empty(0), GridPart(0.0, step, np.zeros(1)), pld.mass_pos_inf,
                   pld.mass_error)
    idx = np.ceil(z / step - _LATTICE_SLACK).astype(np.int64)
    j0 = int(idx.min())
    masses = np.bincount(idx - j0, weights=m)
    return PLD(np.empty(0), np.empty(0), GridPart(j0 * step, step, masses), pld.mass_pos_inf,
               pld.mass_error)


def gaussian_grid_pld(kappa: float, step: float, n_std: float = 40.0) -> PLD:
    """N(κ, 2κ) binned onto centered lattice cells; tails beyond n_std go to the edges.

    The lower tail joins the first cell and the upper tail goes to +∞.
    """
    sd = math.sqrt(2.0 * kappa)
    lo = kappa - n_std * sd
    hi = kappa + n_std * sd
    j0, j1 = math.floor(lo / step), math.ceil(hi / step)
    centers = step * np.arange(j0, j1 + 1)
    edges = np.concatenate([centers - 0.5 * step, [centers[-1] + 0.5 * step]])
    cdf = special.ndtr((edges - kappa) / sd)
    masses = np.diff(cdf)
    masses[0] += cdf[0]
    upper = float(special.ndtr(-(edges[-1] - kappa) / sd))
    masses *= (1.0 - upper) / masses.sum()
    return PLD(np.empty(0), np.empty(0), GridPart(j0 * step, step, masses), upper)


@dataclasses.dataclass(frozen=True)
class GridAccountantResult:
    """Output of grid_accountant.

    deltas: δ at each requested ε.
    error_bound: Heuristic shift in ε from lattice rounding (k · step), 0 for
      exact atom convolution.
    mass_error: Total renormalization applied during convolution.
    pld: The composed PLD.
    """

    deltas: np.ndarray
    error_bound: float
    mass_error: float
    pld: PLD


def _power(kernel: PLD, k: int, cap: int) -> PLD:
    result: Optional[PLD] = None
    base = kernel
    while k:
        if k & 1:
            result = base if result is None else convolve_plds(result, base, cap)
        k >>= 1
        if k:
            base = convolve_plds(base, base, cap)
    return result


def compose_pld(kernel: PLD, k: int, step: Optional[float] = None, cap: int = SUPPORT_CAP) -> PLD:
    """k-fold self-convolution; exact for atom kernels when step is None."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be at least 1")
    if step is not None:
        kernel = discretize(kernel, step)
    elif kernel.grid is not None and kernel.z.size:
        kernel = discretize(kernel, kernel.grid.step)
    return _power(kernel, k, cap)


def grid_accountant(kernel: PLD, k: int, eps_grid, step: Optional[float] = None,
                    cap: int = SUPPORT_CAP) -> GridAccountantResult:
    """δ of the k-fold composition at each ε in eps_grid."""
    composed = compose_pld(kernel, k, step, cap)
    eps = np.asarray(eps_grid, dtype=float)
    deltas = np.asarray(profile_from_pld(composed, eps), dtype=float)
    used = composed.grid.step if composed.grid is not None else 0.0
    return GridAccountantResult(deltas, int(k) * used, composed.mass_error, composed)


# ---------------------------------------------------------------------------
# Dominance.


class Ordering(enum.Enum):
    DOMINATES = "dominates"
    DOMINATED = "dominated"
    CROSSING = "crossing"


@dataclasses.dataclass(frozen=True)
class DominanceResult:
    ordering: Ordering
    witness: Optional[float] = None

    def __str__(self):
        if self.ordering is Ordering.CROSSING:
            return f"crossing({self.witness:.17g})"
        return self.ordering.value


def check_dominance(delta1: PrivacyProfile, delta2: PrivacyProfile, eps_grid,
                    tol: float = 1e-14) -> DominanceResult:
    """Pointwise ordering of two profiles on a grid.

    DOMINATES means δ1 ≥ δ2 everywhere (ties included), DOMINATED means
    δ1 ≤ δ2 with a strict gap somewhere. Knots of both profiles inside the
    grid range are added, which makes the check exact for discrete pairs
    since their profiles are piecewise linear in e^ε between knots.
    """
    eps = np.asarray(eps_grid, dtype=float).ravel()
    lo, hi = float(eps.min()), float(eps.max())
    knots = [k for k in (*delta1.knots, *delta2.knots) if lo <= k <= hi]
    eps = np.unique(np.concatenate([eps, knots]))
    d = np.asarray(delta1(eps), dtype=float) - np.asarray(delta2(eps), dtype=float)
    below = d < -tol
    above = d > tol
    if not below.any():
        return DominanceResult(Ordering.DOMINATES)
    if not above.any():
        return DominanceResult(Ordering.DOMINATED)
    # Witness: first grid point where the sign differs from the first strict sign.
    strict = np.flatnonzero(below | above)
    first_sign = above[strict[0]]
    flip = strict[above[strict] != first_sign][0]
    return DominanceResult(Ordering.CROSSING, float(eps[flip]))


def check_renyi_dominance(c1: RenyiCurve, c2: RenyiCurve, q_grid, tol: float = 1e-12) -> bool:
    """True iff ρ1(q) ≤ ρ2(q) + tol at every grid order (ρ = +∞ allowed)."""
    for q in np.asarray(q_grid, dtype=float).ravel():
        r1 = float(np.real(c1.rho(q)))
        r2 = float(np.real(c2.rho(q)))
        if r1 == math.inf:
            if r2 != math.inf:
                return False
            continue
        if not r1 <= r2 + tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Random instances.


def random_pair(rng: np.random.Generator, n: Optional[int] = None,
                zero_prob: float = 0.2) -> DiscretePair:
    """Dirichlet-uniform pair with 3 to 5 outcomes.

    Each coordinate of p and of q is zeroed with probability zero_prob, so
    one-sided absolute continuity shows up regularly. At least one
    coordinate of each vector stays positive.
    """
    n = int(rng.integers(3, 6)) if n is None else int(n)
    vecs = []
    for _ in range(2):
        v = rng.dirichlet(np.ones(n))
        mask = rng.random(n) < zero_prob
        if mask.all():
            mask[rng.integers(n)] = False
        v = np.where(mask, 0.0, v)
        vecs.append(v / v.sum())
    return DiscretePair(vecs[0], vecs[1])
