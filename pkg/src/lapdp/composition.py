"""Tight composition of privacy profiles.

Two routes are provided. The general route turns the second profile into
its privacy loss kernel δ'' - δ' (a PLD) and integrates the first profile
against it. For mechanisms that are only known to satisfy (ε, δ)-DP, the
dominating randomized response pairs are composed exactly with a book of
weighted atoms.

Adaptive use is a caller contract: the results stay valid when each
mechanism is chosen based on earlier outputs, provided every choice still
satisfies the profile or guarantee passed in for its position.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import special

from lapdp import errors
from lapdp.core import (
    MERGE_TOL,
    PLD,
    GridPart,
    PrivacyProfile,
    merge_atoms,
    profile_from_pld,
    reverse_pld,
)
from lapdp.mechanisms import _check_rr

BOOK_CAP = 2 ** 20
_NEGLIGIBLE = 1e-16


# ---------------------------------------------------------------------------
# Kernel of a profile.


def _one_sided_derivs(prof: PrivacyProfile, k: float):
    """(δ'(k-), δ'(k+)) at a knot."""
    if prof.derivative is not None:
        eta = 1e-13 * max(1.0, abs(k))
        return float(prof.deriv(k)), float(prof.deriv(k + eta))
    h = 1e-6
    left = (3 * prof(k) - 4 * prof(k - h) + prof(k - 2 * h)) / (2 * h)
    right = (-3 * prof(k) + 4 * prof(k + h) - prof(k + 2 * h)) / (2 * h)
    return float(left), float(right)


def _shifted_cdf(prof: PrivacyProfile, x: np.ndarray) -> np.ndarray:
    """Pr[Z ≤ x] for x < 0 and Pr[Z ≤ x] - 1 = -Pr[Z > x] for x ≥ 0.

    Each branch is computed from the side where it carries no cancellation.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    neg = x < 0
    if neg.any():
        out[neg] = prof.cdf(x[neg])
    if (~neg).any():
        xp = x[~neg]
        out[~neg] = -(np.asarray(prof(xp)) - np.asarray(prof.deriv(xp)))
    return out


def _window(prof: PrivacyProfile, limit: float):
    ks = list(prof.knots)
    lo = min([0.0, *ks]) - 1.0
    hi = max([0.0, *ks]) + 1.0
    for _ in range(400):
        if float(_shifted_cdf(prof, np.array([lo]))[0]) <= _NEGLIGIBLE:
            break
        lo -= 1.0
    for _ in range(400):
        if -float(_shifted_cdf(prof, np.array([hi]))[0]) - limit <= _NEGLIGIBLE:
            break
        hi += 1.0
    return lo, hi


def pld_kernel_from_profile(
    prof: PrivacyProfile,
    step: float = 1e-3,
    window: Optional[tuple] = None,
    validate: bool = True,
    tol: float = 1e-6,
) -> PLD:
    """PLD whose density is δ'' - δ' in the sense of distributions.

    Atoms sit at the knots with mass equal to the jump of δ' there. The
    continuous part is binned onto the lattice j * step using exact
    differences of Pr[Z > t] = δ(t) - δ'(t). Mass left of the window is moved
    into the first cell and mass right of it to +∞, so the kernel never
    understates δ.

    Raises:
      ReconstructionError: if the kernel does not reproduce prof within tol.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    limit = prof.tail_limit()
    limit = 0.0 if limit < 1e-15 else limit

    atom_z, atom_m = [], []
    for k in prof.knots:
        left, right = _one_sided_derivs(prof, k)
        jump = right - left
        if jump > 1e-15:
            atom_z.append(float(k))
            atom_m.append(jump)
    atom_z = np.asarray(atom_z)
    atom_m = np.asarray(atom_m)
    continuous = 1.0 - limit - float(atom_m.sum())

    grid = None
    extra_inf = 0.0
    mass_error = 0.0
    if continuous > 1e-13:
        lo, hi = window if window is not None else _window(prof, limit)
        j0 = math.floor(lo / step)
        j1 = math.ceil(hi / step)
        centers = step * np.arange(j0, j1 + 1)
        edges = np.concatenate([centers - 0.5 * step, [centers[-1] + 0.5 * step]])
        g = _shifted_cdf(prof, edges)
        cells = np.diff(g) + ((edges[:-1] < 0) & (edges[1:] >= 0))
        if atom_z.size:
            idx = np.searchsorted(edges, atom_z, side="left") - 1
            inside = (idx >= 0) & (idx < cells.size)
            np.subtract.at(cells, idx[inside], atom_m[inside])
        atoms_below = float(atom_m[atom_z <= edges[0]].sum()) if atom_z.size else 0.0
        atoms_above = float(atom_m[atom_z > edges[-1]].sum()) if atom_z.size else 0.0
        below = max(0.0, float(g[0]) - atoms_below)
        above = max(0.0, -float(g[-1]) - limit - atoms_above)
        cells[0] += below
        # Negligible overflow stays finite so the kernel keeps a vanishing tail.
        if above > 10.0 * _NEGLIGIBLE:
            extra_inf = above
        else:
            cells[-1] += above
        cells = np.where(cells < 0.0, 0.0, cells)
        target = 1.0 - limit - extra_inf - float(atom_m.sum())
        total = float(cells.sum())
        mass_error = abs(total - target)
        if total > 0:
            cells *= target / total
        grid = GridPart(float(centers[0]), step, cells)
    elif atom_m.size:
        scale = (1.0 - limit) / float(atom_m.sum())
        mass_error = abs(scale - 1.0)
        atom_m = atom_m * scale
    kernel = PLD.from_atoms(atom_z, atom_m, mass_pos_inf=limit + extra_inf, grid=grid,
                            mass_error=mass_error)
    if validate:
        _validate_kernel(prof, kernel, tol)
    return kernel


def _validate_kernel(prof: PrivacyProfile, kernel: PLD, tol: float):
    z, _ = kernel.support()
    lo = min(-2.0, float(z.min()) - 1.0) if z.size else -2.0
    hi = max(2.0, float(z.max()) + 1.0) if z.size else 2.0
    pts = np.linspace(lo, hi, 201)
    ks = np.asarray(prof.knots, dtype=float)
    pts = np.concatenate([pts, ks - 1e-3, ks + 1e-3])
    err = np.abs(np.asarray(profile_from_pld(kernel, pts)) - np.asarray(prof(pts)))
    worst = float(err.max())
    if worst > tol:
        at = float(pts[int(err.argmax())])
        raise errors.ReconstructionError(
            f"kernel reproduces the profile only to {worst:.3g} (at ε={at:g}); tolerance {tol:g}")


# ---------------------------------------------------------------------------
# Composition with a kernel.


def _smear(prof: PrivacyProfile, z: np.ndarray, m: np.ndarray, extra: float) -> Callable:
    def func(eps):
        e = np.asarray(eps, dtype=float)
        flat = e.reshape(-1)
        out = np.full(flat.shape, extra)
        chunk = max(1, 2_000_000 // max(1, z.size))
        for lo in range(0, flat.size, chunk):
            ch = flat[lo:lo + chunk]
            vals = np.asarray(prof(ch[:, None] - z[None, :]))
            out[lo:lo + chunk] += vals @ m
        return np.clip(out, 0.0, 1.0).reshape(e.shape)
    return func


def compose_profile_with_kernel(prof1: PrivacyProfile, kernel2: PLD,
                                reverse_kernel2: Optional[Callable[[], PLD]] = None) -> PrivacyProfile:
    """Profile of the product pair: ε ↦ E[δ1(ε - Z2)] + Pr[Z2 = +∞].

    reverse_kernel2 builds the kernel of the swapped second pair on demand.
    By default kernel2 is reversed directly, which is exact for atom kernels
    only; lattice cells pick up an O(step²) mass excess under e^{-z}.
    """
    z, m = kernel2.support()
    func = _smear(prof1, z, m, kernel2.mass_pos_inf)
    cache = {}

    def rev_func(eps):
        if "f" not in cache:
            rk = reverse_kernel2() if reverse_kernel2 is not None else reverse_pld(kernel2)
            rz, rm = rk.support()
            cache["f"] = _smear(prof1.reversed(), rz, rm, rk.mass_pos_inf)
        return cache["f"](eps)

    l1 = prof1.tail_limit()
    r1 = prof1.reverse_tail_limit()
    l2 = kernel2.mass_pos_inf
    k1 = np.asarray(prof1.knots, dtype=float)
    if k1.size and kernel2.z.size:
        knots = np.add.outer(k1, kernel2.z).ravel()
    else:
        knots = np.concatenate([k1, kernel2.z])
    knots = merge_atoms(knots, np.ones(knots.size))[0]
    # Mass of the swapped kernel at +∞ is 1 - E[e^{-Z2}].
    rk2 = max(0.0, 1.0 - float(np.sum(m * np.exp(-z))))
    return PrivacyProfile(
        func=func,
        knots=tuple(knots.tolist()) if knots.size <= 4096 else (),
        kind="composed",
        reverse_func=rev_func,
        limit=l1 + l2 - l1 * l2,
        reverse_limit=1.0 - (1.0 - r1) * (1.0 - rk2),
        label=f"{prof1.label} x kernel",
    )


def compose_profiles(profiles: Sequence[PrivacyProfile], step: float = 1e-3) -> PrivacyProfile:
    """Folds compose_profile_with_kernel over a list of profiles."""
    profiles = list(profiles)
    if not profiles:
        raise ValueError("need at least one profile")
    acc = profiles[0]
    for p in profiles[1:]:
        acc = compose_profile_with_kernel(
            acc, pld_kernel_from_profile(p, step=step),
            lambda p=p: pld_kernel_from_profile(p.reversed(), step=step))
    return acc


# ---------------------------------------------------------------------------
# Composition of (ε, δ) guarantees.


@dataclasses.dataclass(frozen=True, eq=False)
class SignedAtomBook:
    """Weighted privacy loss atoms of a composition of randomized responses.

    δ(t) = inf_mass + Σ w_i max(0, 1 - e^{t - shift_i}).
    """

    shifts: np.ndarray
    weights: np.ndarray
    inf_mass: float = 0.0
    cap: int = BOOK_CAP

    @classmethod
    def empty(cls, cap: int = BOOK_CAP) -> "SignedAtomBook":
        return cls(np.zeros(1), np.ones(1), 0.0, cap)

    def step(self, eps0: float, delta0: float) -> "SignedAtomBook":
        eps0, delta0 = _check_rr(eps0, delta0)
        up = (1.0 - delta0) * special.expit(eps0)
        down = (1.0 - delta0) * special.expit(-eps0)
        shifts = np.concatenate([self.shifts + eps0, self.shifts - eps0])
        weights = np.concatenate([self.weights * up, self.weights * down])
        shifts, weights = merge_atoms(shifts, weights, MERGE_TOL)
        keep = weights > 0
        if keep.sum() > self.cap:
            raise errors.BookOverflowError(f"book holds {int(keep.sum())} atoms after merging (cap {self.cap})")
        inf_mass = -math.expm1(math.log1p(-self.inf_mass) + math.log1p(-delta0)) if delta0 < 1 else 1.0
        return SignedAtomBook(shifts[keep], weights[keep], inf_mass, self.cap)

    def __call__(self, t):
        tt = np.asarray(t, dtype=float)
        flat = tt.reshape(-1)
        out = np.empty(flat.shape)
        chunk = max(1, 4_000_000 // max(1, self.shifts.size))
        for lo in range(0, flat.size, chunk):
            ch = flat[lo:lo + chunk]
            gain = np.maximum(-np.expm1(ch[:, None] - self.shifts[None, :]), 0.0)
            out[lo:lo + chunk] = gain @ self.weights
        out = np.clip(out + self.inf_mass, 0.0, 1.0).reshape(tt.shape)
        return float(out) if np.ndim(t) == 0 else out

    def to_pld(self) -> PLD:
        return PLD.from_atoms(self.shifts, self.weights, mass_pos_inf=self.inf_mass)

    def profile(self) -> PrivacyProfile:
        return PrivacyProfile.from_pld(self.to_pld(), label="composed guarantees")


def build_book(guarantees: Iterable, cap: int = BOOK_CAP) -> SignedAtomBook:
    book = SignedAtomBook.empty(cap)
    for eps0, delta0 in guarantees:
        book = book.step(eps0, delta0)
    return book


def compose_point_guarantees(guarantees: Sequence, t, cap: int = BOOK_CAP):
    """Tight δ(t) for the composition of mechanisms given only (ε_i, δ_i) guarantees.

    Args:
      guarantees: Sequence of (ε_i, δ_i) pairs.
      t: Threshold(s) at which to evaluate the composed profile.
      cap: Maximum number of atoms in the book.

    Raises:
      BookOverflowError: if the atom count exceeds cap.
    """
    return build_book(guarantees, cap)(t)


def compose_homogeneous(eps0: float, delta0: float, k: int, t):
    """Closed form for k identical (ε0, δ0) guarantees.

    δ(t) = 1 - (1-δ0)^k + (1-δ0)^k E_Y[(1 - e^{t - ε0(2Y - k)})_+],
    Y ~ Binomial(k, e^ε0 / (1 + e^ε0)), summed in log space.
    """
    eps0, delta0 = _check_rr(eps0, delta0)
    k = int(k)
    if k < 0:
        raise ValueError("k must be non-negative")
    y = np.arange(k + 1)
    log_p = special.log_expit(eps0)
    log_q = special.log_expit(-eps0)
    logpmf = (special.gammaln(k + 1) - special.gammaln(y + 1) - special.gammaln(k - y + 1)
              + y * log_p + (k - y) * log_q)
    z = eps0 * (2.0 * y - k)
    tt = np.asarray(t, dtype=float)
    flat = tt.reshape(-1)
    gain = np.maximum(-np.expm1(flat[:, None] - z[None, :]), 0.0)
    inner = gain @ np.exp(logpmf)
    if delta0 < 1.0:
        log_keep = k * math.log1p(-delta0)
        out = -math.expm1(log_keep) + math.exp(log_keep) * inner
    else:
        out = np.ones_like(inner) if k > 0 else inner
    out = np.clip(out, 0.0, 1.0).reshape(tt.shape)
    return float(out) if np.ndim(t) == 0 else out


# ---------------------------------------------------------------------------
# Calibration.


def eps_for_delta(profile: Callable, budget: float, bracket: tuple, tol: float = 1e-9) -> float:
    """Smallest ε in the bracket with profile(ε) ≤ budget, to within tol.

    Bisection on the non-increasing profile; the right end of the final
    bracket is returned, so profile(result) ≤ budget always holds.

    Raises:
      NoCrossingError: if profile(bracket[1]) > budget.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    d_hi = float(profile(hi))
    if d_hi > budget:
        raise errors.NoCrossingError(
            f"δ({hi:g}) = {d_hi!r} exceeds the budget {budget!r}; no crossing in [{lo:g}, {hi:g}]")
    if float(profile(lo)) <= budget:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if float(profile(mid)) <= budget:
            hi = mid
        else:
            lo = mid
    return hi


def calibrate_guarantees(guarantees: Sequence, budget: float, k_values: Sequence[int],
                         cap: int = BOOK_CAP, tol: float = 1e-9) -> dict:
    """ε(k) for the first k guarantees of a sequence, k in k_values.

    The book is grown incrementally. Unattainable budgets map to math.inf.
    """
    wanted = sorted(set(int(k) for k in k_values))
    if wanted and wanted[-1] > len(guarantees):
        raise ValueError("k exceeds the number of guarantees")
    out = {}
    book = SignedAtomBook.empty(cap)
    total_eps = 0.0
    done = 0
    for k in wanted:
        while done < k:
            e, d = guarantees[done]
            book = book.step(e, d)
            total_eps += float(e)
            done += 1
        # δ is constant (= inf_mass) beyond the largest shift.
        bracket = (-total_eps - 50.0, total_eps + 1.0)
        try:
            out[k] = eps_for_delta(book, budget, bracket, tol)
        except errors.NoCrossingError:
            out[k] = math.inf
    return out
