"""Composition specs: a JSON list of mechanism descriptors.

Example::

    {"mechanisms": [
        {"gaussian": {"kappa": 0.5}, "repeat": 3},
        {"point_guarantee": {"eps0": 0.1, "delta0": 1e-8}},
        {"subsampled": {"lambda": 0.01, "inner": {"gaussian": {"kappa": 2.0}}}}
    ]}

A bare descriptor such as {"gaussian": {"kappa": 0.5}} is also accepted
where a single mechanism is expected.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Optional, Union

from lapdp import errors, mechanisms, subsampling
from lapdp.composition import pld_kernel_from_profile
from lapdp.core import PLD, PrivacyProfile, RenyiCurve
from lapdp.laplace import renyi_curve_from_profile
from lapdp.oracle import gaussian_grid_pld


@dataclasses.dataclass(frozen=True)
class Gaussian:
    kappa: float

    def profile(self) -> PrivacyProfile:
        return mechanisms.gaussian_curve(self.kappa)

    def renyi_curve(self) -> RenyiCurve:
        return mechanisms.gaussian_renyi_curve(self.kappa)

    def point(self):
        return None

    def pld(self, step: float) -> PLD:
        return gaussian_grid_pld(self.kappa, step)


@dataclasses.dataclass(frozen=True)
class RandomizedResponse:
    eps0: float
    delta0: float

    def profile(self) -> PrivacyProfile:
        return mechanisms.rr_curve(self.eps0, self.delta0)

    def renyi_curve(self) -> RenyiCurve:
        if self.delta0 > 0:
            raise errors.EmptyROCError(
                "randomized response with delta0 > 0 has no convergent Rényi order")
        return mechanisms.rr_renyi_curve(self.eps0)

    def point(self):
        return (self.eps0, self.delta0)

    def pld(self, step: float) -> PLD:
        return mechanisms.rr_pair(self.eps0, self.delta0).pld()


@dataclasses.dataclass(frozen=True)
class PointGuarantee(RandomizedResponse):
    """An (ε0, δ0) guarantee, represented by its dominating randomized response."""

    def profile(self) -> PrivacyProfile:
        return mechanisms.dominating_profile_for_point_dp(self.eps0, self.delta0)


@dataclasses.dataclass(frozen=True)
class Subsampled:
    lam: float
    inner: "Descriptor"

    def profile(self) -> PrivacyProfile:
        return subsampling.poisson_subsample_profile(self.inner.profile(), self.lam)

    def renyi_curve(self) -> RenyiCurve:
        return renyi_curve_from_profile(self.profile())

    def point(self):
        return None

    def pld(self, step: float) -> PLD:
        return pld_kernel_from_profile(self.profile(), step=step)


Descriptor = Union[Gaussian, RandomizedResponse, PointGuarantee, Subsampled]


@dataclasses.dataclass(frozen=True)
class Entry:
    descriptor: Descriptor
    repeat: int = 1


@dataclasses.dataclass(frozen=True)
class CompositionSpec:
    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise errors.SpecError("a spec needs at least one mechanism")

    def expanded(self) -> list:
        out = []
        for e in self.entries:
            out.extend([e.descriptor] * e.repeat)
        return out

    def single(self) -> Descriptor:
        if len(self.entries) != 1 or self.entries[0].repeat != 1:
            raise errors.SpecError("expected exactly one mechanism")
        return self.entries[0].descriptor


def _number(obj: dict, key: str, where: str) -> float:
    if key not in obj:
        raise errors.SpecError(f"{where}: missing field {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise errors.SpecError(f"{where}: field {key!r} must be a number")
    v = float(v)
    if not math.isfinite(v):
        raise errors.SpecError(f"{where}: field {key!r} must be finite")
    return v


def _check_keys(obj: dict, allowed: set, where: str):
    extra = set(obj) - allowed
    if extra:
        raise errors.SpecError(f"{where}: unknown field(s) {sorted(extra)}")


def parse_descriptor(obj) -> Descriptor:
    if not isinstance(obj, dict):
        raise errors.SpecError("a descriptor must be an object")
    kinds = [k for k in obj if k != "repeat"]
    if len(kinds) != 1:
        raise errors.SpecError(f"a descriptor needs exactly one mechanism key, got {kinds}")
    kind = kinds[0]
    body = obj[kind]
    if not isinstance(body, dict):
        raise errors.SpecError(f"{kind}: parameters must be an object")
    try:
        if kind == "gaussian":
            _check_keys(body, {"kappa"}, kind)
            d = Gaussian(_number(body, "kappa", kind))
            if not d.kappa > 0:
                raise errors.SpecError("gaussian: kappa must be positive")
        elif kind in ("randomized_response", "point_guarantee"):
            _check_keys(body, {"eps0", "delta0"}, kind)
            cls = RandomizedResponse if kind == "randomized_response" else PointGuarantee
            d = cls(_number(body, "eps0", kind), _number(body, "delta0", kind))
            mechanisms.rr_curve(d.eps0, d.delta0)
        elif kind == "subsampled":
            _check_keys(body, {"lambda", "inner"}, kind)
            if "inner" not in body:
                raise errors.SpecError("subsampled: missing field 'inner'")
            lam = subsampling.SubsampleParams(_number(body, "lambda", kind)).lam
            d = Subsampled(lam, parse_descriptor(body["inner"]))
        else:
            raise errors.SpecError(f"unknown mechanism {kind!r}")
    except errors.SpecError:
        raise
    except (errors.LapDPError, ValueError) as exc:
        raise errors.SpecError(f"{kind}: {exc}") from exc
    return d


def _parse_entry(obj) -> Entry:
    d = parse_descriptor(obj)
    repeat = obj.get("repeat", 1)
    if isinstance(repeat, bool) or not isinstance(repeat, int) or repeat < 1:
        raise errors.SpecError("repeat must be a positive integer")
    return Entry(d, repeat)


def parse_spec(source: Union[str, dict, list]) -> CompositionSpec:
    """Parses a JSON document (text or already-decoded) into a CompositionSpec."""
    obj = source
    if isinstance(source, str):
        try:
            obj = json.loads(source)
        except json.JSONDecodeError as exc:
            raise errors.SpecError(f"invalid JSON: {exc}") from exc
    if isinstance(obj, list):
        obj = {"mechanisms": obj}
    if not isinstance(obj, dict):
        raise errors.SpecError("a spec must be an object")
    if "mechanisms" in obj:
        _check_keys(obj, {"mechanisms"}, "spec")
        items = obj["mechanisms"]
        if not isinstance(items, list):
            raise errors.SpecError("'mechanisms' must be a list")
        return CompositionSpec(tuple(_parse_entry(x) for x in items))
    return CompositionSpec((_parse_entry(obj),))


def point_guarantees(spec: CompositionSpec) -> Optional[list]:
    """The (ε0, δ0) list if every mechanism is point-like, else None."""
    pts = [d.point() for d in spec.expanded()]
    return None if any(p is None for p in pts) else pts
