"""Surface measures, weights and validity of configurations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, asdict, replace

import numpy as np

from .grid_sets import BoundaryComponent, Configuration, InvalidInput, is_connected

REL = 1e-12


@dataclass(frozen=True)
class Params:
    h_star: float = 0.1
    q: float = 40.0
    omega_min: float = 0.9
    r: float = 0.01
    upsilon: float = 1e-5
    D: float = 320.0
    epsilon: float = 1.0
    sigma: float = 0.2
    theta: float = 0.5
    C_star: float = 2.0
    # constants the construction leaves unquantified
    C_hat: float = 1.0
    C_prime: float = 4.0
    C_K: float = 16.0
    c_dist: float = 0.25
    c_merge: float = 0.125
    tau_floor: float = 0.0
    refinement: int = 1
    property4_mode: str = "exhaustive"
    property4_samples: int = 4000
    seed: int = 0

    def violations(self) -> list[str]:
        out = []
        if not 0 < self.h_star < 1:
            out.append("0 < h_star < 1")
        if not self.q >= 1:
            out.append("q >= 1")
        if not self.omega_min < 1:
            out.append("omega_min < 1")
        if not self.omega_min >= math.sqrt(0.75) * (1 - REL):
            out.append("omega_min >= sqrt(3/4)")
        if not 0 < self.r < 1:
            out.append("0 < r < 1")
        if not 0 < self.upsilon < 1:
            out.append("0 < upsilon < 1")
        if not self.D >= 32 / self.h_star * (1 - REL):
            out.append("D >= 32/h_star")
        if not self.r * (1 - self.omega_min) ** 3 >= self.upsilon * (1 - 1e-9):
            out.append("r*(1-omega_min)^3 >= upsilon")
        if not 19 * self.upsilon < 1:
            out.append("19*upsilon < 1")
        for name in ("epsilon", "sigma", "theta", "C_star", "C_hat", "C_prime", "C_K", "c_dist", "c_merge"):
            if not getattr(self, name) > 0:
                out.append(f"{name} > 0")
        if self.tau_floor < 0:
            out.append("tau_floor >= 0")
        if int(self.refinement) != self.refinement or self.refinement < 1:
            out.append("refinement is a positive integer")
        if self.property4_mode not in ("exhaustive", "sampled"):
            out.append("property4_mode in {exhaustive, sampled}")
        return out

    def checked(self) -> "Params":
        v = self.violations()
        if v:
            raise InvalidInput("parameter constraints violated: " + "; ".join(v))
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidInput(f"unknown params: {sorted(unknown)}")
        return cls(**d)

    def with_(self, **kw) -> "Params":
        return replace(self, **kw)

    def size_scale(self, lam: float) -> float:
        """Scale below which components may carry reduced weights (times 19)."""
        return max(self.upsilon * lam, self.tau_floor)


def diam_inf(c: BoundaryComponent) -> float:
    return c.gamma.diam_inf()


def measure_star(theta_len: float, diam: float, p: Params) -> float:
    return p.h_star * theta_len + (1 - p.h_star) * diam


def measure_omega(theta_len: float, diam: float, omega: float, p: Params) -> float:
    return p.h_star * theta_len + (1 - p.h_star) * omega * diam


def component_measures(c: BoundaryComponent, p: Params) -> dict:
    H = c.theta.length()
    d = c.diam_inf()
    return {"H": H, "inf": d, "star": measure_star(H, d, p), "omega": measure_omega(H, d, c.weight, p)}


def total_measures(config: Configuration, p: Params) -> dict:
    tot = {"H": 0.0, "inf": 0.0, "star": 0.0, "omega": 0.0}
    for c in config.components:
        if c.touches_outer_boundary:
            continue
        for k, v in component_measures(c, p).items():
            tot[k] += v
    return tot


def omega_total(config: Configuration, p: Params) -> float:
    return total_measures(config, p)["omega"]


def star_total(config: Configuration, p: Params) -> float:
    return total_measures(config, p)["star"]


def rect_star(rect, spec, p: Params) -> float:
    """|dR|_* for a rectangle boundary (Theta = Gamma)."""
    return measure_star(rect.perimeter() * spec.unit, rect.diam() * spec.unit, p)


@dataclass
class ValidityReport:
    lam: float
    # per interior component index: {"i": bool, ..., "v": bool}
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(all(v.values()) for v in self.checks.values())

    def failures(self) -> list[tuple[int, str]]:
        return [(k, c) for k, v in self.checks.items() for c, ok in v.items() if not ok]


def validate_class(config: Configuration, p: Params, lam: float | None = None) -> ValidityReport:
    """Check the five membership conditions for every interior component."""
    lam = config.lam if lam is None else lam
    spec = config.spec
    rep = ValidityReport(lam)
    interior = config.interior_indices()
    thresh = 19 * p.size_scale(lam)
    for k in interior:
        c = config.components[k]
        d = c.diam_inf()
        res = {"i": True, "ii": True, "iii": True, "iv": True, "v": True}
        if c.weight < 1:
            R = c.rect
            if R is None or not R.inside(spec):
                res["i"] = res["ii"] = res["iii"] = False
            else:
                dR = R.boundary(spec)
                res["i"] = c.theta.issubset(dR) and c.gamma.issubset(c.gamma.in_closed_rect(R))
                res["ii"] = R.diam() * spec.unit <= d * c.weight / p.omega_min * (1 + REL)
                rm = R.mask(spec)
                for j in interior:
                    if not is_connected(rm & ~config.components[j].interior.mask, diagonal=True):
                        res["iii"] = False
                        break
            if d >= thresh * (1 + REL):
                res["iv"] = False
        else:
            R = c.interior.bbox()
            res["v"] = c.is_rectangular() and R.inside(spec)
        rep.checks[k] = res
    return rep


def check_rect_comparable(c: BoundaryComponent, spec) -> tuple[bool, bool]:
    """The two comparability bounds between a weighted component and its rectangle."""
    R = c.rect if c.rect is not None else c.interior.bbox()
    d = c.diam_inf()
    dR = R.diam() * spec.unit
    a = d <= dR * (1 + REL) and dR <= 2 * d * (1 + REL)
    b = c.theta.length() <= 4 * math.sqrt(2) * d * (1 + REL)
    return a, b
