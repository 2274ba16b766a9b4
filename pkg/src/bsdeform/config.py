"""Tolerances and run configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class Tolerances:
    point: float = 1e-9  # angle equality on the circle (radians)
    mat: float = 1e-12  # SU(1,1) normalisation / matrix identities
    trace: float = 1e-9  # elliptic / parabolic / hyperbolic threshold
    geo: float = 1e-8  # geodesic coincidence (endpoint-angle distance)
    cycle: float = 1e-6  # candidate orbit closure, confirmed separately

    def __post_init__(self):
        for name in ("point", "mat", "trace", "geo", "cycle"):
            if getattr(self, name) <= 0:
                raise ValueError(f"tolerance {name} must be positive")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Config:
    precision: int = 256
    tol: Tolerances = field(default_factory=Tolerances)
    max_iter: int = 20_000
    max_size: int = 50_000
    lmax: int = 200
    residual: float = 1e-6
    grid: int = 200
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.precision < 64:
            raise ValueError("precision must be at least 64 bits")
        for name in ("max_iter", "max_size", "lmax", "grid", "workers"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.residual <= 0:
            raise ValueError("residual must be positive")

    def with_(self, **changes) -> "Config":
        return replace(self, **changes)
