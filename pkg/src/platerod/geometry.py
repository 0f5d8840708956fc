from __future__ import annotations

from dataclasses import dataclass

from .errors import BoundaryError, DomainError

EDGES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class Geometry:
    """Mid-plane omega = (-a, b) x (-c, d), clamped edges gamma0, rod length L.

    The rod cross-section is the unit disc scaled by epsilon; the junction
    sits at the origin, which must be interior to omega.
    """

    a: float
    b: float
    c: float
    d: float
    gamma0: tuple[str, ...] = ("left",)
    L: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "L"):
            v = getattr(self, name)
            if not v > 0:
                raise DomainError(f"geometry.{name} must be positive, got {v!r}")
        g = tuple(self.gamma0)
        bad = [e for e in g if e not in EDGES]
        if bad:
            raise DomainError(f"unknown edge(s) {bad}; choose from {EDGES}")
        if not g:
            raise BoundaryError("gamma0 must contain at least one edge")
        object.__setattr__(self, "gamma0", tuple(dict.fromkeys(g)))

    @property
    def x1_range(self) -> tuple[float, float]:
        return (-self.a, self.b)

    @property
    def x2_range(self) -> tuple[float, float]:
        return (-self.c, self.d)

    @property
    def area(self) -> float:
        return (self.a + self.b) * (self.c + self.d)

    def edge_distance(self, x1, x2):
        """Distance to the nearest clamped edge (vectorized)."""
        import numpy as np

        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        dist = np.full(np.broadcast(x1, x2).shape, np.inf)
        for e in self.gamma0:
            if e == "left":
                dist = np.minimum(dist, x1 + self.a)
            elif e == "right":
                dist = np.minimum(dist, self.b - x1)
            elif e == "bottom":
                dist = np.minimum(dist, x2 + self.c)
            else:
                dist = np.minimum(dist, self.d - x2)
        return dist

    def on_gamma0(self, x1, x2, tol: float = 1e-12):
        return self.edge_distance(x1, x2) <= tol
