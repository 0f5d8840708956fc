"""Limit-model fields: plate displacement U, rod displacement W and twist Q3.

A plate field answers ``eval(i, d1, d2, x1, x2)`` = d1-th x1 and d2-th x2
derivative of U_{i+1}; a rod field answers ``eval(i, d, x3)`` for
(W1, W2, W3, Q3)[i]. Analytic fields come from sympy expressions; the
discrete ones live in ``discretization``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import expressions as ex

PLATE_NAMES = ("U1", "U2", "U3")
ROD_NAMES = ("W1", "W2", "W3", "Q3")


def _breaks_of(exprs, sym) -> tuple[float, ...]:
    """Numeric thresholds on ``sym`` found in Piecewise/Heaviside/Abs terms."""
    pts = set()
    for e in exprs:
        for rel in e.atoms(sp.core.relational.Relational):
            lhs, rhs = rel.lhs, rel.rhs
            if lhs == sym and rhs.is_number:
                pts.add(float(rhs))
            elif rhs == sym and lhs.is_number:
                pts.add(float(lhs))
        for h in e.atoms(sp.Heaviside, sp.Abs):
            arg = h.args[0]
            if arg.free_symbols == {sym} and sp.degree(arg, sym) == 1:
                pts.add(float(sp.solve(arg, sym)[0]))
    return tuple(sorted(pts))


class PlateField:
    """Interface; subclasses implement ``eval``."""

    breaks1: tuple[float, ...] = ()
    breaks2: tuple[float, ...] = ()

    def eval(self, i: int, d1: int, d2: int, x1, x2) -> np.ndarray:
        raise NotImplementedError

    def values(self, x1, x2) -> np.ndarray:
        return np.stack([self.eval(i, 0, 0, x1, x2) for i in range(3)])


class RodField:
    breaks: tuple[float, ...] = ()

    def eval(self, i: int, d: int, x3) -> np.ndarray:
        raise NotImplementedError

    def values(self, x3) -> np.ndarray:
        return np.stack([self.eval(i, 0, x3) for i in range(4)])


class AnalyticPlateField(PlateField):
    def __init__(self, U1=0, U2=0, U3=0, breaks1=None, breaks2=None):
        self.exprs = tuple(ex.parse(u, ("x1", "x2")) for u in (U1, U2, U3))
        s1, s2 = ex.SYMBOLS["x1"], ex.SYMBOLS["x2"]
        self.breaks1 = tuple(breaks1) if breaks1 is not None else _breaks_of(self.exprs, s1)
        self.breaks2 = tuple(breaks2) if breaks2 is not None else _breaks_of(self.exprs, s2)
        self._cache = {}

    def _fn(self, i, d1, d2):
        key = (i, d1, d2)
        fn = self._cache.get(key)
        if fn is None:
            e = self.exprs[i]
            if d1:
                e = sp.diff(e, ex.SYMBOLS["x1"], d1)
            if d2:
                e = sp.diff(e, ex.SYMBOLS["x2"], d2)
            fn = self._cache[key] = ex.lambdify(e, ("x1", "x2"))
        return fn

    def eval(self, i, d1, d2, x1, x2):
        return self._fn(i, d1, d2)(np.asarray(x1, float), np.asarray(x2, float))

    def __repr__(self):
        return f"AnalyticPlateField{tuple(str(e) for e in self.exprs)}"


class AnalyticRodField(RodField):
    def __init__(self, W1=0, W2=0, W3=0, Q3=0, breaks=None):
        self.exprs = tuple(ex.parse(w, ("x3",)) for w in (W1, W2, W3, Q3))
        self.breaks = tuple(breaks) if breaks is not None else _breaks_of(self.exprs, ex.SYMBOLS["x3"])
        self._cache = {}

    def eval(self, i, d, x3):
        key = (i, d)
        fn = self._cache.get(key)
        if fn is None:
            e = sp.diff(self.exprs[i], ex.SYMBOLS["x3"], d) if d else self.exprs[i]
            fn = self._cache[key] = ex.lambdify(e, ("x3",))
        return fn(np.asarray(x3, float))

    def __repr__(self):
        return f"AnalyticRodField{tuple(str(e) for e in self.exprs)}"


class ZeroPlateField(PlateField):
    def eval(self, i, d1, d2, x1, x2):
        return np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape)


class ZeroRodField(RodField):
    def eval(self, i, d, x3):
        return np.zeros(np.shape(x3))


@dataclass
class LimitTriple:
    """(U, W, Q3) of the limit model. Warpings are not stored here; they
    are either optimal (computed on demand) or passed explicitly."""

    plate: PlateField = field(default_factory=ZeroPlateField)
    rod: RodField = field(default_factory=ZeroRodField)

    def junction_residual(self) -> float:
        u3 = float(self.plate.eval(2, 0, 0, 0.0, 0.0))
        return abs(float(self.rod.eval(2, 0, 0.0)) - u3) / (1.0 + abs(u3))

    def clamp_residuals(self, geometry, samples: int = 41) -> dict[str, float]:
        """Max violations of the clamped and junction conditions."""
        out = {}
        worst = 0.0
        for x1, x2 in _edge_samples(geometry, samples):
            for i in range(3):
                worst = max(worst, float(np.max(np.abs(self.plate.eval(i, 0, 0, x1, x2)))))
            for d1, d2 in ((1, 0), (0, 1)):
                worst = max(worst, float(np.max(np.abs(self.plate.eval(2, d1, d2, x1, x2)))))
        out["gamma0"] = worst
        z = 0.0
        out["junction_W"] = max(abs(float(self.rod.eval(i, d, z))) for i in (0, 1) for d in (0, 1))
        out["junction_Q3"] = abs(float(self.rod.eval(3, 0, z)))
        out["junction_tie"] = abs(float(self.rod.eval(2, 0, z)) - float(self.plate.eval(2, 0, 0, z, z)))
        return out


def _edge_samples(geometry, n):
    (x1a, x1b), (x2a, x2b) = geometry.x1_range, geometry.x2_range
    t1, t2 = np.linspace(x1a, x1b, n), np.linspace(x2a, x2b, n)
    for e in geometry.gamma0:
        if e == "left":
            yield np.full(n, x1a), t2
        elif e == "right":
            yield np.full(n, x1b), t2
        elif e == "bottom":
            yield t1, np.full(n, x2a)
        else:
            yield t1, np.full(n, x2b)
