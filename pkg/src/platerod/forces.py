"""Force profiles f_p (plate), f_r, g1, g2 (rod) and the scaled body force."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import expressions as ex
from . import quadrature as qd
from .errors import ConfigError


@dataclass
class VectorProfile:
    """Three scalar component callables sharing a set of breakpoints."""

    components: tuple[Callable, Callable, Callable]
    breaks: tuple[tuple[float, ...], ...] = ()
    source: object = None
    is_zero: bool = False

    def __call__(self, *x) -> np.ndarray:
        return np.stack([np.asarray(c(*x), dtype=float) for c in self.components])


def _zero(nvar):
    def f(*x):
        return np.zeros(np.broadcast(*x).shape)
    return VectorProfile((f, f, f), breaks=((),) * nvar, source="0", is_zero=True)


def expression_profile(exprs: Sequence, variables) -> VectorProfile:
    if len(exprs) != 3:
        raise ConfigError(f"force profile needs 3 components, got {len(exprs)}")
    parsed = [ex.parse(e, variables) for e in exprs]
    from .fields import _breaks_of

    breaks = tuple(_breaks_of(parsed, ex.SYMBOLS[v]) for v in variables)
    zero = all(p == 0 for p in parsed)
    return VectorProfile(tuple(ex.lambdify(p, variables) for p in parsed), breaks,
                         source=[str(p) for p in parsed], is_zero=zero)


def table_profile(path, variables) -> VectorProfile:
    """Piecewise-linear interpolation of a CSV table.

    1D tables have columns (x3, c1, c2, c3); 2D tables (x1, x2, c1, c2, c3)
    must sample a full tensor grid. Points outside the table are rejected.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read force table {path}: {exc}") from None
    try:
        data = np.array([[float(v) for v in r] for r in rows if not _is_header(r)])
    except ValueError as exc:
        raise ConfigError(f"force table {path}: {exc}") from None
    nv = len(variables)
    if data.ndim != 2 or data.shape[1] != nv + 3 or not np.all(np.isfinite(data)):
        raise ConfigError(f"force table {path}: need {nv + 3} finite numeric columns")
    if nv == 1:
        order = np.argsort(data[:, 0])
        t = data[order, 0]
        if np.any(np.diff(t) <= 0):
            raise ConfigError(f"force table {path}: abscissae must be distinct")
        comps = tuple(_interp1(t, data[order, 1 + k]) for k in range(3))
        return VectorProfile(comps, breaks=(tuple(t),), source=str(path))
    g1, g2 = np.unique(data[:, 0]), np.unique(data[:, 1])
    if len(g1) * len(g2) != len(data):
        raise ConfigError(f"force table {path}: 2D data must sample a full tensor grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    vals = data[order, 2:].reshape(len(g1), len(g2), 3)
    comps = tuple(_interp2(g1, g2, vals[..., k]) for k in range(3))
    return VectorProfile(comps, breaks=(tuple(g1), tuple(g2)), source=str(path))


def _is_header(row):
    try:
        float(row[0])
        return False
    except ValueError:
        return True


def _interp1(t, y):
    def f(x):
        x = np.asarray(x, float)
        return np.interp(x, t, y)
    return f


def _interp2(g1, g2, v):
    rgi = RegularGridInterpolator((g1, g2), v, method="linear", bounds_error=False, fill_value=None)

    def f(x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        return rgi(np.stack([x1.ravel(), x2.ravel()], axis=-1)).reshape(x1.shape)
    return f


def make_profile(spec, variables) -> VectorProfile:
    if spec is None:
        return _zero(len(variables))
    if isinstance(spec, VectorProfile):
        return spec
    if isinstance(spec, (str, Path)) and not _looks_like_expr(spec):
        return table_profile(spec, variables)
    if isinstance(spec, (list, tuple)):
        return expression_profile(spec, variables)
    raise ConfigError(f"force profile must be 3 expressions or a table path, got {spec!r}")


def _looks_like_expr(s) -> bool:
    return not str(s).endswith((".csv", ".txt", ".dat"))


@dataclass
class ForceData:
    f_p: VectorProfile = field(default_factory=lambda: _zero(2))
    f_r: VectorProfile = field(default_factory=lambda: _zero(1))
    g1: VectorProfile = field(default_factory=lambda: _zero(1))
    g2: VectorProfile = field(default_factory=lambda: _zero(1))

    @classmethod
    def build(cls, f_p=None, f_r=None, g1=None, g2=None) -> "ForceData":
        """Each argument: 3 expression strings, a CSV table path, or None (zero)."""
        return cls(make_profile(f_p, ("x1", "x2")), make_profile(f_r, ("x3",)),
                   make_profile(g1, ("x3",)), make_profile(g2, ("x3",)))

    @property
    def is_zero(self) -> bool:
        return all(p.is_zero for p in (self.f_p, self.f_r, self.g1, self.g2))

    def scaled(self, t: float) -> "ForceData":
        def sc(p: VectorProfile):
            comps = tuple((lambda c: (lambda *x: t * c(*x)))(c) for c in p.components)
            return VectorProfile(comps, p.breaks, source=(t, p.source), is_zero=p.is_zero or t == 0)
        return ForceData(sc(self.f_p), sc(self.f_r), sc(self.g1), sc(self.g2))

    @property
    def rod_breaks(self) -> tuple[float, ...]:
        pts = set()
        for p in (self.f_r, self.g1, self.g2):
            if p.breaks:
                pts.update(p.breaks[0])
        return tuple(sorted(pts))

    @property
    def plate_breaks(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        b = self.f_p.breaks
        return (tuple(b[0]) if b else (), tuple(b[1]) if len(b) > 1 else ())


def plate_force(fd: ForceData, r, x1, x2) -> np.ndarray:
    """Body force at plate points (x1, x2, any x3 in (-delta, delta))."""
    f = fd.f_p(x1, x2)
    d, k = r.delta, r.kappa
    return np.stack([d ** (k - 1.0) * f[0], d ** (k - 1.0) * f[1], d**k * f[2]])


def rod_force(fd: ForceData, r, x1, x2, x3) -> np.ndarray:
    """Body force at rod points; zero where x3 <= delta (plate territory)."""
    x1, x2, x3 = np.broadcast_arrays(*(np.asarray(a, float) for a in (x1, x2, x3)))
    e, q, kp = r.epsilon, r.q_eps, r.kappa_prime
    fr, g1, g2 = fd.f_r(x3), fd.g1(x3), fd.g2(x3)
    scale = q * q * e**kp
    out = np.empty((3,) + x3.shape)
    out[0] = fr[0] + (x1 * g1[0] + x2 * g2[0]) / e**2
    out[1] = fr[1] + (x1 * g1[1] + x2 * g2[1]) / e**2
    out[2] = fr[2] / e + (x1 * g1[2] + x2 * g2[2]) / e**2
    out *= scale
    return np.where(x3 > r.delta, out, 0.0)


def body_force(fd: ForceData, r, x) -> np.ndarray:
    """f_delta at a point (or a (3, ...) stack of points) of the structure."""
    x = np.asarray(x, dtype=float)
    x1, x2, x3 = x[0], x[1], x[2]
    in_plate = np.abs(x3) < r.delta
    return np.where(in_plate, plate_force(fd, r, x1, x2), rod_force(fd, r, x1, x2, x3))


def force_norms(fd: ForceData, geometry, cells: int = 8, order: int = 10) -> tuple[float, float]:
    """(N(f_p), N(f_r)): L2 norm of f_p on omega, and ||f_r|| + sum ||g_a|| on (0, L)."""
    pb1, pb2 = fd.plate_breaks
    b1 = qd.breakpoints(*geometry.x1_range, pb1, cells)
    b2 = qd.breakpoints(*geometry.x2_range, pb2, cells)
    X1, X2, W = qd.tensor2d(b1, b2, order)
    N_fp = float(np.sqrt(np.sum(W * np.sum(fd.f_p(X1, X2) ** 2, axis=0))))
    bz = qd.breakpoints(0.0, geometry.L, fd.rod_breaks, cells)
    z, wz = qd.composite(bz, order)
    N_fr = 0.0
    for p in (fd.f_r, fd.g1, fd.g2):
        N_fr += float(np.sqrt(np.sum(wz * np.sum(p(z) ** 2, axis=0))))
    return N_fp, N_fr
