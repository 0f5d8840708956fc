"""Galerkin spaces for the junction-constrained limit problem.

U3: bicubic Hermite (value, d1, d2, d12 per node); U1, U2: bilinear;
W1, W2: cubic Hermite (value, derivative); W3, Q3: quadratic Lagrange.
Constraints are imposed by elimination: ``full = T free`` where T is a
0/1 map with at most one entry per row (``full_to_free``, -1 = fixed 0).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from .errors import BoundaryError, ConstraintError, MeshError
from .fields import LimitTriple, PlateField, RodField

# ---------------------------------------------------------------- 1D bases


def hermite(xi, h, d: int = 0) -> np.ndarray:
    """d-th x-derivative of [N0 value, N0 slope, N1 value, N1 slope]."""
    xi = np.asarray(xi, float)
    one = np.ones_like(xi)
    if d == 0:
        b = [1 - 3 * xi**2 + 2 * xi**3, h * (xi - 2 * xi**2 + xi**3), 3 * xi**2 - 2 * xi**3, h * (-(xi**2) + xi**3)]
    elif d == 1:
        b = [-6 * xi + 6 * xi**2, h * (1 - 4 * xi + 3 * xi**2), 6 * xi - 6 * xi**2, h * (-2 * xi + 3 * xi**2)]
    elif d == 2:
        b = [-6 + 12 * xi, h * (-4 + 6 * xi), 6 - 12 * xi, h * (-2 + 6 * xi)]
    elif d == 3:
        b = [12 * one, 6 * h * one, -12 * one, 6 * h * one]
    else:
        b = [0 * one] * 4
    return np.stack(b) / h**d


def linear(xi, h, d: int = 0) -> np.ndarray:
    xi = np.asarray(xi, float)
    one = np.ones_like(xi)
    if d == 0:
        b = [1 - xi, xi]
    elif d == 1:
        b = [-one, one]
    else:
        b = [0 * one, 0 * one]
    return np.stack(b) / h**d


def quadratic(xi, h, d: int = 0) -> np.ndarray:
    xi = np.asarray(xi, float)
    one = np.ones_like(xi)
    if d == 0:
        b = [1 - 3 * xi + 2 * xi**2, 4 * xi * (1 - xi), -xi + 2 * xi**2]
    elif d == 1:
        b = [-3 + 4 * xi, 4 - 8 * xi, -1 + 4 * xi]
    elif d == 2:
        b = [4 * one, -8 * one, 4 * one]
    else:
        b = [0 * one] * 3
    return np.stack(b) / h**d


# (x-index, y-index) into the 1D Hermite arrays for local U3 dofs,
# nodes ordered (0,0), (1,0), (0,1), (1,1), dofs (value, d1, d2, d12)
_HERMITE_2D = [(2 * i + a, 2 * j + b) for (i, j) in ((0, 0), (1, 0), (0, 1), (1, 1))
               for (a, b) in ((0, 0), (1, 0), (0, 1), (1, 1))]
_LINEAR_2D = [(0, 0), (1, 0), (0, 1), (1, 1)]


def plate_shapes(xi, eta, h1, h2, d1, d2):
    """(U3 shapes (16, ...), bilinear shapes (4, ...)) for a given derivative."""
    hx, hy = hermite(xi, h1, d1), hermite(eta, h2, d2)
    lx, ly = linear(xi, h1, d1), linear(eta, h2, d2)
    u3 = np.stack([hx[a] * hy[b] for a, b in _HERMITE_2D])
    u = np.stack([lx[a] * ly[b] for a, b in _LINEAR_2D])
    return u3, u


# ---------------------------------------------------------------- meshes


def _lattice(lo, hi, n, name):
    if n < 2:
        raise MeshError(f"{name}: need at least 2 cells, got {n}")
    k = -lo / (hi - lo) * n
    if abs(k - round(k)) > 1e-9:
        raise MeshError(f"{name}: origin is not a mesh node ({n} cells on ({lo}, {hi}))")
    return np.linspace(lo, hi, n + 1), int(round(k))


@dataclass(frozen=True)
class PlateMesh:
    x1: np.ndarray
    x2: np.ndarray
    origin: int

    @property
    def n1(self):
        return len(self.x1) - 1

    @property
    def n2(self):
        return len(self.x2) - 1

    @property
    def h1(self):
        return (self.x1[-1] - self.x1[0]) / self.n1

    @property
    def h2(self):
        return (self.x2[-1] - self.x2[0]) / self.n2

    @property
    def n_nodes(self):
        return (self.n1 + 1) * (self.n2 + 1)

    def node(self, p, q):
        return p * (self.n2 + 1) + q

    def locate(self, x1, x2):
        """Cell indices and local coordinates in [0, 1]."""
        c1 = np.clip(np.floor((np.asarray(x1, float) - self.x1[0]) / self.h1), 0, self.n1 - 1).astype(int)
        c2 = np.clip(np.floor((np.asarray(x2, float) - self.x2[0]) / self.h2), 0, self.n2 - 1).astype(int)
        return c1, c2, (x1 - self.x1[c1]) / self.h1, (x2 - self.x2[c2]) / self.h2

    def cell_nodes(self, c1, c2):
        """Global node ids of the 4 cell corners in local order, shape (4, ...)."""
        return np.stack([self.node(c1, c2), self.node(c1 + 1, c2), self.node(c1, c2 + 1), self.node(c1 + 1, c2 + 1)])


@dataclass(frozen=True)
class RodMesh:
    z: np.ndarray

    @property
    def n(self):
        return len(self.z) - 1

    @property
    def h(self):
        return (self.z[-1] - self.z[0]) / self.n

    def locate(self, x3):
        c = np.clip(np.floor(np.asarray(x3, float) / self.h), 0, self.n - 1).astype(int)
        return c, (x3 - self.z[c]) / self.h


# ---------------------------------------------------------------- dof map


class DofMap:
    """Full dof layout, element connectivity, and the constraint map."""

    def __init__(self, geometry, n1: int, n2: int, n_r: int):
        if not geometry.gamma0:
            raise BoundaryError("gamma0 is empty")
        x1, o1 = _lattice(*geometry.x1_range, n1, "x1")
        x2, o2 = _lattice(*geometry.x2_range, n2, "x2")
        if n_r < 2:
            raise MeshError(f"rod: need at least 2 intervals, got {n_r}")
        self.geometry = geometry
        self.plate_mesh = pm = PlateMesh(x1, x2, 0)
        object.__setattr__(pm, "origin", pm.node(o1, o2))
        self.rod_mesh = rm = RodMesh(np.linspace(0.0, geometry.L, n_r + 1))
        Np, nr = pm.n_nodes, rm.n
        self.off_U3 = 0
        self.off_U1 = 4 * Np
        self.off_U2 = 5 * Np
        self.off_W1 = 6 * Np
        self.off_W2 = self.off_W1 + 2 * (nr + 1)
        self.off_W3 = self.off_W2 + 2 * (nr + 1)
        self.off_Q3 = self.off_W3 + (2 * nr + 1)
        self.n_full = self.off_Q3 + (2 * nr + 1)

        # element connectivity
        c1, c2 = np.meshgrid(np.arange(pm.n1), np.arange(pm.n2), indexing="ij")
        nodes = pm.cell_nodes(c1.ravel(), c2.ravel()).T  # (n_el, 4)
        u3 = (4 * nodes[:, :, None] + np.arange(4)).reshape(-1, 16)
        self.plate_cells = np.stack([c1.ravel(), c2.ravel()], axis=1)
        self.plate_dofs = np.concatenate([u3, self.off_U1 + nodes, self.off_U2 + nodes], axis=1)
        e = np.arange(nr)[:, None]
        herm = 2 * e + np.arange(4)
        quad = 2 * e + np.arange(3)
        self.rod_dofs = np.concatenate([self.off_W1 + herm, self.off_W2 + herm,
                                        self.off_W3 + quad, self.off_Q3 + quad], axis=1)

        # constraints
        fixed = np.zeros(self.n_full, dtype=bool)
        P, Qn = np.meshgrid(np.arange(pm.n1 + 1), np.arange(pm.n2 + 1), indexing="ij")
        P, Qn = P.ravel(), Qn.ravel()
        on = geometry.on_gamma0(x1[P], x2[Qn], tol=1e-12 * max(1.0, geometry.a + geometry.b))
        cl = pm.node(P[on], Qn[on])
        for k in range(4):
            fixed[4 * cl + k] = True
        fixed[self.off_U1 + cl] = True
        fixed[self.off_U2 + cl] = True
        self.clamped_nodes = np.sort(cl)
        for off in (self.off_W1, self.off_W2):
            fixed[off] = fixed[off + 1] = True
        fixed[self.off_Q3] = True
        alias = self.off_W3
        if fixed[4 * pm.origin]:
            raise MeshError("the junction node lies on the clamped boundary")
        fixed[alias] = True  # handled as alias below
        free_full = np.flatnonzero(~fixed)
        self.full_to_free = np.full(self.n_full, -1, dtype=np.int64)
        self.full_to_free[free_full] = np.arange(len(free_full))
        self.full_to_free[alias] = self.full_to_free[4 * pm.origin]
        self.free_rep = free_full  # a representative full index per free dof
        self.n_free = len(free_full)

    @property
    def T(self) -> sps.csr_matrix:
        rows = np.flatnonzero(self.full_to_free >= 0)
        return sps.csr_matrix((np.ones(len(rows)), (rows, self.full_to_free[rows])),
                              shape=(self.n_full, self.n_free))

    def expand(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, float)
        if s.shape != (self.n_free,):
            raise ValueError(f"state has length {s.shape}, expected {self.n_free}")
        m = self.full_to_free
        return np.where(m >= 0, s[np.maximum(m, 0)], 0.0)

    def restrict(self, g_full: np.ndarray) -> np.ndarray:
        """T^T g: sum full-vector entries onto free dofs (deterministic)."""
        m = self.full_to_free
        keep = m >= 0
        return np.bincount(m[keep], weights=g_full[keep], minlength=self.n_free)

    def reconstruct(self, s) -> LimitTriple:
        x = self.expand(s.coeffs if isinstance(s, DiscreteState) else s)
        return LimitTriple(DiscretePlateField(self, x), DiscreteRodField(self, x))

    def zero_state(self) -> "DiscreteState":
        return DiscreteState(np.zeros(self.n_free), self)


def build_spaces(geometry, resolution) -> DofMap:
    n1, n2, n_r = resolution
    return DofMap(geometry, int(n1), int(n2), int(n_r))


@dataclass
class DiscreteState:
    coeffs: np.ndarray
    dm: DofMap

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, float)
        if self.coeffs.shape != (self.dm.n_free,):
            raise ValueError(f"state length {self.coeffs.shape} != free dof count {self.dm.n_free}")

    def triple(self) -> LimitTriple:
        return self.dm.reconstruct(self.coeffs)


# ---------------------------------------------------------------- discrete fields


class DiscretePlateField(PlateField):
    def __init__(self, dm: DofMap, x_full: np.ndarray):
        self.dm, self.x = dm, x_full
        self.breaks1 = tuple(dm.plate_mesh.x1)
        self.breaks2 = tuple(dm.plate_mesh.x2)

    def eval(self, i, d1, d2, x1, x2):
        pm = self.dm.plate_mesh
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        c1, c2, xi, eta = pm.locate(x1, x2)
        nodes = pm.cell_nodes(c1, c2)
        u3s, us = plate_shapes(xi, eta, pm.h1, pm.h2, d1, d2)
        if i == 2:
            idx = 4 * nodes[:, None] + np.arange(4).reshape((1, 4) + (1,) * x1.ndim)
            coef = self.x[idx].reshape((16,) + x1.shape)
            return np.sum(coef * u3s, axis=0)
        off = self.dm.off_U1 if i == 0 else self.dm.off_U2
        return np.sum(self.x[off + nodes] * us, axis=0)


class DiscreteRodField(RodField):
    def __init__(self, dm: DofMap, x_full: np.ndarray):
        self.dm, self.x = dm, x_full
        self.breaks = tuple(dm.rod_mesh.z)

    def eval(self, i, d, x3):
        rm = self.dm.rod_mesh
        x3 = np.asarray(x3, float)
        c, xi = rm.locate(x3)
        if i < 2:
            off = self.dm.off_W1 if i == 0 else self.dm.off_W2
            idx = off + 2 * c + np.arange(4).reshape((4,) + (1,) * x3.ndim)
            return np.sum(self.x[idx] * hermite(xi, rm.h, d), axis=0)
        off = self.dm.off_W3 if i == 2 else self.dm.off_Q3
        idx = off + 2 * c + np.arange(3).reshape((3,) + (1,) * x3.ndim)
        return np.sum(self.x[idx] * quadratic(xi, rm.h, d), axis=0)


# ---------------------------------------------------------------- interpolation


def interpolate(dm: DofMap, triple: LimitTriple, tol: float = 1e-8) -> DiscreteState:
    """Nodal interpolant; exact for fields inside the discrete spans."""
    pm, rm = dm.plate_mesh, dm.rod_mesh
    P, Q = np.meshgrid(np.arange(pm.n1 + 1), np.arange(pm.n2 + 1), indexing="ij")
    node = pm.node(P.ravel(), Q.ravel())
    X1, X2 = pm.x1[P.ravel()], pm.x2[Q.ravel()]
    x = np.zeros(dm.n_full)
    p = triple.plate
    for k, (d1, d2) in enumerate(((0, 0), (1, 0), (0, 1), (1, 1))):
        x[4 * node + k] = p.eval(2, d1, d2, X1, X2)
    x[dm.off_U1 + node] = p.eval(0, 0, 0, X1, X2)
    x[dm.off_U2 + node] = p.eval(1, 0, 0, X1, X2)
    r = triple.rod
    z = rm.z
    zq = np.linspace(0.0, rm.z[-1], 2 * rm.n + 1)
    for i, off in ((0, dm.off_W1), (1, dm.off_W2)):
        x[off + 2 * np.arange(rm.n + 1)] = r.eval(i, 0, z)
        x[off + 2 * np.arange(rm.n + 1) + 1] = r.eval(i, 1, z)
    x[dm.off_W3:dm.off_W3 + len(zq)] = r.eval(2, 0, zq)
    x[dm.off_Q3:dm.off_Q3 + len(zq)] = r.eval(3, 0, zq)

    fixed = dm.full_to_free < 0
    bad = np.max(np.abs(x[fixed])) if fixed.any() else 0.0
    if bad > tol:
        raise ConstraintError(f"triple violates clamped/junction conditions (max |fixed dof| = {bad:.3e})")
    tie = abs(x[dm.off_W3] - x[4 * pm.origin])
    if tie > tol:
        raise ConstraintError(f"junction tie W3(0) = U3(0,0) violated by {tie:.3e}")
    return DiscreteState(x[dm.free_rep], dm)
