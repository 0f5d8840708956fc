"""Value, gradient and Hessian of the discrete J3 over the free dofs."""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sps

from . import kernels
from . import limit as lim
from . import quadrature as qd
from .discretization import DiscreteState, DofMap, hermite, linear, plate_shapes, quadratic
from .material import derived_moduli
from .regime import is_critical


def _plate_B(dm: DofMap, order: int):
    """Kinematic operator (nq, 9, 24) and weights on the reference cell."""
    pm = dm.plate_mesh
    t, wt = qd.gauss_interval(0.0, 1.0, order)
    XI, ETA = np.meshgrid(t, t, indexing="ij")
    XI, ETA = XI.ravel(), ETA.ravel()
    w = np.outer(wt, wt).ravel() * pm.h1 * pm.h2
    nq = len(w)
    B = np.zeros((nq, 9, 24))

    def sh(d1, d2):
        return plate_shapes(XI, ETA, pm.h1, pm.h2, d1, d2)

    B[:, 0, :16] = sh(2, 0)[0].T
    B[:, 1, :16] = sh(1, 1)[0].T
    B[:, 2, :16] = sh(0, 2)[0].T
    u3_1, u_1 = sh(1, 0)
    u3_2, u_2 = sh(0, 1)
    B[:, 3, 16:20] = u_1.T
    B[:, 4, 16:20] = u_2.T
    B[:, 5, 20:24] = u_1.T
    B[:, 6, 20:24] = u_2.T
    B[:, 7, :16] = u3_1.T
    B[:, 8, :16] = u3_2.T
    # values for the load vector: rows U1, U2, U3
    u3_0, u_0 = sh(0, 0)
    V = np.zeros((nq, 3, 24))
    V[:, 0, 16:20] = u_0.T
    V[:, 1, 20:24] = u_0.T
    V[:, 2, :16] = u3_0.T
    return B, V, w, XI, ETA


def _rod_B(dm: DofMap, order: int):
    rm = dm.rod_mesh
    t, wt = qd.gauss_interval(0.0, 1.0, order)
    w = wt * rm.h
    nq = len(w)
    B = np.zeros((nq, 6, 14))
    h2, h1 = hermite(t, rm.h, 2).T, hermite(t, rm.h, 1).T
    q1 = quadratic(t, rm.h, 1).T
    B[:, 0, 0:4] = h2
    B[:, 1, 4:8] = h2
    B[:, 2, 8:11] = q1
    B[:, 3, 0:4] = h1
    B[:, 4, 4:8] = h1
    B[:, 5, 11:14] = q1
    # load rows: W1, W2, W3, W1', W2', Q3
    V = np.zeros((nq, 6, 14))
    h0, q0 = hermite(t, rm.h, 0).T, quadratic(t, rm.h, 0).T
    V[:, 0, 0:4] = h0
    V[:, 1, 4:8] = h0
    V[:, 2, 8:11] = q0
    V[:, 3, 0:4] = h1
    V[:, 4, 4:8] = h1
    V[:, 5, 11:14] = q0
    return B, V, w, t


class Assembler:
    """Precomputed operators for one (mesh, material, regime, forces) setup.

    Default quadrature (5x5 per cell, 6 per interval) integrates the
    quadratic-regime energy exactly on these bases.
    """

    def __init__(self, dm: DofMap, lp, fd, r, plate_order: int = 5, rod_order: int = 6, backend=None):
        self.dm, self.lp, self.fd, self.r = dm, lp, fd, r
        self.backend = backend
        Ep, nup = derived_moduli(lp.lambda_p, lp.mu_p)
        Er, _ = derived_moduli(lp.lambda_r, lp.mu_r)
        sp_ = 1.0 if is_critical(r.kappa) else 0.0
        sr = 1.0 if is_critical(r.kappa_prime) else 0.0
        self.plate_params = np.array([Ep / (3 * (1 - nup**2)), Ep / (1 - nup**2), nup, sp_])
        self.rod_params = np.array([Er * lim.ROD_BEND, Er * lim.ROD_STRETCH, lp.mu_r * lim.ROD_TORSION, sr])
        self.Bp, Vp, self.wp, xi, eta = _plate_B(dm, plate_order)
        self.Br, Vr, self.wr, t = _rod_B(dm, rod_order)
        self._load_full = self._load(Vp, xi, eta, Vr, t)
        self.load = dm.restrict(self._load_full)
        self._pattern = None

    # -- load vector, assembled once
    def _load(self, Vp, xi, eta, Vr, t):
        dm, fd = self.dm, self.fd
        pm, rm = dm.plate_mesh, dm.rod_mesh
        b = np.zeros(dm.n_full)
        if fd.is_zero:
            return b
        c1, c2 = dm.plate_cells[:, 0], dm.plate_cells[:, 1]
        X1 = pm.x1[c1][:, None] + pm.h1 * xi[None, :]
        X2 = pm.x2[c2][:, None] + pm.h2 * eta[None, :]
        f = fd.f_p(X1, X2)  # (3, n_el, nq)
        be = 2.0 * np.einsum("q,ieq,qid->ed", self.wp, f, Vp)
        np.add.at(b, dm.plate_dofs, be)
        Z = rm.z[:-1, None] + rm.h * t[None, :]
        fr, g1, g2 = fd.f_r(Z), fd.g1(Z), fd.g2(Z)
        # coefficient of each load row (W1, W2, W3, W1', W2', Q3)
        coef = np.stack([math.pi * fr[0], math.pi * fr[1], math.pi * fr[2],
                         -lim.LOAD_G * g1[2], -lim.LOAD_G * g2[2], lim.LOAD_G * (g1[1] - g2[0])])
        be = np.einsum("q,ieq,qid->ed", self.wr, coef, Vr)
        np.add.at(b, dm.rod_dofs, be)
        return b

    def _terms(self, s, hessian):
        x = self.dm.expand(s.coeffs if isinstance(s, DiscreteState) else s)
        Xp = x[self.dm.plate_dofs]
        Xr = x[self.dm.rod_dofs]
        pt = kernels.element_terms("plate", Xp, self.Bp, self.wp, self.plate_params, hessian, self.backend)
        rt = kernels.element_terms("rod", Xr, self.Br, self.wr, self.rod_params, hessian, self.backend)
        return x, pt, rt

    def value_gradient(self, s):
        x, (ep, gp, _), (er, gr, _) = self._terms(s, False)
        g = np.zeros(self.dm.n_full)
        np.add.at(g, self.dm.plate_dofs, gp)
        np.add.at(g, self.dm.rod_dofs, gr)
        J = float(np.sum(ep) + np.sum(er) - self._load_full @ x)
        return J, self.dm.restrict(g - self._load_full)

    def value(self, s) -> float:
        return self.value_gradient(s)[0]

    def hessian(self, s) -> sps.csr_matrix:
        _, (_, _, hp), (_, _, hr) = self._terms(s, True)
        rows, cols, keep = self._sparsity()
        vals = np.concatenate([hp.ravel(), hr.ravel()])[keep]
        n = self.dm.n_free
        H = sps.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        H.sum_duplicates()
        # element Hessians are symmetric up to round-off; make it exact
        return ((H + H.T) * 0.5).tocsr()

    def _sparsity(self):
        if self._pattern is None:
            m = self.dm.full_to_free
            parts_r, parts_c = [], []
            for dofs in (self.dm.plate_dofs, self.dm.rod_dofs):
                nd = dofs.shape[1]
                parts_r.append(np.repeat(dofs, nd, axis=1).ravel())
                parts_c.append(np.tile(dofs, (1, nd)).ravel())
            r, c = m[np.concatenate(parts_r)], m[np.concatenate(parts_c)]
            keep = (r >= 0) & (c >= 0)
            self._pattern = (r[keep], c[keep], keep)
        return self._pattern


def assemble_value_gradient(dm, s, lp, fd, r, **kw):
    return Assembler(dm, lp, fd, r, **kw).value_gradient(s)


def assemble_hessian(dm, s, lp, fd, r, **kw):
    return Assembler(dm, lp, fd, r, **kw).hessian(s)
