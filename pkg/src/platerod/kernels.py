"""Element kernels for the discrete limit energy.

At every quadrature point the element coefficients x_e are mapped to a
short kinematic vector a = B_q x_e; a pointwise density phi(a) with its
gradient and Hessian is then pulled back to the element.

plate a = (U3_11, U3_12, U3_22, U1_1, U1_2, U2_1, U2_2, U3_1, U3_2)
rod   a = (W1'', W2'', W3', W1', W2', Q3')

params: plate (cb, cm, nu, s), rod (kb, ks, kt, s); s = 1 switches the
geometric nonlinearity on.
"""
from __future__ import annotations

import numpy as np

from ._jit import njit, use_numba

# ---------------------------------------------------------------- numpy path


def plate_point_np(A, p):
    """Vectorized plate density over a (..., 9) array."""
    cb, cm, nu, s = p
    h11, h12, h22 = A[..., 0], A[..., 1], A[..., 2]
    a7, a8 = A[..., 7], A[..., 8]
    z11 = A[..., 3] + 0.5 * s * a7 * a7
    z22 = A[..., 6] + 0.5 * s * a8 * a8
    z12 = 0.5 * (A[..., 4] + A[..., 5]) + 0.5 * s * a7 * a8
    trh, trz = h11 + h22, z11 + z22
    phi = (cb * ((1 - nu) * (h11**2 + 2 * h12**2 + h22**2) + nu * trh**2)
           + cm * ((1 - nu) * (z11**2 + 2 * z12**2 + z22**2) + nu * trz**2))
    gz11 = cm * (2 * (1 - nu) * z11 + 2 * nu * trz)
    gz22 = cm * (2 * (1 - nu) * z22 + 2 * nu * trz)
    gz12 = cm * 4 * (1 - nu) * z12
    g = np.empty_like(A)
    g[..., 0] = cb * (2 * (1 - nu) * h11 + 2 * nu * trh)
    g[..., 1] = cb * 4 * (1 - nu) * h12
    g[..., 2] = cb * (2 * (1 - nu) * h22 + 2 * nu * trh)
    g[..., 3] = gz11
    g[..., 4] = 0.5 * gz12
    g[..., 5] = 0.5 * gz12
    g[..., 6] = gz22
    g[..., 7] = s * (gz11 * a7 + 0.5 * gz12 * a8)
    g[..., 8] = s * (gz22 * a8 + 0.5 * gz12 * a7)

    H = np.zeros(A.shape + (9,))
    H[..., 0, 0] = H[..., 2, 2] = 2 * cb
    H[..., 0, 2] = H[..., 2, 0] = 2 * cb * nu
    H[..., 1, 1] = 4 * cb * (1 - nu)
    # J rows: dZ11, dZ12, dZ22 w.r.t. a
    J = np.zeros(A.shape[:-1] + (3, 9))
    J[..., 0, 3] = 1.0
    J[..., 0, 7] = s * a7
    J[..., 1, 4] = J[..., 1, 5] = 0.5
    J[..., 1, 7] = 0.5 * s * a8
    J[..., 1, 8] = 0.5 * s * a7
    J[..., 2, 6] = 1.0
    J[..., 2, 8] = s * a8
    D = cm * np.array([[2.0, 0.0, 2 * nu], [0.0, 4 * (1 - nu), 0.0], [2 * nu, 0.0, 2.0]])
    H += np.einsum("...ki,kl,...lj->...ij", J, D, J)
    H[..., 7, 7] += s * gz11
    H[..., 8, 8] += s * gz22
    H[..., 7, 8] += 0.5 * s * gz12
    H[..., 8, 7] += 0.5 * s * gz12
    return phi, g, H


def rod_point_np(A, p):
    kb, ks, kt, s = p
    a3, a4 = A[..., 3], A[..., 4]
    e = A[..., 2] + 0.5 * s * (a3 * a3 + a4 * a4)
    phi = kb * (A[..., 0] ** 2 + A[..., 1] ** 2) + ks * e * e + kt * A[..., 5] ** 2
    g = np.empty_like(A)
    g[..., 0] = 2 * kb * A[..., 0]
    g[..., 1] = 2 * kb * A[..., 1]
    g[..., 2] = 2 * ks * e
    g[..., 3] = 2 * ks * e * s * a3
    g[..., 4] = 2 * ks * e * s * a4
    g[..., 5] = 2 * kt * A[..., 5]
    j = np.zeros(A.shape)
    j[..., 2] = 1.0
    j[..., 3] = s * a3
    j[..., 4] = s * a4
    H = 2 * ks * j[..., :, None] * j[..., None, :]
    H[..., 0, 0] += 2 * kb
    H[..., 1, 1] += 2 * kb
    H[..., 5, 5] += 2 * kt
    H[..., 3, 3] += 2 * ks * e * s
    H[..., 4, 4] += 2 * ks * e * s
    return phi, g, H


def element_terms_np(kind, X, B, w, params, hessian=True):
    """(element energies (n_el,), gradients (n_el, nd), Hessians or None)."""
    point = plate_point_np if kind == "plate" else rod_point_np
    A = np.einsum("qkd,ed->eqk", B, X)
    phi, g, H = point(A, params)
    en = phi @ w
    ge = np.einsum("q,eqk,qkd->ed", w, g, B, optimize=True)
    if not hessian:
        return en, ge, None
    HB = np.einsum("eqkl,qlm->eqkm", H, B)
    he = np.einsum("q,qkd,eqkm->edm", w, B, HB, optimize=True)
    return en, ge, he


# ---------------------------------------------------------------- numba path


@njit(cache=True)
def _plate_point(a, p, g, H):
    cb, cm, nu, s = p[0], p[1], p[2], p[3]
    h11, h12, h22 = a[0], a[1], a[2]
    a7, a8 = a[7], a[8]
    z11 = a[3] + 0.5 * s * a7 * a7
    z22 = a[6] + 0.5 * s * a8 * a8
    z12 = 0.5 * (a[4] + a[5]) + 0.5 * s * a7 * a8
    trh = h11 + h22
    trz = z11 + z22
    phi = (cb * ((1 - nu) * (h11 * h11 + 2 * h12 * h12 + h22 * h22) + nu * trh * trh)
           + cm * ((1 - nu) * (z11 * z11 + 2 * z12 * z12 + z22 * z22) + nu * trz * trz))
    gz11 = cm * (2 * (1 - nu) * z11 + 2 * nu * trz)
    gz22 = cm * (2 * (1 - nu) * z22 + 2 * nu * trz)
    gz12 = cm * 4 * (1 - nu) * z12
    g[0] = cb * (2 * (1 - nu) * h11 + 2 * nu * trh)
    g[1] = cb * 4 * (1 - nu) * h12
    g[2] = cb * (2 * (1 - nu) * h22 + 2 * nu * trh)
    g[3] = gz11
    g[4] = 0.5 * gz12
    g[5] = 0.5 * gz12
    g[6] = gz22
    g[7] = s * (gz11 * a7 + 0.5 * gz12 * a8)
    g[8] = s * (gz22 * a8 + 0.5 * gz12 * a7)
    for i in range(9):
        for j in range(9):
            H[i, j] = 0.0
    H[0, 0] = 2 * cb
    H[2, 2] = 2 * cb
    H[0, 2] = 2 * cb * nu
    H[2, 0] = 2 * cb * nu
    H[1, 1] = 4 * cb * (1 - nu)
    J = np.zeros((3, 9))
    J[0, 3] = 1.0
    J[0, 7] = s * a7
    J[1, 4] = 0.5
    J[1, 5] = 0.5
    J[1, 7] = 0.5 * s * a8
    J[1, 8] = 0.5 * s * a7
    J[2, 6] = 1.0
    J[2, 8] = s * a8
    D = np.zeros((3, 3))
    D[0, 0] = 2 * cm
    D[2, 2] = 2 * cm
    D[0, 2] = 2 * cm * nu
    D[2, 0] = 2 * cm * nu
    D[1, 1] = 4 * cm * (1 - nu)
    for i in range(9):
        for j in range(9):
            acc = 0.0
            for k in range(3):
                for m in range(3):
                    acc += J[k, i] * D[k, m] * J[m, j]
            H[i, j] += acc
    H[7, 7] += s * gz11
    H[8, 8] += s * gz22
    H[7, 8] += 0.5 * s * gz12
    H[8, 7] += 0.5 * s * gz12
    return phi


@njit(cache=True)
def _rod_point(a, p, g, H):
    kb, ks, kt, s = p[0], p[1], p[2], p[3]
    e = a[2] + 0.5 * s * (a[3] * a[3] + a[4] * a[4])
    phi = kb * (a[0] * a[0] + a[1] * a[1]) + ks * e * e + kt * a[5] * a[5]
    g[0] = 2 * kb * a[0]
    g[1] = 2 * kb * a[1]
    g[2] = 2 * ks * e
    g[3] = 2 * ks * e * s * a[3]
    g[4] = 2 * ks * e * s * a[4]
    g[5] = 2 * kt * a[5]
    j = np.zeros(6)
    j[2] = 1.0
    j[3] = s * a[3]
    j[4] = s * a[4]
    for r in range(6):
        for c in range(6):
            H[r, c] = 2 * ks * j[r] * j[c]
    H[0, 0] += 2 * kb
    H[1, 1] += 2 * kb
    H[5, 5] += 2 * kt
    H[3, 3] += 2 * ks * e * s
    H[4, 4] += 2 * ks * e * s
    return phi


@njit(cache=True)
def _element_loop(plate, X, B, w, p, hessian):
    n_el, nd = X.shape
    nq, nk, _ = B.shape
    en = np.zeros(n_el)
    ge = np.zeros((n_el, nd))
    he = np.zeros((n_el, nd, nd) if hessian else (0, nd, nd))
    a = np.zeros(nk)
    g = np.zeros(nk)
    H = np.zeros((nk, nk))
    HB = np.zeros((nk, nd))
    for e in range(n_el):
        for q in range(nq):
            for k in range(nk):
                acc = 0.0
                for d in range(nd):
                    acc += B[q, k, d] * X[e, d]
                a[k] = acc
            if plate:
                phi = _plate_point(a, p, g, H)
            else:
                phi = _rod_point(a, p, g, H)
            wq = w[q]
            en[e] += wq * phi
            for d in range(nd):
                acc = 0.0
                for k in range(nk):
                    acc += B[q, k, d] * g[k]
                ge[e, d] += wq * acc
            if hessian:
                for k in range(nk):
                    for d in range(nd):
                        acc = 0.0
                        for m in range(nk):
                            acc += H[k, m] * B[q, m, d]
                        HB[k, d] = acc
                for d1 in range(nd):
                    for d2 in range(nd):
                        acc = 0.0
                        for k in range(nk):
                            acc += B[q, k, d1] * HB[k, d2]
                        he[e, d1, d2] += wq * acc
    return en, ge, he


def element_terms_jit(kind, X, B, w, params, hessian=True):
    en, ge, he = _element_loop(kind == "plate", np.ascontiguousarray(X), np.ascontiguousarray(B),
                               np.ascontiguousarray(w), np.asarray(params, dtype=np.float64), hessian)
    return en, ge, (he if hessian else None)


def element_terms(kind, X, B, w, params, hessian=True, backend=None):
    """Dispatch to the compiled loop or the numpy path.

    ``backend`` is "numba", "numpy", or None (numba when available).
    """
    if backend is None:
        backend = "numba" if use_numba() else "numpy"
    if backend == "numba":
        return element_terms_jit(kind, X, B, w, params, hessian)
    return element_terms_np(kind, X, B, w, params, hessian)


# ---------------------------------------------------------------- 3D density


def svk_integral_np(H, w, lam, mu):
    """(sum_q w_q Q(H + H^T + H^T H), count of points with det(I + H) <= 0)."""
    Ht = np.swapaxes(H, -1, -2)
    E = H + Ht + Ht @ H
    tr = E[..., 0, 0] + E[..., 1, 1] + E[..., 2, 2]
    dens = lam / 8.0 * tr * tr + mu / 4.0 * np.einsum("...ij,...ij->...", E, E)
    det = np.linalg.det(np.eye(3) + H)
    bad = int(np.count_nonzero(det <= 0.0))
    return float(dens @ w), bad


@njit(cache=True)
def _svk_loop(H, w, lam, mu):
    total = 0.0
    bad = 0
    E = np.empty((3, 3))
    for q in range(H.shape[0]):
        for i in range(3):
            for j in range(3):
                acc = H[q, i, j] + H[q, j, i]
                for k in range(3):
                    acc += H[q, k, i] * H[q, k, j]
                E[i, j] = acc
        tr = E[0, 0] + E[1, 1] + E[2, 2]
        ss = 0.0
        for i in range(3):
            for j in range(3):
                ss += E[i, j] * E[i, j]
        total += w[q] * (lam / 8.0 * tr * tr + mu / 4.0 * ss)
        F00 = 1.0 + H[q, 0, 0]
        F11 = 1.0 + H[q, 1, 1]
        F22 = 1.0 + H[q, 2, 2]
        det = (F00 * (F11 * F22 - H[q, 1, 2] * H[q, 2, 1])
               - H[q, 0, 1] * (H[q, 1, 0] * F22 - H[q, 1, 2] * H[q, 2, 0])
               + H[q, 0, 2] * (H[q, 1, 0] * H[q, 2, 1] - F11 * H[q, 2, 0]))
        if det <= 0.0:
            bad += 1
    return total, bad


def svk_integral(H, w, lam, mu, backend=None):
    """Quadrature of the St Venant-Kirchhoff density; H has shape (N, 3, 3)."""
    if backend is None:
        backend = "numba" if use_numba() else "numpy"
    if backend == "numba":
        t, b = _svk_loop(np.ascontiguousarray(H), np.ascontiguousarray(w), float(lam), float(mu))
        return float(t), int(b)
    return svk_integral_np(H, w, lam, mu)
