"""Hot per-cell kernels with numba and pure-numpy implementations.

Every kernel is written twice: a loop form suitable for ``@njit`` and a
vectorized numpy form.  ``SLIPFSI_BACKEND`` (see :mod:`slipfsi.backend`)
picks which set is exported under the public names; ``get_impl`` exposes
both sets so the benchmark can time them against each other.

Shapes use the convention (ncell, nq, ...) for per-quadrature-point data;
``scale`` holds the per-cell reference-to-physical gradient factors
(2/hx, 2/hy).  Summation order is fixed in both paths, so repeated runs
of one backend are bitwise reproducible.
"""

import numpy as np

from . import backend

# ---------------------------------------------------------------------------
# loop sources (numba-compatible)


def _grad_nodal_loops(coefs, dN, scale):
    ncell, nb, dim = coefs.shape
    nq = dN.shape[0]
    out = np.zeros((ncell, nq, 2, 2))
    for c in range(ncell):
        for q in range(nq):
            for i in range(2):
                for j in range(2):
                    acc = 0.0
                    for a in range(nb):
                        acc += coefs[c, a, i] * dN[q, a, j]
                    out[c, q, i, j] = acc * scale[c, j]
    return out


def _eval_nodal_loops(coefs, N):
    ncell, nb, k = coefs.shape
    nq = N.shape[0]
    out = np.zeros((ncell, nq, k))
    for c in range(ncell):
        for q in range(nq):
            for i in range(k):
                acc = 0.0
                for a in range(nb):
                    acc += coefs[c, a, i] * N[q, a]
                out[c, q, i] = acc
    return out


def _jac_inv_sup_loops(G):
    ncell, nq = G.shape[0], G.shape[1]
    J = np.empty((ncell, nq))
    Finv = np.empty((ncell, nq, 2, 2))
    sup = 0.0
    for c in range(ncell):
        for q in range(nq):
            g00 = G[c, q, 0, 0]
            g01 = G[c, q, 0, 1]
            g10 = G[c, q, 1, 0]
            g11 = G[c, q, 1, 1]
            f00 = 1.0 + g00
            f01 = g01
            f10 = g10
            f11 = 1.0 + g11
            det = f00 * f11 - f01 * f10
            J[c, q] = det
            Finv[c, q, 0, 0] = f11 / det
            Finv[c, q, 0, 1] = -f01 / det
            Finv[c, q, 1, 0] = -f10 / det
            Finv[c, q, 1, 1] = f00 / det
            t = g00 * g00 + g01 * g01 + g10 * g10 + g11 * g11
            d = g00 * g11 - g01 * g10
            disc = t * t - 4.0 * d * d
            if disc < 0.0:
                disc = 0.0
            s2 = 0.5 * (t + np.sqrt(disc))
            if s2 < 0.0:
                s2 = 0.0
            s = np.sqrt(s2)
            if s > sup:
                sup = s
    return J, Finv, sup


def _mass_elem_loops(w, N):
    ncell, nq = w.shape
    nb = N.shape[1]
    out = np.zeros((ncell, nb, nb))
    for c in range(ncell):
        for q in range(nq):
            wq = w[c, q]
            for i in range(nb):
                for j in range(nb):
                    out[c, i, j] += wq * N[q, i] * N[q, j]
    return out


def _tgrad_basis_loops(dN, scale, Finv):
    ncell = scale.shape[0]
    nq, nb = dN.shape[0], dN.shape[1]
    out = np.zeros((ncell, nq, nb, 2))
    for c in range(ncell):
        for q in range(nq):
            for a in range(nb):
                dx = dN[q, a, 0] * scale[c, 0]
                dy = dN[q, a, 1] * scale[c, 1]
                out[c, q, a, 0] = dx * Finv[c, q, 0, 0] + dy * Finv[c, q, 1, 0]
                out[c, q, a, 1] = dx * Finv[c, q, 0, 1] + dy * Finv[c, q, 1, 1]
    return out


def _visc_elem_loops(g, w):
    # D(phi_a e_i):D(phi_b e_j) = 0.5*(delta_ij g_a.g_b + g_a[j] g_b[i])
    ncell, nq, nb = g.shape[0], g.shape[1], g.shape[2]
    out = np.zeros((ncell, 2 * nb, 2 * nb))
    for c in range(ncell):
        for q in range(nq):
            wq = w[c, q]
            for a in range(nb):
                for b in range(nb):
                    dot = g[c, q, a, 0] * g[c, q, b, 0] + g[c, q, a, 1] * g[c, q, b, 1]
                    for i in range(2):
                        for j in range(2):
                            val = 0.5 * g[c, q, a, j] * g[c, q, b, i]
                            if i == j:
                                val += 0.5 * dot
                            out[c, 2 * a + i, 2 * b + j] += wq * val
    return out


def _adv_elem_loops(adv, g, N, w):
    ncell, nq, nb = g.shape[0], g.shape[1], g.shape[2]
    out = np.zeros((ncell, nb, nb))
    for c in range(ncell):
        for q in range(nq):
            wq = w[c, q]
            for b in range(nb):
                conv = adv[c, q, 0] * g[c, q, b, 0] + adv[c, q, 1] * g[c, q, b, 1]
                for a in range(nb):
                    out[c, a, b] += wq * N[q, a] * conv
    return out


def _div_elem_loops(Np, g, w):
    ncell, nq, nb = g.shape[0], g.shape[1], g.shape[2]
    npress = Np.shape[1]
    out = np.zeros((ncell, npress, 2 * nb))
    for c in range(ncell):
        for q in range(nq):
            wq = w[c, q]
            for p in range(npress):
                wp = wq * Np[q, p]
                for b in range(nb):
                    out[c, p, 2 * b + 0] += wp * g[c, q, b, 0]
                    out[c, p, 2 * b + 1] += wp * g[c, q, b, 1]
    return out


def _wdot_loops(w, f, h):
    ncell, nq = w.shape
    acc = 0.0
    for c in range(ncell):
        for q in range(nq):
            acc += w[c, q] * (f[c, q, 0] * h[c, q, 0] + f[c, q, 1] * h[c, q, 1])
    return acc


def _wfrob_loops(w, T, S):
    ncell, nq = w.shape
    acc = 0.0
    for c in range(ncell):
        for q in range(nq):
            s = 0.0
            for i in range(2):
                for j in range(2):
                    s += T[c, q, i, j] * S[c, q, i, j]
            acc += w[c, q] * s
    return acc


# ---------------------------------------------------------------------------
# vectorized numpy forms


def _grad_nodal_np(coefs, dN, scale):
    g = np.einsum("cai,qaj->cqij", coefs, dN)
    return g * scale[:, None, None, :]


def _eval_nodal_np(coefs, N):
    return np.einsum("cai,qa->cqi", coefs, N)


def _jac_inv_sup_np(G):
    F = G.copy()
    F[..., 0, 0] += 1.0
    F[..., 1, 1] += 1.0
    J = F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0]
    Finv = np.empty_like(F)
    Finv[..., 0, 0] = F[..., 1, 1] / J
    Finv[..., 0, 1] = -F[..., 0, 1] / J
    Finv[..., 1, 0] = -F[..., 1, 0] / J
    Finv[..., 1, 1] = F[..., 0, 0] / J
    t = np.einsum("cqij,cqij->cq", G, G)
    d = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
    disc = np.maximum(t * t - 4.0 * d * d, 0.0)
    s2 = np.maximum(0.5 * (t + np.sqrt(disc)), 0.0)
    sup = float(np.sqrt(s2).max()) if s2.size else 0.0
    return J, Finv, sup


def _mass_elem_np(w, N):
    return np.einsum("cq,qi,qj->cij", w, N, N)


def _tgrad_basis_np(dN, scale, Finv):
    dphys = dN[None, :, :, :] * scale[:, None, None, :]
    return np.einsum("cqaj,cqjk->cqak", dphys, Finv)


def _visc_elem_np(g, w):
    ncell, nq, nb = g.shape[0], g.shape[1], g.shape[2]
    dot = np.einsum("cq,cqak,cqbk->cab", w, g, g)
    cross = np.einsum("cq,cqaj,cqbi->cabij", w, g, g)
    eye = np.eye(2)
    full = 0.5 * cross + 0.5 * dot[:, :, :, None, None] * eye[None, None, None, :, :]
    # reorder (c,a,b,i,j) -> (c, 2a+i, 2b+j)
    return full.transpose(0, 1, 3, 2, 4).reshape(ncell, 2 * nb, 2 * nb).copy()


def _adv_elem_np(adv, g, N, w):
    conv = np.einsum("cqk,cqbk->cqb", adv, g)
    return np.einsum("cq,qa,cqb->cab", w, N, conv)


def _div_elem_np(Np, g, w):
    ncell, nq, nb = g.shape[0], g.shape[1], g.shape[2]
    out = np.einsum("cq,qp,cqbk->cpbk", w, Np, g)
    return out.reshape(ncell, Np.shape[1], 2 * nb)


def _wdot_np(w, f, h):
    return float(np.einsum("cq,cqk,cqk->", w, f, h))


def _wfrob_np(w, T, S):
    return float(np.einsum("cq,cqij,cqij->", w, T, S))


_NUMPY_IMPL = {
    "grad_nodal": _grad_nodal_np,
    "eval_nodal": _eval_nodal_np,
    "jac_inv_sup": _jac_inv_sup_np,
    "mass_elem": _mass_elem_np,
    "tgrad_basis": _tgrad_basis_np,
    "visc_elem": _visc_elem_np,
    "adv_elem": _adv_elem_np,
    "div_elem": _div_elem_np,
    "wdot": _wdot_np,
    "wfrob": _wfrob_np,
}

_LOOP_SOURCES = {
    "grad_nodal": _grad_nodal_loops,
    "eval_nodal": _eval_nodal_loops,
    "jac_inv_sup": _jac_inv_sup_loops,
    "mass_elem": _mass_elem_loops,
    "tgrad_basis": _tgrad_basis_loops,
    "visc_elem": _visc_elem_loops,
    "adv_elem": _adv_elem_loops,
    "div_elem": _div_elem_loops,
    "wdot": _wdot_loops,
    "wfrob": _wfrob_loops,
}

_numba_cache = None


def _numba_impl():
    global _numba_cache
    if _numba_cache is None:
        _numba_cache = {name: backend.njit_always(fn) for name, fn in _LOOP_SOURCES.items()}
    return _numba_cache


def get_impl(name):
    """Return the kernel dict for backend ``name`` ('numpy' or 'numba')."""
    if name == "numpy":
        return dict(_NUMPY_IMPL)
    if name == "numba":
        return _numba_impl()
    raise ValueError(f"unknown backend {name!r}")


_active = _numba_impl() if backend.USE_NUMBA else _NUMPY_IMPL

grad_nodal = _active["grad_nodal"]
eval_nodal = _active["eval_nodal"]
jac_inv_sup = _active["jac_inv_sup"]
mass_elem = _active["mass_elem"]
tgrad_basis = _active["tgrad_basis"]
visc_elem = _active["visc_elem"]
adv_elem = _active["adv_elem"]
div_elem = _active["div_elem"]
wdot = _active["wdot"]
wfrob = _active["wfrob"]


def scatter_square(elem, dofmap, nrows):
    """Accumulate element matrices (ncell,m,m) into COO triplets."""
    ncell, m, _ = elem.shape
    rows = np.repeat(dofmap, m, axis=1).ravel()
    cols = np.tile(dofmap, (1, m)).ravel()
    return rows, cols, elem.ravel()


def scatter_rect(elem, rowmap, colmap):
    """Accumulate rectangular element matrices (ncell,mr,mc) into COO triplets."""
    ncell, mr, mc = elem.shape
    rows = np.repeat(rowmap, mc, axis=1).ravel()
    cols = np.tile(colmap, (1, mr)).ravel()
    return rows, cols, elem.ravel()
