"""Gauss quadrature rules and reference-element shape tabulations.

Reference cells: quads live on [-1,1]^2, interface elements on [0,1].
Local node orders
    Q1: (-1,-1), (1,-1), (1,1), (-1,1)                 (CCW corners)
    Q2: tensor lattice idx = 3*b + a, a,b in {0,1,2} at xi,eta in {-1,0,1}
    Hermite: (value_0, slope_0, value_1, slope_1); slope DOFs carry the
    physical element length so that the DOF is the physical derivative.
"""

import numpy as np

_GAUSS_1D = {
    1: ([0.0], [2.0]),
    2: ([-1 / np.sqrt(3.0), 1 / np.sqrt(3.0)], [1.0, 1.0]),
    3: ([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)], [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]),
    4: (
        [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526],
        [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538],
    ),
    5: (
        [-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640],
        [0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665, 0.2369268850561891],
    ),
}


def gauss_1d(n):
    """Return (points, weights) of the n-point Gauss rule on [-1, 1]."""
    p, w = _GAUSS_1D[n]
    return np.asarray(p, dtype=float), np.asarray(w, dtype=float)


def gauss_unit(n):
    """n-point Gauss rule mapped to [0, 1]."""
    p, w = gauss_1d(n)
    return 0.5 * (p + 1.0), 0.5 * w


def gauss_quad_2d(n):
    """Tensor Gauss rule on [-1,1]^2: points (n*n, 2), weights (n*n,)."""
    p, w = gauss_1d(n)
    xi, eta = np.meshgrid(p, p, indexing="ij")
    wx, wy = np.meshgrid(w, w, indexing="ij")
    pts = np.column_stack([xi.ravel(), eta.ravel()])
    return pts, (wx * wy).ravel()


def _lin(xi):
    # 1D linear shapes on [-1,1], nodes -1, +1
    xi = np.asarray(xi, dtype=float)
    return np.stack([0.5 * (1 - xi), 0.5 * (1 + xi)], axis=-1)


def _dlin(xi):
    xi = np.asarray(xi, dtype=float)
    out = np.empty(xi.shape + (2,))
    out[..., 0] = -0.5
    out[..., 1] = 0.5
    return out


def _quad(xi):
    # 1D quadratic shapes on [-1,1], nodes -1, 0, +1
    xi = np.asarray(xi, dtype=float)
    return np.stack([0.5 * xi * (xi - 1), 1 - xi * xi, 0.5 * xi * (xi + 1)], axis=-1)


def _dquad(xi):
    xi = np.asarray(xi, dtype=float)
    return np.stack([xi - 0.5, -2 * xi, xi + 0.5], axis=-1)


_Q1_LOCAL = [(0, 0), (1, 0), (1, 1), (0, 1)]  # (a, b) on the 2-node lattice


def q1_shape(pts):
    """Q1 shape values at pts (m,2) -> (m,4)."""
    lx, ly = _lin(pts[:, 0]), _lin(pts[:, 1])
    return np.stack([lx[:, a] * ly[:, b] for a, b in _Q1_LOCAL], axis=1)


def q1_dshape(pts):
    """Q1 reference gradients at pts (m,2) -> (m,4,2)."""
    lx, ly = _lin(pts[:, 0]), _lin(pts[:, 1])
    dlx, dly = _dlin(pts[:, 0]), _dlin(pts[:, 1])
    out = np.empty((pts.shape[0], 4, 2))
    for i, (a, b) in enumerate(_Q1_LOCAL):
        out[:, i, 0] = dlx[:, a] * ly[:, b]
        out[:, i, 1] = lx[:, a] * dly[:, b]
    return out


def q2_shape(pts):
    """Q2 shape values at pts (m,2) -> (m,9); local idx = 3*b + a."""
    qx, qy = _quad(pts[:, 0]), _quad(pts[:, 1])
    out = np.empty((pts.shape[0], 9))
    for b in range(3):
        for a in range(3):
            out[:, 3 * b + a] = qx[:, a] * qy[:, b]
    return out


def q2_dshape(pts):
    """Q2 reference gradients at pts (m,2) -> (m,9,2)."""
    qx, qy = _quad(pts[:, 0]), _quad(pts[:, 1])
    dqx, dqy = _dquad(pts[:, 0]), _dquad(pts[:, 1])
    out = np.empty((pts.shape[0], 9, 2))
    for b in range(3):
        for a in range(3):
            out[:, 3 * b + a, 0] = dqx[:, a] * qy[:, b]
            out[:, 3 * b + a, 1] = qx[:, a] * dqy[:, b]
    return out


def quad1d_shape(xi):
    """1D quadratic trace shapes on [0,1] at nodes 0, 1/2, 1 -> (m,3)."""
    xi = np.asarray(xi, dtype=float)
    return np.stack(
        [2 * (xi - 0.5) * (xi - 1), -4 * xi * (xi - 1), 2 * xi * (xi - 0.5)], axis=-1
    )


def hermite_shape(xi, h, deriv=0):
    """Cubic Hermite shapes on [0,1] scaled to element length h.

    DOFs are (value_left, d/dz_left, value_right, d/dz_right); derivatives
    returned by deriv=1,2 are with respect to the physical coordinate z.
    """
    xi = np.asarray(xi, dtype=float)
    if deriv == 0:
        v = np.stack(
            [
                1 - 3 * xi**2 + 2 * xi**3,
                h * xi * (1 - xi) ** 2,
                3 * xi**2 - 2 * xi**3,
                h * xi**2 * (xi - 1),
            ],
            axis=-1,
        )
        return v
    if deriv == 1:
        v = np.stack(
            [
                (-6 * xi + 6 * xi**2) / h,
                (1 - 4 * xi + 3 * xi**2),
                (6 * xi - 6 * xi**2) / h,
                (3 * xi**2 - 2 * xi),
            ],
            axis=-1,
        )
        return v
    if deriv == 2:
        v = np.stack(
            [
                (-6 + 12 * xi) / h**2,
                (-4 + 6 * xi) / h,
                (6 - 12 * xi) / h**2,
                (6 * xi - 2) / h,
            ],
            axis=-1,
        )
        return v
    raise ValueError(f"unsupported derivative order {deriv}")
