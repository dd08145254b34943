"""Geometric helpers: torque cross products, force-balance residuals, hulls."""

import itertools

import numpy as np

from .errors import DimensionMismatch


def cross(x, f):
    """Cross product as used in torque balances.

    Scalar ``x0*f1 - x1*f0`` for d=2, the usual 3-vector for d=3.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    d = x.shape[-1]
    if f.shape[-1] != d:
        raise DimensionMismatch("position/force dimension mismatch")
    if d == 2:
        return x[..., 0] * f[..., 1] - x[..., 1] * f[..., 0]
    if d == 3:
        return np.cross(x, f)
    raise DimensionMismatch(f"cross product defined for d in (2, 3), got {d}")


def balance_residual(positions, forces):
    """Worst-case residual of the force/torque equilibrium equations.

    ``positions`` is (n, d), ``forces`` is (n, d). Returns
    ``max(|sum f|_inf, |sum x_i x f_i|_inf)``.
    """
    positions = np.asarray(positions, dtype=float)
    forces = np.asarray(forces, dtype=float)
    if positions.shape != forces.shape:
        raise DimensionMismatch(
            f"positions {positions.shape} vs forces {forces.shape}"
        )
    fsum = forces.sum(axis=0)
    tsum = np.atleast_1d(cross(positions, forces)).reshape(len(positions), -1).sum(axis=0)
    return float(max(np.abs(fsum).max(), np.abs(tsum).max()))


def balance_operator(positions):
    """Matrix B with ``B f = 0`` iff the force system ``f`` is balanced.

    Rows are the d force-sum equations followed by the torque equations
    (one for d=2, three for d=3); ``f`` is read node-major.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    n, d = positions.shape
    n_torque = 1 if d == 2 else 3
    B = np.zeros((d + n_torque, n * d))
    for i in range(n):
        for a in range(d):
            B[a, i * d + a] = 1.0
    for i, x in enumerate(positions):
        if d == 2:
            B[2, i * d + 0] = -x[1]
            B[2, i * d + 1] = x[0]
        else:
            B[3, i * d + 1] = -x[2]
            B[3, i * d + 2] = x[1]
            B[4, i * d + 0] = x[2]
            B[4, i * d + 2] = -x[0]
            B[5, i * d + 0] = -x[1]
            B[5, i * d + 1] = x[0]
    return B


def project_balanced(f, positions):
    """Orthogonal projection of a force vector onto the balanced subspace."""
    f = np.asarray(f, dtype=float)
    B = balance_operator(positions)
    return f - np.linalg.pinv(B) @ (B @ f)


def hull_diameter(points):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) < 2:
        return 0.0
    diff = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def hull_distance(x, points):
    """Exact Euclidean distance from ``x`` to the convex hull of ``points``.

    Enumerates candidate supporting subsets of size at most d+1 (enough by
    Caratheodory) and keeps the best feasible affine projection. Intended for
    the desk-scale point sets of this package, not large hulls.
    """
    x = np.asarray(x, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    if x.shape != (d,):
        raise DimensionMismatch(f"point has shape {x.shape}, hull points are {d}-dim")
    best = np.sqrt(((pts - x) ** 2).sum(-1)).min()
    if best == 0.0:
        return 0.0
    for size in range(2, min(n, d + 1) + 1):
        for subset in itertools.combinations(range(n), size):
            p = pts[list(subset)]
            # projection onto the affine hull of the subset: KKT system in
            # barycentric coordinates t with sum(t) = 1
            g = p @ p.T
            kkt = np.zeros((size + 1, size + 1))
            kkt[:size, :size] = 2.0 * g
            kkt[:size, size] = 1.0
            kkt[size, :size] = 1.0
            rhs = np.concatenate([2.0 * (p @ x), [1.0]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue  # affinely dependent subset; covered by smaller ones
            t = sol[:size]
            if t.min() < -1e-12:
                continue
            cand = np.linalg.norm(p.T @ t - x)
            best = min(best, cand)
    return float(best)
