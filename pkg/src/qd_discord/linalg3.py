"""Eigen-decomposition of real symmetric 3x3 matrices.

Closed-form trigonometric roots of the characteristic polynomial, with a
cyclic Jacobi fallback when eigenvalues are (nearly) degenerate.
"""
from __future__ import annotations

import math

import numpy as np

# Relative discriminant below which the closed form hands over to Jacobi.
DEGENERACY_THRESHOLD = 1e-12


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip v so that its first nonzero component is positive."""
    for x in v:
        if abs(x) > 1e-14:
            return v if x > 0 else -v
    return v


def jacobi_eigh(a, tol: float = 1e-15, max_sweeps: int = 50):
    """Cyclic Jacobi rotations. Returns (eigenvalues descending, vectors as columns)."""
    a = np.array(a, dtype=float)
    v = np.eye(3)
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2)
        if off <= tol * scale:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if apq == 0.0:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            a[p, q] = a[q, p] = 0.0
            v = v @ rot
    w = np.diag(a).copy()
    # Deterministic column order: eigenvalue descending, ties by |first component| descending.
    order = sorted(range(3), key=lambda i: (-w[i], -abs(v[0, i]), i))
    vecs = np.column_stack([_canonical_sign(v[:, i]) for i in order])
    return w[order], vecs


def relative_discriminant(w) -> float:
    """prod (w_i - w_j)^2 over pairs, normalised by the sixth power of the spread scale."""
    w = np.asarray(w, dtype=float)
    scale = np.abs(w).max()
    if scale == 0:
        return 0.0
    gaps = ((w[0] - w[1]) / scale) * ((w[0] - w[2]) / scale) * ((w[1] - w[2]) / scale)
    return gaps**2


def eigvalsh3(a) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 matrix in descending order.

    Near-degenerate spectra, where the closed form loses about half the
    digits, are recomputed by Jacobi.
    """
    w = _eigvalsh3_closed(a)
    if relative_discriminant(w) < DEGENERACY_THRESHOLD:
        return jacobi_eigh(a)[0]
    return w


def _eigvalsh3_closed(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = (a[0, 0] + a[1, 1] + a[2, 2]) / 3.0
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * p1
    if p2 == 0.0:
        return np.array([q, q, q])
    p = math.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    r = np.linalg.det(b) / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    w1 = q + 2.0 * p * math.cos(phi)
    w3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    w2 = 3.0 * q - w1 - w3
    return np.array([w1, w2, w3])


def _cross(u, v) -> np.ndarray:
    # np.cross carries heavy per-call overhead for single 3-vectors.
    return np.array([u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]])


def _null_vector(m: np.ndarray) -> np.ndarray:
    rows = (m[0], m[1], m[2])
    crosses = [_cross(rows[0], rows[1]), _cross(rows[0], rows[2]), _cross(rows[1], rows[2])]
    best = max(crosses, key=lambda v: float(v @ v))
    return best / math.sqrt(float(best @ best))


def eigh3(a):
    """Eigenvalues (descending) and unit eigenvectors (columns) of a symmetric 3x3 matrix.

    Returns ``(w, v, degenerate)`` where ``degenerate`` flags that the Jacobi
    fallback was used.
    """
    a = np.asarray(a, dtype=float)
    a = 0.5 * (a + a.T)
    scale = np.abs(a).max()
    if scale == 0:
        return np.zeros(3), np.eye(3), True
    a = a / scale                          # keeps cross products clear of under/overflow
    w = _eigvalsh3_closed(a)
    if relative_discriminant(w) < DEGENERACY_THRESHOLD:
        wj, vj = jacobi_eigh(a)
        return wj * scale, vj, True
    vecs = []
    for lam in w:
        vecs.append(_canonical_sign(_null_vector(a - lam * np.eye(3))))
    return w * scale, np.column_stack(vecs), False


def top_eigenvector(a, w: np.ndarray | None = None, vecs: np.ndarray | None = None,
                    atol: float = 1e-10):
    """Eigenvector of the largest eigenvalue and whether that eigenvalue is degenerate.

    For a degenerate top eigenvalue the Jacobi basis is used and, among the
    columns spanning the top eigenspace, the one with the largest absolute
    first component is taken (first nonzero component positive).
    """
    if w is None or vecs is None:
        w, vecs, _ = eigh3(a)
    multiplicity = int(np.sum(w >= w[0] - atol))
    if multiplicity == 1:
        return vecs[:, 0], False
    wj, vj = jacobi_eigh(a)
    top = [i for i in range(3) if wj[i] >= wj[0] - atol]
    i = max(top, key=lambda i: (round(abs(vj[0, i]), 12), -i))
    return vj[:, i], True
