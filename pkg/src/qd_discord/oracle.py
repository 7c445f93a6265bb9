"""Brute-force symmetric geometric discord.

Minimises the purity lost when both qubits are measured in local
orthonormal bases, working directly on the 4x4 density matrix: a coarse
deterministic grid over both Bloch spheres, then Nelder-Mead polishing of
the best seeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .states import TwoQubitState


@dataclass(frozen=True)
class MeasurementAxes:
    theta_a: float
    phi_a: float
    theta_b: float
    phi_b: float

    def normalized(self) -> "MeasurementAxes":
        """Fold angles into theta in [0, pi], phi in [0, 2 pi)."""
        def fold(theta, phi):
            theta = math.remainder(theta, 2 * math.pi)
            if theta < 0:
                theta, phi = -theta, phi + math.pi
            return theta, phi % (2 * math.pi)
        ta, pa = fold(self.theta_a, self.phi_a)
        tb, pb = fold(self.theta_b, self.phi_b)
        return MeasurementAxes(ta, pa, tb, pb)

    def as_tuple(self):
        return (self.theta_a, self.phi_a, self.theta_b, self.phi_b)


@dataclass(frozen=True)
class OracleResult:
    value: float
    axes: MeasurementAxes
    evaluations: int


def _basis(theta, phi):
    """Orthonormal qubit bases along the Bloch direction (theta, phi).

    Returns shape (..., 2 outcomes, 2 components).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    e = np.exp(1j * phi)
    up = np.stack([c + 0j, s * e], axis=-1)
    down = np.stack([-s * np.conj(e), c + 0j], axis=-1)
    return np.stack([up, down], axis=-2)


def _probabilities(rho: np.ndarray, ua: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """p[..., a, b] = <u_a v_b| rho |u_a v_b> for broadcastable basis stacks."""
    r = rho.reshape(2, 2, 2, 2)
    amp = np.einsum("...ai,...bj->...abij", ua, ub)
    return np.einsum("...abij,ijkl,...abkl->...ab", amp.conj(), r, amp).real


def _basis_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[c, s * e], [-s * e.conjugate(), c]])


def _deficit(rho: np.ndarray, rho_purity: float, angles) -> float:
    # Rows of the Kronecker product are the four product basis vectors.
    v = np.kron(_basis_matrix(angles[0], angles[1]), _basis_matrix(angles[2], angles[3]))
    p = np.einsum("ki,ij,kj->k", v.conj(), rho, v).real
    return rho_purity - float(p @ p)


def purity_deficit(state: TwoQubitState, axes: MeasurementAxes) -> float:
    """Tr(rho^2) - Tr(Pi(rho)^2) for the product-basis pinching Pi defined by ``axes``."""
    rho = state.rho
    return _deficit(rho, float(np.sum(np.abs(rho) ** 2)), axes.as_tuple())


def _grid(n: int):
    theta = math.pi * (np.arange(n) + 0.5) / n
    phi = 2 * math.pi * np.arange(n) / n
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    return tt.ravel(), pp.ravel()


def deficit_on_grid(state: TwoQubitState, n: int = 16):
    """Purity deficit on the n^4 product grid; returns (values[na, nb], angles_a, angles_b)."""
    rho = state.rho
    ta, pa = _grid(n)
    ba = _basis(ta, pa)                     # (n^2, 2, 2)
    m = ba.shape[0]
    r = rho.reshape(2, 2, 2, 2)             # r[i, j, k, l] = <ij|rho|kl>
    # Contract qubit A first, then qubit B as a single matrix product.
    left = np.einsum("nai,ijkl,nak->najl", ba.conj(), r, ba).reshape(2 * m, 4)
    right = np.einsum("nbj,nbl->nbjl", ba.conj(), ba).reshape(2 * m, 4)
    p = (left @ right.T).real.reshape(m, 2, m, 2)
    deficit = np.sum(np.abs(rho) ** 2) - np.einsum("manb,manb->mn", p, p)
    return deficit, (ta, pa), (ta, pa)


def _grid_minima(values: np.ndarray, n: int) -> np.ndarray:
    """Flat mask of grid local minima, one representative per axis-sign pair.

    The grid axes are (theta_a, phi_a, theta_b, phi_b); phi is periodic.
    Flipping a measurement axis gives the same basis, so only minima with
    both axes in the upper hemisphere are kept.
    """
    v = values.reshape(n, n, n, n)
    padded = np.pad(v, [(1, 1), (0, 0), (1, 1), (0, 0)], constant_values=np.inf)
    core = (slice(1, -1), slice(None), slice(1, -1), slice(None))
    mask = np.ones(v.shape, dtype=bool)
    for axis in range(4):
        for step in (-1, 1):
            if axis in (0, 2):
                sl = list(core)
                sl[axis] = slice(1 + step, n + 1 + step)
                neighbour = padded[tuple(sl)]
            else:
                neighbour = np.roll(v, step, axis=axis)
            mask &= v <= neighbour
    upper = np.arange(n) < n / 2
    mask &= upper[:, None, None, None] & upper[None, None, :, None]
    return mask.ravel()


def oracle_discord(state: TwoQubitState, restarts: int = 4, grid: int = 16,
                   xatol: float = 1e-10) -> OracleResult:
    """Multistart minimum of the purity deficit over product measurements.

    Up to ``restarts`` seeds are polished with Nelder-Mead: grid local
    minima first, then the lowest remaining grid points, each group ordered
    by value with ties broken lexicographically by angle. The best polished
    value wins.
    The result is an upper estimate of the true minimum.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    values, (ta, pa), (tb, pb) = deficit_on_grid(state, grid)
    n2 = ta.size
    flat = values.ravel()
    ia, ib = np.divmod(np.arange(flat.size), n2)
    order = np.lexsort((pb[ib], tb[ib], pa[ia], ta[ia], flat))
    # Seed from distinct basins first, then from the lowest remaining points.
    minima = _grid_minima(values, grid)
    order = np.concatenate([order[minima[order]], order[~minima[order]]])
    evaluations = flat.size

    rho = state.rho
    rho_purity = float(np.sum(np.abs(rho) ** 2))
    fun = lambda v: _deficit(rho, rho_purity, v)
    best = None
    for k in order[:restarts]:
        x0 = np.array([ta[ia[k]], pa[ia[k]], tb[ib[k]], pb[ib[k]]])
        res = minimize(fun, x0, method="Nelder-Mead",
                       options={"xatol": xatol, "fatol": 1e-15, "maxiter": 20000, "maxfev": 40000})
        evaluations += res.nfev
        cand = (float(res.fun), tuple(MeasurementAxes(*res.x).normalized().as_tuple()))
        if best is None or cand < best:
            best = cand
    value, angles = best
    return OracleResult(value=value, axes=MeasurementAxes(*angles), evaluations=evaluations)
