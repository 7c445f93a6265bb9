"""Geometric-discord bounds, concurrence and Bloch representation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg3 import eigh3, eigvalsh3, top_eigenvector
from .states import TwoQubitState, XStateSpec

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)
SYSY = np.kron(SY, SY)

IMAG_TOL = 1e-12


class NonHermitianInput(ValueError):
    pass


class EigenSolverFailure(RuntimeError):
    pass


class DegenerateTopEigenvalue(UserWarning):
    """Top eigenvector of K_x or K_y is not unique; a deterministic choice was made."""


@dataclass(frozen=True)
class BlochRepr:
    x: np.ndarray
    y: np.ndarray
    T: np.ndarray

    def to_matrix(self) -> np.ndarray:
        rho = np.kron(I2, I2).astype(complex)
        for i in range(3):
            rho += self.x[i] * np.kron(PAULI[i], I2)
            rho += self.y[i] * np.kron(I2, PAULI[i])
            for j in range(3):
                rho += self.T[i, j] * np.kron(PAULI[i], PAULI[j])
        return rho / 4.0


# Rows: sigma_i x I, I x sigma_i, then sigma_i x sigma_j (row-major in i, j).
_OPERATORS = np.array(
    [np.kron(s, I2) for s in PAULI]
    + [np.kron(I2, s) for s in PAULI]
    + [np.kron(si, sj) for si in PAULI for sj in PAULI]
)


def bloch_decompose(state: TwoQubitState) -> BlochRepr:
    rho = state.rho if isinstance(state, TwoQubitState) else np.asarray(state)
    vals = np.einsum("ij,kji->k", rho, _OPERATORS)
    if np.abs(vals.imag).max() > IMAG_TOL:
        raise NonHermitianInput(f"Pauli expectation has imaginary part {np.abs(vals.imag).max():.3g}")
    vals = vals.real
    return BlochRepr(vals[0:3].copy(), vals[3:6].copy(), vals[6:].reshape(3, 3).copy())


@dataclass(frozen=True)
class DiscordBounds:
    """Lower and upper bounds on the symmetric geometric discord.

    Both are normalised so that maximally entangled states give 1/2, i.e.
    each trace-minus-top-eigenvalue term carries a factor 1/4. The
    remaining fields are diagnostics of the eigenproblems involved.
    """

    lower: float
    upper: float
    kx_eigs: np.ndarray
    ky_eigs: np.ndarray
    kx_vec: np.ndarray
    ky_vec: np.ndarray
    lx_eigs: np.ndarray
    ly_eigs: np.ndarray
    branch_x: float          # (Tr K_x - k_x) / 4
    branch_y: float          # (Tr K_y - k_y) / 4
    degenerate_x: bool = False
    degenerate_y: bool = False

    @property
    def lower_candidates(self) -> np.ndarray:
        """(Tr K_x - k_i) / 4 for the three eigenvalues k_i of K_x (ascending)."""
        return np.sort((self.kx_eigs.sum() - self.kx_eigs) / 4.0)


def _top(k: np.ndarray):
    w, v, _ = eigh3(k)
    vec, degenerate = top_eigenvector(k, w, v)
    return w, vec, degenerate


def discord_bounds(state: TwoQubitState, warn: bool = True) -> DiscordBounds:
    rep = bloch_decompose(state)
    x, y, T = rep.x, rep.y, rep.T
    Kx = np.outer(x, x) + T @ T.T
    Ky = np.outer(y, y) + T.T @ T
    kx_eigs, kx_vec, deg_x = _top(Kx)
    ky_eigs, ky_vec, deg_y = _top(Ky)
    if warn and (deg_x or deg_y):
        warnings.warn("degenerate top eigenvalue in discord upper bound", DegenerateTopEigenvalue, stacklevel=2)

    tx = np.trace(Kx) - kx_eigs[0]
    ty = np.trace(Ky) - ky_eigs[0]
    Lx = np.outer(x, x) + np.outer(T @ ky_vec, T @ ky_vec)
    Ly = np.outer(y, y) + np.outer(T.T @ kx_vec, T.T @ kx_vec)
    lx_eigs = eigvalsh3(Lx)
    ly_eigs = eigvalsh3(Ly)
    rest_x = np.trace(Lx) - lx_eigs[0]
    rest_y = np.trace(Ly) - ly_eigs[0]

    lower = 0.25 * max(tx, ty)
    upper = 0.25 * min(tx + rest_y, ty + rest_x)
    return DiscordBounds(
        lower=float(max(lower, 0.0)),
        upper=float(max(upper, 0.0)),
        kx_eigs=kx_eigs,
        ky_eigs=ky_eigs,
        kx_vec=kx_vec,
        ky_vec=ky_vec,
        lx_eigs=lx_eigs,
        ly_eigs=ly_eigs,
        branch_x=float(0.25 * tx),
        branch_y=float(0.25 * ty),
        degenerate_x=deg_x,
        degenerate_y=deg_y,
    )


def discord_lower(state: TwoQubitState) -> float:
    return discord_bounds(state, warn=False).lower


def discord_upper(state: TwoQubitState) -> float:
    return discord_bounds(state).upper


def xstate_regime_margin(spec: XStateSpec, g03: complex, g12: complex) -> float:
    """a|g03| + b|g12| - |a - b|; positive in the coherence-dominated regime."""
    return spec.a * abs(g03) + spec.b * abs(g12) - abs(spec.a - spec.b)


def xstate_discord_closed_form(spec: XStateSpec, g03: complex, g12: complex) -> float:
    a, b = spec.a, spec.b
    c03, c12 = abs(g03), abs(g12)
    coherent = (a * c03 - b * c12) ** 2 + (a - b) ** 2
    classical = 2 * a**2 * c03**2 + 2 * b**2 * c12**2
    margin = xstate_regime_margin(spec, g03, g12)
    if margin > 0:
        return coherent
    if margin < 0:
        return classical
    assert abs(coherent - classical) <= 1e-12, "closed form discontinuous at regime boundary"
    return coherent


def xstate_concurrence(spec: XStateSpec, g03: complex, g12: complex) -> float:
    """max{0, b|g12| - a, a|g03| - b}; half the standard concurrence of the state."""
    a, b = spec.a, spec.b
    return max(0.0, b * abs(g12) - a, a * abs(g03) - b)


def wootters_concurrence(state: TwoQubitState) -> float:
    rho = state.rho if isinstance(state, TwoQubitState) else np.asarray(state)
    try:
        w, v = np.linalg.eigh(rho)
        sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
        flipped = SYSY @ rho.conj() @ SYSY
        r = sqrt_rho @ flipped @ sqrt_rho
        lam = np.linalg.eigvalsh(0.5 * (r + r.conj().T))
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc
    s = np.sqrt(np.clip(lam, 0.0, None))[::-1]
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))
