"""Independent reference implementations used only by the tests.

None of these share code paths with the package's kernel evaluator: the
mode sum is done as a fixed composite Gauss-Legendre tensor rule in
cylindrical variables (k_perp, k_z) on the bare coupling, and the unit
constants are rebuilt from CODATA values.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import constants

from qd_discord.phonon import MaterialParams, coupling_squared

# -- units ------------------------------------------------------------------------

MEV = constants.e * 1e-3                      # J
CODATA_HBAR_MEV_PS = constants.hbar / MEV / 1e-12
CODATA_KB_MEV_PER_K = constants.k / MEV

# The kernels are defined with these rounded values; they agree with CODATA
# to about 3e-8 relative, which is checked separately.
HBAR_MEV_PS = 0.6582119569
KB_MEV_PER_K = 0.08617333


def density_internal_via_si(rho_kg_m3: float) -> float:
    """kg/m^3 -> meV ps^2 nm^-5 by converting kg = J s^2 m^-2 term by term."""
    kg = (1.0 / MEV) * (1e12) ** 2 / (1e9) ** 2      # meV ps^2 nm^-2
    per_m3 = 1.0 / (1e9) ** 3                        # nm^-3
    return rho_kg_m3 * kg * per_m3


def density_internal_via_ev(rho_kg_m3: float) -> float:
    """Same conversion through E = m c^2: 1 kg = c^2 / e eV, with c in nm/ps."""
    c_nm_ps = constants.c * 1e9 / 1e12
    kg_in_meV = constants.c**2 / constants.e * 1e3   # meV per kg (rest energy)
    return rho_kg_m3 * kg_in_meV / c_nm_ps**2 / 1e27


# -- cylindrical tensor quadrature -------------------------------------------------

def _composite(lo: float, hi: float, width: float, order: int = 16, refine_origin: bool = True):
    """Composite Gauss-Legendre nodes/weights with panels of at most ``width``."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = [lo]
    if refine_origin:
        # Geometric panels near the origin, where the integrand is only piecewise smooth.
        edges += [lo + width * 2.0**-j for j in range(12, 0, -1)]
    n = max(1, math.ceil((hi - edges[-1]) / width))
    edges += list(np.linspace(edges[-1], hi, n + 1)[1:])
    edges = np.asarray(edges)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def cylindrical_kernels(t: float, temperature: float, d: float, params: MaterialParams | None = None,
                        n_sigma: float = 7.0, resolution: float = 4.0) -> dict:
    """B01, B03, A01, A03 (without the -deltaE t term) by tensor quadrature.

    ``resolution`` scales the number of panels per oscillation period.
    """
    p = params or MaterialParams()
    kp_max = n_sigma * 2.0 / p.l_perp
    kz_max = n_sigma * 2.0 / p.l_z
    freq = p.c * t + (0.0 if math.isinf(d) else d)
    width = min(0.25, 2.0 * math.pi / max(freq, 1e-9) / resolution)
    kp, wp = _composite(0.0, kp_max, width)
    kz, wz = _composite(0.0, kz_max, width)
    KP, KZ = np.meshgrid(kp, kz, indexing="ij")
    W = np.outer(wp, wz) * 2.0 * coupling_squared(KP, KZ, p)      # k_z >= 0 half, doubled
    k = np.hypot(KP, KZ)
    omega = p.c * k
    if temperature == 0:
        bose = np.ones_like(omega)
    else:
        bose = 1.0 / np.tanh(HBAR_MEV_PS * omega / (2.0 * KB_MEV_PER_K * temperature))
    cross = np.zeros_like(KZ) if math.isinf(d) else np.cos(KZ * d)
    cos_m1 = np.cos(omega * t) - 1.0
    sin_ = np.sin(omega * t)
    return {
        "B01": float(np.sum(W * cos_m1 * bose)),
        "B03": float(np.sum(W * 2.0 * (1.0 + cross) * cos_m1 * bose)),
        "A01": float(np.sum(W * sin_)),
        "A03": float(np.sum(W * 2.0 * (1.0 + cross) * sin_)),
    }


def cylindrical_shift(d: float, params: MaterialParams | None = None, n_sigma: float = 7.0) -> float:
    """2 Re sum_k omega_k |g_k|^2 exp(i k_z d) by tensor quadrature."""
    p = params or MaterialParams()
    kp, wp = _composite(0.0, n_sigma * 2.0 / p.l_perp, 0.05)
    kz, wz = _composite(0.0, n_sigma * 2.0 / p.l_z, 0.05)
    KP, KZ = np.meshgrid(kp, kz, indexing="ij")
    W = np.outer(wp, wz) * 2.0 * coupling_squared(KP, KZ, p)
    return float(2.0 * np.sum(W * p.c * np.hypot(KP, KZ) * np.cos(KZ * d)))


def analytic_shift(d: float, params: MaterialParams | None = None) -> float:
    """Closed form of the shift: omega |g|^2 is separable in (k_perp, k_z).

    2 * S c * int k_perp e^{-l_perp^2 k_perp^2 / 2} * int e^{-l_z^2 k_z^2 / 2} cos(k_z d)
    with S = (sigma_e - sigma_h)^2 / (8 pi^2 rho hbar c^3).
    """
    p = params or MaterialParams()
    rho = density_internal_via_si(p.rho)
    s = (p.sigma_e - p.sigma_h) ** 2 / (8.0 * math.pi**2 * rho * HBAR_MEV_PS * p.c**3)
    radial = 1.0 / p.l_perp**2
    axial = math.sqrt(2.0 * math.pi) / p.l_z * math.exp(-0.5 * d * d / p.l_z**2)
    return 2.0 * s * p.c * radial * axial


# -- states ------------------------------------------------------------------------

def random_density_matrix(rng: np.random.Generator, rank: int = 4) -> np.ndarray:
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure(rng: np.random.Generator) -> np.ndarray:
    return random_density_matrix(rng, rank=1)


def random_unitary2(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def bell_basis() -> np.ndarray:
    s = 1.0 / math.sqrt(2.0)
    return np.array([
        [s, 0, 0, s],
        [s, 0, 0, -s],
        [0, s, s, 0],
        [0, s, -s, 0],
    ], dtype=complex)


def random_bell_diagonal(rng: np.random.Generator) -> np.ndarray:
    p = rng.dirichlet(np.ones(4))
    B = bell_basis()
    return sum(p[i] * np.outer(B[i], B[i].conj()) for i in range(4))


def random_zero_local_bloch(rng: np.random.Generator) -> np.ndarray:
    """rho = (I + sum T_ij s_i s_j)/4 with a random T that keeps rho PSD."""
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    T = rng.normal(size=(3, 3))
    corr = sum(T[i, j] * np.kron(paulis[i], paulis[j]) for i in range(3) for j in range(3))
    # Scale into the PSD region: smallest eigenvalue of I + s*corr must be >= 0.
    lam = np.linalg.eigvalsh(corr)
    s = rng.uniform(0.05, 1.0) / max(-lam.min(), 1e-12)
    return (np.eye(4) + min(s, 1.0 / np.abs(lam).max()) * corr) / 4.0


def brute_purity_deficit(rho: np.ndarray, ua: np.ndarray, ub: np.ndarray) -> float:
    """Tr rho^2 - Tr Pi(rho)^2 with explicit projectors; ua, ub are 2x2 unitaries (columns = basis)."""
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            v = np.kron(ua[:, i], ub[:, j])
            P = np.outer(v, v.conj())
            out += P @ rho @ P
    return float(np.trace(rho @ rho).real - np.trace(out @ out).real)


def cylindrical_static_cross(d: float, temperature: float, params: MaterialParams | None = None,
                             n_sigma: float = 7.0) -> float:
    """Long-time limit of B03 - 2 B01: -2 sum_k |g_k|^2 cos(k_z d) (2 n_k + 1).

    The cos(omega t) part averages out once the phonon packet has passed.
    """
    p = params or MaterialParams()
    width = min(0.05, 2.0 * math.pi / d / 4.0)
    kp, wp = _composite(0.0, n_sigma * 2.0 / p.l_perp, 0.05)
    kz, wz = _composite(0.0, n_sigma * 2.0 / p.l_z, width)
    cross = np.cos(kz * d) * wz
    total = 0.0
    for lo in range(0, kp.size, 16):
        KP, KZ = np.meshgrid(kp[lo:lo + 16], kz, indexing="ij")
        omega = p.c * np.hypot(KP, KZ)
        bose = 1.0 / np.tanh(HBAR_MEV_PS * omega / (2.0 * KB_MEV_PER_K * temperature))
        W = 2.0 * coupling_squared(KP, KZ, p) * bose
        total += float(wp[lo:lo + 16] @ (W @ cross))
    return -2.0 * total
