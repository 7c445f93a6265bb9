"""Phonon-induced dephasing kernels for two stacked quantum dots.

Internal units: lengths in nm, times in ps, energies in meV, frequencies in
1/ps (hbar = 1 in the dynamics). The mode sum is taken in the continuum
limit, sum_k -> V/(2 pi)^3 int d^3k, where V cancels against |f_k|^2.

The kernels are evaluated in spherical variables (k, u = cos theta). The
angular integral of the form factor is done once per radial node and cached,
so each time point costs a single oscillatory radial integral.
"""
from __future__ import annotations

import functools
import math
import threading
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, special

from .quadrature import (
    QuadratureNotConverged,
    integrate_dyadic,
    level_for_panels,
    panel_nodes,
)

HBAR = 0.6582119569          # meV ps
K_B = 0.08617333             # meV / K
# 1 kg/m^3 expressed in meV ps^2 / nm^5 (1 J = 6.241509074e21 meV).
DENSITY_SI_TO_INTERNAL = 6.241509074460763e21 * 1e6 / 1e27

INFINITE = math.inf
"""Inter-dot distance selecting the decoupled-dot limit (cross terms dropped)."""

# Below this value of hbar*omega/(k_B T) the Bose weight uses its leading expansion.
_SMALL_X = 1e-6


def density_to_internal(rho_si: float) -> float:
    """Mass density in kg/m^3 -> meV ps^2 nm^-5."""
    return rho_si * DENSITY_SI_TO_INTERNAL


class InvalidParameter(ValueError):
    pass


class DegenerateCoupling(UserWarning):
    """sigma_e == sigma_h: the deformation-potential coupling vanishes."""


@dataclass(frozen=True)
class MaterialParams:
    """Deformation-potential coupling constants and dot geometry.

    ``rho`` is given in kg/m^3 and converted once to ``rho_internal``.
    Defaults are GaAs with l_perp = 5 nm, l_z = 1 nm.
    """

    sigma_e: float = 8000.0    # meV
    sigma_h: float = -1000.0   # meV
    c: float = 5.1             # nm/ps
    rho: float = 5360.0        # kg/m^3
    l_perp: float = 5.0        # nm
    l_z: float = 1.0           # nm
    rho_internal: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("c", "rho", "l_perp", "l_z"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameter(f"{name} must be finite and > 0, got {value!r}")
        for name in ("sigma_e", "sigma_h"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if self.sigma_e == self.sigma_h:
            warnings.warn("sigma_e == sigma_h: phonon coupling vanishes", DegenerateCoupling, stacklevel=3)
        object.__setattr__(self, "rho_internal", density_to_internal(self.rho))

    @property
    def prefactor(self) -> float:
        """(sigma_e - sigma_h)^2 / (4 pi^2 rho hbar c^3), in nm^2.

        Radial density of sum_k |g_k|^2 (.) is ``prefactor * k * angular(k)``.
        """
        dsigma = self.sigma_e - self.sigma_h
        return dsigma**2 / (4.0 * math.pi**2 * self.rho_internal * HBAR * self.c**3)


@dataclass(frozen=True)
class BathConfig:
    temperature: float = 77.0     # K
    d: float = 6.0                # nm, or INFINITE
    delta_eps: float = 0.0        # 1/ps

    def __post_init__(self):
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise InvalidParameter(f"temperature must be >= 0, got {self.temperature!r}")
        if math.isnan(self.d) or not self.d > 0:
            raise InvalidParameter(f"d must be > 0 or INFINITE, got {self.d!r}")
        if not math.isfinite(self.delta_eps):
            raise InvalidParameter("delta_eps must be finite")

    @property
    def decoupled(self) -> bool:
        return math.isinf(self.d)


@dataclass(frozen=True)
class QuadratureConfig:
    tol: float = 1e-8              # absolute, per kernel value
    n_sigma: float = 7.0           # cutoff k_max = n_sigma * 2 / min(l_perp, l_z)
    max_nodes: int = 2_000_000     # radial nodes per integral
    angular_tol: float = 1e-14     # absolute, per angular integral

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidParameter("quadrature tol must be > 0")
        if not self.n_sigma > 0:
            raise InvalidParameter("n_sigma must be > 0")
        if self.max_nodes < 21:
            raise InvalidParameter("max_nodes must allow at least one panel")


def coupling_squared(k_perp, k_z, params: MaterialParams):
    """Mode weight |g_k|^2 per unit dk_perp dk_z, azimuth integrated.

    Equals V/(2 pi)^3 * 2 pi k_perp * |f_k|^2 / omega_k^2 with omega_k = c k,
    for k_z over the whole real line (no symmetry doubling). Units: nm^2.
    """
    k_perp = np.asarray(k_perp, dtype=float)
    k_z = np.asarray(k_z, dtype=float)
    k = np.hypot(k_perp, k_z)
    dsigma = params.sigma_e - params.sigma_h
    form = np.exp(-0.5 * (params.l_z**2 * k_z**2 + params.l_perp**2 * k_perp**2))
    scale = dsigma**2 / (8.0 * math.pi**2 * params.rho_internal * HBAR * params.c**3)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(k > 0, k_perp / np.where(k > 0, k, 1.0), 0.0)
    return scale * ratio * form


def bose_weight(omega, temperature: float):
    """2 n(omega) + 1 = coth(hbar omega / 2 k_B T); 1 at zero temperature."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0:
        return np.ones_like(omega)
    x = HBAR * omega / (2.0 * K_B * temperature)
    small = x < _SMALL_X
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 / np.where(small, x, 1.0), 1.0 / np.tanh(xs))


def angular_factor(k, params: MaterialParams):
    """int_0^1 exp(-k^2 q(u)/2) du with q(u) = l_perp^2 (1-u^2) + l_z^2 u^2."""
    k = np.asarray(k, dtype=float)
    spread = params.l_perp**2 - params.l_z**2
    beta = 0.5 * k**2 * spread
    if spread > 0:
        x = np.sqrt(beta)
        safe = np.where(x > 0, x, 1.0)
        ratio = np.where(x > 0, special.dawsn(safe) / safe, 1.0)
        return np.exp(-0.5 * k**2 * params.l_z**2) * ratio
    if spread < 0:
        x = np.sqrt(-beta)
        safe = np.where(x > 0, x, 1.0)
        ratio = np.where(x > 0, 0.5 * math.sqrt(math.pi) * special.erf(safe) / safe, 1.0)
        return np.exp(-0.5 * k**2 * params.l_perp**2) * ratio
    return np.exp(-0.5 * k**2 * params.l_perp**2)


def angular_factor_shifted(k: float, d: float, params: MaterialParams, tol: float):
    """int_0^1 exp(-k^2 q(u)/2) cos(k d u) du and its error estimate."""
    a = -0.5 * k * k * params.l_perp**2
    b = 0.5 * k * k * (params.l_perp**2 - params.l_z**2)
    # full_output keeps QUADPACK's roundoff notices (tiny integrands) out of stderr.
    out = integrate.quad(
        lambda u: math.exp(a + b * u * u), 0.0, 1.0,
        weight="cos", wvar=k * d, epsabs=tol, epsrel=1e-13, limit=400, full_output=1,
    )
    return out[0], out[1]


@dataclass(frozen=True)
class KernelValues:
    """Independent kernels at one time with absolute error bounds.

    ``A03`` already contains the ``-deltaE * t`` term.
    """

    t: float
    A01: float
    A03: float
    B01: float
    B03: float
    deltaE: float
    err_A01: float = 0.0
    err_A03: float = 0.0
    err_B01: float = 0.0
    err_B03: float = 0.0
    err_deltaE: float = 0.0

    @property
    def A02(self):
        return self.A01

    @property
    def A12(self):
        return 0.0

    @property
    def A13(self):
        return self.A03 - self.A01

    @property
    def A23(self):
        return self.A03 - self.A01

    @property
    def B02(self):
        return self.B01

    @property
    def B13(self):
        return self.B01

    @property
    def B23(self):
        return self.B01

    @property
    def B12(self):
        return 4.0 * self.B01 - self.B03

    @property
    def err_B12(self):
        return 4.0 * self.err_B01 + self.err_B03

    def phase(self, i: int, j: int) -> float:
        return getattr(self, f"A{min(i, j)}{max(i, j)}")

    def damping(self, i: int, j: int) -> float:
        return getattr(self, f"B{min(i, j)}{max(i, j)}")

    def coherence_factors(self) -> np.ndarray:
        """4x4 matrix F with rho(t) = F * rho(0) elementwise (unit diagonal)."""
        f = np.ones((4, 4), dtype=complex)
        if self.t == 0:
            return f
        for i in range(4):
            for j in range(i + 1, 4):
                z = np.exp(complex(self.damping(i, j), -self.phase(i, j)))
                f[i, j] = z
                f[j, i] = z.conjugate()
        return f


class DephasingKernels:
    """Evaluator t -> KernelValues for fixed material, bath and quadrature.

    Angular factors on the radial node lattice are cached; results do not
    depend on the order in which times are requested.
    """

    def __init__(self, params: MaterialParams | None = None, bath: BathConfig | None = None,
                 quad: QuadratureConfig | None = None, *, _cache=None):
        self.params = params or MaterialParams()
        self.bath = bath or BathConfig()
        self.quad = quad or QuadratureConfig()
        self.k_max = self.quad.n_sigma * 2.0 / min(self.params.l_perp, self.params.l_z)
        # Shared between instances that differ only in delta_eps.
        self._cache = _cache if _cache is not None else {"panels": {}, "shift": None, "lock": threading.Lock()}

    def with_delta_eps(self, delta_eps: float) -> "DephasingKernels":
        """Same phonon integrals, different bare biexcitonic shift."""
        return DephasingKernels(self.params, replace(self.bath, delta_eps=delta_eps), self.quad,
                                _cache=self._cache)

    # -- node data -----------------------------------------------------------
    def _panel_data(self, level: int, index: np.ndarray):
        """Per-node (k, w0, wd, ang_err, bose) arrays for the given panels."""
        cache = self._cache["panels"]
        missing = [i for i in index.tolist() if (level, i) not in cache]
        if missing:
            computed = {}
            ks = panel_nodes(0.0, self.k_max, level, np.array(missing))
            pref = self.params.prefactor
            d = self.bath.d
            for i, k in zip(missing, ks):
                w0 = pref * k * angular_factor(k, self.params)
                if self.bath.decoupled:
                    wd = np.zeros_like(k)
                    ang_err = np.zeros_like(k)
                else:
                    vals = [angular_factor_shifted(kk, d, self.params, self.quad.angular_tol) for kk in k]
                    wd = pref * k * np.array([v for v, _ in vals])
                    ang_err = pref * k * np.array([e for _, e in vals])
                bose = bose_weight(self.params.c * k, self.bath.temperature)
                computed[(level, i)] = (k, w0, wd, ang_err, bose)
            with self._cache["lock"]:
                cache.update(computed)
        rows = [cache[(level, i)] for i in index.tolist()]
        return tuple(np.stack(col) for col in zip(*rows))

    # -- renormalized shift ---------------------------------------------------
    def _phonon_shift(self):
        """(2 Re sum_k omega_k |g_k|^2 e^{i k_z d}, error bound)."""
        if self._cache["shift"] is not None:
            return self._cache["shift"]
        if self.bath.decoupled or self.params.sigma_e == self.params.sigma_h:
            result = (0.0, 0.0)
        else:
            c = self.params.c
            periods = self.k_max * self.bath.d / (2.0 * math.pi)
            level = level_for_panels(math.ceil(1.0 + periods))

            def values(lvl, idx):
                k, _, wd, ang_err, _ = self._panel_data(lvl, idx)
                return np.stack([2.0 * c * k * wd, 2.0 * c * k * ang_err])

            res = integrate_dyadic(values, 0.0, self.k_max, level, self.quad.tol, self.quad.max_nodes)
            result = (float(res.value[0]), float(res.error[0] + res.value[1]))
        self._cache["shift"] = result
        return result

    @property
    def deltaE(self) -> float:
        """Renormalized biexcitonic shift in 1/ps."""
        return self.bath.delta_eps - self._phonon_shift()[0]

    @property
    def deltaE_error(self) -> float:
        return self._phonon_shift()[1]

    # -- kernels --------------------------------------------------------------
    def start_level(self, t: float) -> int:
        """Initial dyadic level: about one oscillation period per 21-node panel."""
        freq = self.params.c * t
        if not self.bath.decoupled:
            freq += self.bath.d
        periods = self.k_max * freq / (2.0 * math.pi)
        return level_for_panels(math.ceil(1.0 + periods))

    def __call__(self, t: float) -> KernelValues:
        t = float(t)
        if not (t >= 0 and math.isfinite(t)):
            raise ValueError(f"t must be finite and >= 0, got {t!r}")
        try:
            deltaE = self.deltaE
        except QuadratureNotConverged as exc:
            exc.t = t
            raise
        if t == 0 or self.params.sigma_e == self.params.sigma_h:
            return KernelValues(t, 0.0, -deltaE * t, 0.0, 0.0, deltaE,
                                err_A03=self.deltaE_error * t, err_deltaE=self.deltaE_error)
        c = self.params.c

        def values(level, idx):
            k, w0, wd, ang_err, bose = self._panel_data(level, idx)
            phase = c * k * t
            cos_m1 = -2.0 * np.sin(0.5 * phase) ** 2
            sin_ = np.sin(phase)
            pair = 2.0 * (w0 + wd)
            return np.stack([
                w0 * cos_m1 * bose,
                pair * cos_m1 * bose,
                w0 * sin_,
                pair * sin_,
                2.0 * ang_err * np.abs(cos_m1) * bose,
                2.0 * ang_err * np.abs(sin_),
            ])

        try:
            res = integrate_dyadic(values, 0.0, self.k_max, self.start_level(t),
                                   self.quad.tol, self.quad.max_nodes)
        except QuadratureNotConverged as exc:
            exc.t = t
            raise
        B01, B03, A01, A03_int, angB, angA = res.value
        eB01, eB03, eA01, eA03 = res.error[:4]
        return KernelValues(
            t=t,
            A01=float(A01),
            A03=float(A03_int - deltaE * t),
            B01=float(B01),
            B03=float(B03),
            deltaE=deltaE,
            err_A01=float(eA01),
            err_A03=float(eA03 + angA + self.deltaE_error * t),
            err_B01=float(eB01),
            err_B03=float(eB03 + angB),
            err_deltaE=self.deltaE_error,
        )

    def tabulate(self, times: Iterable[float], threads: int = 1) -> "KernelTable":
        return kernels_on_grid(times, self, threads=threads)


@dataclass(frozen=True)
class KernelTable:
    """Kernels tabulated on an ascending time grid."""

    times: np.ndarray
    values: tuple

    def __call__(self, t: float) -> KernelValues:
        i = int(np.searchsorted(self.times, t))
        if i >= self.times.size or self.times[i] != t:
            raise KeyError(f"t={t!r} is not on the tabulated grid")
        return self.values[i]

    def __len__(self):
        return len(self.values)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(v, name) for v in self.values])


@functools.lru_cache(maxsize=32)
def get_kernels(params: MaterialParams, bath: BathConfig, quad: QuadratureConfig) -> DephasingKernels:
    return DephasingKernels(params, bath, quad)


def _resolve(params, bath, quad):
    return get_kernels(params or MaterialParams(), bath or BathConfig(), quad or QuadratureConfig())


def kernel_B(t: float, flavor: str, params: MaterialParams | None = None,
             bath: BathConfig | None = None, quad: QuadratureConfig | None = None) -> float:
    """B01 or B03 at time t (ps)."""
    if flavor not in ("B01", "B03"):
        raise ValueError(f"flavor must be 'B01' or 'B03', got {flavor!r}")
    return getattr(_resolve(params, bath, quad)(t), flavor)


def kernel_A(t: float, flavor: str, params: MaterialParams | None = None,
             bath: BathConfig | None = None, quad: QuadratureConfig | None = None) -> float:
    """A01 or A03 (including -deltaE t) at time t (ps)."""
    if flavor not in ("A01", "A03"):
        raise ValueError(f"flavor must be 'A01' or 'A03', got {flavor!r}")
    return getattr(_resolve(params, bath, quad)(t), flavor)


def deltaE_renormalized(params: MaterialParams | None = None, bath: BathConfig | None = None,
                        quad: QuadratureConfig | None = None) -> float:
    return _resolve(params, bath, quad).deltaE


def delta_eps_for(target_deltaE: float, params: MaterialParams | None = None,
                  bath: BathConfig | None = None, quad: QuadratureConfig | None = None) -> float:
    """Bare shift that yields the renormalized shift ``target_deltaE``.

    The phonon correction does not depend on delta_eps, so this is exact.
    """
    kernels = _resolve(params, bath, quad)
    return target_deltaE + kernels._phonon_shift()[0]


def kernels_on_grid(time_grid: Sequence[float], kernels_or_params=None, bath=None, quad=None,
                    threads: int = 1) -> KernelTable:
    """Tabulate all kernels on an ascending, nonnegative time grid.

    Each entry is identical to a pointwise call with the same configuration.
    """
    if isinstance(kernels_or_params, DephasingKernels):
        kernels = kernels_or_params
    else:
        kernels = _resolve(kernels_or_params, bath, quad)
    times = np.asarray(list(time_grid), dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("time grid must be a non-empty 1-D sequence")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("time grid must be ascending and nonnegative")
    if threads > 1 and times.size > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = tuple(pool.map(kernels, times.tolist()))
    else:
        values = tuple(kernels(t) for t in times.tolist())
    return KernelTable(times, values)
