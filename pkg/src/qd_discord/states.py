"""Two-qubit density matrices in the local rotating frame.

Basis order is (|00>, |01>, |10>, |11>) = indices (0, 1, 2, 3); the first
label is qubit A.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10


class InvalidState(ValueError):
    pass


class InvalidWeight(ValueError):
    pass


class InvalidCoherence(ValueError):
    pass


class TwoQubitState:
    """Immutable 4x4 density matrix. The stored array is read-only."""

    __slots__ = ("_rho",)

    def __init__(self, rho, check: bool = True):
        arr = np.array(rho, dtype=complex)
        if arr.shape != (4, 4):
            raise InvalidState(f"expected a 4x4 matrix, got shape {arr.shape}")
        if check:
            validate(arr)
        arr.setflags(write=False)
        self._rho = arr

    @property
    def rho(self) -> np.ndarray:
        return self._rho

    def __array__(self, dtype=None, copy=None):
        return np.array(self._rho, dtype=dtype)

    def __repr__(self):
        return f"TwoQubitState(\n{np.array2string(self._rho, precision=6)})"

    def __eq__(self, other):
        return isinstance(other, TwoQubitState) and np.array_equal(self._rho, other._rho)

    def __hash__(self):
        return hash(self._rho.tobytes())

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self._rho)[0])


def validate(rho: np.ndarray) -> None:
    herm = np.abs(rho - rho.conj().T).max()
    if herm > HERMITIAN_TOL:
        raise InvalidState(f"not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidState(f"trace {tr.real:.15g} != 1")
    lam = np.linalg.eigvalsh(rho)[0]
    if lam < PSD_TOL:
        raise InvalidState(f"not positive semidefinite (min eigenvalue {lam:.3g})")


@dataclass(frozen=True)
class PureStateSpec:
    """Maximally entangled family sqrt(a)|00> + sqrt(b)e^{i alpha}|10>
    + sqrt(b)e^{i beta}|01> - sqrt(a)e^{i(alpha+beta)}|11>, with b = 1/2 - a."""

    a: float = 0.25
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.a <= 0.5):
            raise InvalidWeight(f"a must lie in [0, 1/2], got {self.a!r}")

    @property
    def b(self) -> float:
        return 0.5 - self.a


@dataclass(frozen=True)
class XStateSpec:
    a: float = 0.25
    b: float = 0.25

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise InvalidWeight("X-state weights must be nonnegative")
        if abs(2 * self.a + 2 * self.b - 1.0) > 1e-12:
            raise InvalidWeight(f"2a + 2b must equal 1, got {2 * self.a + 2 * self.b!r}")

    @classmethod
    def from_difference(cls, diff: float) -> "XStateSpec":
        """Weights with a - b = diff (a >= b for diff >= 0)."""
        if abs(diff) > 0.5:
            raise InvalidWeight(f"|a - b| must be <= 1/2, got {diff!r}")
        return cls(a=0.25 + 0.5 * diff, b=0.25 - 0.5 * diff)


def pure_state_vector(spec: PureStateSpec) -> np.ndarray:
    sa, sb = math.sqrt(spec.a), math.sqrt(spec.b)
    return np.array([
        sa,
        sb * np.exp(1j * spec.beta),
        sb * np.exp(1j * spec.alpha),
        -sa * np.exp(1j * (spec.alpha + spec.beta)),
    ])


def make_pure_state(spec: PureStateSpec) -> TwoQubitState:
    psi = pure_state_vector(spec)
    return TwoQubitState(np.outer(psi, psi.conj()))


def make_x_state(spec: XStateSpec, g03: complex = 1.0, g12: complex = 1.0) -> TwoQubitState:
    """X-state with populations (a, b, b, a) and coherences a*g03, b*g12."""
    if abs(g03) > 1.0 + 1e-12 or abs(g12) > 1.0 + 1e-12:
        raise InvalidCoherence(f"|g03|={abs(g03):.6g}, |g12|={abs(g12):.6g}; both must be <= 1")
    a, b = spec.a, spec.b
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[3, 3] = a
    rho[1, 1] = rho[2, 2] = b
    rho[0, 3] = a * g03
    rho[3, 0] = np.conj(a * g03)
    rho[1, 2] = b * g12
    rho[2, 1] = np.conj(b * g12)
    return TwoQubitState(rho)


def propagate(initial: TwoQubitState, kernels, t: float) -> TwoQubitState:
    """Exact pure-dephasing evolution.

    ``kernels`` is a callable ``t -> KernelValues`` (an evaluator or a table)
    or a ``KernelValues`` instance for the requested time.
    """
    values = kernels(t) if callable(kernels) else kernels
    if values.t != t:
        raise ValueError(f"kernel values are for t={values.t}, requested t={t}")
    return apply_kernels(initial, values)


def apply_kernels(initial: TwoQubitState, values) -> TwoQubitState:
    rho = initial.rho * values.coherence_factors()
    # Elementwise damping by |factor| <= 1 keeps the state valid; skip re-validation.
    return TwoQubitState(rho, check=False)


def purity(state: TwoQubitState) -> float:
    rho = state.rho
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    return float(np.sum(np.abs(rho) ** 2))


def maximally_mixed() -> TwoQubitState:
    return TwoQubitState(np.eye(4) / 4)


def product_state(psi_a, psi_b) -> TwoQubitState:
    psi = np.kron(np.asarray(psi_a, dtype=complex), np.asarray(psi_b, dtype=complex))
    psi = psi / np.linalg.norm(psi)
    return TwoQubitState(np.outer(psi, psi.conj()))


def format_state(state: TwoQubitState) -> str:
    """Four lines of four ``re,im`` pairs, row-major, 17 significant digits."""
    lines = []
    for row in state.rho:
        lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def parse_state(text: str) -> TwoQubitState:
    tokens = text.split()
    if len(tokens) != 16:
        raise InvalidState(f"expected 16 're,im' entries, found {len(tokens)}")
    entries = []
    for tok in tokens:
        parts = tok.split(",")
        if len(parts) != 2:
            raise InvalidState(f"malformed entry {tok!r}; expected 're,im'")
        try:
            entries.append(complex(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise InvalidState(f"malformed entry {tok!r}") from exc
    return TwoQubitState(np.array(entries).reshape(4, 4))


def save_state(state: TwoQubitState, path) -> None:
    Path(path).write_text(format_state(state), encoding="utf-8")


def load_state(path) -> TwoQubitState:
    return parse_state(Path(path).read_text(encoding="utf-8"))
