import math
import warnings

import numpy as np
import pytest

import oracles
from qd_discord.measures import (
    BlochRepr,
    DegenerateTopEigenvalue,
    NonHermitianInput,
    bloch_decompose,
    discord_bounds,
    discord_lower,
    discord_upper,
    wootters_concurrence,
    xstate_concurrence,
    xstate_discord_closed_form,
    xstate_regime_margin,
)
from qd_discord.phonon import BathConfig, DephasingKernels
from qd_discord.states import (
    PureStateSpec,
    TwoQubitState,
    XStateSpec,
    make_pure_state,
    make_x_state,
    maximally_mixed,
    product_state,
    propagate,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0 + 0j, -1.0])
SWAP = np.eye(4)[[0, 2, 1, 3]]

BELL_ENDPOINTS = [(0.0, 0.0, 0.0), (0.0, math.pi, 0.0), (0.5, 0.0, 0.0), (0.5, math.pi, 0.0)]


def _quiet_bounds(state):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateTopEigenvalue)
        return discord_bounds(state)


def _local_unitary(rho, ua, ub):
    u = np.kron(ua, ub)
    return u @ rho @ u.conj().T


# -- Bloch representation ---------------------------------------------------------------

def test_bloch_examples():
    rep = bloch_decompose(maximally_mixed())
    assert np.all(rep.x == 0) and np.all(rep.y == 0) and np.all(rep.T == 0)
    rep = bloch_decompose(make_pure_state(PureStateSpec(0.0)))
    assert np.allclose(rep.x, 0) and np.allclose(rep.y, 0)
    assert np.allclose(rep.T, np.diag([1, 1, -1]))


def test_bloch_matches_direct_traces():
    s = make_pure_state(PureStateSpec(0.25))
    rep = bloch_decompose(s)
    paulis = (SX, SY, SZ)
    I2 = np.eye(2)
    for i, p in enumerate(paulis):
        assert rep.x[i] == pytest.approx(np.trace(s.rho @ np.kron(p, I2)).real, abs=1e-15)
        assert rep.y[i] == pytest.approx(np.trace(s.rho @ np.kron(I2, p)).real, abs=1e-15)
        for j, q in enumerate(paulis):
            assert rep.T[i, j] == pytest.approx(np.trace(s.rho @ np.kron(p, q)).real, abs=1e-15)


def test_bloch_reconstruction(rng):
    for _ in range(200):
        rho = oracles.random_density_matrix(rng)
        rep = bloch_decompose(TwoQubitState(rho))
        assert np.abs(rep.to_matrix() - rho).max() < 1e-12
        assert np.linalg.norm(rep.x) <= 1 + 1e-12 and np.linalg.norm(rep.y) <= 1 + 1e-12
        assert np.all(np.abs(rep.T) <= 1 + 1e-12)


def test_bloch_rejects_non_hermitian():
    rho = np.eye(4, dtype=complex) / 4
    rho[0, 1] = 0.1
    with pytest.raises(NonHermitianInput):
        bloch_decompose(rho)


# -- discord bounds ----------------------------------------------------------------------

@pytest.mark.parametrize("endpoint", BELL_ENDPOINTS)
def test_bell_states_half(endpoint):
    a, alpha, beta = endpoint
    b = _quiet_bounds(make_pure_state(PureStateSpec(a, alpha, beta)))
    assert b.lower == pytest.approx(0.5, abs=1e-12)
    assert b.upper == pytest.approx(0.5, abs=1e-12)


def test_degenerate_warning_on_bell_state():
    with pytest.warns(DegenerateTopEigenvalue):
        value = discord_upper(make_pure_state(PureStateSpec(0.0)))
    assert value == pytest.approx(0.5, abs=1e-12)


def test_product_states_zero(rng):
    for _ in range(50):
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        s = product_state(a, b)
        bounds = _quiet_bounds(s)
        assert bounds.lower == pytest.approx(0.0, abs=1e-12)
        assert bounds.upper == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("g", [0.0, 0.2, 0.75, 1.0])
def test_bell_diagonal_single_coherence(g):
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = rho[2, 2] = 0.5
    rho[1, 2] = rho[2, 1] = 0.5 * g
    s = TwoQubitState(rho)
    assert discord_lower(s) == pytest.approx(2 * abs(rho[1, 2]) ** 2, abs=1e-14)
    assert _quiet_bounds(s).upper == pytest.approx(0.5 * g * g, abs=1e-14)


def test_ordering_and_range(rng):
    for i in range(10_000):
        rank = 1 + i % 4
        b = _quiet_bounds(TwoQubitState(oracles.random_density_matrix(rng, rank)))
        assert b.lower <= b.upper + 1e-10
        assert 0.0 <= b.lower and b.upper <= 0.5 + 1e-10


def test_local_unitary_invariance(rng):
    for _ in range(200):
        rho = oracles.random_density_matrix(rng, rank=int(rng.integers(1, 5)))
        b0 = _quiet_bounds(TwoQubitState(rho))
        b1 = _quiet_bounds(TwoQubitState(_local_unitary(rho, oracles.random_unitary2(rng),
                                                         oracles.random_unitary2(rng))))
        assert b1.lower == pytest.approx(b0.lower, abs=1e-9)
        assert b1.upper == pytest.approx(b0.upper, abs=1e-9)


def test_phase_insensitivity(rng):
    for a in (0.05, 0.25, 0.4):
        ref = _quiet_bounds(make_pure_state(PureStateSpec(a)))
        for _ in range(20):
            b = _quiet_bounds(make_pure_state(PureStateSpec(a, *rng.uniform(0, 2 * math.pi, 2))))
            assert b.lower == pytest.approx(ref.lower, abs=1e-10)
            assert b.upper == pytest.approx(ref.upper, abs=1e-10)


@pytest.mark.parametrize("family", ["pure", "bell_diagonal", "zero_local"])
def test_coincidence_classes(rng, family):
    make = {"pure": oracles.random_pure, "bell_diagonal": oracles.random_bell_diagonal,
            "zero_local": oracles.random_zero_local_bloch}[family]
    for _ in range(300):
        b = _quiet_bounds(TwoQubitState(make(rng)))
        assert abs(b.upper - b.lower) < 1e-9


def test_swap_symmetric_branches_agree(rng):
    for _ in range(200):
        rho = oracles.random_density_matrix(rng)
        sym = 0.5 * (rho + SWAP @ rho @ SWAP)
        b = _quiet_bounds(TwoQubitState(sym))
        assert b.branch_x == pytest.approx(b.branch_y, abs=1e-9)


def test_lower_candidates_contain_lower(rng):
    b = _quiet_bounds(TwoQubitState(oracles.random_density_matrix(rng)))
    assert np.all(np.diff(b.lower_candidates) >= 0)
    assert b.branch_x == pytest.approx(b.lower_candidates[0], abs=1e-15)


def test_fig2_state_bounds():
    """a = 1/4 state with Delta E = 6/ps at 77 K: ordered bounds, split near the transit time."""
    base = DephasingKernels(bath=BathConfig(77.0, 6.0, 0.0))
    ker = base.with_delta_eps(6.0 + base._phonon_shift()[0])
    s0 = make_pure_state(PureStateSpec(0.25))
    quarter = _quiet_bounds(propagate(s0, ker, math.pi / 12))          # Delta E t = pi/2
    assert quarter.upper >= quarter.lower
    split = _quiet_bounds(propagate(s0, ker, 0.9))
    assert split.upper - split.lower > 1e-3


# -- X-state closed forms ----------------------------------------------------------------

def test_closed_form_examples():
    assert xstate_discord_closed_form(XStateSpec(0.5, 0.0), 1.0, 1.0) == pytest.approx(0.5)
    assert xstate_discord_closed_form(XStateSpec(0.25, 0.25), 0.6, 0.6) == 0.0
    assert xstate_discord_closed_form(XStateSpec(0.4, 0.1), 0.0, 0.0) == pytest.approx(0.0)
    spec = XStateSpec(0.3, 0.2)
    assert xstate_discord_closed_form(spec, 0.9, 0.5) == pytest.approx((0.27 - 0.1) ** 2 + 0.01)


def test_closed_form_continuous_at_boundary():
    spec = XStateSpec(0.4, 0.1)
    # a g03 + b g12 = a - b with g12 = 0.5 -> g03 = (0.3 - 0.05) / 0.4
    g03 = 0.25 / 0.4
    assert xstate_regime_margin(spec, g03, 0.5) == pytest.approx(0.0, abs=1e-15)
    left = xstate_discord_closed_form(spec, g03 - 1e-9, 0.5)
    right = xstate_discord_closed_form(spec, g03 + 1e-9, 0.5)
    assert left == pytest.approx(right, abs=1e-8)


def test_closed_form_matches_bounds(rng):
    for _ in range(500):
        spec = XStateSpec.from_difference(rng.uniform(-0.5, 0.5))
        g03 = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        g12 = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        b = _quiet_bounds(make_x_state(spec, g03, g12))
        closed = xstate_discord_closed_form(spec, g03, g12)
        assert b.lower - 1e-9 <= closed <= b.upper + 1e-9


def test_xstate_concurrence_examples():
    assert xstate_concurrence(XStateSpec(0.5, 0.0), 1.0, 0.0) == pytest.approx(0.5)
    assert xstate_concurrence(XStateSpec(0.25, 0.25), 1.0, 1.0) == 0.0
    assert xstate_concurrence(XStateSpec(0.3, 0.2), 0.5, 0.5) == 0.0
    assert xstate_concurrence(XStateSpec(0.25, 0.25), 1.0, 0.0) == 0.0


def test_wootters_examples(rng):
    for endpoint in BELL_ENDPOINTS:
        assert wootters_concurrence(make_pure_state(PureStateSpec(*endpoint))) == pytest.approx(1.0, abs=1e-7)
    for _ in range(20):
        s = product_state(rng.normal(size=2) + 1j * rng.normal(size=2), rng.normal(size=2))
        assert wootters_concurrence(s) == pytest.approx(0.0, abs=1e-7)
    assert wootters_concurrence(maximally_mixed()) == 0.0


def test_concurrence_ratio_is_two(rng):
    """The standard concurrence of the X-family is exactly twice the quoted max formula."""
    for _ in range(1000):
        spec = XStateSpec.from_difference(rng.uniform(-0.5, 0.5))
        g03 = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        g12 = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        c_w = wootters_concurrence(make_x_state(spec, g03, g12))
        assert c_w == pytest.approx(2 * xstate_concurrence(spec, g03, g12), abs=1e-10)


def test_bloch_repr_roundtrip_type():
    rep = BlochRepr(np.zeros(3), np.zeros(3), np.zeros((3, 3)))
    assert np.allclose(rep.to_matrix(), np.eye(4) / 4)
