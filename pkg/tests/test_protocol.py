import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zenocool import (
    DensityMatrix,
    ExtinctionError,
    ProtocolConfig,
    SpinStarSpec,
    SystemLayout,
    XXZSpec,
    apply_measurement,
    delta_p,
    fidelity_xx_rank1,
    low_lying_mixture,
    partial_trace,
    projector,
    tensor_product,
    thermal_state,
    uhlmann_fidelity,
    zeno_run,
    zeno_spectrum,
)
from zenocool.protocol import direct_cumulative_probability


def xx_config(d=3, jtau=1.2, N=10, k=1, L=1, Delta=0.0, **kw):
    return ProtocolConfig(layout=SystemLayout("chain", L, d),
                          hamiltonian=XXZSpec(J=1.0, Delta=Delta),
                          tau=jtau, n_measurements=N, rank=k, **kw)


# ---- apply_measurement ----------------------------------------------------

def test_full_rank_measurement_is_identity():
    rho = tensor_product(low_lying_mixture(3, 2), thermal_state(3, 1.0, 0.0))
    out, p = apply_measurement(rho, projector(3, 3, site=0))
    assert p == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(out.data, rho.data)


def test_measurement_absorbs_own_support():
    rho = tensor_product(low_lying_mixture(4, 2), thermal_state(4, 1.0, 0.0))
    out, p = apply_measurement(rho, projector(4, 2, site=0))
    assert p == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(out.data, rho.data)


@pytest.mark.parametrize("d,k", [(3, 1), (4, 2), (5, 3)])
def test_measurement_probability_is_rank_fraction(d, k):
    rho = tensor_product(thermal_state(d, 1.0, 0.0), thermal_state(d, 1.0, 0.0))
    _, p = apply_measurement(rho, projector(d, k, site=0))
    assert p == pytest.approx(k / d, abs=1e-12)


def test_measurement_extinction():
    excited = np.zeros((3, 3), dtype=complex)
    excited[0, 0] = 1.0  # m=+1: orthogonal to the rank-1 ground projector
    rho = tensor_product(DensityMatrix(excited, (3,)), thermal_state(3, 1.0, 0.0))
    with pytest.raises(ExtinctionError):
        apply_measurement(rho, projector(3, 1, site=0))


# ---- zeno_run --------------------------------------------------------------

def test_frozen_dynamics_at_zero_coupling():
    config = ProtocolConfig(layout=SystemLayout("chain", 1, 3),
                            hamiltonian=XXZSpec(J=0.0, Delta=0.0), tau=1.7,
                            n_measurements=12, rank=1)
    record = zeno_run(config)
    assert np.allclose(record.fidelities, 1 / 3)
    assert np.allclose(record.step_probabilities, 1.0)


def test_single_round_perfect_cooling_d2():
    # cos(Jtau/2) vanishes at Jtau = pi: one round fully cools the qubit
    record = zeno_run(xx_config(d=2, jtau=math.pi, N=1))
    assert record.fidelities[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_matches_xx_oracle_d3():
    record = zeno_run(xx_config(d=3, jtau=1.2, N=30))
    for n in range(1, 31):
        assert record.fidelities[n - 1, 0] == pytest.approx(
            fidelity_xx_rank1(3, n, 1.2), abs=1e-8)


def test_half_fidelity_asymptote():
    record = zeno_run(xx_config(d=3, jtau=math.pi, N=200))
    assert record.fidelities[-1, 0] == pytest.approx(0.5, abs=1e-3)


def test_zero_rounds_returns_initial_fidelities():
    record = zeno_run(xx_config(d=4, N=0, k=2))
    assert len(record.steps) == 0
    assert record.cumulative_probability == 1.0
    expect = uhlmann_fidelity(thermal_state(4, 1.0, 0.0), low_lying_mixture(4, 2))
    assert record.initial_fidelities[0] == pytest.approx(expect, abs=1e-12)


@given(d=st.integers(2, 4), k=st.integers(1, 2), n=st.integers(1, 5),
       jtau=st.floats(0.1, 6.0))
@settings(max_examples=20)
def test_cumulative_probability_equals_direct_trace(d, k, n, jtau):
    config = xx_config(d=d, jtau=jtau, N=n, k=min(k, d), Delta=1.0)
    record = zeno_run(config)
    direct = direct_cumulative_probability(config)
    assert record.cumulative_probability == pytest.approx(direct, abs=1e-10)
    assert np.prod(record.step_probabilities) == pytest.approx(direct, abs=1e-10)


@given(jtau=st.floats(0.1, 6.2), n=st.integers(1, 15))
@settings(max_examples=20)
def test_trajectory_states_and_fidelities_valid(jtau, n):
    record = zeno_run(xx_config(d=3, jtau=jtau, N=n, k=2))
    assert np.all(record.fidelities >= 0.0) and np.all(record.fidelities <= 1.0)
    record.final_state.validate()
    assert abs(np.trace(record.final_state.data).real - 1.0) < 1e-10


def test_dense_and_support_paths_agree():
    # same run with the projector made non-diagonal by a phase-free rotation
    # is not expressible here; instead compare against an independent dense
    # reimplementation of the round map
    config = xx_config(d=3, jtau=0.9, N=8, k=2, Delta=1.0)
    record = zeno_run(config)
    from zenocool.protocol import _unitary, initial_state, measurement_projector
    U = _unitary(config)
    P = measurement_projector(config).embedded(config.layout.dims)
    M = P @ U
    rho = initial_state(config).data
    sigma = low_lying_mixture(3, 2).data
    for n in range(8):
        rho = M @ rho @ M.conj().T
        p = np.trace(rho).real
        rho /= p
        assert p == pytest.approx(record.step_probabilities[n], abs=1e-12)
        red = partial_trace(DensityMatrix((rho + rho.conj().T) / 2, (3, 3)), {1})
        f = uhlmann_fidelity(red, DensityMatrix(sigma, (3,)))
        assert f == pytest.approx(record.fidelities[n, 0], abs=1e-12)


def test_star_ring_fidelities_identical():
    config = ProtocolConfig(layout=SystemLayout("star", 3, 3),
                            hamiltonian=SpinStarSpec(J=1.0), tau=1.1,
                            n_measurements=15, rank=2)
    record = zeno_run(config)
    spread = np.ptp(record.fidelities, axis=1)
    assert np.max(spread) < 1e-10


def test_extinction_reports_step_and_prefix():
    config = xx_config(d=3, jtau=1.2, N=10)
    with pytest.raises(ExtinctionError) as err:
        zeno_run(config, extinction_threshold=0.9)  # first round p ~ 0.44
    assert err.value.step == 1
    assert err.value.partial is not None
    assert len(err.value.partial.steps) == 0


def test_long_run_log_probability_consistent():
    record = zeno_run(xx_config(d=2, jtau=2.2, N=800))
    # the oscillating branch empties, the frozen branch (initial weight 1/2)
    # survives: conditional p -> 1 and cumulative p -> 1/2
    assert record.step_probabilities[-1] == pytest.approx(1.0, abs=1e-12)
    assert record.cumulative_probabilities[-1] == pytest.approx(0.5, abs=1e-10)
    assert np.all(np.diff(record.log_cumulative) <= 1e-15)
    assert np.allclose(np.exp(record.log_cumulative),
                       record.cumulative_probabilities, rtol=1e-9)


# ---- zeno_spectrum ---------------------------------------------------------

def test_spectrum_zero_coupling_dominant_modulus_one():
    config = ProtocolConfig(layout=SystemLayout("chain", 1, 3),
                            hamiltonian=XXZSpec(J=0.0, Delta=0.0), tau=1.0,
                            n_measurements=1, rank=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # degenerate moduli at J=0
        spec = zeno_spectrum(config)
    assert abs(spec.eigenvalues[0]) == pytest.approx(1.0, abs=1e-12)


@given(jtau=st.floats(0.05, 6.2), d=st.integers(2, 4), k=st.integers(1, 2))
@settings(max_examples=25)
def test_spectrum_moduli_bounded(jtau, d, k):
    config = xx_config(d=d, jtau=jtau, N=1, k=min(k, d), Delta=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        spec = zeno_spectrum(config)
    assert np.all(np.abs(spec.eigenvalues) <= 1 + 1e-10)


def test_spectrum_dominant_eigenvector_is_cooling_fixed_point():
    config = xx_config(d=3, jtau=1.2, N=1)
    spec = zeno_spectrum(config)
    r = spec.dominant_right
    rho = DensityMatrix(np.outer(r, r.conj()) / np.vdot(r, r).real, (3, 3))
    red = partial_trace(rho, {1})
    assert uhlmann_fidelity(red, low_lying_mixture(3, 1)) > 0.99


def test_spectrum_left_right_biorthogonal():
    config = xx_config(d=3, jtau=0.8, N=1, k=2, Delta=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # rank-2 keeps several frozen states
        spec = zeno_spectrum(config)
    assert spec.dominant_is_simple is False
    assert np.vdot(spec.dominant_left, spec.dominant_right) == pytest.approx(1.0, abs=1e-8)


def test_large_n_run_converges_to_dominant_eigenvector():
    config = xx_config(d=3, jtau=1.2, N=500)
    spec = zeno_spectrum(config)
    record = zeno_run(config)
    r = spec.dominant_right
    rho = DensityMatrix(np.outer(r, r.conj()) / np.vdot(r, r).real, (3, 3))
    red_eig = partial_trace(rho, {1})
    red_run = partial_trace(record.final_state, {1})
    assert uhlmann_fidelity(red_eig, red_run) > 1 - 1e-6


def test_spectrum_rejects_open_system():
    from zenocool import BathSpec
    config = xx_config(d=3, jtau=1.0, N=1,
                       bath=BathSpec(temperature=1.0, gamma=1e-3, omega=1.0))
    with pytest.raises(ValueError):
        zeno_spectrum(config)


# ---- delta_p ---------------------------------------------------------------

def test_delta_p_zero_coupling():
    config = ProtocolConfig(layout=SystemLayout("chain", 1, 3),
                            hamiltonian=XXZSpec(J=0.0, Delta=1.0), tau=1.0,
                            n_measurements=10, rank=2)
    assert abs(delta_p(config, 2)) < 1e-12


def test_delta_p_single_round_direct_trace():
    config = xx_config(d=3, jtau=1.0, N=1, k=2)
    got = delta_p(config, 2)
    expect = 0.0
    for rank, sign in ((2, 1.0), (1, -1.0)):
        variant = xx_config(d=3, jtau=1.0, N=1, k=rank)
        expect += sign * direct_cumulative_probability(variant)
    assert got == pytest.approx(expect, abs=1e-12)


def test_delta_p_regression_pin():
    # frozen after the first verified run of this build
    config = ProtocolConfig(layout=SystemLayout("chain", 1, 4),
                            hamiltonian=XXZSpec(J=1.0, Delta=1.0), tau=1.0,
                            n_measurements=50, rank=2)
    assert delta_p(config, 2) == pytest.approx(0.12500000003914663, abs=1e-9)


def test_delta_p_fixed_preparation_flag():
    config = xx_config(d=4, jtau=1.0, N=5, k=2, Delta=1.0)
    matched = delta_p(config, 2, matched_preparation=True)
    fixed = delta_p(config, 2, matched_preparation=False)
    assert matched != pytest.approx(fixed, abs=1e-12)  # genuinely different protocols


def test_delta_p_rank_bounds():
    config = xx_config(d=3, jtau=1.0, N=2, k=2)
    with pytest.raises(ValueError):
        delta_p(config, 1)
    with pytest.raises(ValueError):
        delta_p(config, 4)


# ---- config validation -----------------------------------------------------

def test_config_validation():
    layout = SystemLayout("chain", 1, 3)
    with pytest.raises(ValueError):
        ProtocolConfig(layout=layout, hamiltonian=XXZSpec(J=1.0, Delta=0.0),
                       tau=1.0, n_measurements=1, rank=4)
    with pytest.raises(ValueError):
        ProtocolConfig(layout=layout, hamiltonian=XXZSpec(J=1.0, Delta=0.0),
                       tau=1.0, n_measurements=-1, rank=1)
    with pytest.raises(ValueError):
        ProtocolConfig(layout=layout, hamiltonian=SpinStarSpec(J=1.0),
                       tau=1.0, n_measurements=1, rank=1)
    with pytest.raises(ValueError):
        ProtocolConfig(layout=layout, hamiltonian=XXZSpec(J=1.0, Delta=0.0),
                       tau=1.0, n_measurements=1, rank=1, target_betas=(0.0, 0.0))


def test_finite_beta_targets_supported():
    config = ProtocolConfig(layout=SystemLayout("chain", 1, 3),
                            hamiltonian=XXZSpec(J=1.0, Delta=0.0), tau=1.0,
                            n_measurements=3, rank=1, target_betas=(0.7,))
    record = zeno_run(config)
    assert np.all(record.fidelities > 0)
