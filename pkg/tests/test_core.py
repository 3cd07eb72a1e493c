import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize
from scipy.linalg import expm

from qfi_lab.core import (
    PAULI_X, PAULI_Z, EigenSystem, HermitianOperator, PureState, TimeDependentHamiltonian,
    eig_hermitian, fidelity, mhz, overlap, propagate, propagator, to_mhz, trajectory,
)
from qfi_lab.errors import ValidationError
from qfi_lab.models import TwoQubitParams, final_state, two_qubit_hamiltonian

from conftest import random_hermitian, random_state_vector


# ---- PureState / HermitianOperator ----------------------------------------

def test_state_rejects_bad_norm_and_dimension():
    with pytest.raises(ValidationError):
        PureState(np.array([1.0, 1.0]))
    with pytest.raises(ValidationError):
        PureState(np.array([1.0, 0, 0]))
    s = PureState.from_vector([3, 4j])
    assert abs(s.norm() - 1) < 1e-15


def test_state_is_immutable():
    s = PureState.basis(0)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_operator_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        HermitianOperator(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        HermitianOperator(np.eye(3))


def test_dimension_mismatch_rejected():
    with pytest.raises(ValidationError):
        overlap(PureState.basis(0, 2), PureState.basis(0, 4))
    with pytest.raises(ValidationError):
        HermitianOperator(np.eye(4)).expectation(PureState.basis(0, 2))


def test_unit_conversion_round_trip():
    assert mhz(1.0) == pytest.approx(2 * np.pi)
    assert to_mhz(mhz(15.98)) == pytest.approx(15.98, rel=1e-15)


# ---- overlap -------------------------------------------------------------

def test_overlap_basis():
    zero, minus = PureState.basis(0), PureState.basis(1)
    assert overlap(zero, zero) == 1
    assert overlap(zero, minus) == 0


def test_overlap_measurement_basis_against_final_state():
    phi = PureState(np.array([np.cos(np.pi / 4), np.sin(np.pi / 4)]))
    psi = final_state(np.pi / 2, np.pi / 2)
    assert abs(overlap(phi, psi)) ** 2 == pytest.approx(0.5, abs=1e-14)


@given(st.integers(0, 10_000))
def test_overlap_bounded(seed):
    rng = np.random.default_rng(seed)
    a = PureState(random_state_vector(rng, 4))
    b = PureState(random_state_vector(rng, 4))
    assert abs(overlap(a, b)) <= 1 + 1e-12
    assert 0 <= fidelity(a, b) <= 1 + 1e-12


# ---- eig_hermitian -------------------------------------------------------

def test_eig_diagonal_case():
    A = mhz(10)
    es = eig_hermitian(HermitianOperator(np.diag([A / 2, -A / 2])))
    assert np.allclose(es.eigenvalues, [-np.pi * 10, np.pi * 10])
    assert np.allclose(es.eigenvectors[0].amplitudes, [0, 1])
    assert np.allclose(es.eigenvectors[1].amplitudes, [1, 0])


def test_eig_phase_convention_largest_component_real_positive(rng):
    for _ in range(20):
        es = eig_hermitian(HermitianOperator(random_hermitian(rng, 4)))
        for v in es.eigenvectors:
            k = int(np.argmax(np.abs(v.amplitudes)))
            assert abs(v.amplitudes[k].imag) < 1e-14
            assert v.amplitudes[k].real > 0


def _charpoly_roots(m):
    """Independent oracle: real roots of det(λ - M) by sign changes and brentq."""
    coeffs = np.real(np.poly(m))
    poly = np.poly1d(coeffs)
    bound = np.max(np.sum(np.abs(m), axis=1))  # Gershgorin
    grid = np.linspace(-bound, bound, 200_001)
    vals = poly(grid)
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
        roots.append(optimize.brentq(poly, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-15))
    return np.array(sorted(roots))


def test_two_qubit_spectrum_matches_root_finder():
    h = two_qubit_hamiltonian(TwoQubitParams(beta=0.0, phi=0.0))
    roots = _charpoly_roots(h.matrix)
    assert roots.size == 4
    assert np.allclose(eig_hermitian(h).eigenvalues, roots, atol=1e-9, rtol=0)


def test_two_qubit_spectrum_frozen_reference():
    # 40-digit reference from an independent high-precision diagonalization
    ref = [-51.8976403719415, -48.5076608367883, 13.6595760503198, 86.74572515841]
    es = eig_hermitian(two_qubit_hamiltonian(TwoQubitParams(beta=0.0)))
    assert np.allclose(es.eigenvalues, ref, atol=1e-9)


@settings(max_examples=200)
@given(st.integers(0, 2**31 - 1), st.sampled_from([2, 4]), st.floats(0.01, 200))
def test_spectral_reconstruction(seed, dim, scale):
    m = random_hermitian(np.random.default_rng(seed), dim, scale)
    es = eig_hermitian(HermitianOperator(m))
    assert np.all(np.diff(es.eigenvalues) >= 0)
    vecs = es.matrix
    assert np.allclose(vecs.conj().T @ vecs, np.eye(dim), atol=1e-10)
    assert np.max(np.abs(es.reconstruct() - m)) < 1e-10 * max(1.0, scale)


# ---- propagation ---------------------------------------------------------

def test_eigenstate_evolution_keeps_survival():
    w = mhz(3.0)
    ham = TimeDependentHamiltonian.constant(HermitianOperator(np.diag([w / 2, -w / 2])))
    out = propagate(PureState.basis(0), ham, 0.0, 1.7)
    assert abs(out.amplitudes[0]) ** 2 == pytest.approx(1.0, abs=1e-14)


def test_pi_pulse():
    rabi = mhz(5.0)
    ham = TimeDependentHamiltonian.constant(HermitianOperator(0.5 * rabi * PAULI_X))
    out = propagate(PureState.basis(0), ham, 0.0, np.pi / rabi)
    assert out.population(1) == pytest.approx(1.0, abs=1e-8)


def _driven(w0=mhz(2.0), rabi=mhz(1.0), wd=mhz(2.3)):
    def gen(t):
        t = np.atleast_1d(t)
        return (0.5 * w0 * PAULI_Z)[None] + (rabi * np.cos(wd * t))[:, None, None] * PAULI_X[None]
    return TimeDependentHamiltonian(gen, w0 + rabi + wd, 2)


def test_second_order_convergence():
    ham = _driven()
    psi0 = PureState.basis(0)
    ref = propagate(psi0, ham, 0.0, 2.0, dt=ham.default_dt() / 64)
    deficits = []
    for dt in (ham.max_dt(), ham.max_dt() / 2):
        deficits.append(1 - fidelity(ref, propagate(psi0, ham, 0.0, 2.0, dt=dt)))
    assert deficits[0] / deficits[1] >= 4.0


def test_coarse_step_rejected():
    ham = _driven()
    with pytest.raises(ValidationError):
        propagate(PureState.basis(0), ham, 0.0, 1.0, dt=2 * ham.max_dt())
    with pytest.raises(ValidationError):
        propagate(PureState.basis(0), ham, 1.0, 0.0)


def test_constant_hamiltonian_matches_expm(rng):
    m = random_hermitian(rng, 4, 10.0)
    ham = TimeDependentHamiltonian.constant(HermitianOperator(m))
    u = propagator(ham, 0.0, 0.83)
    assert np.allclose(u, expm(-1j * m * 0.83), atol=1e-10)


def test_periodic_trajectory_matches_direct_propagation():
    w = mhz(4.0)

    def gen(t):
        t = np.atleast_1d(t)
        return (0.5 * mhz(4.1) * PAULI_Z)[None] + (0.3 * np.cos(w * t))[:, None, None] * PAULI_X[None]

    periodic = TimeDependentHamiltonian(gen, w, 2, period=2 * np.pi / w)
    plain = TimeDependentHamiltonian(gen, w, 2)
    times = [0.0, 0.1, 1.0, 3.3, 7.77]
    a = trajectory(PureState.basis(0), periodic, times)
    b = trajectory(PureState.basis(0), plain, times)
    for x, y in zip(a, b):
        assert fidelity(x, y) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=1000)
@given(st.integers(0, 2**31 - 1), st.sampled_from([2, 4]), st.floats(0.0, 3.0))
def test_unitarity_random_inputs(seed, dim, span):
    rng = np.random.default_rng(seed)
    base = random_hermitian(rng, dim, 5.0)
    drive = random_hermitian(rng, dim, 2.0)
    w = float(rng.uniform(0.5, 20.0))

    def gen(t):
        t = np.atleast_1d(t)
        return base[None] + np.cos(w * t)[:, None, None] * drive[None]

    ham = TimeDependentHamiltonian(gen, w + 20.0, dim)
    out = propagate(PureState(random_state_vector(rng, dim)), ham, 0.0, span)
    assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-10


def test_energy_conserved_under_constant_hamiltonian(rng):
    m = HermitianOperator(random_hermitian(rng, 4, 20.0))
    psi = PureState(random_state_vector(rng, 4))
    states = trajectory(psi, TimeDependentHamiltonian.constant(m), np.linspace(0, 5, 51))
    energies = np.array([m.expectation(s) for s in states])
    assert np.max(np.abs(energies - energies[0])) < 1e-9


def test_generator_deterministic():
    ham = _driven()
    t = np.linspace(0, 1, 17)
    assert np.array_equal(ham.matrices(t), ham.matrices(t))


def test_eigensystem_is_value_type():
    es = eig_hermitian(HermitianOperator(np.diag([1.0, 2.0])))
    assert isinstance(es, EigenSystem)
    assert np.allclose(es.gaps(), [1.0])
