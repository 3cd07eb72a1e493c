import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfi_lab.core import PureState
from qfi_lab.errors import (
    BranchDiscontinuityError, DegeneratePointError, DivergentSensitivityError, ValidationError,
)
from qfi_lab.models import TwoQubitParams, final_state
from qfi_lab.oracle import (
    QfiMethod, QfiValue, concurrence, ground_state, ground_state_scan, qfi_finite_difference,
    qfi_single_qubit_analytic, qfi_sum_over_states, sensitivity_theory, two_qubit_eigensystem,
)

# Reference values from an independent 40-digit diagonalization with the
# sum-over-states formula (see scripts/freeze_oracles.py).
FROZEN_TWO_QUBIT = {
    0.2: (1.66670325587088, 0.0256760463678398),
    0.39: (449.995875451412, 0.160875118279346),
    0.4: (439.95161247015, 0.161714092551572),
    0.6: (2.75168212031672, 0.0401701075837019),
}


def test_qfi_value_validation():
    with pytest.raises(ValidationError):
        QfiValue(-0.1, QfiMethod.ANALYTIC)
    with pytest.raises(ValidationError):
        QfiValue(0.1, QfiMethod.ANALYTIC, stderr=-1)


def test_finite_difference_single_qubit_examples():
    assert qfi_finite_difference(lambda b: final_state(np.pi / 2, b), 0.3).value == pytest.approx(1.0, abs=1e-6)
    assert qfi_finite_difference(lambda b: final_state(0.0, b), 0.3).value == pytest.approx(0.0, abs=1e-9)


def test_finite_difference_matches_analytic_on_grid():
    for theta in np.linspace(0, np.pi, 25):
        fd = qfi_finite_difference(lambda b: final_state(theta, b), 1.1).value
        assert fd == pytest.approx(np.sin(theta) ** 2, abs=1e-6)
        assert fd <= 1 + 1e-9


def test_dbeta_range_enforced():
    with pytest.raises(ValidationError):
        qfi_finite_difference(lambda b: final_state(1.0, b), 0.3, dbeta=0.1)
    with pytest.raises(ValidationError):
        qfi_finite_difference(lambda b: final_state(1.0, b), 0.3, dbeta=1e-8)


def test_richardson_consistency():
    fam = lambda b: final_state(1.1, b)
    coarse = qfi_finite_difference(fam, 0.5, 1e-3, richardson=False).value
    fine = qfi_finite_difference(fam, 0.5, 5e-4, richardson=False).value
    exact = np.sin(1.1) ** 2
    assert abs(coarse - exact) / abs(fine - exact) == pytest.approx(4.0, rel=0.05)
    a = qfi_finite_difference(fam, 0.5, 1e-3).value
    b = qfi_finite_difference(fam, 0.5, 5e-4).value
    assert abs(a - b) < 1e-8


@given(st.floats(0.05, np.pi - 0.05), st.floats(0.0, 6.0), st.floats(-5, 5))
def test_gauge_invariance(theta, beta, k):
    plain = qfi_finite_difference(lambda b: final_state(theta, b), beta).value
    phased = qfi_finite_difference(lambda b: final_state(theta, b).with_phase(3 * b + k * b * b), beta).value
    assert abs(plain - phased) < 1e-6


def test_branch_discontinuity_detected():
    def jumpy(b):
        return PureState.basis(0) if b < 1.0 else PureState.basis(1)
    with pytest.raises(BranchDiscontinuityError) as info:
        qfi_finite_difference(jumpy, 1.0, 1e-3)
    assert info.value.overlap < 0.99


def test_analytic_examples():
    assert qfi_single_qubit_analytic(np.pi / 2).value == pytest.approx(1.0)
    assert qfi_single_qubit_analytic(np.pi / 3).value == pytest.approx(0.75)
    assert qfi_single_qubit_analytic(np.pi / 6).value == pytest.approx(0.25)
    assert qfi_single_qubit_analytic(1.0).stderr == 0


def test_sensitivity_examples():
    assert sensitivity_theory(np.pi / 2, np.pi / 2) == pytest.approx(1.0)
    assert sensitivity_theory(np.pi / 3, np.pi / 2) == pytest.approx(np.sqrt(1 / 0.75))
    with pytest.raises(DivergentSensitivityError):
        sensitivity_theory(np.pi / 2, 0.0)


@given(st.floats(1e-3, np.pi - 1e-3))
def test_crb_identity_at_optimum(theta):
    assert sensitivity_theory(theta, np.pi / 2) * np.sqrt(qfi_single_qubit_analytic(theta).value) == \
        pytest.approx(1.0, abs=1e-12)


def test_concurrence_examples():
    bell = PureState(np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert concurrence(bell) == pytest.approx(1.0)
    assert concurrence(PureState.basis(1, 4)) == pytest.approx(0.0)
    with pytest.raises(ValidationError):
        concurrence(PureState.basis(0, 2))


@given(st.integers(0, 2**31 - 1))
def test_concurrence_bounded(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    c = concurrence(PureState.from_vector(v))
    assert -1e-12 <= c <= 1 + 1e-12


@pytest.mark.parametrize("beta", sorted(FROZEN_TWO_QUBIT))
def test_two_qubit_frozen_values(beta):
    p = TwoQubitParams()
    F_ref, C_ref = FROZEN_TWO_QUBIT[beta]
    fd = qfi_finite_difference(lambda b: ground_state(p, b), beta).value
    sos = qfi_sum_over_states(p, beta).value
    assert fd == pytest.approx(F_ref, rel=1e-6)
    assert sos == pytest.approx(F_ref, rel=1e-9)
    assert concurrence(ground_state(p, beta)) == pytest.approx(C_ref, abs=1e-9)


def test_qfi_independent_of_phi():
    for phi in (0.0, 0.7, 2.0):
        p = TwoQubitParams(phi=phi)
        assert qfi_sum_over_states(p, 0.4).value == pytest.approx(439.95161247015, rel=1e-9)


def test_scan_decoupled_has_zero_concurrence():
    p = TwoQubitParams(A_par=0.0, A_perp=0.0, omega_C=1.0)
    for pt in ground_state_scan(p, np.linspace(0.1, 1.0, 10)):
        assert pt.concurrence < 1e-10


def test_scan_peaks_co_located_with_gap_minimum():
    betas = np.linspace(0.2, 0.6, 21)
    pts = ground_state_scan(TwoQubitParams(), betas)
    qfi = np.array([pt.qfi.value for pt in pts])
    conc = np.array([pt.concurrence for pt in pts])
    gap = np.array([pt.gap for pt in pts])
    iq, ic, ig = np.argmax(qfi), np.argmax(conc), np.argmin(gap)
    assert 0 < iq < betas.size - 1
    assert abs(iq - ic) <= 2 and abs(iq - ig) <= 2


def test_scan_rejects_bad_grids():
    with pytest.raises(ValidationError):
        ground_state_scan(TwoQubitParams(), [0.3, 0.2])
    with pytest.raises(ValidationError):
        ground_state_scan(TwoQubitParams(), [0.0, 3.0])


def test_scan_flags_degeneracy():
    p = TwoQubitParams(A_par=0.0, A_perp=0.0, omega_C=0.0)
    with pytest.raises(DegeneratePointError):
        ground_state_scan(p, [0.1, 0.2])


def test_eigensystem_helper_sorted():
    es = two_qubit_eigensystem(TwoQubitParams(), 0.4)
    assert np.all(np.diff(es.eigenvalues) > 0)
