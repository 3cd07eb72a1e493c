"""Hamiltonians and states of the NV-center probe and the NV-13C pair.

Sign convention
---------------
The resource state is cos(θ/2)|0> - sin(θ/2)|-1> and free evolution for a
time T under H = -(ξ/2)σ_z turns it into

    |ψ_θ(β)> = cos(θ/2) e^{iβ/2}|0> - sin(θ/2) e^{-iβ/2}|-1>,   β = ξT.

The probe Hamiltonian is written so that |ψ_θ(β)> is exactly its upper
(+A/2) eigenstate:

    H(β) = (A/2) [[cos θ,            -sin θ e^{iβ}],
                  [-sin θ e^{-iβ},   -cos θ       ]]

which is the textbook matrix (A/2)[[cos θ, sin θ e^{-iβ}], [sin θ e^{iβ}, -cos θ]]
evaluated at π - β. Only the phase reference of the drive differs; gaps,
matrix-element magnitudes and the QFI are unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    TWO_PI,
    HermitianOperator,
    PureState,
    TimeDependentHamiltonian,
    expm_hermitian,
    mhz,
    propagator,
)
from .errors import ValidationError

MAX_MODULATION = 0.2
RWA_RATIO = 20.0

# Reference-experiment values, rad/µs.
PROBE_GAP = mhz(15.98)
PROBE_DETUNING = mhz(5.025)
RAMSEY_DETUNING = mhz(2.27)
RAMSEY_PROBE_GAP = mhz(11.34)
A_PARALLEL = mhz(11.832)
A_PERPENDICULAR = mhz(2.79)
B_FIELD_GAUSS = 504.0
GAMMA_C13_MHZ_PER_G = 1.0705e-3
OMEGA_C13 = mhz(GAMMA_C13_MHZ_PER_G * B_FIELD_GAUSS)

DEFAULT_PULSE_RABI = mhz(20.0)
DEFAULT_CARRIER = mhz(500.0)


@dataclass(frozen=True)
class SingleQubitParams:
    A: float = PROBE_GAP
    theta: float = np.pi / 3
    beta: float = np.pi / 2
    xi: float = PROBE_DETUNING
    Omega: float = DEFAULT_PULSE_RABI
    omega1: float = DEFAULT_CARRIER

    def __post_init__(self):
        if not self.A > 0:
            raise ValidationError("probe gap A must be positive")
        _check_theta(self.theta)
        if not 0.0 <= self.beta < TWO_PI:
            raise ValidationError(f"beta must lie in [0, 2π), got {self.beta}")
        for name in ("xi", "Omega", "omega1"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")


@dataclass(frozen=True)
class TwoQubitParams:
    A: float = PROBE_GAP
    beta: float = 0.0
    phi: float = 0.0
    A_par: float = A_PARALLEL
    A_perp: float = A_PERPENDICULAR
    omega_C: float = OMEGA_C13

    def __post_init__(self):
        for name in ("A", "beta", "phi", "A_par", "A_perp", "omega_C"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.A_perp < 0:
            raise ValidationError("A_perp must be non-negative")


@dataclass(frozen=True)
class PulseModel:
    """Finite-duration Y rotations driven at Rabi frequency ``Omega``.

    With a ``carrier`` the pulse is simulated in the lab frame,
    H = ((ω₁ - δ)/2)σ_z + Ω sin(ω₁ t)σ_x, and mapped back to the frame
    rotating at ω₁, so counter-rotating terms are kept. With
    ``carrier=None`` the rotating-wave form -(δ/2)σ_z - (Ω/2)σ_y is used.
    A nonzero ``detuning`` δ makes the rotations off-resonant.
    """

    Omega: float = DEFAULT_PULSE_RABI
    detuning: float = 0.0
    carrier: Optional[float] = DEFAULT_CARRIER

    def __post_init__(self):
        if not self.Omega > 0:
            raise ValidationError("pulse Rabi frequency must be positive")
        if self.carrier is not None and self.carrier < RWA_RATIO * self.Omega:
            raise ValidationError("pulse carrier must exceed 20·Omega")


def _check_theta(theta):
    if not 0.0 <= theta <= np.pi:
        raise ValidationError(f"theta must lie in [0, π], got {theta}")


def resource_state(theta: float) -> PureState:
    _check_theta(theta)
    return PureState.from_vector([np.cos(theta / 2), -np.sin(theta / 2)])


def final_state(theta: float, beta: float) -> PureState:
    _check_theta(theta)
    return PureState.from_vector(
        [np.cos(theta / 2) * np.exp(0.5j * beta), -np.sin(theta / 2) * np.exp(-0.5j * beta)]
    )


def orthogonal_final_state(theta: float, beta: float) -> PureState:
    """The lower (-A/2) eigenstate of the probe Hamiltonian."""
    _check_theta(theta)
    return PureState.from_vector(
        [np.sin(theta / 2) * np.exp(0.5j * beta), np.cos(theta / 2) * np.exp(-0.5j * beta)]
    )


def _probe_matrices(A, theta, betas):
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    out = np.empty((betas.size, 2, 2), dtype=complex)
    off = -0.5 * A * np.sin(theta) * np.exp(1j * betas)
    out[:, 0, 0] = 0.5 * A * np.cos(theta)
    out[:, 1, 1] = -0.5 * A * np.cos(theta)
    out[:, 0, 1] = off
    out[:, 1, 0] = off.conj()
    return out


def probe_hamiltonian(p: SingleQubitParams) -> HermitianOperator:
    return HermitianOperator(_probe_matrices(p.A, p.theta, p.beta)[0])


def probe_beta_derivative(p: SingleQubitParams) -> HermitianOperator:
    """∂H/∂β at the working point."""
    off = -0.5j * p.A * np.sin(p.theta) * np.exp(1j * p.beta)
    return HermitianOperator(np.array([[0, off], [np.conj(off), 0]]))


def _check_amplitude(a):
    if not 0.0 <= a <= MAX_MODULATION:
        raise ValidationError(f"modulation amplitude must lie in [0, {MAX_MODULATION}], got {a}")


def modulated_hamiltonian(p: SingleQubitParams, a: float, omega: float) -> TimeDependentHamiltonian:
    """H(β + a cos(ωt)) in the probe frame.

    ``a = 0`` is accepted as the undriven control and yields a static generator.
    """
    _check_amplitude(a)
    if not omega > 0:
        raise ValidationError("modulation frequency must be positive")
    A, theta, beta = p.A, p.theta, p.beta

    def gen(t):
        return _probe_matrices(A, theta, beta + a * np.cos(omega * np.asarray(t)))

    period = TWO_PI / omega if a > 0 else None
    return TimeDependentHamiltonian(gen, max(A, omega), 2, period=period, label="modulated-probe")


def drive_carrier(p: SingleQubitParams) -> float:
    """Carrier of the synthesized drive, ω₁ - A cos θ."""
    return p.omega1 - p.A * np.cos(p.theta)


def lab_frame_drive(p: SingleQubitParams, a: float, omega: float) -> TimeDependentHamiltonian:
    """(ω₁/2)σ_z + f₀(t)σ_x with f₀(t) = -A sin θ cos[(ω₁ - A cos θ)t - β(t)].

    The carrier phase is the one whose rotating-wave image is
    :func:`probe_hamiltonian`. Used only to validate the rotating frame.
    """
    _check_amplitude(a)
    if p.omega1 < RWA_RATIO * p.A:
        raise ValidationError(
            f"carrier ω₁={p.omega1:.4g} rad/µs must exceed {RWA_RATIO:g}·A for the RWA comparison"
        )
    A, theta, beta, w1 = p.A, p.theta, p.beta, p.omega1
    carrier = drive_carrier(p)
    zeeman = 0.5 * w1 * PAULI_Z

    def gen(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        f0 = -A * np.sin(theta) * np.cos(carrier * t - (beta + a * np.cos(omega * t)))
        return zeeman[None] + f0[:, None, None] * PAULI_X[None]

    return TimeDependentHamiltonian(gen, w1 + A, 2, label="lab-frame")


def lab_to_probe_frame(p: SingleQubitParams, state_lab: np.ndarray, t: float) -> np.ndarray:
    """Map a lab-frame amplitude vector at time t into the probe frame."""
    w = drive_carrier(p)
    return np.array([np.exp(0.5j * w * t), np.exp(-0.5j * w * t)]) * np.asarray(state_lab)


def free_evolution_hamiltonian(xi: float) -> HermitianOperator:
    """-(ξ/2)σ_z, so that evolving for T = β/ξ imprints exactly β."""
    return HermitianOperator(-0.5 * xi * PAULI_Z)


def free_evolution(xi: float, duration: float) -> np.ndarray:
    phase = 0.5 * xi * duration
    return np.diag([np.exp(1j * phase), np.exp(-1j * phase)])


def y_rotation(angle: float) -> np.ndarray:
    """Y_angle: takes |0> to cos(angle/2)|0> - sin(angle/2)|-1>."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, s], [-s, c]], dtype=complex)


def y_pulse(angle: float, pulse: Optional[PulseModel] = None) -> np.ndarray:
    """Unitary of a Y_angle pulse in the frame rotating at ω₁; ideal when ``pulse`` is None."""
    if pulse is None:
        return y_rotation(angle)
    if angle < 0:
        raise ValidationError("finite pulses need a non-negative rotation angle")
    if angle == 0:
        return np.eye(2, dtype=complex)
    duration = angle / pulse.Omega
    if pulse.carrier is None:
        ham = -0.5 * pulse.detuning * PAULI_Z - 0.5 * pulse.Omega * PAULI_Y
        return expm_hermitian(ham, duration)
    w1, rabi = pulse.carrier, pulse.Omega
    zeeman = 0.5 * (w1 - pulse.detuning) * PAULI_Z

    def gen(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return zeeman[None] + (rabi * np.sin(w1 * t))[:, None, None] * PAULI_X[None]

    lab = propagator(TimeDependentHamiltonian(gen, w1 + rabi, 2, label="lab-pulse"), 0.0, duration)
    frame = np.diag([np.exp(0.5j * w1 * duration), np.exp(-0.5j * w1 * duration)])
    return frame @ lab


def _two_qubit_matrices(p: TwoQubitParams, betas):
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    static = (
        -0.25 * p.A_par * np.kron(PAULI_Z, PAULI_Z)
        - 0.25 * p.A_perp * np.kron(PAULI_Z, PAULI_X)
        + (0.5 * p.omega_C - 0.25 * p.A_par) * np.kron(PAULI_I, PAULI_Z)
        - 0.25 * p.A_perp * np.kron(PAULI_I, PAULI_X)
    )
    transverse = np.cos(p.phi) * PAULI_X + np.sin(p.phi) * PAULI_Y
    zz = np.kron(PAULI_Z, PAULI_I)
    tt = np.kron(transverse, PAULI_I)
    return (
        static[None]
        + 0.5 * p.A * np.cos(betas)[:, None, None] * zz[None]
        + 0.5 * p.A * np.sin(betas)[:, None, None] * tt[None]
    )


def two_qubit_hamiltonian(p: TwoQubitParams) -> HermitianOperator:
    """Electron (σ, first factor) coupled to a 13C nuclear spin (τ, second factor)."""
    return HermitianOperator(_two_qubit_matrices(p, p.beta)[0])


def two_qubit_beta_derivative(p: TwoQubitParams) -> HermitianOperator:
    transverse = np.cos(p.phi) * PAULI_X + np.sin(p.phi) * PAULI_Y
    de = 0.5 * p.A * (-np.sin(p.beta) * PAULI_Z + np.cos(p.beta) * transverse)
    return HermitianOperator(np.kron(de, PAULI_I))


def spectral_width(matrix: np.ndarray) -> float:
    w = np.linalg.eigvalsh(matrix)
    return float(w[-1] - w[0])


def modulated_two_qubit_hamiltonian(p: TwoQubitParams, a: float, omega: float) -> TimeDependentHamiltonian:
    _check_amplitude(a)
    if not omega > 0:
        raise ValidationError("modulation frequency must be positive")

    def gen(t):
        return _two_qubit_matrices(p, p.beta + a * np.cos(omega * np.asarray(t)))

    width = spectral_width(_two_qubit_matrices(p, p.beta)[0])
    period = TWO_PI / omega if a > 0 else None
    return TimeDependentHamiltonian(gen, max(width, omega), 4, period=period, label="modulated-two-qubit")
