"""Reference QFI values: finite differences, closed forms and concurrence."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .core import PAULI_Y, EigenSystem, PureState, eig_hermitian, overlap
from .errors import (
    BranchDiscontinuityError,
    DegeneratePointError,
    DivergentSensitivityError,
    ValidationError,
)
from .models import TwoQubitParams, two_qubit_beta_derivative, two_qubit_hamiltonian

DEFAULT_DBETA = 1e-4
CONTINUITY_THRESHOLD = 0.99
SCAN_OVERLAP_THRESHOLD = 0.9
DEGENERACY_TOL = 1e-9


class QfiMethod(str, enum.Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"
    MODULATION_PROTOCOL = "modulation_protocol"
    SUM_OVER_STATES = "sum_over_states"


@dataclass(frozen=True)
class QfiValue:
    value: float
    method: QfiMethod
    stderr: float = 0.0

    def __post_init__(self):
        if not self.value >= 0:
            raise ValidationError(f"QFI must be non-negative, got {self.value}")
        if not self.stderr >= 0:
            raise ValidationError("QFI stderr must be non-negative")

    def __float__(self):
        return float(self.value)


def _aligned(ref: np.ndarray, vec: np.ndarray, beta: float) -> np.ndarray:
    ov = np.vdot(ref, vec)
    if abs(ov) < CONTINUITY_THRESHOLD:
        raise BranchDiscontinuityError(
            f"state jumps near beta={beta:.6g} (overlap {abs(ov):.4f})", beta=beta, overlap=abs(ov)
        )
    return vec * np.exp(-1j * np.angle(ov))


def _central_qfi(state_of_beta, beta, h, psi):
    plus = _aligned(psi, np.asarray(state_of_beta(beta + h).amplitudes), beta)
    minus = _aligned(psi, np.asarray(state_of_beta(beta - h).amplitudes), beta)
    d = (plus - minus) / (2 * h)
    return 4.0 * (np.vdot(d, d).real - abs(np.vdot(psi, d)) ** 2)


def qfi_finite_difference(state_of_beta: Callable[[float], PureState], beta: float,
                          dbeta: float = DEFAULT_DBETA, richardson: bool = True) -> QfiValue:
    """Pure-state QFI 4[<∂ψ|∂ψ> - |<ψ|∂ψ>|²] from a central difference.

    Neighbours are rotated so their overlap with ψ(β) is real-positive
    before differencing; the QFI is gauge invariant, so this only removes
    spurious phase jumps. With ``richardson`` the steps dβ and dβ/2 are
    combined to cancel the O(dβ²) truncation error.
    """
    if not 1e-6 <= dbeta <= 1e-2:
        raise ValidationError(f"dbeta must lie in [1e-6, 1e-2], got {dbeta}")
    psi = np.asarray(state_of_beta(beta).amplitudes)
    coarse = _central_qfi(state_of_beta, beta, dbeta, psi)
    value = coarse
    if richardson:
        fine = _central_qfi(state_of_beta, beta, dbeta / 2, psi)
        value = (4 * fine - coarse) / 3
    return QfiValue(max(0.0, float(value)), QfiMethod.FINITE_DIFFERENCE)


def qfi_single_qubit_analytic(theta: float) -> QfiValue:
    return QfiValue(float(np.sin(theta) ** 2), QfiMethod.ANALYTIC)


def sensitivity_theory(theta: float, beta: float) -> float:
    """Single-shot phase uncertainty for the α = π/2 projective measurement."""
    slope = abs(np.sin(beta) * np.sin(theta))
    if slope < 1e-12:
        raise DivergentSensitivityError(
            f"signal slope vanishes at theta={theta:.6g}, beta={beta:.6g}"
        )
    return float(np.sqrt(1.0 - (np.cos(beta) * np.sin(theta)) ** 2) / slope)


_YY = np.kron(PAULI_Y, PAULI_Y)


def concurrence(state: PureState) -> float:
    """|<ψ|σ_y⊗σ_y|ψ*>| for a pure two-qubit state."""
    if state.dim != 4:
        raise ValidationError(f"concurrence needs a two-qubit state, got dimension {state.dim}")
    psi = state.amplitudes
    return float(min(1.0, abs(psi @ _YY @ psi)))


def two_qubit_eigensystem(p: TwoQubitParams, beta: float) -> EigenSystem:
    return eig_hermitian(two_qubit_hamiltonian(replace(p, beta=beta)))


def ground_state(p: TwoQubitParams, beta: float) -> PureState:
    return two_qubit_eigensystem(p, beta).eigenvectors[0]


def qfi_sum_over_states(p: TwoQubitParams, beta: float) -> QfiValue:
    """4 Σ_k |<Ψ_k|∂_βH|Ψ_1>|² / (ε_k - ε_1)², the perturbative route."""
    es = two_qubit_eigensystem(p, beta)
    dh = two_qubit_beta_derivative(replace(p, beta=beta)).matrix
    g = es.eigenvectors[0].amplitudes
    total = 0.0
    for k in range(1, 4):
        gap = es.eigenvalues[k] - es.eigenvalues[0]
        total += abs(np.vdot(es.eigenvectors[k].amplitudes, dh @ g)) ** 2 / gap ** 2
    return QfiValue(4.0 * total, QfiMethod.SUM_OVER_STATES)


@dataclass(frozen=True)
class ScanPoint:
    beta: float
    qfi: QfiValue
    concurrence: float
    gap: float


def ground_state_scan(p: TwoQubitParams, betas: Sequence[float],
                      dbeta: float = DEFAULT_DBETA) -> list:
    """QFI, concurrence and lowest gap of |Ψ₁> along a β grid."""
    betas = np.asarray(betas, dtype=float)
    if betas.size < 2 or np.any(np.diff(betas) <= 0):
        raise ValidationError("beta grid must be strictly increasing with at least two points")
    out = []
    previous = None
    for b in betas:
        es = two_qubit_eigensystem(p, b)
        gap = float(es.eigenvalues[1] - es.eigenvalues[0])
        if gap < DEGENERACY_TOL * p.A:
            raise DegeneratePointError(f"ground state degenerate at beta={b:.6g}", beta=b, gap=gap)
        g = es.eigenvectors[0]
        if previous is not None and abs(overlap(previous, g)) < SCAN_OVERLAP_THRESHOLD:
            raise ValidationError(
                f"beta grid too coarse: ground states at consecutive points overlap "
                f"{abs(overlap(previous, g)):.3f} near beta={b:.6g}"
            )
        previous = g
        qfi = qfi_finite_difference(lambda x: ground_state(p, x), b, dbeta)
        out.append(ScanPoint(float(b), qfi, concurrence(g), gap))
    return out
