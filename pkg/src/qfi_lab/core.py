"""States, Hermitian operators and exact small-matrix propagation.

Units: time in µs, angular frequency in rad/µs. A frequency quoted as
"(2π)·f MHz" is stored as ``mhz(f) = 2π·f`` rad/µs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * np.pi

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
ALLOWED_DIMS = (2, 4)

# Steps per period of the fastest declared frequency.
DEFAULT_STEPS_PER_PERIOD = 200
MIN_STEPS_PER_PERIOD = 20

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def mhz(f):
    """Convert a "(2π)·f MHz" figure to rad/µs."""
    return TWO_PI * f


def to_mhz(omega):
    """Inverse of :func:`mhz`."""
    return omega / TWO_PI


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over the computational basis.

    For the single qubit the basis order is (|0>, |-1>); for the
    electron-nuclear pair it is the Kronecker product of two such bases.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size not in ALLOWED_DIMS:
            raise ValidationError(f"state dimension must be 2 or 4, got {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized (|psi|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_vector(cls, vec) -> "PureState":
        """Build a state from an unnormalized vector."""
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(vec / norm)

    @classmethod
    def basis(cls, index: int, dim: int = 2) -> "PureState":
        vec = np.zeros(dim, dtype=complex)
        vec[index] = 1.0
        return cls(vec)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def population(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)

    def with_phase(self, phase: float) -> "PureState":
        return PureState(self.amplitudes * np.exp(1j * phase))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense Hermitian matrix in rad/µs."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator must be square, got shape {m.shape}")
        if m.shape[0] not in ALLOWED_DIMS:
            raise ValidationError(f"operator dimension must be 2 or 4, got {m.shape[0]}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("operator has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(m))))
        defect = float(np.max(np.abs(m - m.conj().T)))
        if defect > HERMITIAN_TOL * scale:
            raise ValidationError(f"operator is not Hermitian (defect {defect:.3e})")
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + m.conj().T)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, state: PureState) -> float:
        _check_dims(self.dim, state.dim)
        return float(np.vdot(state.amplitudes, self.matrix @ state.amplitudes).real)

    def apply(self, state: PureState) -> np.ndarray:
        """Return H|psi> as a raw vector (not a state: it is unnormalized)."""
        _check_dims(self.dim, state.dim)
        return self.matrix @ state.amplitudes

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix + other.matrix)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class TimeDependentHamiltonian:
    """Deterministic map t -> H(t).

    ``generator`` is vectorized: given an array of times of shape (n,) it
    returns an array of shape (n, dim, dim). ``bandwidth`` is the fastest
    angular frequency (rad/µs) in the dynamics and sets the step size.
    ``period`` marks generators that repeat exactly, which lets long
    evolutions reuse the one-period propagator.
    """

    generator: Callable[[np.ndarray], np.ndarray]
    bandwidth: float
    dim: int
    period: Optional[float] = None
    label: str = field(default="")

    def __post_init__(self):
        if self.dim not in ALLOWED_DIMS:
            raise ValidationError(f"dimension must be 2 or 4, got {self.dim}")
        if not np.isfinite(self.bandwidth) or self.bandwidth <= 0:
            raise ValidationError("bandwidth must be positive and finite")
        if self.period is not None and self.period <= 0:
            raise ValidationError("period must be positive")

    @classmethod
    def constant(cls, op: HermitianOperator, bandwidth: Optional[float] = None):
        """Wrap a static operator; bandwidth defaults to its spectral width."""
        m = op.matrix
        if bandwidth is None:
            w = np.linalg.eigvalsh(m)
            bandwidth = max(float(w[-1] - w[0]), float(np.max(np.abs(w))), 1e-12)

        def gen(t):
            t = np.atleast_1d(t)
            return np.broadcast_to(m, (t.size,) + m.shape)

        return cls(gen, bandwidth, op.dim, label="constant")

    def matrices(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        return np.asarray(self.generator(times), dtype=complex).reshape(times.size, self.dim, self.dim)

    def at(self, t: float) -> HermitianOperator:
        return HermitianOperator(self.matrices([t])[0])

    def default_dt(self) -> float:
        return TWO_PI / (DEFAULT_STEPS_PER_PERIOD * self.bandwidth)

    def max_dt(self) -> float:
        return TWO_PI / (MIN_STEPS_PER_PERIOD * self.bandwidth)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending eigenvalues and matching eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: tuple

    @property
    def matrix(self) -> np.ndarray:
        """Eigenvectors as columns."""
        return np.column_stack([v.amplitudes for v in self.eigenvectors])

    def gaps(self) -> np.ndarray:
        return self.eigenvalues[1:] - self.eigenvalues[0]

    def reconstruct(self) -> np.ndarray:
        v = self.matrix
        return (v * self.eigenvalues) @ v.conj().T


def _check_dims(a: int, b: int):
    if a != b:
        raise ValidationError(f"dimension mismatch: {a} vs {b}")


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude component is real-positive."""
    i = int(np.argmax(np.abs(vec)))
    return vec * np.exp(-1j * np.angle(vec[i]))


def eig_hermitian(op: HermitianOperator) -> EigenSystem:
    if not isinstance(op, HermitianOperator):
        op = HermitianOperator(op)
    w, v = np.linalg.eigh(op.matrix)
    vectors = tuple(PureState.from_vector(fix_phase(v[:, k])) for k in range(v.shape[1]))
    w = np.array(w, dtype=float)
    w.setflags(write=False)
    return EigenSystem(w, vectors)


def overlap(a: PureState, b: PureState) -> complex:
    """<a|b>."""
    _check_dims(a.dim, b.dim)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: PureState, b: PureState) -> float:
    return abs(overlap(a, b)) ** 2


def expm_hermitian(matrices: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for a stack of Hermitian matrices, via eigendecomposition."""
    w, v = np.linalg.eigh(matrices)
    phases = np.exp(-1j * w * dt)
    return (v * phases[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def _ordered_product(us: np.ndarray) -> np.ndarray:
    """U_n ... U_2 U_1 for a stack ordered in time (earliest first)."""
    dim = us.shape[-1]
    while us.shape[0] > 1:
        if us.shape[0] % 2:
            us = np.concatenate([us, np.eye(dim, dtype=complex)[None]], axis=0)
        us = us[1::2] @ us[0::2]
    return us[0]


_CHUNK = 1 << 15


def _resolve_dt(ham: TimeDependentHamiltonian, dt: Optional[float]) -> float:
    if dt is None:
        return ham.default_dt()
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if dt > ham.max_dt() * (1 + 1e-12):
        raise ValidationError(
            f"dt={dt:.4g} µs too coarse for bandwidth {ham.bandwidth:.4g} rad/µs "
            f"(limit {ham.max_dt():.4g} µs)"
        )
    return dt


def propagator(ham: TimeDependentHamiltonian, t0: float, t1: float, dt: Optional[float] = None) -> np.ndarray:
    """Time-ordered product of mid-point exponentials exp(-i H(t+h/2) h).

    The interval is split into the smallest number of equal steps h <= dt.
    """
    dt = _resolve_dt(ham, dt)
    if t1 < t0:
        raise ValidationError("t1 must not precede t0")
    span = t1 - t0
    if span == 0:
        return np.eye(ham.dim, dtype=complex)
    n = int(np.ceil(span / dt * (1 - 1e-12)))
    h = span / n
    total = np.eye(ham.dim, dtype=complex)
    for start in range(0, n, _CHUNK):
        idx = np.arange(start, min(n, start + _CHUNK))
        mids = t0 + (idx + 0.5) * h
        total = _ordered_product(expm_hermitian(ham.matrices(mids), h)) @ total
    return total


def propagate(state: PureState, ham: TimeDependentHamiltonian, t0: float, t1: float,
              dt: Optional[float] = None) -> PureState:
    _check_dims(state.dim, ham.dim)
    out = propagator(ham, t0, t1, dt) @ state.amplitudes
    return PureState.from_vector(out)


def trajectory(state: PureState, ham: TimeDependentHamiltonian, times: Sequence[float],
               dt: Optional[float] = None, t0: float = 0.0) -> list:
    """States at each of the (non-decreasing) ``times``, starting from ``state`` at ``t0``.

    Periodic generators with t0 = 0 reuse the one-period propagator, so the
    cost no longer grows with the number of elapsed periods.
    """
    _check_dims(state.dim, ham.dim)
    times = np.asarray(times, dtype=float)
    if times.size and (np.any(np.diff(times) < 0) or times[0] < t0):
        raise ValidationError("times must be non-decreasing and start at or after t0")
    dt = _resolve_dt(ham, dt)
    if ham.period is not None and t0 == 0.0:
        return _periodic_trajectory(state, ham, times, dt)
    out = []
    psi = state.amplitudes
    current = t0
    for t in times:
        if t > current:
            psi = propagator(ham, current, t, dt) @ psi
            psi = psi / np.linalg.norm(psi)
            current = t
        out.append(PureState.from_vector(psi))
    return out


def _periodic_trajectory(state, ham, times, dt):
    period = ham.period
    steps = int(np.ceil(period / dt * (1 - 1e-12)))
    h = period / steps
    one_period = propagator(ham, 0.0, period, h)
    out = []
    cycles_done = 0
    psi_cycles = state.amplitudes
    for t in times:
        n = int(np.floor(t / period + 1e-9))
        rem = t - n * period
        if rem < 1e-9 * period:
            rem = 0.0
        while cycles_done < n:
            psi_cycles = one_period @ psi_cycles
            psi_cycles = psi_cycles / np.linalg.norm(psi_cycles)
            cycles_done += 1
        psi = psi_cycles
        if rem > 0:
            psi = propagator(ham, 0.0, rem, h) @ psi
        out.append(PureState.from_vector(psi))
    return out
