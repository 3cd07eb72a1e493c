"""QFI extraction from Rabi oscillations induced by weak parametric modulation.

Driving β(t) = β + a cos(ωt) on resonance with a gap ω_k makes the system
oscillate between the ground state and |Ψ_k> at the Rabi frequency
ν_k = a |<Ψ_k|∂_βH|Ψ_1>|. Because <Ψ_k|∂_βH|Ψ_1> = ω_k <Ψ_k|∂_βΨ_1>, the
QFI is recovered as 4 Σ_k (ν_k / (a_k ω_k))².
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .core import TWO_PI, PureState, eig_hermitian, propagate, trajectory
from .errors import AddressabilityError, FitError, ValidationError
from .models import (
    MAX_MODULATION,
    PulseModel,
    SingleQubitParams,
    TwoQubitParams,
    final_state,
    free_evolution,
    lab_frame_drive,
    lab_to_probe_frame,
    modulated_hamiltonian,
    modulated_two_qubit_hamiltonian,
    probe_hamiltonian,
    two_qubit_beta_derivative,
    two_qubit_hamiltonian,
    y_pulse,
)
from .oracle import QfiMethod, QfiValue

RESONANCE_TOLERANCE = 0.02
FIT_RMS_LIMIT = 0.05
FIT_FREQUENCY_WINDOW = 0.2
MIN_FIT_SAMPLES = 12
MIN_FIT_PERIODS = 1.25
ADDRESSABILITY_FACTOR = 5.0
DARK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ModulationSpec:
    a: float
    omega: float
    tau_grid: tuple
    beta: float = np.pi / 2

    def __post_init__(self):
        if not 0.0 <= self.a <= MAX_MODULATION:
            raise ValidationError(f"modulation amplitude must lie in [0, {MAX_MODULATION}]")
        if not self.omega > 0:
            raise ValidationError("modulation frequency must be positive")
        taus = np.asarray(self.tau_grid, dtype=float)
        if taus.size == 0 or taus[0] != 0.0 or np.any(np.diff(taus) <= 0):
            raise ValidationError("tau_grid must start at 0 and be strictly increasing")
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in taus))


@dataclass(frozen=True)
class RabiTrace:
    times: np.ndarray
    survival: np.ndarray
    target_label: str = "psi->psi_perp"

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        surv = np.asarray(self.survival, dtype=float)
        if times.shape != surv.shape:
            raise ValidationError("times and survival must have the same length")
        if np.any(surv < -1e-9) or np.any(surv > 1 + 1e-9):
            raise ValidationError("survival probabilities must lie in [0, 1]")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "survival", np.clip(surv, 0.0, 1.0))


@dataclass(frozen=True)
class FitResult:
    nu: float
    amplitude: float
    offset: float
    rms_residual: float
    converged: bool
    nu_stderr: float = 0.0
    initial_nu: float = 0.0


@dataclass(frozen=True)
class ResonanceScan:
    omegas: np.ndarray
    survival: np.ndarray
    tau: float


# --------------------------------------------------------------------------
# single qubit


def probe_gap(p: SingleQubitParams) -> float:
    w = eig_hermitian(probe_hamiltonian(p)).eigenvalues
    return float(w[1] - w[0])


def resonance_scan(p: SingleQubitParams, a: float, omega_grid: Sequence[float], tau: float,
                   dt: Optional[float] = None) -> ResonanceScan:
    """Survival in |ψ_θ(β)> after a modulation of duration tau, per frequency."""
    omegas = np.asarray(omega_grid, dtype=float)
    if not tau > 0:
        raise ValidationError("scan duration must be positive")
    if omegas.size < 3 or np.any(np.diff(omegas) <= 0):
        raise ValidationError("omega grid must be increasing with at least three points")
    if omegas[0] > 0.8 * p.A * (1 + 1e-12) or omegas[-1] < 1.2 * p.A * (1 - 1e-12):
        raise ValidationError("omega grid must cover [0.8 A, 1.2 A]")
    psi = final_state(p.theta, p.beta)
    surv = np.empty(omegas.size)
    for i, w in enumerate(omegas):
        out = propagate(psi, modulated_hamiltonian(p, a, w), 0.0, tau, dt)
        surv[i] = abs(np.vdot(psi.amplitudes, out.amplitudes)) ** 2
    return ResonanceScan(omegas, surv, float(tau))


def locate_resonance(scan: ResonanceScan) -> float:
    """Scan minimum refined by a parabola through it and its two neighbours."""
    i = int(np.argmin(scan.survival))
    i = min(max(i, 1), scan.omegas.size - 2)
    x = scan.omegas[i - 1:i + 2]
    y = scan.survival[i - 1:i + 2]
    c2, c1, _ = np.polyfit(x - x[1], y, 2)
    if c2 <= 0:
        return float(scan.omegas[i])
    shift = -c1 / (2 * c2)
    return float(x[1] + np.clip(shift, x[0] - x[1], x[2] - x[1]))


def _check_resonant(gap: float, omega: float):
    if abs(omega - gap) >= RESONANCE_TOLERANCE * gap:
        raise ValidationError(
            f"modulation frequency {omega:.6g} is not within {RESONANCE_TOLERANCE:.0%} "
            f"of the gap {gap:.6g} rad/µs"
        )


def rabi_trace(p: SingleQubitParams, spec: ModulationSpec, dt: Optional[float] = None) -> RabiTrace:
    """Survival in |ψ_θ(β)> versus modulation duration, in the probe frame."""
    p = replace(p, beta=spec.beta)
    _check_resonant(probe_gap(p), spec.omega)
    psi = final_state(p.theta, p.beta)
    states = trajectory(psi, modulated_hamiltonian(p, spec.a, spec.omega), spec.tau_grid, dt)
    surv = [abs(np.vdot(psi.amplitudes, s.amplitudes)) ** 2 for s in states]
    return RabiTrace(np.array(spec.tau_grid), np.array(surv), "psi->psi_perp")


def full_protocol_trace(p: SingleQubitParams, spec: ModulationSpec,
                        pulses: Optional[PulseModel] = None, dt: Optional[float] = None) -> RabiTrace:
    """Population of |0> after the complete pulse sequence.

    |0> -> Y_θ -> free evolution T = β/ξ -> modulation for τ -> Y_π ->
    free evolution T -> Y_{π-θ} -> measure |0>. With ideal pulses the
    inverse sequence maps |ψ_θ(β)> onto |0> exactly.
    """
    p = replace(p, beta=spec.beta)
    _check_resonant(probe_gap(p), spec.omega)
    if p.xi <= 0:
        raise ValidationError("free-evolution detuning xi must be positive")
    T = p.beta / p.xi
    free = free_evolution(p.xi, T)
    prepared = free @ y_pulse(p.theta, pulses) @ np.array([1.0, 0.0], dtype=complex)
    inverse = y_pulse(np.pi - p.theta, pulses) @ free @ y_pulse(np.pi, pulses)
    states = trajectory(PureState.from_vector(prepared), modulated_hamiltonian(p, spec.a, spec.omega),
                        spec.tau_grid, dt)
    pops = [abs((inverse @ s.amplitudes)[0]) ** 2 for s in states]
    return RabiTrace(np.array(spec.tau_grid), np.array(pops), "|0> after inverse sequence")


def lab_frame_trace(p: SingleQubitParams, spec: ModulationSpec, dt: Optional[float] = None) -> RabiTrace:
    """Same observable as :func:`rabi_trace`, simulated with the lab-frame drive."""
    p = replace(p, beta=spec.beta)
    psi = final_state(p.theta, p.beta)
    states = trajectory(psi, lab_frame_drive(p, spec.a, spec.omega), spec.tau_grid, dt)
    surv = [abs(np.vdot(psi.amplitudes, lab_to_probe_frame(p, s.amplitudes, t))) ** 2
            for s, t in zip(states, spec.tau_grid)]
    return RabiTrace(np.array(spec.tau_grid), np.array(surv), "lab frame")


# --------------------------------------------------------------------------
# fitting


def _periodogram_peak(t, y):
    centred = y - y.mean()
    span = t[-1] - t[0]
    steps = np.diff(t)
    nu_max = np.pi / np.min(steps[steps > 0])
    grid = np.linspace(0.25 * TWO_PI / span, nu_max, 8 * t.size + 512)
    power = np.abs(np.exp(-1j * np.outer(grid, t)) @ centred) ** 2
    return float(grid[int(np.argmax(power))])


def fit_rabi(trace: RabiTrace, strict: bool = True) -> FitResult:
    """Least-squares fit of offset + amplitude·cos(νt).

    The starting frequency is the periodogram peak of the mean-subtracted
    trace. A fit counts as converged when the rms residual is below 0.05
    and ν stays within 20% of the starting value; otherwise ``strict``
    raises :class:`FitError`.
    """
    t, y = trace.times, trace.survival
    if t.size < MIN_FIT_SAMPLES:
        raise ValidationError(f"need at least {MIN_FIT_SAMPLES} samples, got {t.size}")
    nu0 = _periodogram_peak(t, y)
    span = t[-1] - t[0]
    if span * nu0 / TWO_PI < MIN_FIT_PERIODS:
        raise ValidationError(
            f"trace covers {span * nu0 / TWO_PI:.2f} periods, need {MIN_FIT_PERIODS}"
        )
    amp0 = 0.5 * (y.max() - y.min()) * (1 if y[0] >= y.mean() else -1)

    def resid(x):
        return x[0] + x[1] * np.cos(x[2] * t) - y

    sol = least_squares(resid, [y.mean(), amp0, nu0], method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14)
    offset, amplitude, nu = sol.x
    nu = abs(nu)
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    dof = max(1, t.size - 3)
    stderr = 0.0
    try:
        cov = np.linalg.inv(sol.jac.T @ sol.jac) * (2 * sol.cost / dof)
        stderr = float(np.sqrt(max(cov[2, 2], 0.0)))
    except np.linalg.LinAlgError:
        stderr = float("inf")
    converged = bool(sol.success and rms < FIT_RMS_LIMIT and abs(nu - nu0) <= FIT_FREQUENCY_WINDOW * nu0)
    result = FitResult(float(nu), float(amplitude), float(offset), rms, converged, stderr, nu0)
    if strict and not converged:
        raise FitError(
            f"Rabi fit did not converge (nu0={nu0:.5g}, nu={nu:.5g}, rms={rms:.3g})",
            initial_guess=nu0,
            rms_residual=rms,
        )
    return result


# --------------------------------------------------------------------------
# extraction


def extract_qfi_single(nu: float, a: float, omega: float, nu_stderr: float = 0.0) -> QfiValue:
    if not (a > 0 and omega > 0):
        raise ValidationError("a and omega must be positive")
    scale = a * omega
    return QfiValue(4.0 * (nu / scale) ** 2, QfiMethod.MODULATION_PROTOCOL,
                    8.0 * abs(nu) * nu_stderr / scale ** 2)


@dataclass(frozen=True)
class TransitionFit:
    """One driven transition |Ψ_1> -> |Ψ_k>; ``a = 0`` marks a dark transition."""

    nu: float
    a: float
    omega: float
    nu_stderr: float = 0.0
    level: int = 0


@dataclass(frozen=True)
class MultilevelQfi:
    qfi: QfiValue
    contributions: tuple


def extract_qfi_multilevel(fits: Sequence) -> MultilevelQfi:
    """4 Σ_k (ν_k / (a_k ω_k))² over the supplied transitions.

    Entries may be :class:`TransitionFit` or plain (ν, a, ω) tuples.
    """
    fits = [f if isinstance(f, TransitionFit) else TransitionFit(*f) for f in fits]
    if not fits:
        raise ValidationError("need at least one transition")
    for f in fits:
        if not f.omega > 0:
            raise ValidationError("transition frequencies must be positive")
    for i in range(len(fits)):
        for j in range(i + 1, len(fits)):
            fi, fj = fits[i], fits[j]
            if fi.a == 0 or fj.a == 0:
                continue  # an undriven transition cannot be confused with a driven one
            if abs(fi.omega - fj.omega) <= ADDRESSABILITY_FACTOR * max(fi.nu, fj.nu):
                pair = (fi.level or i, fj.level or j)
                raise AddressabilityError(
                    f"transitions {pair} at {fi.omega:.5g} and {fj.omega:.5g} rad/µs overlap",
                    pair=pair,
                )
    contributions = []
    variance = 0.0
    for f in fits:
        if f.a == 0:
            contributions.append(0.0)
            continue
        q = extract_qfi_single(f.nu, f.a, f.omega, f.nu_stderr)
        contributions.append(q.value)
        variance += q.stderr ** 2
    total = QfiValue(float(sum(contributions)), QfiMethod.MODULATION_PROTOCOL, float(np.sqrt(variance)))
    return MultilevelQfi(total, tuple(contributions))


# --------------------------------------------------------------------------
# pipelines


@dataclass(frozen=True)
class SingleQubitMeasurement:
    theta: float
    omega_resonance: float
    gap: float
    fit: FitResult
    qfi: QfiValue
    scan: ResonanceScan = field(repr=False)
    trace: RabiTrace = field(repr=False)


def stroboscopic_grid(omega: float, duration: float, samples: int) -> tuple:
    """Sample times on whole modulation periods, from 0 up to about ``duration``."""
    period = TWO_PI / omega
    cycles = max(int(np.ceil(duration / period)), samples - 1)
    idx = np.unique(np.round(np.linspace(0, cycles, samples)).astype(int))
    return tuple(float(i * period) for i in idx)


def measure_qfi_single(p: SingleQubitParams, a: float = 0.1, tau_scan: float = 0.45,
                       scan_points: int = 81, periods: float = 2.0, samples: int = 48,
                       dt: Optional[float] = None) -> SingleQubitMeasurement:
    """Scan -> locate the dip -> resonant trace -> fit -> QFI.

    The trace length is set from the dip depth, which gives a first
    estimate of ν without using the known gap.
    """
    omegas = np.linspace(0.8 * p.A, 1.2 * p.A, scan_points)
    scan = resonance_scan(p, a, omegas, tau_scan, dt)
    w_res = locate_resonance(scan)
    depth = 1.0 - float(scan.survival.min())
    nu_est = 2.0 * np.arcsin(np.sqrt(np.clip(depth, 1e-6, 1.0))) / tau_scan
    spec = ModulationSpec(a, w_res, stroboscopic_grid(w_res, periods * TWO_PI / nu_est, samples), p.beta)
    trace = rabi_trace(p, spec, dt)
    fit = fit_rabi(trace)
    qfi = extract_qfi_single(fit.nu, a, w_res, fit.nu_stderr)
    return SingleQubitMeasurement(p.theta, w_res, probe_gap(p), fit, qfi, scan, trace)


@dataclass(frozen=True)
class TransitionDrive:
    level: int
    omega: float
    matrix_element: float
    a: float
    predicted_nu: float
    dark: bool


def choose_modulation_amplitudes(p: TwoQubitParams, beta: float, target_ratio: float = 0.02,
                                 leakage_guard: bool = True) -> list:
    """Per-transition amplitudes a_k with ν_k ≤ target_ratio·ω_k (a_k ≤ 0.2).

    Uses first-order matrix elements V_jl = <Ψ_j|∂_βH|Ψ_l>. Driving at ω_k
    also couples every other pair touching Ψ_1 or Ψ_k off resonance, so a_k
    is further capped until each such coupling a_k|V_jl| is at most
    target_ratio times its detuning |ω_k - |ε_j - ε_l||; ``leakage_guard=False``
    skips this cap and gives ν_k = target_ratio·ω_k. Transitions whose
    element vanishes are flagged dark and get a_k = 0.
    """
    if not 0 < target_ratio <= 0.1:
        raise ValidationError("target_ratio must lie in (0, 0.1]")
    q = replace(p, beta=beta)
    es = eig_hermitian(two_qubit_hamiltonian(q))
    dh = two_qubit_beta_derivative(q).matrix
    vecs = es.matrix
    v = np.abs(vecs.conj().T @ dh @ vecs)
    eps = np.asarray(es.eigenvalues)
    drives = []
    for k in range(1, 4):
        omega = float(eps[k] - eps[0])
        element = float(v[k, 0])
        if element < DARK_TOLERANCE * p.A:
            drives.append(TransitionDrive(k + 1, omega, element, 0.0, 0.0, True))
            continue
        a = float(min(MAX_MODULATION, target_ratio * omega / element))
        for j in ((0, k) if leakage_guard else ()):
            for m in range(4):
                if {j, m} == {0, k} or j == m or v[j, m] < DARK_TOLERANCE * p.A:
                    continue
                detuning = abs(omega - abs(eps[m] - eps[j]))
                a = min(a, float(target_ratio * detuning / v[j, m]))
        drives.append(TransitionDrive(k + 1, omega, element, a, a * element, False))
    return drives


def transition_trace(p: TwoQubitParams, beta: float, a: float, omega: float,
                     tau_grid: Sequence[float], dt: Optional[float] = None) -> RabiTrace:
    """Ground-state survival of the NV-13C pair under modulation at ω."""
    q = replace(p, beta=beta)
    ground = eig_hermitian(two_qubit_hamiltonian(q)).eigenvectors[0]
    states = trajectory(ground, modulated_two_qubit_hamiltonian(q, a, omega), tau_grid, dt)
    surv = [abs(np.vdot(ground.amplitudes, s.amplitudes)) ** 2 for s in states]
    return RabiTrace(np.asarray(tau_grid, dtype=float), np.array(surv), "Psi_1 survival")


@dataclass(frozen=True)
class TwoQubitMeasurement:
    beta: float
    drives: tuple
    fits: tuple
    result: MultilevelQfi

    @property
    def qfi(self) -> QfiValue:
        return self.result.qfi


def measure_qfi_two_qubit(p: TwoQubitParams, beta: float, target_ratio: float = 0.02,
                          periods: float = 2.0, samples: int = 48, leakage_guard: bool = True,
                          strict: bool = True, dt: Optional[float] = None) -> TwoQubitMeasurement:
    """Drive each bright transition of |Ψ_1> on resonance, fit, and sum."""
    drives = choose_modulation_amplitudes(p, beta, target_ratio, leakage_guard)
    fits = []
    entries = []
    for d in drives:
        if d.dark:
            fits.append(None)
            entries.append(TransitionFit(0.0, 0.0, d.omega, 0.0, d.level))
            continue
        taus = stroboscopic_grid(d.omega, periods * TWO_PI / d.predicted_nu, samples)
        fit = fit_rabi(transition_trace(p, beta, d.a, d.omega, taus, dt), strict=strict)
        fits.append(fit)
        entries.append(TransitionFit(fit.nu, d.a, d.omega, fit.nu_stderr, d.level))
    return TwoQubitMeasurement(float(beta), tuple(drives), tuple(fits), extract_qfi_multilevel(entries))
