"""Monte-Carlo Ramsey phase estimation with photon-count readout.

Seeding rule: a master seed (int or ``SeedSequence``) is split with
``SeedSequence.spawn``. ``estimate`` spawns two children, the first for the
outer replica ensemble (one grandchild per replica) and the second for the
slope ensemble (one grandchild per fixed-size chunk). Every stream is
therefore a pure function of the master seed and its position, so results do
not depend on execution order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import optimize, stats

from .errors import FitError, ValidationError, ZeroSlopeError
from .models import PulseModel, free_evolution, resource_state, y_pulse
from .oracle import qfi_single_qubit_analytic

DEFAULT_REPLICAS = 200
SLOPE_DBETA = 0.05
SLOPE_RUNS = 1 << 20
SLOPE_CHUNK = 1 << 16
ZERO_SLOPE = 1e-6

SeedLike = Union[int, np.random.SeedSequence]


def _seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


@dataclass(frozen=True)
class PhotonModel:
    """Fluorescence readout: Poisson counts with state-dependent means.

    ``extra_noise_sd`` is the spread of a zero-mean Gaussian offset added to
    the normalized ratio. Within one experiment (N runs) the offset is
    shared, which is what makes it a floor that averaging cannot remove.
    """

    n0_mean: float = 120.0
    n1_mean: float = 84.0
    extra_noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.n0_mean > self.n1_mean > 0:
            raise ValidationError("photon model needs n0_mean > n1_mean > 0")
        if not self.extra_noise_sd >= 0:
            raise ValidationError("extra_noise_sd must be non-negative")

    @classmethod
    def ideal(cls, seed: int = 0) -> "PhotonModel":
        """High-contrast readout whose ratio almost never leaves [0, 1]."""
        return cls(n0_mean=1.0e4, n1_mean=10.0, extra_noise_sd=0.0, seed=seed)

    @property
    def contrast(self) -> float:
        return self.n0_mean - self.n1_mean

    def mean_counts(self, p):
        return np.asarray(p) * self.n0_mean + (1.0 - np.asarray(p)) * self.n1_mean


@dataclass(frozen=True)
class PhotonRun:
    n_j: int
    p_j: float
    s_j: int

    def __post_init__(self):
        if self.n_j < 0:
            raise ValidationError("photon count must be non-negative")
        k = int(np.floor(self.p_j))
        if self.s_j not in (k, k + 1):
            raise ValidationError(f"s_j={self.s_j} is not floor(p_j) or floor(p_j)+1 for p_j={self.p_j}")


@dataclass(frozen=True)
class EstimationResult:
    S_mean: float
    delta_p: float
    chi: float
    delta_beta: float
    N: int
    replicas: int
    S_mean_stderr: float = 0.0
    delta_p_stderr: float = 0.0
    chi_stderr: float = 0.0
    delta_beta_stderr: float = 0.0

    def __post_init__(self):
        if not self.delta_p >= 0:
            raise ValidationError("delta_p must be non-negative")


def ramsey_probability(theta: float, beta: float, alpha: float) -> float:
    """|<φ_α|ψ_θ(β)>|² for the projector onto cos(α/2)|0> + sin(α/2)|-1>."""
    if not 0.0 <= theta <= np.pi:
        raise ValidationError(f"theta must lie in [0, π], got {theta}")
    if not 0.0 <= alpha <= np.pi:
        raise ValidationError(f"alpha must lie in [0, π], got {alpha}")
    amp = (np.cos(alpha / 2) * np.cos(theta / 2) * np.exp(0.5j * beta)
           - np.sin(alpha / 2) * np.sin(theta / 2) * np.exp(-0.5j * beta))
    return float(min(1.0, abs(amp) ** 2))


def sequence_probability(theta: float, xi: float, duration: float, alpha: float,
                         pulse: Optional[PulseModel] = None) -> float:
    """|0> population after preparation, free evolution for ``duration`` and a Y_α readout pulse.

    Only the readout rotation uses ``pulse``; the prepared state is ideal.
    """
    if not 0.0 <= alpha <= np.pi:
        raise ValidationError(f"alpha must lie in [0, π], got {alpha}")
    psi = free_evolution(xi, duration) @ resource_state(theta).amplitudes
    out = y_pulse(alpha, pulse) @ psi
    return float(min(1.0, abs(out[0]) ** 2))


def _check_probability(p):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
        raise ValidationError("probability must lie in [0, 1]")
    return p


def _poisson_inverse(u, mu: float):
    """Smallest k with CDF(k) >= u, via a table over the bulk of the support."""
    width = 40.0 * np.sqrt(mu) + 40.0
    support = np.arange(max(0, int(mu - width)), int(mu + width) + 1)
    cdf = stats.poisson.cdf(support, mu)
    idx = np.minimum(np.searchsorted(cdf, u, side="left"), support.size - 1)
    return support[idx].astype(float)


def _counts(p, model: PhotonModel, u):
    """Inverse-CDF Poisson draws, so equal uniforms give coupled counts across arms.

    ``p`` is a scalar or a column of probabilities broadcast against ``u``.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        return _poisson_inverse(u, float(model.mean_counts(p)))
    u = np.broadcast_to(u, np.broadcast_shapes(p.shape, np.shape(u)))
    out = np.empty(u.shape)
    for i in range(p.shape[0]):
        out[i] = _poisson_inverse(u[i], float(model.mean_counts(p[i, 0])))
    return out


def _ratio(counts, model: PhotonModel):
    return (counts - model.n1_mean) / model.contrast


def _assign(p_j, u):
    k = np.floor(p_j)
    return k + (u < p_j - k)


def simulate_run(p: float, model: PhotonModel, rng: np.random.Generator,
                 offset: Optional[float] = None) -> PhotonRun:
    """One readout: photon count, normalized ratio and assigned value.

    ``offset`` is the extra-noise term; when omitted a fresh Gaussian with
    the model's spread is drawn.
    """
    p = float(_check_probability(p))
    n = int(rng.poisson(model.mean_counts(p)))
    if offset is None:
        offset = rng.normal(0.0, model.extra_noise_sd) if model.extra_noise_sd > 0 else 0.0
    p_j = float(_ratio(n, model) + offset)
    return PhotonRun(n, p_j, assign_value(p_j, rng))


def assign_value(p_j: float, rng: np.random.Generator) -> int:
    """Randomized rounding: k+1 with probability p_j - k, else k, where k = floor(p_j)."""
    if not np.isfinite(p_j):
        raise ValidationError("p_j must be finite")
    return int(_assign(float(p_j), rng.random()))


def assignment_distribution(p_j) -> dict:
    """Exact outcome distribution of ``assign_value``; keeps Fraction inputs exact."""
    k = int(np.floor(p_j)) if not isinstance(p_j, Fraction) else p_j.numerator // p_j.denominator
    upper = p_j - k
    if upper == 0:
        return {k: 1 if isinstance(p_j, Fraction) else 1.0}
    return {k: 1 - upper, k + 1: upper}


def _replica_values(prob, model: PhotonModel, N: int, sweeps: int, rng: np.random.Generator):
    """S for one replica at each probability in ``prob`` using one shared set of draws."""
    prob = np.atleast_1d(prob)
    runs = N * sweeps
    u_count = rng.random(runs)
    u_assign = rng.random(runs)
    z = rng.standard_normal(sweeps) * model.extra_noise_sd
    p_j = _ratio(_counts(prob[:, None], model, u_count[None, :]), model) + np.repeat(z, N)[None, :]
    return _assign(p_j, u_assign[None, :]).mean(axis=1)


def _slope_chunk(prob_pair, model: PhotonModel, N: int, sweeps: int, rng: np.random.Generator, size: int):
    runs = N * sweeps
    u_count = rng.random((size, runs))
    u_assign = rng.random((size, runs))
    z = np.repeat(rng.standard_normal((size, sweeps)) * model.extra_noise_sd, N, axis=1)
    out = []
    for p in prob_pair:
        p_j = _ratio(_counts(p, model, u_count), model) + z
        out.append(_assign(p_j, u_assign).mean(axis=1))
    return out[0] - out[1]


def _sd_stderr(values: np.ndarray) -> float:
    m = values.size
    sd = values.std(ddof=1)
    if sd == 0 or m < 4:
        return 0.0
    centred = values - values.mean()
    m4 = np.mean(centred ** 4)
    var_s2 = max(0.0, (m4 - sd ** 4 * (m - 3) / (m - 1)) / m)
    return float(np.sqrt(var_s2) / (2 * sd))


def estimate(theta: float, beta: float, alpha: float, N: int, model: PhotonModel,
             seed: Optional[SeedLike] = None, replicas: int = DEFAULT_REPLICAS,
             dbeta: float = SLOPE_DBETA, slope_runs: int = SLOPE_RUNS, sweeps: int = 1,
             probability: Optional[Callable[[float], float]] = None) -> EstimationResult:
    """Estimator statistics at one working point.

    Δp is the ddof=1 spread of S over ``replicas`` experiments of N runs.
    χ comes from S(β+dβ) - S(β-dβ) with common random numbers, evaluated on
    its own ensemble of about ``slope_runs`` runs per arm so that the slope
    noise does not dominate δβ. ``probability`` replaces the ideal
    p(β; θ, α), for instance by a finite-pulse sequence.
    """
    if N < 1 or int(N) != N:
        raise ValidationError("N must be a positive integer")
    if replicas < 2:
        raise ValidationError("need at least two replicas")
    if sweeps < 1:
        raise ValidationError("sweeps must be a positive integer")
    N = int(N)
    prob = probability if probability is not None else (lambda b: ramsey_probability(theta, b, alpha))
    p0 = float(_check_probability(prob(beta)))
    arms = _check_probability([prob(beta + dbeta), prob(beta - dbeta)])

    root = _seed_sequence(model.seed if seed is None else seed)
    rep_ss, slope_ss = root.spawn(2)
    values = np.array([
        _replica_values(p0, model, N, sweeps, np.random.default_rng(ss))[0]
        for ss in rep_ss.spawn(replicas)
    ])
    s_mean = float(values.mean())
    delta_p = float(values.std(ddof=1))
    s_err = delta_p / np.sqrt(replicas)
    dp_err = _sd_stderr(values)

    per_replica = N * sweeps
    total = max(1, -(-int(slope_runs) // per_replica))
    chunks = -(-total // SLOPE_CHUNK)
    diffs = []
    for i, ss in enumerate(slope_ss.spawn(chunks)):
        size = min(SLOPE_CHUNK, total - i * SLOPE_CHUNK)
        diffs.append(_slope_chunk(arms, model, N, sweeps, np.random.default_rng(ss), size))
    diffs = np.concatenate(diffs)
    chi = float(diffs.mean() / (2 * dbeta))
    chi_err = float(diffs.std(ddof=1) / np.sqrt(diffs.size) / (2 * dbeta)) if diffs.size > 1 else 0.0
    if abs(chi) < ZERO_SLOPE:
        raise ZeroSlopeError(f"estimated slope {chi:.3g} is too small at beta={beta:.6g}")

    delta_beta = delta_p / abs(chi)
    db_err = delta_beta * float(np.hypot(dp_err / delta_p if delta_p else 0.0, chi_err / abs(chi)))
    return EstimationResult(s_mean, delta_p, chi, delta_beta, N, int(replicas),
                            float(s_err), dp_err, chi_err, db_err)


@dataclass(frozen=True)
class FringeResult:
    durations: np.ndarray
    betas: np.ndarray
    S_mean: np.ndarray
    delta_p: np.ndarray
    probability: np.ndarray
    offset: float
    amplitude: float
    amplitude_stderr: float
    replicas: int

    @property
    def slope_at_quadrature(self) -> float:
        """∂S/∂β of the fitted a + b·cos β at β = π/2."""
        return -self.amplitude


def ramsey_fringe(theta: float, alpha: float, xi: float, durations: Sequence[float], N: int,
                  model: PhotonModel, seed: Optional[SeedLike] = None,
                  replicas: int = DEFAULT_REPLICAS, pulse: Optional[PulseModel] = None) -> FringeResult:
    """S(β) along a free-evolution time sweep, β = ξT, with a fitted a + b·cos β."""
    durations = np.asarray(durations, dtype=float)
    if durations.size < 3 or np.any(durations < 0):
        raise ValidationError("need at least three non-negative durations")
    if N < 1:
        raise ValidationError("N must be a positive integer")
    probs = np.array([sequence_probability(theta, xi, t, alpha, pulse) for t in durations])
    betas = xi * durations
    root = _seed_sequence(model.seed if seed is None else seed)
    samples = np.array([
        _replica_values(probs, model, int(N), 1, np.random.default_rng(ss))
        for ss in root.spawn(replicas)
    ])
    s_mean = samples.mean(axis=0)
    dp = samples.std(axis=0, ddof=1)
    err = np.maximum(dp / np.sqrt(replicas), 1e-12)
    design = np.column_stack([np.ones_like(betas), np.cos(betas)]) / err[:, None]
    # Replicas reuse their draws across durations, so the points are correlated
    # and the textbook LS covariance is too small. The fit is linear: fit each
    # replica and take the spread of those coefficients instead.
    per_replica = np.linalg.pinv(design) @ (samples / err).T
    coef = per_replica.mean(axis=1)
    amp_err = per_replica[1].std(ddof=1) / np.sqrt(replicas)
    return FringeResult(durations, betas, s_mean, dp, probs, float(coef[0]), float(coef[1]),
                        float(amp_err), int(replicas))


@dataclass(frozen=True)
class NoiseScaling:
    N_grid: np.ndarray
    delta_p: np.ndarray
    delta_p_stderr: np.ndarray
    Delta0: float
    xi0: float
    Delta0_stderr: float
    xi0_stderr: float
    loglog_slope: float

    def model(self, N):
        return self.Delta0 / np.sqrt(np.asarray(N, dtype=float)) + self.xi0


def noise_scaling(theta: float, beta: float, alpha: float, N_grid: Sequence[int], model: PhotonModel,
                  seed: Optional[SeedLike] = None, replicas: int = DEFAULT_REPLICAS) -> NoiseScaling:
    """Δp(N) over ``N_grid`` fitted to Δ₀/√N + ξ₀ (weighted, ξ₀ ≥ 0)."""
    grid = np.asarray(sorted(set(int(n) for n in N_grid)))
    if grid.size < 5 or grid[0] < 1 or grid[-1] < 10 * grid[0]:
        raise ValidationError("N grid needs at least five values spanning a decade")
    p0 = ramsey_probability(theta, beta, alpha)
    root = _seed_sequence(model.seed if seed is None else seed)
    dp, err = [], []
    for n, ss in zip(grid, root.spawn(grid.size)):
        values = np.array([
            _replica_values(p0, model, int(n), 1, np.random.default_rng(child))[0]
            for child in ss.spawn(replicas)
        ])
        dp.append(values.std(ddof=1))
        err.append(_sd_stderr(values))
    dp, err = np.array(dp), np.array(err)
    sigma = np.maximum(err, 1e-3 * dp.max())

    def f(n, d0, x0):
        return d0 / np.sqrt(n) + x0

    try:
        popt, pcov = optimize.curve_fit(f, grid.astype(float), dp, p0=(dp[0], 0.0), sigma=sigma,
                                        absolute_sigma=True, bounds=([0.0, 0.0], [np.inf, np.inf]))
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"noise-scaling fit failed: {exc}", initial_guess=(dp[0], 0.0)) from exc
    d0, x0 = popt
    shot = dp - x0
    if np.any(shot <= 0):
        raise FitError("noise floor exceeds measured spread; cannot take log-log slope",
                       initial_guess=(dp[0], 0.0))
    slope = float(np.polyfit(np.log(grid), np.log(shot), 1)[0])
    perr = np.sqrt(np.clip(np.diag(pcov), 0, None))
    return NoiseScaling(grid, dp, err, float(d0), float(x0), float(perr[0]), float(perr[1]), slope)


@dataclass(frozen=True)
class AuditPoint:
    theta: float
    delta_beta: float
    delta_beta_stderr: float
    F: float
    ratio: float
    ratio_stderr: float
    F_protocol: Optional[float] = None

    @property
    def bound_holds(self) -> bool:
        return self.ratio >= 1.0 - 3.0 * self.ratio_stderr


@dataclass(frozen=True)
class CrbAudit:
    points: tuple
    slope: float
    slope_stderr: float

    @property
    def bound_holds(self) -> bool:
        return all(pt.bound_holds for pt in self.points)


def crb_audit(theta_grid: Sequence[float], model: PhotonModel, seed: Optional[SeedLike] = None,
              replicas: int = DEFAULT_REPLICAS, N: int = 1, slope_runs: int = SLOPE_RUNS,
              protocol_qfi: Optional[Callable[[float], float]] = None) -> CrbAudit:
    """δβ at α = β = π/2 against the QFI sin²θ, plus a fit of δβ vs 1/√F through the origin.

    The fit weights each point by F, which makes the slope the mean of δβ·√F.

    ``protocol_qfi`` (θ -> F) adds the modulation-measured QFI per point for comparison.
    """
    thetas = np.asarray(theta_grid, dtype=float)
    if np.any(np.isclose(np.sin(thetas), 0.0, atol=1e-9)):
        raise ValidationError("theta grid must avoid 0 and π")
    root = _seed_sequence(model.seed if seed is None else seed)
    points = []
    for th, ss in zip(thetas, root.spawn(thetas.size)):
        res = estimate(th, np.pi / 2, np.pi / 2, N, model, ss, replicas, slope_runs=slope_runs)
        F = qfi_single_qubit_analytic(th).value
        ratio = res.delta_beta * np.sqrt(F)
        fp = float(protocol_qfi(th)) if protocol_qfi is not None else None
        points.append(AuditPoint(float(th), res.delta_beta, res.delta_beta_stderr, F, float(ratio),
                                 float(res.delta_beta_stderr * np.sqrt(F)), fp))
    # Weights ∝ F, i.e. equal relative weight per point. Weights built from the
    # sampled stderrs would favour points whose spread happened to come out low.
    ratios = np.array([pt.ratio for pt in points])
    ratio_err = np.array([pt.ratio_stderr for pt in points])
    slope = float(ratios.mean())
    slope_err = float(np.sqrt(np.sum(ratio_err ** 2)) / ratios.size)
    return CrbAudit(tuple(points), slope, slope_err)


@dataclass(frozen=True)
class AlphaPoint:
    alpha: float
    delta_beta: float
    delta_beta_stderr: float
    theory: float


def alpha_sweep(theta: float, beta: float, alpha_grid: Sequence[float], model: PhotonModel,
                seed: Optional[SeedLike] = None, N: int = 1, replicas: int = DEFAULT_REPLICAS,
                slope_runs: int = SLOPE_RUNS, pulse: Optional[PulseModel] = None,
                xi: Optional[float] = None) -> list:
    """δβ as a function of the readout angle α.

    With ``pulse`` the readout rotation is a finite, possibly detuned pulse
    and β is accrued by free evolution at rate ``xi``; ``theory`` is then the
    shot-noise δβ of that non-ideal sequence.
    """
    alphas = np.asarray(alpha_grid, dtype=float)
    if np.any(alphas <= 0) or np.any(alphas >= np.pi):
        raise ValidationError("alpha grid must lie strictly inside (0, π)")
    if pulse is not None and not xi:
        raise ValidationError("finite-pulse mode needs the free-evolution rate xi")
    root = _seed_sequence(model.seed if seed is None else seed)
    out = []
    for al, ss in zip(alphas, root.spawn(alphas.size)):
        if pulse is None:
            prob = None
            pfun = lambda b, al=al: ramsey_probability(theta, b, al)
        else:
            pfun = lambda b, al=al: sequence_probability(theta, xi, b / xi, al, pulse)
            prob = pfun
        res = estimate(theta, beta, al, N, model, ss, replicas, slope_runs=slope_runs, probability=prob)
        p0 = pfun(beta)
        h = 1e-5
        dpdb = (pfun(beta + h) - pfun(beta - h)) / (2 * h)
        theory = float(np.sqrt(p0 * (1 - p0) / N) / abs(dpdb)) if dpdb else float("inf")
        out.append(AlphaPoint(float(al), res.delta_beta, res.delta_beta_stderr, theory))
    return out
