"""Monte-Carlo measurement simulation and estimator benchmarking.

The central statistic is the units- and bias-corrected deviation

    deltaX = X_est / |d<X_est>/dX| - X,

whose second moment obeys ``<(deltaX)^2> >= 1/(N F) >= 1/(N QFI)``.  This
module samples outcome records, applies sample-mean or maximum-likelihood
estimators, forms the deviation moment, and audits the inequality chain with
Monte-Carlo tolerances.

Reproducibility: per-trial streams are seeded as ``seed XOR splitmix64(t)``,
so results do not depend on scheduling or trial order.  Moment reductions
use numpy's pairwise summation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import variance
from .metric import qfi_unitary
from .povm import classical_fisher, outcome_distribution

__all__ = [
    "Dataset",
    "EstimationReport",
    "BoundVerdict",
    "sample_outcomes",
    "sample_mean_estimate",
    "mle_estimate",
    "deviation_moment",
    "bound_audit",
    "splitmix64",
    "trial_seed",
    "SLOPE_DIVERGENCE_TOL",
    "CSV_COLUMNS",
]

SLOPE_DIVERGENCE_TOL = 1e-6

CSV_COLUMNS = [
    "scenario",
    "seed",
    "N",
    "trials",
    "mse",
    "slope",
    "fisher",
    "qfi",
    "ratio_classical",
    "ratio_quantum",
]


def splitmix64(x):
    """SplitMix64 mix function (64-bit avalanche)."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def trial_seed(seed, trial_index):
    """Independent per-trial seed; stable under reordering and parallelism."""
    return (int(seed) ^ splitmix64(trial_index)) & 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class Dataset:
    """One measurement record: N outcome labels drawn at parameter X."""

    outcomes: np.ndarray
    indices: np.ndarray
    true_parameter: float
    seed: int

    @property
    def n(self):
        return len(self.outcomes)


def sample_outcomes(povm, family, x, n, seed):
    """Draw N i.i.d. outcomes from ``p(.|X)`` by inverse CDF on the grid."""
    pov = povm.to_discrete() if hasattr(povm, "to_discrete") else povm
    p = outcome_distribution(pov, family.state_at(x))
    cdf = np.cumsum(p)
    cdf[-1] = 1.0  # guard against round-off shortfall at the top
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(p) - 1)
    labels = pov.outcome_labels[idx]
    return Dataset(outcomes=labels, indices=idx, true_parameter=float(x), seed=int(seed))


def sample_mean_estimate(data, bias=0.0, period=None):
    """Sample mean of the data with the global bias removed.

    For periodic parameters (``period`` given) the circular mean
    ``arg sum_i e^{i 2 pi (x_i - bias)/period}`` is used, rescaled back to
    parameter units.
    """
    x = data.outcomes if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if len(x) < 1:
        raise ValueError("need at least one outcome")
    if period is None:
        return float(np.mean(x - bias))
    angles = (x - bias) * (2.0 * np.pi / period)
    resultant = np.sum(np.exp(1j * angles))
    if abs(resultant) < 1e-12 * len(x):
        # perfectly balanced data: the circular mean is undefined; pick 0
        return 0.0
    return float(np.angle(resultant) * period / (2.0 * np.pi))


def _log_likelihood_grid(counts, povm, family, xs, p_floor=1e-300):
    pov = povm.to_discrete() if hasattr(povm, "to_discrete") else povm
    logp = np.empty((len(xs), pov.n_outcomes))
    for i, x in enumerate(xs):
        p = outcome_distribution(pov, family.state_at(x))
        logp[i] = np.log(np.clip(p, p_floor, None))
    return counts @ logp.T  # (n_trials, n_gridpoints)


def mle_estimate(data, povm, family, search_window, coarse_points=64, rel_tol=1e-8):
    """Maximum-likelihood estimate over the search window.

    The log likelihood ``sum_i log p(xi_i|X)`` is scanned on a coarse grid
    and refined by golden-section search down to ``rel_tol`` times the
    window length.  Ties break toward the window midpoint.

    Raises
    ------
    ValueError
        If the likelihood is flat over the window ("parameter not
        identifiable").
    """
    pov = povm.to_discrete() if hasattr(povm, "to_discrete") else povm
    counts = np.bincount(data.indices, minlength=pov.n_outcomes)[None, :].astype(float)
    estimates = _mle_batch(counts, povm, family, search_window, coarse_points, rel_tol)
    return float(estimates[0])


def _mle_batch(counts, povm, family, search_window, coarse_points=64, rel_tol=1e-8):
    """Vectorized MLE for a (n_trials, n_outcomes) count matrix."""
    lo, hi = search_window
    if hi <= lo:
        raise ValueError("search window must have positive length")
    width = hi - lo
    xs = np.linspace(lo, hi, coarse_points)
    ll = _log_likelihood_grid(counts, povm, family, xs)

    spread = ll.max(axis=1) - ll.min(axis=1)
    flat = spread <= 1e-10 * np.maximum(1.0, np.abs(ll).max(axis=1))
    if np.any(flat):
        raise ValueError(
            "parameter not identifiable: likelihood is flat over the window"
        )

    # tie-break toward the window midpoint
    mid = 0.5 * (lo + hi)
    best = ll.max(axis=1, keepdims=True)
    is_best = ll >= best - 1e-12 * np.maximum(1.0, np.abs(best))
    dist_mid = np.where(is_best, np.abs(xs[None, :] - mid), np.inf)
    peak = np.argmin(dist_mid, axis=1)

    dx = xs[1] - xs[0]
    a = np.clip(xs[peak] - dx, lo, hi)
    b = np.clip(xs[peak] + dx, lo, hi)
    return _golden_batch(counts, povm, family, a, b, rel_tol * width)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _batched_loglik(counts, povm, family, xvec):
    """Log-likelihood of each trial's counts at that trial's parameter value.

    Pure unitary families with rank-one POVMs get a fully vectorized path
    (one matmul across trials); everything else falls back to a per-value
    loop.
    """
    pov = povm.to_discrete() if hasattr(povm, "to_discrete") else povm
    xvec = np.asarray(xvec, dtype=float)
    if pov.vectors is not None and family.is_pure:
        eig = family.generator_eig
        lam, v = eig.eigenvalues, eig.eigenvectors
        amps = v.conj().T @ family.fiducial.amplitudes
        phases = np.exp(-1j * np.outer(xvec, lam))  # (T, n)
        states = (phases * amps) @ v.T  # (T, d)
        p = np.abs(states @ pov.vectors.conj().T) ** 2 * pov.weights
        logp = np.log(np.clip(p, 1e-300, None))
        return np.einsum("tk,tk->t", counts, logp)
    out = np.empty(len(xvec))
    for t, x in enumerate(xvec):
        p = outcome_distribution(pov, family.state_at(x))
        out[t] = counts[t] @ np.log(np.clip(p, 1e-300, None))
    return out


def _golden_batch(counts, povm, family, a, b, abs_tol):
    """Golden-section maximization, one bracket per trial, in lockstep."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = _batched_loglik(counts, povm, family, c)
    fd = _batched_loglik(counts, povm, family, d)
    while np.max(b - a) > abs_tol:
        left = fc >= fd  # keep [a, d] when the left interior point wins
        a = np.where(left, a, c)
        b = np.where(left, d, b)
        c = b - _INV_PHI * (b - a)
        d = a + _INV_PHI * (b - a)
        # per branch one interior point is inherited, the other is fresh
        fresh = np.where(left, c, d)
        f_fresh = _batched_loglik(counts, povm, family, fresh)
        fc, fd = np.where(left, f_fresh, fd), np.where(left, fc, f_fresh)
    return (a + b) / 2.0


@dataclass
class EstimationReport:
    """Summary of a Monte-Carlo estimation run and its bound ratios."""

    scenario: str
    estimator: str
    trials: int
    n: int
    mse: float
    slope: float
    fisher: float
    qfi: float
    seed: int
    diverged: bool = False
    generator_variance: float = math.nan
    extras: dict = field(default_factory=dict)

    @property
    def bound_ratio_classical(self):
        return self.mse * self.n * self.fisher

    @property
    def bound_ratio_quantum(self):
        return self.mse * self.n * self.qfi

    def to_json(self):
        payload = {
            "schema": 1,
            "scenario": self.scenario,
            "estimator": self.estimator,
            "trials": self.trials,
            "N": self.n,
            "mse": self.mse,
            "slope": self.slope,
            "fisher": self.fisher,
            "qfi": self.qfi,
            "seed": self.seed,
            "diverged": self.diverged,
            "generator_variance": self.generator_variance,
            "ratio_classical": self.bound_ratio_classical,
            "ratio_quantum": self.bound_ratio_quantum,
            "extras": self.extras,
        }
        return json.dumps(payload, indent=2, default=float)

    def csv_header(self):
        return CSV_COLUMNS + sorted(self.extras)

    def to_csv_row(self):
        base = [
            self.scenario,
            self.seed,
            self.n,
            self.trials,
            repr(self.mse),
            repr(self.slope),
            repr(self.fisher),
            repr(self.qfi),
            repr(self.bound_ratio_classical),
            repr(self.bound_ratio_quantum),
        ]
        return base + [repr(float(self.extras[k])) for k in sorted(self.extras)]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.csv_header())
        writer.writerow(self.to_csv_row())
        return buf.getvalue()


def _wrap_delta(delta, period):
    if period is None:
        return delta
    return (delta + period / 2.0) % period - period / 2.0


def _population_mean_sample_mean(povm, family, x, bias, period):
    """Exact <X_est>_X for the (circular) sample-mean estimator.

    The sample mean is linear in the outcomes, so its expectation is the
    distribution mean; the circular variant uses the resultant direction,
    which is where the circular sample mean concentrates.  Returns None when
    the direction is undefined (zero resultant).
    """
    pov = povm.to_discrete() if hasattr(povm, "to_discrete") else povm
    p = outcome_distribution(pov, family.state_at(x))
    labels = pov.outcome_labels
    if period is None:
        return float(np.sum(p * (labels - bias)))
    angles = (labels - bias) * (2.0 * np.pi / period)
    resultant = np.sum(p * np.exp(1j * angles))
    if abs(resultant) < 1e-12:
        return None
    return float(np.angle(resultant) * period / (2.0 * np.pi))


def deviation_moment(
    povm,
    family,
    x,
    n,
    trials,
    estimator="sample_mean",
    slope_step=None,
    seed=0,
    bias=0.0,
    search_window=None,
    scenario="custom",
    fisher_step=None,
    coarse_points=64,
):
    """Monte-Carlo second moment of the deviation ``deltaX``.

    The estimator slope ``d<X_est>/dX`` is computed by central differences
    at ``x +- slope_step``; for the sample-mean estimator the expectation is
    evaluated exactly from the outcome distribution, for the MLE it is a
    Monte-Carlo average with independent sub-seeded trials.  If the slope
    magnitude falls below 1e-6 the report carries a divergence flag instead
    of a number (an estimator that does not respond to the parameter has
    unbounded deviation).
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    period = getattr(povm, "period", None)
    window = period if period is not None else 1.0
    if slope_step is None:
        slope_step = 1e-3 * window
    if fisher_step is None:
        fisher_step = 1e-5 * window / (2.0 * np.pi)
    if search_window is None and period is not None:
        search_window = (-period / 2.0, period / 2.0)

    fisher = classical_fisher(povm, family, x0=x, step=fisher_step)
    qfi = qfi_unitary(family)
    gen_var = variance(family.generator, family.fiducial)

    if estimator == "sample_mean":
        def mean_at(xx, sub):
            return _population_mean_sample_mean(povm, family, xx, bias, period)
    elif estimator == "mle":
        def mean_at(xx, sub):
            return _mc_mean_mle(
                povm, family, xx, n, trials, trial_seed(seed, sub), search_window,
                period, coarse_points
            )
    else:
        raise ValueError(f"unknown estimator {estimator!r}")

    m_plus = mean_at(x + slope_step, 10**9 + 1)
    m_minus = mean_at(x - slope_step, 10**9 + 2)
    if m_plus is None or m_minus is None:
        slope = 0.0
    else:
        slope = _wrap_delta(m_plus - m_minus, period) / (2.0 * slope_step)

    report = EstimationReport(
        scenario=scenario,
        estimator=estimator,
        trials=trials,
        n=n,
        mse=math.nan,
        slope=float(slope),
        fisher=fisher,
        qfi=qfi,
        seed=int(seed),
        generator_variance=gen_var,
    )
    if abs(slope) < SLOPE_DIVERGENCE_TOL:
        report.diverged = True
        return report

    estimates = _run_trials(
        povm, family, x, n, trials, seed, estimator, bias, search_window, period,
        coarse_points
    )
    delta = _wrap_delta(estimates / abs(slope) - x, period)
    report.mse = float(np.mean(delta**2))
    return report


def _run_trials(povm, family, x, n, trials, seed, estimator, bias, search_window,
                period, coarse_points=64):
    if estimator == "sample_mean":
        out = np.empty(trials)
        for t in range(trials):
            data = sample_outcomes(povm, family, x, n, trial_seed(seed, t))
            out[t] = sample_mean_estimate(data, bias=bias, period=period)
        return out
    # MLE: sample all trials, then run the batched optimizer
    pov = povm.to_discrete() if hasattr(povm, "to_discrete") else povm
    counts = np.zeros((trials, pov.n_outcomes))
    for t in range(trials):
        data = sample_outcomes(povm, family, x, n, trial_seed(seed, t))
        counts[t] = np.bincount(data.indices, minlength=pov.n_outcomes)
    return _mle_batch(counts, povm, family, search_window, coarse_points)


def _mc_mean_mle(povm, family, x, n, trials, seed, search_window, period,
                 coarse_points=64):
    estimates = _run_trials(povm, family, x, n, trials, seed, "mle", 0.0,
                            search_window, period, coarse_points)
    if period is None:
        return float(np.mean(estimates))
    angles = estimates * (2.0 * np.pi / period)
    resultant = np.mean(np.exp(1j * angles))
    if abs(resultant) < 1e-12:
        return None
    return float(np.angle(resultant) * period / (2.0 * np.pi))


@dataclass(frozen=True)
class BoundVerdict:
    """Outcome of auditing the estimation bounds on a report."""

    classical_ok: bool
    quantum_ok: bool
    generator_ok: bool
    ratio_classical: float
    ratio_quantum: float
    generator_product: float
    tolerance: float
    diverged: bool

    @property
    def passed(self):
        return self.diverged or (self.classical_ok and self.quantum_ok and self.generator_ok)

    def failures(self):
        if self.diverged or self.passed:
            return []
        out = []
        if not self.classical_ok:
            out.append("mse * N * F >= 1")
        if not self.quantum_ok:
            out.append("mse * N * QFI >= 1")
        if not self.generator_ok:
            out.append("mse * var(h) * 4N >= 1")
        return out


def bound_audit(report, tolerance=None):
    """Audit the estimation inequality chain with Monte-Carlo tolerance.

    Checks ``mse >= 1/(N F)``, ``mse >= 1/(N QFI)`` and the generator form
    ``mse * var(h) >= 1/(4N)``, each up to a relative tolerance of
    ``3/sqrt(trials)``.  A diverged report passes vacuously (the deviation
    is unbounded, so every lower bound holds).
    """
    if tolerance is None:
        tolerance = 3.0 / math.sqrt(report.trials)
    if report.diverged:
        return BoundVerdict(
            classical_ok=True,
            quantum_ok=True,
            generator_ok=True,
            ratio_classical=math.inf,
            ratio_quantum=math.inf,
            generator_product=math.inf,
            tolerance=tolerance,
            diverged=True,
        )
    rc = report.bound_ratio_classical
    rq = report.bound_ratio_quantum
    gp = report.mse * report.generator_variance * 4.0 * report.n
    return BoundVerdict(
        classical_ok=rc >= 1.0 - tolerance,
        quantum_ok=rq >= 1.0 - tolerance,
        generator_ok=(math.isnan(gp) or gp >= 1.0 - tolerance),
        ratio_classical=rc,
        ratio_quantum=rq,
        generator_product=gp,
        tolerance=tolerance,
        diverged=False,
    )
