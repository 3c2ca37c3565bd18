"""Latent Gaussian copula sampling and the error-curve experiments.

Provides seeded data generation from the latent model, the two
discretization experiments (equal-mass levels, and collapse-from-16),
the concentration-rate harness, and the Monte-Carlo oracles used by the
test suite.  All randomness flows through a counter-based Philox
generator with one spawned stream per replicate, so replicates are
reproducible and order-independent.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import kendall
from .bridge import BridgeKind, estimate_cutoffs, invert_bridge
from .estimator import ColumnSpec, _recode_ordinal, estimate_latent_correlation
from .normal_dist import std_quantile

__all__ = [
    "CopulaSpec",
    "ErrorCurve",
    "sample_copula",
    "equal_mass_cutoffs",
    "scenario1",
    "scenario2",
    "concentration_check",
    "error_curves_to_text",
    "mc_population_tau_a",
    "mc_tau_b_replicates",
]

R_GRID_CAP = 0.99  # latent correlations must stay inside (-1, 1)
N_BINS = 10


def _rng(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_seq))


@dataclass(frozen=True)
class CopulaSpec:
    """Sampling recipe: latent correlation plus per-column discretization.

    cutoffs[j] is None for a continuous column, else the increasing latent
    thresholds producing codes 0..p-1.
    """

    sigma: np.ndarray
    cutoffs: tuple = ()

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        d = sigma.shape[0]
        if sigma.shape != (d, d) or not np.allclose(sigma, sigma.T):
            raise ValueError("sigma must be a symmetric square matrix")
        if not np.allclose(np.diag(sigma), 1.0):
            raise ValueError("sigma must have a unit diagonal")
        if np.linalg.eigvalsh(sigma)[0] <= 0:
            raise ValueError("sigma must be positive definite")
        object.__setattr__(self, "sigma", sigma)
        cuts = self.cutoffs or (None,) * d
        if len(cuts) != d:
            raise ValueError(f"{len(cuts)} cutoff entries for {d} columns")
        object.__setattr__(
            self,
            "cutoffs",
            tuple(None if c is None else np.asarray(c, dtype=float) for c in cuts),
        )

    @property
    def d(self) -> int:
        return self.sigma.shape[0]

    @property
    def column_specs(self) -> list[ColumnSpec]:
        return [
            ColumnSpec(f"x{j}", None if c is None else c.size + 1)
            for j, c in enumerate(self.cutoffs)
        ]


@dataclass
class ErrorCurve:
    """Binned mean squared error of the latent correlation estimate."""

    p: int
    bin_low: np.ndarray
    bin_high: np.ndarray
    mse: np.ndarray
    reps: int
    label: str = ""


def sample_copula(spec: CopulaSpec, n: int, seed) -> np.ndarray:
    """Draw n rows: latent N(0, sigma), then threshold discretized columns."""
    if n < 1:
        raise ValueError("need n >= 1")
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    z = _sample_latent(spec.sigma, n, _rng(seq))
    return _discretize(z, spec.cutoffs)


def _sample_latent(sigma: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(sigma)
    return rng.standard_normal((n, sigma.shape[0])) @ chol.T


def _discretize(z: np.ndarray, cutoffs) -> np.ndarray:
    x = z.copy()
    for j, cuts in enumerate(cutoffs):
        if cuts is not None:
            x[:, j] = np.digitize(z[:, j], cuts)
    return x


def equal_mass_cutoffs(p: int) -> np.ndarray:
    """Population thresholds Phi^{-1}(l/p), l = 1..p-1 (equal level masses)."""
    if p < 2:
        raise ValueError("need p >= 2 levels")
    return np.array([std_quantile(l / p) for l in range(1, p)])


def _default_r_grid() -> np.ndarray:
    grid = np.round(np.arange(0.0, 1.0 + 1e-9, 0.01), 2)
    return grid[grid <= R_GRID_CAP]


def _estimate_pair(codes: np.ndarray, cont: np.ndarray) -> float:
    """Invert the p-level bridge for one discretized/continuous pair.

    A replicate whose discretized column collapses to a single observed
    level carries no rank information; its estimate is 0 (the all-ties
    tau maps to 0).
    """
    recoded, p_eff = _recode_ordinal(codes)
    if p_eff < 2:
        return 0.0
    cuts = estimate_cutoffs(recoded, p_eff)
    tau = kendall.tau_a(recoded, cont)
    res = invert_bridge(tau, BridgeKind.ordinal_continuous(p_eff), cuts, None)
    return res.r


def _run_discretization_experiment(p_values, r_grid, n, reps, seed, collapse_from=None):
    """Shared harness for both discretization protocols.

    For every (r, replicate) one latent bivariate sample is drawn and
    reused across all p values and the continuous baseline, so curves for
    different p are directly comparable and the uncollapsed p=16 curve is
    identical across protocols under the same seed.
    """
    p_values = sorted(set(int(p) for p in p_values))
    if any(p < 2 or p > 16 for p in p_values):
        raise ValueError("level counts must lie in 2..16")
    r_grid = _default_r_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    if np.any(r_grid < 0) or np.any(r_grid > R_GRID_CAP):
        raise ValueError(f"r grid must lie in [0, {R_GRID_CAP}]")

    root = np.random.SeedSequence(seed)
    children = root.spawn(r_grid.size * reps)
    pop_cuts = {p: equal_mass_cutoffs(p) for p in p_values}
    base_cuts = equal_mass_cutoffs(16) if collapse_from else None

    sq_err = {p: np.zeros(r_grid.size) for p in p_values}
    sq_err_base = np.zeros(r_grid.size)
    for i, r in enumerate(r_grid):
        sigma = np.array([[1.0, r], [r, 1.0]])
        chol = np.linalg.cholesky(sigma)
        for rep in range(reps):
            rng = _rng(children[i * reps + rep])
            z = rng.standard_normal((n, 2)) @ chol.T
            tau_c = kendall.tau_a(z[:, 0], z[:, 1])
            r_base = float(invert_bridge(tau_c, BridgeKind.continuous_continuous()))
            sq_err_base[i] += (r_base - r) ** 2
            if collapse_from:
                codes16 = np.digitize(z[:, 0], base_cuts).astype(float)
            for p in p_values:
                if collapse_from:
                    codes = np.minimum(codes16, p - 1)
                else:
                    codes = np.digitize(z[:, 0], pop_cuts[p]).astype(float)
                r_hat = _estimate_pair(codes, z[:, 1])
                sq_err[p][i] += (r_hat - r) ** 2

    bins = np.linspace(0.0, 1.0, N_BINS + 1)
    which = np.clip(np.digitize(r_grid, bins) - 1, 0, N_BINS - 1)
    counts = np.bincount(which, minlength=N_BINS).astype(float)
    counts[counts == 0] = np.nan

    def _curve(total, p, label):
        per_r = total / reps
        binned = np.bincount(which, weights=per_r, minlength=N_BINS) / counts
        return ErrorCurve(
            p=p, bin_low=bins[:-1].copy(), bin_high=bins[1:].copy(),
            mse=binned, reps=reps, label=label,
        )

    tag = "collapsed" if collapse_from else "equal_mass"
    curves = [_curve(sq_err[p], p, tag) for p in p_values]
    curves.append(_curve(sq_err_base, 0, "continuous_baseline"))
    return curves


def scenario1(p_values=range(2, 17), r_grid=None, n=100, reps=80, seed=0):
    """Equal-mass discretization: cutoffs Phi^{-1}(l/p) for each p.

    Returns one ErrorCurve per p plus the continuous-data baseline
    (labelled p=0).
    """
    return _run_discretization_experiment(p_values, r_grid, n, reps, seed)


def scenario2(p_values=range(2, 17), r_grid=None, n=100, reps=80, seed=0):
    """Collapse-from-16: discretize at 16 equal-mass levels, then merge the
    highest levels down until p remain.  The p=16 curve is identical to
    the equal-mass protocol under the same seed."""
    return _run_discretization_experiment(
        p_values, r_grid, n, reps, seed, collapse_from=16
    )


def concentration_check(
    d=10, p=3, n_grid=(250, 500, 1000, 2000, 4000), seed=0, n_seeds=20
):
    """Sup-norm error of the estimated latent correlation matrix vs n.

    Half the columns are p-level ordinal (equal-mass cutoffs), half
    continuous; the latent correlation is AR(1) with parameter 0.5.
    Returns (n_grid array, mean sup-error per n, fitted log-log slope).
    """
    n_grid = np.asarray(sorted(n_grid), dtype=int)
    sigma = 0.5 ** np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
    cuts = equal_mass_cutoffs(p)
    cutoffs = tuple(cuts if j < d // 2 else None for j in range(d))
    spec = CopulaSpec(sigma, cutoffs)
    specs = spec.column_specs

    root = np.random.SeedSequence(seed)
    children = root.spawn(n_seeds * n_grid.size)
    sup_err = np.zeros((n_seeds, n_grid.size))
    for s in range(n_seeds):
        for i, n in enumerate(n_grid):
            x = sample_copula(spec, int(n), children[s * n_grid.size + i])
            est = estimate_latent_correlation(x, specs)
            sup_err[s, i] = np.abs(est.values - sigma).max()
    mean_err = sup_err.mean(axis=0)
    slope = np.polyfit(np.log(n_grid), np.log(mean_err), 1)[0]
    return n_grid, mean_err, float(slope)


def error_curves_to_text(curves) -> str:
    """Tab-delimited table with columns p, bin_low, bin_high, mse, reps."""
    buf = io.StringIO()
    buf.write("p\tbin_low\tbin_high\tmse\treps\n")
    for curve in curves:
        for lo, hi, mse in zip(curve.bin_low, curve.bin_high, curve.mse):
            buf.write(f"{curve.p}\t{lo:.1f}\t{hi:.1f}\t{mse:.12e}\t{curve.reps}\n")
    return buf.getvalue()


def mc_population_tau_a(r, cutoffs_j=None, cutoffs_k=None, n_draws=10**6, seed=0):
    """Monte-Carlo population tau-a: mean sign product over independent
    observation pairs.  Returns (estimate, standard_error)."""
    seq = np.random.SeedSequence(seed)
    rng = _rng(seq)
    sigma = np.array([[1.0, r], [r, 1.0]])
    chol = np.linalg.cholesky(sigma)
    z1 = rng.standard_normal((n_draws, 2)) @ chol.T
    z2 = rng.standard_normal((n_draws, 2)) @ chol.T
    x1 = _discretize(z1, (cutoffs_j, cutoffs_k))
    x2 = _discretize(z2, (cutoffs_j, cutoffs_k))
    signs = np.sign(x1[:, 0] - x2[:, 0]) * np.sign(x1[:, 1] - x2[:, 1])
    return float(signs.mean()), float(signs.std(ddof=1) / np.sqrt(n_draws))


def mc_tau_b_replicates(r, cutoffs_j, cutoffs_k=None, n=84, reps=10**4, seed=0):
    """Replicate means of the tie-corrected tau on samples of size n.

    Degenerate replicates (a side with a single observed level) are
    excluded.  Returns (mean, standard_error_of_mean).
    """
    root = np.random.SeedSequence(seed)
    children = root.spawn(reps)
    sigma = np.array([[1.0, r], [r, 1.0]])
    chol = np.linalg.cholesky(sigma)
    vals = []
    for k in range(reps):
        rng = _rng(children[k])
        z = rng.standard_normal((n, 2)) @ chol.T
        x = _discretize(z, (cutoffs_j, cutoffs_k))
        try:
            vals.append(kendall.tau_b(x[:, 0], x[:, 1]).tau_b)
        except kendall.DegenerateColumnError:
            continue
    vals = np.asarray(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(vals.size))
