"""Synthetic populations and repeated end-to-end experiments.

An experiment fixes a two-group population, applies a mechanism
``runs`` times (every run and every client drawing from an independent
counter-based substream of the seed), estimates the gap with the true
sizes each time, and compares the empirical moments of the estimator
with the closed-form theory.

Error statistics use the signed difference of the two group-mean
estimates, the regime in which the gap estimator is exactly unbiased;
the unsigned gap folds crossing estimates over and would bias the
comparison when the noise is large against the true gap.

Performance metrics native to [0, 1] (accuracy, TPR, FPR) are mapped
to [-1, 1] via v = 2u - 1 before perturbation and mapped back for
reporting; generators apply this when ``rescale`` is set.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, replace

import numpy as np

from ldpgap import analytics, backends
from ldpgap.errors import DomainError
from ldpgap.estimation import estimation_factor
from ldpgap.mechanisms import MechanismSpec, kernel_params
from ldpgap.rng import TAG_GENERATE, TAG_PERTURB, derive_seed

GENERATOR_MODES = ("two_point", "resample", "constant")


@dataclass(frozen=True)
class GeneratorSpec:
    """How to synthesize the two groups' performance values.

    two_point: each group takes values mean +- sqrt(nu2 - mean^2),
    split deterministically half/half so the realized mean and second
    moment are exact for even n. resample: draw with replacement from
    per-group seed observations (inline values or a CSV file with
    header group,value). constant: repeat a fixed value.
    """

    mode: str
    sizes: tuple
    means: tuple | None = None
    nu2s: tuple | None = None
    values: tuple | None = None
    seed_values: tuple | None = None
    seed_file: str | None = None
    rescale: bool = False

    def __post_init__(self):
        if self.mode not in GENERATOR_MODES:
            raise DomainError(f"mode must be one of {GENERATOR_MODES}")
        if len(self.sizes) != 2 or any(n <= 0 for n in self.sizes):
            raise DomainError("sizes must be two positive integers")
        if self.mode == "two_point":
            if self.means is None or self.nu2s is None:
                raise DomainError("two_point needs means and nu2s")
            if len(self.means) != 2 or len(self.nu2s) != 2:
                raise DomainError("two_point needs one mean and nu2 per group")
            for mean, nu2 in zip(self.means, self.nu2s):
                _two_point_support(self._map(mean), self._map_nu2(mean, nu2))
        if self.mode == "constant":
            if self.values is None or len(self.values) != 2:
                raise DomainError("constant needs one value per group")
            for value in self.values:
                if not -1.0 <= self._map(value) <= 1.0:
                    raise DomainError(f"constant value {value} outside the domain")
        if self.mode == "resample" and self.seed_values is None and not self.seed_file:
            raise DomainError("resample needs seed_values or seed_file")

    def _map(self, u):
        return 2.0 * float(u) - 1.0 if self.rescale else float(u)

    def _map_nu2(self, mean_raw, nu2_raw):
        """Second moment in the mechanism domain.

        With rescale, both mean and nu2 are given in [0, 1] units and
        E[(2U - 1)^2] = 4 nu2 - 4 mean + 1.
        """
        if self.rescale:
            return 4.0 * float(nu2_raw) - 4.0 * float(mean_raw) + 1.0
        return float(nu2_raw)


@dataclass(frozen=True)
class Population:
    """Realized client records as parallel arrays (group i spans a
    contiguous index range, group 0 first)."""

    groups: np.ndarray
    values: np.ndarray

    @property
    def sizes(self):
        return (
            int(np.count_nonzero(self.groups == 0)),
            int(np.count_nonzero(self.groups == 1)),
        )

    def group_values(self, g):
        return self.values[self.groups == g]

    def means(self):
        return tuple(float(self.group_values(g).mean()) for g in (0, 1))

    def nu2s(self):
        return tuple(float((self.group_values(g) ** 2).mean()) for g in (0, 1))


def _load_seed_file(path):
    per_group = {0: [], 1: []}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["group", "value"]:
            raise DomainError(f"seed file {path} must have header group,value")
        for row in reader:
            per_group.setdefault(int(row[0]), []).append(float(row[1]))
    if not per_group[0] or not per_group[1]:
        raise DomainError(f"seed file {path} must cover both groups 0 and 1")
    return (per_group[0], per_group[1])


def _two_point_support(mean, nu2):
    """(lo, hi) support points of a feasible two-point distribution."""
    spread2 = nu2 - mean * mean
    if spread2 < -1e-12:
        raise DomainError(f"infeasible pair: nu2={nu2} < mean^2={mean * mean:.6g}")
    spread = math.sqrt(max(spread2, 0.0))
    if abs(mean) + spread > 1.0 + 1e-12:
        raise DomainError(f"two-point support {mean}+-{spread:.6g} leaves [-1, 1]")
    return max(mean - spread, -1.0), min(mean + spread, 1.0)


def _two_point_values(n, mean, nu2):
    lo, hi = _two_point_support(mean, nu2)
    n_hi = (n + 1) // 2
    out = np.empty(n, dtype=np.float64)
    out[:n_hi] = hi
    out[n_hi:] = lo
    return out


def generate(spec: GeneratorSpec, seed):
    """Realize a population from a generator spec and a seed.

    Only resample consumes randomness (one counter block per client,
    under the generation tag of the seed).
    """
    kern = backends.active()
    sizes = tuple(int(n) for n in spec.sizes)
    chunks = []
    if spec.mode == "two_point":
        for n, mean, nu2 in zip(sizes, spec.means, spec.nu2s):
            chunks.append(
                _two_point_values(n, spec._map(mean), spec._map_nu2(mean, nu2))
            )
    elif spec.mode == "constant":
        for n, value in zip(sizes, spec.values):
            v = spec._map(value)
            if not -1.0 <= v <= 1.0:
                raise DomainError(f"constant value {v} outside [-1, 1]")
            chunks.append(np.full(n, v, dtype=np.float64))
    else:
        seeds = spec.seed_values
        if seeds is None:
            seeds = _load_seed_file(spec.seed_file)
        offset = 0
        for n, obs in zip(sizes, seeds):
            obs = np.asarray([spec._map(v) for v in obs], dtype=np.float64)
            if obs.size == 0:
                raise DomainError("empty seed observation set")
            if np.any(np.abs(obs) > 1.0 + 1e-12):
                raise DomainError("seed observations must lie in [-1, 1]")
            idx = kern.resample_indices(len(obs), n, seed, TAG_GENERATE, offset)
            chunks.append(obs[idx])
            offset += n
    groups = np.repeat(np.arange(2, dtype=np.int64), sizes)
    return Population(groups=groups, values=np.concatenate(chunks))


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorSpec
    mechanism: MechanismSpec
    runs: int
    seed: int
    keep_estimates: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise DomainError(f"runs must be >= 1, got {self.runs}")
        if self.mechanism.d != 2:
            raise DomainError("experiments are defined for binary groups (d=2)")


@dataclass
class ExperimentResult:
    """Empirical moments of the signed gap estimator over the runs,
    next to the closed-form point MSE at the population's exact nu2."""

    true_gap: float
    true_diff: float
    empirical_mse: float
    empirical_bias: float
    empirical_group_cov: float
    empirical_group_vars: tuple
    theoretical_mse: float
    mean_abs_error: float
    abs_error_sd: float
    runs: int
    sizes: tuple
    means: tuple
    nu2s: tuple
    estimates: np.ndarray | None = None
    group_estimates: np.ndarray | None = None


def _run_sums(pop: Population, mech: MechanismSpec, seed, runs, threads):
    """Per-run group counts and sums; deterministic for any thread count
    because runs are split by index and every (run, client) substream
    is fixed by the counter layout."""
    kern = backends.active()
    a, extra = kernel_params(mech)
    counts = np.zeros((runs, 2), dtype=np.int64)
    sums = np.zeros((runs, 2), dtype=np.float64)

    def work(lo, hi):
        if extra[0] == "r":
            c, s = kern.run_sums_r(
                pop.groups, pop.values, mech.d, a, extra[1], seed, TAG_PERTURB, lo,
                hi - lo,
            )
        else:
            sk, sf = extra[1]
            c, s = kern.run_sums_l(
                pop.groups, pop.values, mech.d, a, sk, sf, seed, TAG_PERTURB, lo,
                hi - lo,
            )
        counts[lo:hi] = c
        sums[lo:hi] = s

    nthreads = backends.resolve_threads(threads)
    if nthreads == 1 or runs < 2 * nthreads:
        work(0, runs)
    else:
        bounds = np.linspace(0, runs, nthreads + 1).astype(int)
        workers = [
            threading.Thread(target=work, args=(int(lo), int(hi)))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for t in workers:
            t.start()
        for t in workers:
            t.join()
    return counts, sums


def run_experiment(cfg: ExperimentConfig, threads=None):
    """Run the full pipeline and aggregate empirical error statistics.

    Bit-reproducible for a fixed config regardless of thread count.
    """
    pop = generate(cfg.generator, cfg.seed)
    sizes = pop.sizes
    if min(sizes) == 0:
        raise DomainError("population must contain both groups")
    means = pop.means()
    nu2s = pop.nu2s()
    true_diff = means[0] - means[1]

    _, sums = _run_sums(pop, cfg.mechanism, cfg.seed, cfg.runs, threads)
    est0 = sums[:, 0] / estimation_factor(cfg.mechanism, sizes[0])
    est1 = sums[:, 1] / estimation_factor(cfg.mechanism, sizes[1])
    diffs = est0 - est1
    err = diffs - true_diff

    profile_a = analytics.GroupProfile(n=sizes[0], nu2=nu2s[0], mean=means[0])
    profile_b = analytics.GroupProfile(n=sizes[1], nu2=nu2s[1], mean=means[1])
    pop_profile = analytics.PopulationProfile(profile_a, profile_b)
    theoretical = analytics.mse_gap(pop_profile, cfg.mechanism).point

    cov = float(np.mean(est0 * est1) - np.mean(est0) * np.mean(est1))
    return ExperimentResult(
        true_gap=abs(true_diff),
        true_diff=true_diff,
        empirical_mse=float(np.mean(err**2)),
        empirical_bias=float(np.mean(err)),
        empirical_group_cov=cov,
        empirical_group_vars=(
            float(np.var(est0)),
            float(np.var(est1)),
        ),
        theoretical_mse=theoretical,
        mean_abs_error=float(np.mean(np.abs(err))),
        abs_error_sd=float(np.std(np.abs(err))),
        runs=cfg.runs,
        sizes=sizes,
        means=means,
        nu2s=nu2s,
        estimates=diffs if cfg.keep_estimates else None,
        group_estimates=np.stack([est0, est1], axis=1)
        if cfg.keep_estimates
        else None,
    )


def chebyshev_comparison(cfg: ExperimentConfig, eps_list, prob=0.99, threads=None):
    """Empirical mean absolute error vs the Chebyshev bound alpha, per
    total budget, at the mechanism's optimal allocation.

    Each row runs the experiment under a sub-seed derived from
    (cfg.seed, row index) so rows are statistically independent while
    the whole table stays reproducible.
    """
    kind = "r" if cfg.mechanism.kind == "r" else "l-opt"
    rows = []
    for i, eps in enumerate(eps_list):
        mech = analytics.mechanism_for(kind, eps, d=cfg.mechanism.d)
        sub = replace(cfg, mechanism=mech, seed=derive_seed(cfg.seed, i))
        result = run_experiment(sub, threads=threads)
        nu2 = analytics.worst_nu2(mech.kind)
        worst = analytics.PopulationProfile(
            analytics.GroupProfile(n=result.sizes[0], nu2=nu2),
            analytics.GroupProfile(n=result.sizes[1], nu2=nu2),
        )
        alpha = analytics.chebyshev_alpha(
            analytics.mse_gap(worst, mech).point, prob
        )
        rows.append(
            {
                "eps": eps,
                "mean_abs_error": result.mean_abs_error,
                "abs_error_sd": result.abs_error_sd,
                "alpha": alpha,
            }
        )
    return rows
