"""Closed-form error analysis and privacy-budget optimization.

Everything here is derived for binary groups. Per-group estimator
variances (exact, as functions of the group's second moment nu2 =
mean of squared values), the gap MSE (the sum of the two group
variances, since the group estimators' errors are uncorrelated), the
budget allocations that minimize MSE at a total privacy level, the
Chebyshev error bound, and the bisection solver for the minimum budget
meeting a target error.

The variance of the Laplace mechanism's estimator grows with nu2 while
the discretizing mechanism's shrinks with it, so worst cases sit at
nu2 = 1 and nu2 = 0 respectively.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from ldpgap.errors import (
    DegenerateBudgetError,
    DomainError,
    MissingMeanError,
    NonMonotonicObjectiveError,
)
from ldpgap.mechanisms import Budget, MechanismSpec, grr_keep_prob

ALLOC_KINDS = ("r", "l-k2", "l-opt")

# knee of the optimal Laplace allocation: below it the flipped-client
# scale parameter is pinned at its smallest admissible value 2/3
_KNEE = 2.0 / 3.0


@dataclass(frozen=True)
class GroupProfile:
    """A group's size, second moment nu2 in [0, 1], and (optionally)
    its mean, which is only needed for misestimated-size analysis."""

    n: int
    nu2: float
    mean: float | None = None

    def __post_init__(self):
        if self.n <= 0:
            raise DomainError(f"group size must be positive, got {self.n}")
        if not 0.0 <= self.nu2 <= 1.0:
            raise DomainError(f"nu2 must be in [0, 1], got {self.nu2}")
        if self.mean is not None:
            if not -1.0 <= self.mean <= 1.0:
                raise DomainError(f"mean must be in [-1, 1], got {self.mean}")
            if self.mean * self.mean > self.nu2 + 1e-12:
                raise DomainError(
                    f"mean^2={self.mean**2:.6g} exceeds nu2={self.nu2:.6g}"
                )


@dataclass(frozen=True)
class PopulationProfile:
    """Two group profiles; total client count K is their size sum."""

    group_a: GroupProfile
    group_b: GroupProfile

    @property
    def total(self):
        return self.group_a.n + self.group_b.n


@dataclass(frozen=True)
class MseReport:
    """Gap-estimator MSE at the given nu2 pair (point) and its bounds
    over nu2 in [0, 1] per group (lower <= point <= upper)."""

    point: float
    lower: float
    upper: float


@dataclass(frozen=True)
class BudgetSolution:
    """Outcome of the minimum-budget search for one (K, alpha) cell."""

    feasible: bool
    eps: float | None
    alpha: float
    prob: float


def var_group_l(profile: GroupProfile, total, budget: Budget):
    """Variance of the Laplace-mechanism group-mean estimator.

    (1/n) * (nu2 e^-eps1 + (1 + e^-eps1)(sigma2 + ((K-n)/n) sigmabar2 e^-eps1))
    with sigma2 = 8/eps2^2 and sigmabar2 = 2 k^2 / eps2^2.
    """
    if budget.eps2 <= 0:
        raise DomainError("eps2 must be positive for the Laplace mechanism")
    n = profile.n
    if total < n:
        raise DomainError(f"total {total} smaller than group size {n}")
    e = math.exp(-budget.eps1)
    sigma2 = 8.0 / budget.eps2**2
    sigmabar2 = 2.0 * budget.k**2 / budget.eps2**2
    return (
        profile.nu2 * e + (1.0 + e) * (sigma2 + (total - n) / n * sigmabar2 * e)
    ) / n


def var_group_r(profile: GroupProfile, total, budget: Budget):
    """Variance of the discretizing-mechanism group-mean estimator.

    (1/(a(2b-1)^2 n)) * (1 - a(2b-1)^2 nu2 + ((K-n)/n)(1-a)/a).
    """
    if budget.eps2 == 0:
        raise DegenerateBudgetError(
            "kind 'r' estimator is undefined at eps2=0 (2b-1 = 0)"
        )
    n = profile.n
    if total < n:
        raise DomainError(f"total {total} smaller than group size {n}")
    a = grr_keep_prob(budget.eps1, 2)
    t = 2.0 * grr_keep_prob(budget.eps2, 2) - 1.0
    return (1.0 - a * t * t * profile.nu2 + (total - n) / n * (1.0 - a) / a) / (
        a * t * t * n
    )


def var_group(profile, total, mech: MechanismSpec):
    if mech.kind == "l":
        return var_group_l(profile, total, mech.budget)
    return var_group_r(profile, total, mech.budget)


def _replace_nu2(profile: GroupProfile, nu2):
    return GroupProfile(n=profile.n, nu2=nu2)


def worst_nu2(kind):
    """nu2 maximizing the group variance: 1 for 'l', 0 for 'r'."""
    return 1.0 if kind == "l" else 0.0


def mse_gap(pop: PopulationProfile, mech: MechanismSpec):
    """Gap MSE report: point at the profiles' nu2 values, bounds at the
    per-group nu2 extremes."""
    total = pop.total
    point = var_group(pop.group_a, total, mech) + var_group(pop.group_b, total, mech)
    hi = worst_nu2(mech.kind)
    lo = 1.0 - hi
    upper = var_group(_replace_nu2(pop.group_a, hi), total, mech) + var_group(
        _replace_nu2(pop.group_b, hi), total, mech
    )
    lower = var_group(_replace_nu2(pop.group_a, lo), total, mech) + var_group(
        _replace_nu2(pop.group_b, lo), total, mech
    )
    return MseReport(point=point, lower=lower, upper=upper)


def allocate(kind, total_eps):
    """Budget split minimizing MSE at total privacy level total_eps.

    'r'     -> eps1 = eps2 = eps
    'l-k2'  -> eps1 = eps/2, eps2 = eps, k = 2
    'l-opt' -> eps2 = eps and, for eps >= 2/3, k = eps with
               eps1 = ln(2/eps) + eps - 1; for smaller eps, k = 2/3 with
               eps1 = ln(3) - eps/2. Both branches meet at eps = 2/3.
    """
    if not total_eps > 0:
        raise DomainError(f"total_eps must be positive, got {total_eps}")
    if kind == "r":
        return Budget(eps1=total_eps, eps2=total_eps)
    if kind == "l-k2":
        return Budget(eps1=total_eps / 2.0, eps2=total_eps, k=2.0)
    if kind == "l-opt":
        if total_eps >= _KNEE:
            return Budget(
                eps1=math.log(2.0 / total_eps) + total_eps - 1.0,
                eps2=total_eps,
                k=total_eps,
            )
        return Budget(
            eps1=math.log(3.0) - total_eps / 2.0, eps2=total_eps, k=_KNEE
        )
    raise DomainError(f"allocation kind must be one of {ALLOC_KINDS}, got {kind!r}")


def mechanism_for(kind, total_eps, d=2):
    """MechanismSpec at the optimal allocation for an allocation kind."""
    with warnings.catch_warnings():
        # l-opt legitimately picks k > 2 for eps > 2; the caveat is
        # documented once on the allocation, not per construction
        warnings.simplefilter("ignore")
        return MechanismSpec(
            kind="r" if kind == "r" else "l", budget=allocate(kind, total_eps), d=d
        )


def chebyshev_alpha(variance, prob):
    """Error bound alpha with P(|error| >= alpha) <= 1 - prob, from
    Chebyshev's inequality: sqrt(variance / (1 - prob))."""
    if not 0.0 < prob < 1.0:
        raise DomainError(f"prob must be in (0, 1), got {prob}")
    if variance < 0:
        raise DomainError(f"variance must be nonnegative, got {variance}")
    return math.sqrt(variance / (1.0 - prob))


def _upper_mse(kind, eps, sizes):
    nu2 = worst_nu2("l" if kind.startswith("l") else "r")
    budget = allocate(kind, eps)
    pop = PopulationProfile(
        GroupProfile(n=sizes[0], nu2=nu2), GroupProfile(n=sizes[1], nu2=nu2)
    )
    mech_kind = "l" if kind.startswith("l") else "r"
    total = pop.total
    if mech_kind == "l":
        return var_group_l(pop.group_a, total, budget) + var_group_l(
            pop.group_b, total, budget
        )
    return var_group_r(pop.group_a, total, budget) + var_group_r(
        pop.group_b, total, budget
    )


def variance_floor(kind, sizes):
    """Infinite-budget limit of the worst-case gap MSE.

    The discretizing mechanism keeps unit-variance outputs at nu2 = 0
    however large the budget, so its floor is 1/n_a + 1/n_b; the
    Laplace mechanism's noise vanishes, so its floor is 0.
    """
    if kind.startswith("l"):
        return 0.0
    return 1.0 / sizes[0] + 1.0 / sizes[1]


def min_budget(
    total_clients,
    alpha,
    prob,
    kind,
    sizes=None,
    lo=1e-6,
    hi=1e4,
    # tight enough that two-decimal rounding is stable even when the
    # threshold sits a hair under a half-cent boundary (e.g. 0.0249856)
    tol=1e-7,
    grid_points=25,
):
    """Smallest eps whose worst-case gap MSE satisfies the Chebyshev
    condition chebyshev_alpha(mse) <= alpha, by bisection.

    Groups are balanced (n = K/2) unless per-group sizes are given;
    worst-case nu2 is used per mechanism. Returns an infeasible
    solution when the infinite-budget variance floor already violates
    the target. Monotonicity of the bound in eps is verified on a
    coarse grid before bisecting.
    """
    if kind not in ALLOC_KINDS:
        raise DomainError(f"kind must be one of {ALLOC_KINDS}, got {kind!r}")
    if sizes is None:
        if total_clients < 2:
            raise DomainError("need at least two clients")
        half = total_clients // 2
        sizes = (half, total_clients - half)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")

    if chebyshev_alpha(variance_floor(kind, sizes), prob) >= alpha:
        return BudgetSolution(feasible=False, eps=None, alpha=alpha, prob=prob)

    grid = [lo * (hi / lo) ** (i / (grid_points - 1)) for i in range(grid_points)]
    mses = [_upper_mse(kind, e, sizes) for e in grid]
    for (e0, m0), (e1, m1) in zip(zip(grid, mses), zip(grid[1:], mses[1:])):
        if m1 > m0 * (1.0 + 1e-9):
            raise NonMonotonicObjectiveError(
                f"upper-bound MSE increased from eps={e0:.4g} ({m0:.6g}) "
                f"to eps={e1:.4g} ({m1:.6g})",
                grid=list(zip(grid, mses)),
            )

    def ok(eps):
        return chebyshev_alpha(_upper_mse(kind, eps, sizes), prob) <= alpha

    if ok(lo):
        return BudgetSolution(feasible=True, eps=lo, alpha=alpha, prob=prob)
    if not ok(hi):
        return BudgetSolution(feasible=False, eps=None, alpha=alpha, prob=prob)
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if ok(mid):
            b = mid
        else:
            a = mid
    return BudgetSolution(feasible=True, eps=b, alpha=alpha, prob=prob)


def budget_table(clients_list, alpha_list, prob, kinds=("r", "l-opt")):
    """min_budget over a (K, alpha, kind) grid, row-major in that order."""
    rows = []
    for total in clients_list:
        for alpha in alpha_list:
            for kind in kinds:
                rows.append(
                    {
                        "clients": int(total),
                        "alpha": alpha,
                        "kind": kind,
                        "solution": min_budget(int(total), alpha, prob, kind),
                    }
                )
    return rows


def ratio_sweep(total_clients, ratios, eps_grid, kind):
    """Worst-case gap MSE for group size ratios n_a/n_b at each eps.

    Sizes are rounded so that a ratio and its reciprocal give exactly
    mirrored splits (the gap MSE is symmetric under swapping groups).
    """
    rows = []
    for ratio in ratios:
        if not ratio > 0:
            raise DomainError(f"ratio must be positive, got {ratio}")
        rr = ratio if ratio >= 1.0 else 1.0 / ratio
        n_big = round(total_clients * rr / (1.0 + rr))
        n_big = min(max(n_big, 1), total_clients - 1)
        n_small = total_clients - n_big
        sizes = (n_big, n_small) if ratio >= 1.0 else (n_small, n_big)
        for eps in eps_grid:
            rows.append(
                {
                    "ratio": ratio,
                    "eps": eps,
                    "n_a": sizes[0],
                    "n_b": sizes[1],
                    "mse_upper": _upper_mse(kind, eps, sizes),
                }
            )
    return rows


def mse_misestimated_sizes(pop: PopulationProfile, mech: MechanismSpec, est_sizes):
    """Gap MSE when the operator divides by wrong group sizes.

    Using n_est instead of n rescales the (unbiased) group estimator by
    s = n/n_est: each group contributes variance s^2 Var and bias
    mean * (s - 1). The group errors stay uncorrelated, so variances
    add, while the gap bias is the *difference* of the group biases
    (opposite-signed misestimates can cancel). Requires group means.
    """
    if len(est_sizes) != 2:
        raise DomainError("exactly two estimated sizes")
    total = pop.total
    var_point = var_lower = var_upper = 0.0
    biases = []
    for profile, n_est in zip((pop.group_a, pop.group_b), est_sizes):
        if not n_est > 0:
            raise DomainError(f"estimated size must be positive, got {n_est}")
        if profile.mean is None:
            raise MissingMeanError(
                "misestimated-size analysis needs each group's mean"
            )
        s = profile.n / n_est
        biases.append(profile.mean * (s - 1.0))
        hi = worst_nu2(mech.kind)
        var_point += s * s * var_group(profile, total, mech)
        var_upper += s * s * var_group(_replace_nu2(profile, hi), total, mech)
        var_lower += s * s * var_group(_replace_nu2(profile, 1.0 - hi), total, mech)
    bias2 = (biases[0] - biases[1]) ** 2
    return MseReport(
        point=var_point + bias2, lower=var_lower + bias2, upper=var_upper + bias2
    )
