"""Client-side randomizers and their privacy analysis.

Two composed mechanisms perturb a client's (group, performance value)
tuple. Both first apply generalized randomized response (GRR) to the
group; clients whose group flips have their value zeroed so they cannot
shift the other group's mean. They differ in how the value is perturbed:

* kind "r": discretize the value to a bit with success probability
  (1 + v) / 2, randomize the bit with GRR, and map it back to {-1, +1};
* kind "l": add zero-mean Laplace noise, with scale 2/eps2 for clients
  who kept their group and k/eps2 for clients who flipped.

Alongside the samplers, this module provides the closed-form LDP levels
claimed for each mechanism and auditors that search for the tightest
log probability (or density) ratio directly, so the claims can be
checked rather than trusted. Privacy statements are only certified for
binary groups (d = 2).
"""

from __future__ import annotations

import itertools
import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np

from ldpgap.errors import DomainError
from ldpgap.rng import TAG_PERTURB, Stream

# Budgets at or above the cap are treated as the exact no-perturbation
# limit (keep probabilities 1, zero noise): e.g. exp(eps) would
# overflow well before eps reaches 1e3, and at 50 the limit already
# holds to within one ulp.
EPS_CAP = 50.0

_U53 = 1.0 / (1 << 53)


def _finite_nonneg(name, x):
    x = float(x)
    if math.isnan(x) or x < 0:
        raise DomainError(f"{name} must be a nonnegative real, got {x}")
    return x


@dataclass(frozen=True)
class Budget:
    """Privacy parameters of a mechanism instance.

    eps1 protects the group, eps2 the value; k tunes the Laplace scale
    used for flipped clients (kind "l" only, ignored by kind "r").
    """

    eps1: float
    eps2: float
    k: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "eps1", _finite_nonneg("eps1", self.eps1))
        object.__setattr__(self, "eps2", _finite_nonneg("eps2", self.eps2))
        k = float(self.k)
        if math.isnan(k) or k <= 0:
            raise DomainError(f"k must be positive, got {k}")
        object.__setattr__(self, "k", k)


@dataclass(frozen=True)
class ClientRecord:
    """A client's true (group, value) tuple; values live in [-1, 1]."""

    group: int
    value: float

    def __post_init__(self):
        if self.group < 0:
            raise DomainError(f"group must be nonnegative, got {self.group}")
        v = float(self.value)
        if math.isnan(v) or not -1.0 <= v <= 1.0:
            raise DomainError(f"value must be in [-1, 1], got {v}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class PerturbedRecord:
    """A mechanism output; kind "r" values are exactly -1 or +1, kind
    "l" values are unbounded reals."""

    group: int
    value: float


@dataclass(frozen=True)
class MechanismSpec:
    """Mechanism kind ("r" or "l"), its budget, and the number of group
    categories d (binary groups are d = 2)."""

    kind: str
    budget: Budget
    d: int = 2

    def __post_init__(self):
        if self.kind not in ("r", "l"):
            raise DomainError(f"kind must be 'r' or 'l', got {self.kind!r}")
        if self.d < 2:
            raise DomainError(f"d must be at least 2, got {self.d}")
        if self.kind == "l" and self.budget.k > 2.0:
            warnings.warn(
                f"k={self.budget.k} exceeds 2: the LDP level reported for this "
                "mechanism follows the bounded-output case analysis, but the "
                "unbounded-output density ratio diverges (see audit_l_grid)",
                stacklevel=2,
            )

    @property
    def group_keep_prob(self):
        return grr_keep_prob(self.budget.eps1, self.d)

    @property
    def value_keep_prob(self):
        if self.kind != "r":
            raise DomainError("value_keep_prob is defined for kind 'r' only")
        return grr_keep_prob(self.budget.eps2, 2)

    @property
    def noise_scales(self):
        """(kept-group scale, flipped-group scale) for kind 'l'."""
        if self.kind != "l":
            raise DomainError("noise_scales are defined for kind 'l' only")
        if self.budget.eps2 == 0:
            raise DomainError("kind 'l' requires eps2 > 0 (finite noise scale)")
        if self.budget.eps2 >= EPS_CAP:
            return (0.0, 0.0)
        return (2.0 / self.budget.eps2, self.budget.k / self.budget.eps2)


@dataclass(frozen=True)
class AuditReport:
    """Outcome of a privacy audit.

    tight_eps is the largest log probability/density ratio found,
    claimed_eps the closed-form level the mechanism advertises, and
    witness the ((g0, v0), (g1, v1), (g', v')) triple achieving it.
    boundary_attained flags a grid search whose supremum strictly
    improves at the edge of the searched output range, i.e. a ratio
    that diverges over unbounded outputs.
    """

    tight_eps: float
    claimed_eps: float
    witness: tuple = field(repr=False)
    boundary_attained: bool = False


def grr_keep_prob(eps, d):
    """Probability that GRR keeps the input among d >= 2 categories:
    exp(eps) / (exp(eps) + d - 1), evaluated overflow-free."""
    eps = _finite_nonneg("eps", eps)
    if d < 2:
        raise DomainError(f"d must be at least 2, got {d}")
    if eps >= EPS_CAP:
        return 1.0
    return 1.0 / (1.0 + (d - 1) * math.exp(-eps))


def _grr_apply(x, d, a, u):
    """GRR decision for one uniform draw u in [0, 1)."""
    if u < a:
        return x
    r = (u - a) / (1.0 - a)
    j = int(r * (d - 1))
    if j > d - 2:
        j = d - 2
    return j if j < x else j + 1


def grr_perturb(x, d, keep_prob, stream: Stream):
    """Randomize category x in {0, ..., d-1}: keep it with probability
    keep_prob, otherwise output a uniformly chosen other category."""
    if d < 2:
        raise DomainError(f"d must be at least 2, got {d}")
    if not 0 <= x < d:
        raise DomainError(f"category must be in [0, {d}), got {x}")
    if not 0.5 <= keep_prob <= 1.0:
        raise DomainError(f"keep_prob must be in [1/2, 1], got {keep_prob}")
    return _grr_apply(x, d, keep_prob, stream.uniform())


def harmony_discretize(value, stream: Stream):
    """Map value in [-1, 1] to a bit that is 1 with probability
    (1 + value) / 2, so that 2*bit - 1 is unbiased for value."""
    value = float(value)
    if math.isnan(value) or not -1.0 <= value <= 1.0:
        raise DomainError(f"value must be in [-1, 1], got {value}")
    return 1 if stream.uniform() < (1.0 + value) * 0.5 else 0


def _laplace_from_uniform(scale, u):
    if scale == 0.0:
        return 0.0
    c = u - 0.5
    m = math.log1p(-2.0 * abs(c))
    return -scale * m if c > 0.0 else scale * m


def laplace_sample(scale, stream: Stream):
    """Zero-mean Laplace draw by inverse CDF from one uniform."""
    scale = float(scale)
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    return _laplace_from_uniform(scale, stream.uniform_open())


def perturb_r(rec: ClientRecord, budget: Budget, d, stream: Stream):
    """Apply the discretizing mechanism to one record.

    Consumes exactly one block of the stream, so walking a fresh
    ``perturb_stream`` record-by-record matches the batch kernels.
    """
    if not 0 <= rec.group < d:
        raise DomainError(f"group {rec.group} out of range for d={d}")
    a = grr_keep_prob(budget.eps1, d)
    b = grr_keep_prob(budget.eps2, 2)
    w = stream.next_block()
    u0 = (w[0] >> 11) * _U53
    u1 = (w[1] >> 11) * _U53
    u2 = (w[2] >> 11) * _U53
    g2 = _grr_apply(rec.group, d, a, u0)
    v = rec.value if g2 == rec.group else 0.0
    bit = 1 if u1 < (1.0 + v) * 0.5 else 0
    bit = _grr_apply(bit, 2, b, u2)
    return PerturbedRecord(g2, 2.0 * bit - 1.0)


def perturb_l(rec: ClientRecord, budget: Budget, d, stream: Stream):
    """Apply the Laplace-noise mechanism to one record.

    Clients who keep their group report value + Lap(0, 2/eps2); clients
    whose group flips report Lap(0, k/eps2). Consumes one stream block.
    """
    if not 0 <= rec.group < d:
        raise DomainError(f"group {rec.group} out of range for d={d}")
    if budget.eps2 == 0:
        raise DomainError("kind 'l' requires eps2 > 0 (finite noise scale)")
    if budget.k > 2.0:
        warnings.warn(
            f"k={budget.k} exceeds 2; see MechanismSpec for the caveat",
            stacklevel=2,
        )
    a = grr_keep_prob(budget.eps1, d)
    if budget.eps2 >= EPS_CAP:
        scale_keep = scale_flip = 0.0
    else:
        scale_keep = 2.0 / budget.eps2
        scale_flip = budget.k / budget.eps2
    w = stream.next_block()
    u0 = (w[0] >> 11) * _U53
    u1 = ((w[1] >> 11) + 0.5) * _U53
    g2 = _grr_apply(rec.group, d, a, u0)
    if g2 == rec.group:
        return PerturbedRecord(g2, rec.value + _laplace_from_uniform(scale_keep, u1))
    return PerturbedRecord(g2, _laplace_from_uniform(scale_flip, u1))


def _require_binary(d):
    if d != 2:
        raise DomainError(
            f"privacy levels are only certified for binary groups (d=2), got d={d}"
        )


def epsilon_of_r(budget: Budget, d=2):
    """Claimed LDP level of the discretizing mechanism: max(eps1, eps2)."""
    _require_binary(d)
    return max(budget.eps1, budget.eps2)


def epsilon_of_l(budget: Budget, d=2):
    """Claimed LDP level of the Laplace mechanism:
    max(eps2, ln(2/k) + eps2/2 - eps1, ln(k/2) + eps2/k + eps1)."""
    _require_binary(d)
    e1, e2, k = budget.eps1, budget.eps2, budget.k
    return max(e2, math.log(2.0 / k) + e2 / 2.0 - e1, math.log(k / 2.0) + e2 / k + e1)


def _r_output_prob(a, b, g, v, g2, w):
    """P[(g2, w) | (g, v)] for the discretizing mechanism, binary groups."""
    if g2 == g:
        return a * (1.0 + (2.0 * b - 1.0) * w * v) / 2.0
    return (1.0 - a) / 2.0


def _r_log_ratios(budget: Budget):
    """All (x0, x1, y, log-ratio) entries of the exact audit table.

    Inputs range over g in {0, 1} and v in {-1, 0, 1}; since the output
    probability is affine in v, the extremes of the ratio occur at the
    endpoints, so this finite set is exhaustive. Pairs whose denominator
    is zero yield an infinite ratio when the numerator is positive.
    """
    a = grr_keep_prob(budget.eps1, 2)
    b = grr_keep_prob(budget.eps2, 2)
    inputs = [(g, v) for g in (0, 1) for v in (-1.0, 0.0, 1.0)]
    outputs = [(g2, w) for g2 in (0, 1) for w in (-1.0, 1.0)]
    for x0, x1 in itertools.permutations(inputs, 2):
        for y in outputs:
            p0 = _r_output_prob(a, b, x0[0], x0[1], y[0], y[1])
            p1 = _r_output_prob(a, b, x1[0], x1[1], y[0], y[1])
            if p1 == 0.0:
                ratio = math.inf if p0 > 0.0 else -math.inf
            elif p0 == 0.0:
                ratio = -math.inf
            else:
                ratio = math.log(p0 / p1)
            yield x0, x1, y, ratio


def audit_r_exact(budget: Budget, d=2):
    """Exact privacy audit of the discretizing mechanism by enumeration
    of all input pairs and outputs (binary groups only)."""
    _require_binary(d)
    best = None
    for x0, x1, y, ratio in _r_log_ratios(budget):
        if best is None or ratio > best[3]:
            best = (x0, x1, y, ratio)
    x0, x1, y, tight = best
    return AuditReport(
        tight_eps=max(tight, 0.0),
        claimed_eps=epsilon_of_r(budget),
        witness=(x0, x1, y),
    )


def r_case_max(budget: Budget):
    """Closed-form value the exact audit must reproduce:
    max(eps2, ln(2ab/(1-a)), ln((1 + e^eps2) / (2 e^eps1)))."""
    e1, e2 = budget.eps1, budget.eps2
    a = grr_keep_prob(e1, 2)
    b = grr_keep_prob(e2, 2)
    if a >= 1.0 or b >= 1.0:
        return math.inf
    return max(
        math.log(b / (1.0 - b)),
        math.log(2.0 * a * b / (1.0 - a)),
        math.log((1.0 - a) / (2.0 * a * (1.0 - b))),
    )


def _l_case_logratio(case, e1, e2, k, v0, v1, vp):
    """Log density/probability ratio of one group case at output value vp."""
    if case == "same_kept":
        return e2 * (abs(vp - v1) - abs(vp - v0)) / 2.0
    if case == "same_flipped":
        return 0.0
    if case == "cross_kept":  # g' = g0 != g1
        return e1 + math.log(k / 2.0) + e2 * (abs(vp) / k - abs(vp - v0) / 2.0)
    if case == "cross_flipped":  # g' = g1 != g0
        return -e1 + math.log(2.0 / k) + e2 * (abs(vp - v1) / 2.0 - abs(vp) / k)
    raise ValueError(case)


def audit_l_grid(budget: Budget, out_range=3.0, grid_step=1e-3, d=2):
    """Grid-search privacy audit of the Laplace mechanism.

    Scans output values over [-out_range, out_range] (plus the analytic
    critical points 0, +-1, v0, v1) for all input value pairs in
    {-1, 0, 1} and the four group cases. boundary_attained is set when
    the supremum strictly improves at +-out_range, the signature of a
    density ratio that diverges as |v'| grows (k < 2 or k > 2).
    """
    _require_binary(d)
    if not out_range > 0:
        raise DomainError(f"out_range must be positive, got {out_range}")
    if not grid_step > 0:
        raise DomainError(f"grid_step must be positive, got {grid_step}")
    e1, e2, k = budget.eps1, budget.eps2, budget.k
    npts = int(round(2.0 * out_range / grid_step)) + 1
    grid = np.linspace(-out_range, out_range, npts)
    extra = [0.0, -1.0, 1.0, -out_range, out_range]
    candidates = np.unique(np.concatenate([grid, np.array(extra)]))
    pairs = [(v0, v1) for v0 in (-1.0, 0.0, 1.0) for v1 in (-1.0, 0.0, 1.0)]
    cases = ("same_kept", "same_flipped", "cross_kept", "cross_flipped")

    best = (-math.inf, None)
    best_interior = -math.inf
    for case in cases:
        for v0, v1 in pairs:
            if case.startswith("same") and v0 == v1:
                continue  # inputs must differ
            for vp in candidates:
                r = _l_case_logratio(case, e1, e2, k, v0, v1, float(vp))
                if r > best[0]:
                    best = (r, (case, v0, v1, float(vp)))
                if abs(vp) < out_range and r > best_interior:
                    best_interior = r
    tight, (case, v0, v1, vp) = best
    g0, g1, g2 = _case_groups(case)
    return AuditReport(
        tight_eps=max(tight, 0.0),
        claimed_eps=epsilon_of_l(budget),
        witness=((g0, v0), (g1, v1), (g2, vp)),
        boundary_attained=tight > best_interior + 1e-12,
    )


def _case_groups(case):
    """Representative (g0, g1, g') labels for an audit case."""
    return {
        "same_kept": (0, 0, 0),
        "same_flipped": (0, 0, 1),
        "cross_kept": (0, 1, 0),
        "cross_flipped": (0, 1, 1),
    }[case]


def kernel_params(mech: MechanismSpec):
    """Parameters the batch kernels need, with the budget cap applied:
    (a, ('r', b)) or (a, ('l', (scale_keep, scale_flip)))."""
    a = grr_keep_prob(mech.budget.eps1, mech.d)
    if mech.kind == "r":
        if mech.budget.eps2 == 0:
            raise DomainError("kind 'r' batch application needs eps2 > 0")
        return a, ("r", grr_keep_prob(mech.budget.eps2, 2))
    return a, ("l", mech.noise_scales)


def perturb_arrays(groups, values, mech: MechanismSpec, seed, run=0, threads=None):
    """Apply a mechanism to parallel (groups, values) arrays.

    Row i draws from the (seed, run, i) substream, so the output is
    independent of how rows are chunked across threads and matches the
    scalar functions walked over a fresh ``perturb_stream(seed, run)``.
    """
    from ldpgap import backends

    groups = np.ascontiguousarray(groups, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if groups.shape != values.shape:
        raise DomainError("groups and values must have equal length")
    if groups.size and (groups.min() < 0 or groups.max() >= mech.d):
        raise DomainError(f"group labels must lie in [0, {mech.d})")
    if values.size and (np.isnan(values).any() or np.abs(values).max() > 1.0):
        raise DomainError("values must lie in [-1, 1]")
    kern = backends.active()
    a, extra = kernel_params(mech)
    n = groups.size
    out_g = np.empty(n, dtype=np.int64)
    out_v = np.empty(n, dtype=np.float64)

    def work(lo, hi):
        if extra[0] == "r":
            g, v = kern.perturb_r_batch(
                groups[lo:hi], values[lo:hi], mech.d, a, extra[1],
                seed, TAG_PERTURB, run, lo,
            )
        else:
            sk, sf = extra[1]
            g, v = kern.perturb_l_batch(
                groups[lo:hi], values[lo:hi], mech.d, a, sk, sf,
                seed, TAG_PERTURB, run, lo,
            )
        out_g[lo:hi] = g
        out_v[lo:hi] = v

    nthreads = backends.resolve_threads(threads)
    if nthreads == 1 or n < 2 * nthreads:
        work(0, n)
    else:
        bounds = np.linspace(0, n, nthreads + 1).astype(int)
        workers = [
            threading.Thread(target=work, args=(int(lo), int(hi)))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for t in workers:
            t.start()
        for t in workers:
            t.join()
    return out_g, out_v
