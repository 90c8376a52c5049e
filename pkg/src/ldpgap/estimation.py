"""Unbiased group-mean and gap estimators over perturbed records.

The estimators divide the sum of perturbed values observed in a group
by the group's *claimed* true size n (never by the observed count n'),
scaled by the inverse of the mechanism's attenuation: 1/a for the
Laplace mechanism and 1/(a(2b-1)) for the discretizing one, where a and
b are the group/value keep probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

from ldpgap.errors import DegenerateBudgetError, DomainError, MissingGroupError
from ldpgap.mechanisms import MechanismSpec, grr_keep_prob


@dataclass
class GroupTally:
    """Running count and compensated value sum of records whose
    perturbed group equals ``group``."""

    group: int
    count: int = 0
    _sum: float = 0.0
    _comp: float = 0.0

    @property
    def value_sum(self):
        return self._sum + self._comp

    def add(self, value):
        self.count += 1
        self.add_value_only(value)

    def merge(self, other):
        """Fold another partial tally in (associative up to float
        rounding; counts are exact)."""
        if other.group != self.group:
            raise DomainError(
                f"cannot merge tally for group {other.group} into {self.group}"
            )
        self.count += other.count
        self.add_value_only(other._sum)
        self.add_value_only(other._comp)
        return self

    def add_value_only(self, value):
        t = self._sum + value
        if abs(self._sum) >= abs(value):
            self._comp += (self._sum - t) + value
        else:
            self._comp += (value - t) + self._sum
        self._sum = t


def tally(records, groups=None):
    """Per-group tallies of an iterable of perturbed records.

    ``groups`` pre-seeds entries (with zero counts) so downstream
    estimation can distinguish "group observed empty" from "group never
    considered".
    """
    out = {}
    if groups is not None:
        for g in groups:
            out[g] = GroupTally(group=g)
    for rec in records:
        t = out.get(rec.group)
        if t is None:
            t = out[rec.group] = GroupTally(group=rec.group)
        t.add(rec.value)
    return out


def estimation_factor(mech: MechanismSpec, n):
    """Denominator of the group-mean estimator for a claimed size n."""
    if n <= 0:
        raise DomainError(f"group size must be positive, got {n}")
    a = grr_keep_prob(mech.budget.eps1, mech.d)
    if mech.kind == "l":
        return a * n
    b = grr_keep_prob(mech.budget.eps2, 2)
    if mech.budget.eps2 == 0:
        raise DegenerateBudgetError(
            "kind 'r' estimator is undefined at eps2=0 (2b-1 = 0)"
        )
    return a * (2.0 * b - 1.0) * n


def estimate_group_mean(group_tally: GroupTally, n, mech: MechanismSpec):
    """Unbiased estimate of a group's mean value from its tally and its
    claimed true size n."""
    return group_tally.value_sum / estimation_factor(mech, n)


@dataclass(frozen=True)
class GapEstimate:
    """Estimated per-group means and their gap.

    ``gap`` is the unsigned difference; ``signed_diff`` keeps the sign
    so callers can detect crossing estimates at tiny gaps.
    """

    mean_a: float
    mean_b: float
    gap: float
    signed_diff: float
    mechanism: MechanismSpec
    claimed_sizes: tuple


def estimate_gap(tallies, sizes, mech: MechanismSpec, groups=(0, 1)):
    """Gap estimate between two groups from per-group tallies.

    ``sizes`` are the claimed true group sizes, ordered like ``groups``.
    Records tallied under any other group label are simply not
    consulted. A selected group must have a tally entry (a zero count
    is fine and yields a zero mean estimate).
    """
    if len(groups) != 2 or len(sizes) != 2:
        raise DomainError("exactly two groups are compared")
    means = []
    for g, n in zip(groups, sizes):
        if g not in tallies:
            raise MissingGroupError(f"no tally entry for group {g}")
        means.append(estimate_group_mean(tallies[g], n, mech))
    diff = means[0] - means[1]
    return GapEstimate(
        mean_a=means[0],
        mean_b=means[1],
        gap=abs(diff),
        signed_diff=diff,
        mechanism=mech,
        claimed_sizes=(int(sizes[0]), int(sizes[1])),
    )
