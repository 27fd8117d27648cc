"""Expected-rehandle analytics for a single bay.

A bay of R rows stacked up to T tiers holds k interchangeable containers.
Because every policy here is height-symmetric (its choices depend only on
the multiset of stack heights), the Markov chain over physical
configurations lumps losslessly onto canonical configurations: partitions
of k into at most R parts, each part at most T. All probability is exact
(:class:`fractions.Fraction`); floating point appears only in the Monte
Carlo oracle.

The expectation assembled by :func:`expected_rehandles` is

    v_k = sum_i s_i * sum_j p(i,j) * v(i,j)

with s the fill distribution after k arrivals, p the pick-transition
kernel for a uniformly chosen container, and v(i,j) the rehandles of the
transition. Picks whose blockers cannot be relocated inside the bay (full
and near-full bays; there is no cross-bay transfer) carry no defined
transition: the expectation operators condition on retrievable picks, and
the oracle mirrors that by reporting failed trials and averaging over the
rest.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapacityExceeded, RelocationImpossible


def canonical(heights) -> tuple[int, ...]:
    """Canonical form: heights sorted non-increasing."""
    return tuple(sorted(heights, reverse=True))


@dataclass(frozen=True)
class BayConfiguration:
    """Canonical stack-height vector of one bay."""

    heights: tuple[int, ...]
    max_tier: int

    def __post_init__(self):
        if any(h < 0 or h > self.max_tier for h in self.heights):
            raise ValueError(f"heights {self.heights} exceed tier bound {self.max_tier}")
        if any(a < b for a, b in zip(self.heights, self.heights[1:])):
            raise ValueError(f"heights {self.heights} not canonical (non-increasing)")

    @property
    def k(self) -> int:
        return sum(self.heights)

    @property
    def rows(self) -> int:
        return len(self.heights)


@dataclass(frozen=True)
class PickTransition:
    """One aggregated (source, target, rehandles) outcome of a uniform pick."""

    source: BayConfiguration
    target: BayConfiguration
    probability: Fraction
    rehandles: int


@dataclass
class ConfigurationDistribution:
    k: int
    entries: dict  # BayConfiguration -> Fraction

    def __post_init__(self):
        total = sum(self.entries.values())
        if total != 1:
            raise ValueError(f"distribution sums to {total}, not 1")

    def items(self):
        return self.entries.items()

    def probability(self, config: BayConfiguration) -> Fraction:
        return self.entries.get(config, Fraction(0))


class UniformPlacement:
    """Arrivals pick uniformly among stacks with headroom."""

    def stack_weights(self, heights, max_tier: int):
        return [1 if h < max_tier else 0 for h in heights]


class LowestOtherRelocation:
    """Blockers go to the lowest other non-full stack; ties to the first."""

    def target(self, heights, forbidden: int, max_tier: int) -> int | None:
        best = None
        for idx, h in enumerate(heights):
            if idx == forbidden or h >= max_tier:
                continue
            if best is None or h < heights[best]:
                best = idx
        return best


DEFAULT_PLACEMENT = UniformPlacement()
DEFAULT_RELOCATION = LowestOtherRelocation()


def enumerate_configurations(k: int, rows: int, max_tier: int) -> list[BayConfiguration]:
    """All partitions of k into at most ``rows`` parts, each <= ``max_tier``.

    Ordered descending-lexicographically: (2,0) before (1,1).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > rows * max_tier:
        raise CapacityExceeded(f"k={k} exceeds bay capacity {rows}*{max_tier}")

    out: list[BayConfiguration] = []

    def rec(remaining: int, slots: int, cap: int, prefix: list[int]):
        if remaining == 0:
            out.append(BayConfiguration(tuple(prefix) + (0,) * slots, max_tier))
            return
        lo = -(-remaining // slots)  # ceil: smallest feasible first part
        for first in range(min(cap, remaining), lo - 1, -1):
            prefix.append(first)
            rec(remaining - first, slots - 1, first, prefix)
            prefix.pop()

    rec(k, rows, max_tier, [])
    return out


def _grouped_heights(heights):
    """Distinct height values with multiplicities, preserving one index each."""
    groups = []
    seen = set()
    for idx, h in enumerate(heights):
        if h in seen:
            continue
        seen.add(h)
        groups.append((idx, h, heights.count(h)))
    return groups


def _check_symmetric_weights(heights, weights):
    by_height = {}
    for h, w in zip(heights, weights):
        if h in by_height and by_height[h] != w:
            raise ValueError("placement model is not height-symmetric")
        by_height[h] = w
    return by_height


def fill_distribution(
    k: int, rows: int, max_tier: int, placement_model=DEFAULT_PLACEMENT
) -> ConfigurationDistribution:
    """Distribution over canonical configurations after k arrivals from empty.

    Forward recursion on the lumped chain; the multiplicity of each distinct
    height value supplies the weight of the corresponding physical rows.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > rows * max_tier:
        raise CapacityExceeded(f"k={k} exceeds bay capacity {rows}*{max_tier}")

    empty = BayConfiguration((0,) * rows, max_tier)
    dist = {empty: Fraction(1)}
    for _ in range(k):
        nxt: dict[BayConfiguration, Fraction] = defaultdict(Fraction)
        for config, prob in dist.items():
            weights = list(placement_model.stack_weights(config.heights, max_tier))
            by_height = _check_symmetric_weights(config.heights, weights)
            if Fraction(by_height.get(max_tier, 0)) != 0:
                raise ValueError("placement model assigns weight to a full stack")
            total = sum(Fraction(w) * config.heights.count(h) for h, w in by_height.items())
            if total == 0:
                raise RelocationImpossible("placement model admits no stack")
            for h, w in by_height.items():
                w = Fraction(w)
                if w == 0:
                    continue
                share = w * config.heights.count(h) / total
                bumped = list(config.heights)
                bumped[bumped.index(h)] += 1
                nxt[BayConfiguration(canonical(bumped), max_tier)] += prob * share
        dist = dict(nxt)
    return ConfigurationDistribution(k=k, entries=dist)


def pick_outcomes(config: BayConfiguration, relocation_policy=DEFAULT_RELOCATION):
    """Raw outcomes of a uniform pick: ((target, rehandles) -> prob, infeasible mass).

    A pick of the container ``depth`` places below the top of a stack needs
    ``depth`` blockers relocated, one by one, top-down; the policy chooses
    each destination among the other stacks. Picks whose relocation chain
    dead-ends contribute to the infeasible mass instead of a transition.
    """
    k = config.k
    if k < 1:
        raise ValueError("pick requires at least one container")
    outcomes: dict[tuple[BayConfiguration, int], Fraction] = defaultdict(Fraction)
    infeasible = Fraction(0)
    for idx, height, count in _grouped_heights(config.heights):
        if height == 0:
            continue
        for depth in range(height):
            prob = Fraction(count, k)
            work = list(config.heights)
            feasible = True
            for _ in range(depth):
                tgt = relocation_policy.target(tuple(work), idx, config.max_tier)
                if tgt is None:
                    feasible = False
                    break
                work[idx] -= 1
                work[tgt] += 1
            if not feasible:
                infeasible += prob
                continue
            work[idx] -= 1
            target = BayConfiguration(canonical(work), config.max_tier)
            outcomes[(target, depth)] += prob
    return dict(outcomes), infeasible


def pick_transitions(
    config: BayConfiguration, relocation_policy=DEFAULT_RELOCATION
) -> list[PickTransition]:
    """Aggregated pick-transition kernel for one configuration.

    Raises RelocationImpossible if any pick of the configuration has no
    in-bay relocation chain (e.g. a single row with blockers); callers that
    must tolerate such picks use :func:`pick_outcomes` directly.
    """
    outcomes, infeasible = pick_outcomes(config, relocation_policy)
    if infeasible > 0:
        raise RelocationImpossible(
            f"configuration {config.heights}: {infeasible} of the pick mass "
            "has no in-bay relocation target"
        )
    transitions = [
        PickTransition(source=config, target=target, probability=prob, rehandles=rehandles)
        for (target, rehandles), prob in outcomes.items()
    ]
    transitions.sort(key=lambda t: (t.rehandles, t.target.heights))
    return transitions


def expected_rehandles(
    k: int,
    rows: int,
    max_tier: int,
    placement_model=DEFAULT_PLACEMENT,
    relocation_policy=DEFAULT_RELOCATION,
) -> Fraction:
    """Exact expected rehandles for one pick from a bay of k containers.

    Fill distribution times pick kernel, conditioned on retrievable picks
    (for most (k, rows, max_tier) every pick is retrievable and this is the
    plain double sum).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dist = fill_distribution(k, rows, max_tier, placement_model)
    numerator = Fraction(0)
    feasible_mass = Fraction(0)
    for config, s in dist.items():
        outcomes, infeasible = pick_outcomes(config, relocation_policy)
        numerator += s * sum(prob * reh for (_, reh), prob in outcomes.items())
        feasible_mass += s * (1 - infeasible)
    if feasible_mass == 0:
        raise RelocationImpossible("no retrievable pick in any reachable configuration")
    return numerator / feasible_mass


def expected_rehandles_to_empty(
    k: int,
    rows: int,
    max_tier: int,
    placement_model=DEFAULT_PLACEMENT,
    relocation_policy=DEFAULT_RELOCATION,
) -> Fraction:
    """Total expected rehandles retrieving all k containers one by one.

    Chains the pick kernel, propagating the post-pick configuration
    distribution after each retrieval; each step conditions on retrievable
    picks like :func:`expected_rehandles`.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dist = fill_distribution(k, rows, max_tier, placement_model).entries
    total = Fraction(0)
    for _ in range(k):
        numerator = Fraction(0)
        feasible_mass = Fraction(0)
        nxt: dict[BayConfiguration, Fraction] = defaultdict(Fraction)
        for config, p in dist.items():
            outcomes, infeasible = pick_outcomes(config, relocation_policy)
            numerator += p * sum(prob * reh for (_, reh), prob in outcomes.items())
            feasible_mass += p * (1 - infeasible)
            for (target, _), prob in outcomes.items():
                nxt[target] += p * prob
        if feasible_mass == 0:
            raise RelocationImpossible("no retrievable pick while emptying the bay")
        total += numerator / feasible_mass
        dist = {cfg: prob / feasible_mass for cfg, prob in nxt.items()}
    return total


@dataclass(frozen=True)
class OracleResult:
    mean: float
    se: float
    trials: int
    relocation_failures: int

    @property
    def feasible_trials(self) -> int:
        return self.trials - self.relocation_failures


def _oracle_vectorized(k, rows, max_tier, trials, seed) -> OracleResult:
    # Default models only: uniform placement, lowest-other relocation.
    rng = np.random.Generator(np.random.PCG64(seed))
    heights = np.zeros((trials, rows), dtype=np.int64)
    trial_ix = np.arange(trials)
    for _ in range(k):
        open_mask = heights < max_tier
        counts = open_mask.sum(axis=1)
        pick = rng.integers(0, counts)  # u-th open stack, per trial
        cum = np.cumsum(open_mask, axis=1)
        stack = (cum <= pick[:, None]).sum(axis=1)
        heights[trial_ix, stack] += 1

    chosen = rng.integers(0, k, size=trials)
    cum_h = np.cumsum(heights, axis=1)
    stack = (cum_h <= chosen[:, None]).sum(axis=1)
    pos = chosen - (cum_h[trial_ix, stack] - heights[trial_ix, stack])
    depth = heights[trial_ix, stack] - 1 - pos  # blockers above the pick

    work = heights.copy()
    remaining = depth.copy()
    failed = np.zeros(trials, dtype=bool)
    while True:
        active = (remaining > 0) & ~failed
        if not active.any():
            break
        cand = work < max_tier
        cand[trial_ix, stack] = False
        has_target = cand.any(axis=1)
        failed |= active & ~has_target
        move = active & has_target
        if move.any():
            masked = np.where(cand, work, max_tier + 1)
            target = masked.argmin(axis=1)  # ties: lowest index
            work[move, stack[move]] -= 1
            work[move, target[move]] += 1
            remaining[move] -= 1

    feasible = ~failed
    n = int(feasible.sum())
    vals = depth[feasible].astype(np.float64)
    mean = float(vals.mean()) if n else math.nan
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return OracleResult(mean=mean, se=se, trials=trials, relocation_failures=trials - n)


def _oracle_python(
    k, rows, max_tier, placement_model, relocation_policy, trials, seed, row_order
) -> OracleResult:
    order = list(row_order) if row_order is not None else list(range(rows))
    if sorted(order) != list(range(rows)):
        raise ValueError("row_order must be a permutation of range(rows)")
    rng = random.Random(seed)
    values = []
    failures = 0
    for _ in range(trials):
        heights = [0] * rows
        for _ in range(k):
            visit = [heights[r] for r in order]
            weights = [float(w) for w in placement_model.stack_weights(visit, max_tier)]
            slot = rng.choices(range(rows), weights=weights)[0]
            heights[order[slot]] += 1

        chosen = rng.randrange(k)
        acc = 0
        stack_visit = 0
        for j, r in enumerate(order):
            if chosen < acc + heights[r]:
                stack_visit = j
                break
            acc += heights[r]
        stack = order[stack_visit]
        depth = heights[stack] - 1 - (chosen - acc)

        work = [heights[r] for r in order]
        feasible = True
        for _ in range(depth):
            tgt = relocation_policy.target(tuple(work), stack_visit, max_tier)
            if tgt is None:
                feasible = False
                break
            work[stack_visit] -= 1
            work[tgt] += 1
        if feasible:
            values.append(depth)
        else:
            failures += 1

    n = len(values)
    mean = sum(values) / n if n else math.nan
    if n > 1:
        var = sum((v - mean) ** 2 for v in values) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    return OracleResult(mean=mean, se=se, trials=trials, relocation_failures=failures)


def monte_carlo_oracle(
    k: int,
    rows: int,
    max_tier: int,
    placement_model=DEFAULT_PLACEMENT,
    relocation_policy=DEFAULT_RELOCATION,
    trials: int = 200_000,
    seed: int = 0,
    row_order=None,
) -> OracleResult:
    """Simulate fill-then-first-pick episodes on distinguishable rows.

    Independent check of :func:`expected_rehandles`: place k arrivals on
    physical rows per the placement model, pick one container uniformly,
    relocate its blockers per the relocation policy and record the rehandle
    count. Trials whose relocation dead-ends are excluded from the mean and
    reported. Deterministic for a fixed seed. ``row_order`` relabels the
    physical rows (the mean is invariant; kept for the symmetry tests).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > rows * max_tier:
        raise CapacityExceeded(f"k={k} exceeds bay capacity {rows}*{max_tier}")
    fast = (
        isinstance(placement_model, UniformPlacement)
        and isinstance(relocation_policy, LowestOtherRelocation)
        and row_order is None
    )
    if fast:
        return _oracle_vectorized(k, rows, max_tier, trials, seed)
    return _oracle_python(
        k, rows, max_tier, placement_model, relocation_policy, trials, seed, row_order
    )


def rehandle_table(
    rows: int,
    max_tier: int,
    kmax: int | None = None,
    trials: int = 200_000,
    seed: int = 0,
    placement_model=DEFAULT_PLACEMENT,
    relocation_policy=DEFAULT_RELOCATION,
) -> list[dict]:
    """Analytic-vs-oracle table for k = 1..kmax (CLI report)."""
    if kmax is None:
        kmax = rows * max_tier
    if kmax > rows * max_tier:
        raise CapacityExceeded(f"kmax={kmax} exceeds bay capacity {rows}*{max_tier}")
    table = []
    for k in range(1, kmax + 1):
        mc = monte_carlo_oracle(
            k, rows, max_tier, placement_model, relocation_policy, trials=trials, seed=seed + k
        )
        table.append(
            {
                "R": rows,
                "T": max_tier,
                "k": k,
                "v_k": float(expected_rehandles(k, rows, max_tier, placement_model, relocation_policy)),
                "v_to_empty": float(
                    expected_rehandles_to_empty(k, rows, max_tier, placement_model, relocation_policy)
                ),
                "mc_mean": mc.mean,
                "mc_se": mc.se,
                "trials": mc.trials,
                "seed": seed + k,
            }
        )
    return table
