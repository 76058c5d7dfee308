"""Seeded Monte Carlo execution of policies.

Randomness comes from a counter-based generator (Philox) keyed by the seed.
Each trial owns a fixed-size window of the stream — trial i reads the
doubles [i*D, (i+1)*D) where D is the per-trial draw budget — so trial i's
randomness is a pure function of (seed, i). Serial, chunked, and
partitioned runs therefore produce bit-identical reports, and
:func:`trial_stream` reconstructs any single trial's generator directly.
"""

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .model import Problem, placement_distribution
from .policies import Policy

_CHUNK_TRIALS = 1 << 17
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimulationReport:
    """Aggregate of independent trials of one policy."""

    trials: int
    mean_cost: float
    std_error: float
    found_rate: float
    histogram: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "histogram", MappingProxyType(dict(self.histogram)))


def draws_per_trial(problem: Problem) -> int:
    """Per-trial draw budget: one uniform for the placement plus one per urn
    for red positions, padded to a multiple of 4 (one Philox block yields
    four doubles, which keeps per-trial windows block-aligned)."""
    return 4 * ((1 + problem.n_urns + 3) // 4)


def _philox(seed: int) -> np.random.Philox:
    seed = seed & ((1 << 128) - 1)
    return np.random.Philox(key=np.array([seed & _MASK64, seed >> 64], dtype=np.uint64))


def trial_stream(problem: Problem, seed: int, index: int) -> np.random.Generator:
    """Generator positioned at trial ``index``'s window of the seed's stream."""
    bits = _philox(seed)
    bits.advance(index * draws_per_trial(problem) // 4)
    return np.random.Generator(bits)


def _placement_cumulative(problem: Problem) -> np.ndarray:
    """Cumulative placement probabilities indexed by subset bitmask (cached)."""
    cached = problem.__dict__.get("_placement_cum")
    if cached is None:
        probs = [outcome.probability for outcome in placement_distribution(problem)]
        cached = np.cumsum(np.array(probs, dtype=np.float64))
        object.__setattr__(problem, "_placement_cum", cached)
    return cached


def sample_placement(problem: Problem, rng: np.random.Generator) -> int:
    """Sample a red-marble placement (subset bitmask) from the exact
    placement distribution. Consumes one uniform."""
    return _placement_from_uniform(problem, rng.random())


def _placement_from_uniform(problem: Problem, u: float) -> int:
    cum = _placement_cumulative(problem)
    return min(int(np.searchsorted(cum, u, side="right")), len(cum) - 1)


def _urn_stages(problem: Problem, policy: Policy) -> list[list[int]]:
    stages: list[list[int]] = [[] for _ in range(problem.n_urns)]
    for t, u in enumerate(policy.sequence):
        stages[u].append(t)
    return stages


def run_trial(problem: Problem, policy: Policy, rng: np.random.Generator) -> tuple[int, bool]:
    """Execute one trial: sample a placement and, for each urn holding a red
    marble, a uniform red position; walk the policy until the first red
    draw or exhaustion. Returns (blue draws made, red found).

    Consumes exactly :func:`draws_per_trial` doubles so that trials tile
    the stream; position uniforms are drawn for every urn, placed or not.
    """
    policy.validate_for(problem)
    vals = rng.random(draws_per_trial(problem))
    mask = _placement_from_uniform(problem, vals[0])
    stages = _urn_stages(problem, policy)
    total = problem.total_marbles

    first_red = total
    for i in range(problem.n_urns):
        if mask >> i & 1:
            position = int(vals[1 + i] * problem.urns[i].marbles)
            first_red = min(first_red, stages[i][position])
    if first_red < total:
        return first_red, True
    return total, False


def simulate(problem: Problem, policy: Policy, trials: int, seed: int) -> SimulationReport:
    """Run ``trials`` independent trials and aggregate.

    Deterministic for fixed (problem, policy, trials, seed): cost sums and
    the histogram are integers, so aggregation order cannot perturb the
    result. Trials are processed in vectorized chunks whose boundaries fall
    on per-trial windows, matching :func:`run_trial` bit for bit.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    policy.validate_for(problem)

    n = problem.n_urns
    total = problem.total_marbles
    budget = draws_per_trial(problem)
    cum = _placement_cumulative(problem)
    stage_arrays = [np.array(s, dtype=np.int64) for s in _urn_stages(problem, policy)]
    sizes = np.array([u.marbles for u in problem.urns], dtype=np.float64)

    gen = np.random.Generator(_philox(seed))
    counts = np.zeros(total + 1, dtype=np.int64)
    cost_sum = 0
    cost_sqsum = 0
    found_count = 0

    done = 0
    while done < trials:
        m = min(_CHUNK_TRIALS, trials - done)
        vals = gen.random((m, budget))
        masks = np.minimum(np.searchsorted(cum, vals[:, 0], side="right"), len(cum) - 1)
        first_red = np.full(m, total, dtype=np.int64)
        for i in range(n):
            placed = (masks >> i & 1).astype(bool)
            positions = (vals[:, 1 + i] * sizes[i]).astype(np.int64)
            first_red = np.where(
                placed, np.minimum(first_red, stage_arrays[i][positions]), first_red
            )
        found = first_red < total
        costs = np.where(found, first_red, total)

        counts += np.bincount(costs, minlength=total + 1)
        cost_sum += int(costs.sum())
        cost_sqsum += int((costs * costs).sum())
        found_count += int(found.sum())
        done += m

    mean = cost_sum / trials
    if trials > 1:
        variance = max(0.0, (cost_sqsum - cost_sum * cost_sum / trials) / (trials - 1))
        std_error = math.sqrt(variance / trials)
    else:
        std_error = 0.0
    histogram = {int(c): int(f) for c, f in enumerate(counts) if f}
    return SimulationReport(trials, mean, std_error, found_count / trials, histogram)
