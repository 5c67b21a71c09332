"""Reference calibration targets.

A spatial agent-based SIR simulator driven by common random numbers, where
an integer seed id controls only the index-case placement, plus a fast
analytic toy objective for tests.  Runs sharing a ``crn_stream_id`` consume
identical movement randomness, so outcome differences are attributable to
``beta`` and ``seed_id``.

Draw order (fixed so runs are reproducible):

1. initial positions, all agents, one ``uniform(0, extent, (n, 2))`` call;
2. per-step walk directions, one ``integers(0, 9, (horizon, n))`` call;
3. per step, one Bernoulli draw per (infected, susceptible-in-radius) pair,
   ordered by ascending infected agent id, then ascending susceptible id.

Movement draws come from the stream ``SeedSequence([crn_stream_id, 0])``
and infection draws from ``SeedSequence([crn_stream_id, 1])``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial.distance import cdist

from .dataspace import DesignPoint

__all__ = [
    "SirConfig",
    "Trajectory",
    "sir_run",
    "ground_truth",
    "toy_objective",
    "to_table",
]

# unit step in one of 8 compass directions, or stay; indexed by a draw in 0..8
DIRECTIONS = np.array(
    [[-1, -1], [-1, 0], [-1, 1], [0, -1], [0, 0], [0, 1], [1, -1], [1, 0], [1, 1]],
    dtype=float,
)

_SUSCEPTIBLE, _INFECTED, _RECOVERED = 0, 1, 2

# the index case occupies the lowest agent id so the infection draw order
# is unambiguous
_INDEX_AGENT = 0


@dataclass(frozen=True)
class SirConfig:
    """One SIR run: transmission probability, index placement, shared stream.

    ``seed_id`` r places the index case at (25 + r, 25 + r); r = 0 is the
    grid center.  ``crn_stream_id`` selects the movement/infection streams
    shared across runs.
    """

    beta: float
    seed_id: int
    crn_stream_id: int = 0
    n_agents: int = 2000
    grid_extent: float = 50.0
    horizon: int = 100
    infectious_period: int = 14
    contact_radius: float = 1.5

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.seed_id < 0 or self.seed_id != int(self.seed_id):
            raise ValueError("seed_id must be a nonnegative integer")
        if not 0.0 <= 25.0 + self.seed_id <= self.grid_extent:
            raise ValueError(
                f"index case (25+{self.seed_id}, 25+{self.seed_id}) lies outside "
                f"the {self.grid_extent} x {self.grid_extent} grid"
            )
        if self.crn_stream_id < 0:
            raise ValueError("crn_stream_id must be nonnegative")
        if self.n_agents < 1:
            raise ValueError("n_agents must be >= 1")
        if self.grid_extent <= 0:
            raise ValueError("grid_extent must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.infectious_period < 1:
            raise ValueError("infectious_period must be >= 1")
        if self.contact_radius <= 0:
            raise ValueError("contact_radius must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Per-step compartment counts; entry t is the state after step t."""

    infected_counts: np.ndarray
    cumulative_infections: np.ndarray
    susceptible_counts: np.ndarray
    recovered_counts: np.ndarray

    def __len__(self):
        return self.infected_counts.shape[0]


def _fold(z: np.ndarray, extent: float) -> np.ndarray:
    """Map free-walk coordinates into [0, extent] by boundary reflection."""
    m = np.mod(z, 2.0 * extent)
    return np.where(m > extent, 2.0 * extent - m, m)


@lru_cache(maxsize=4)
def _movement(crn_stream_id: int, n_agents: int, extent: float, horizon: int):
    """Integrated reflected-walk positions shared by every run of one stream.

    Returns (positions, steps): positions[t, i] is agent i's location after
    step t assuming its drawn starting point; steps[t - 1, i] is the raw
    direction draw.  The index case overrides its start elsewhere, so its
    column here is recomputed per run from the same step draws.
    """
    rng = np.random.default_rng(np.random.SeedSequence([crn_stream_id, 0]))
    init = rng.uniform(0.0, extent, size=(n_agents, 2))
    steps = rng.integers(0, 9, size=(horizon, n_agents))
    free = np.concatenate(
        [np.zeros((1, n_agents, 2)), np.cumsum(DIRECTIONS[steps], axis=0)]
    )
    positions = _fold(init[None, :, :] + free, extent)
    positions.setflags(write=False)
    steps.setflags(write=False)
    return positions, steps


def sir_run(config: SirConfig) -> Trajectory:
    """Run the agent-based SIR model once.

    All agents start Susceptible at stream-drawn uniform positions; the
    index case (agent 0) is moved to (25 + seed_id, 25 + seed_id) and
    infected.  Each step, every agent walks one reflected unit step, each
    infectious agent then draws a Bernoulli(beta) per susceptible agent
    within ``contact_radius``, and agents recover ``infectious_period``
    steps after infection (transmitting through their final step).
    """
    n, horizon = config.n_agents, config.horizon
    positions, steps = _movement(
        int(config.crn_stream_id), n, float(config.grid_extent), horizon
    )
    start = 25.0 + config.seed_id
    index_free = start + np.concatenate(
        [np.zeros((1, 2)), np.cumsum(DIRECTIONS[steps[:, _INDEX_AGENT]], axis=0)]
    )
    index_path = _fold(index_free, config.grid_extent)

    infect_rng = np.random.default_rng(
        np.random.SeedSequence([int(config.crn_stream_id), 1])
    )
    state = np.full(n, _SUSCEPTIBLE, dtype=np.int8)
    state[_INDEX_AGENT] = _INFECTED
    infection_step = np.full(n, -1, dtype=np.int64)
    infection_step[_INDEX_AGENT] = 0

    infected = np.zeros(horizon + 1, dtype=np.int64)
    cumulative = np.zeros(horizon + 1, dtype=np.int64)
    susceptible = np.zeros(horizon + 1, dtype=np.int64)
    recovered = np.zeros(horizon + 1, dtype=np.int64)
    infected[0] = 1
    cumulative[0] = 1
    susceptible[0] = n - 1

    r2 = config.contact_radius**2
    for t in range(1, horizon + 1):
        inf_idx = np.flatnonzero(state == _INFECTED)
        if inf_idx.size == 0:
            # epidemic over: remaining counts are constant
            infected[t:] = 0
            cumulative[t:] = cumulative[t - 1]
            susceptible[t:] = susceptible[t - 1]
            recovered[t:] = recovered[t - 1]
            break
        sus_idx = np.flatnonzero(state == _SUSCEPTIBLE)
        newly = np.empty(0, dtype=np.int64)
        if sus_idx.size:
            pos_inf = positions[t][inf_idx]
            if inf_idx[0] == _INDEX_AGENT:
                pos_inf[0] = index_path[t]
            d2 = cdist(pos_inf, positions[t][sus_idx], "sqeuclidean")
            pairs = np.argwhere(d2 <= r2)  # row-major: infected asc, susceptible asc
            if pairs.shape[0]:
                u = infect_rng.random(pairs.shape[0])
                hits = pairs[u < config.beta, 1]
                newly = sus_idx[np.unique(hits)]
        recovering = inf_idx[t - infection_step[inf_idx] >= config.infectious_period]
        state[recovering] = _RECOVERED
        if newly.size:
            state[newly] = _INFECTED
            infection_step[newly] = t
        infected[t] = np.count_nonzero(state == _INFECTED)
        cumulative[t] = cumulative[t - 1] + newly.size
        susceptible[t] = np.count_nonzero(state == _SUSCEPTIBLE)
        recovered[t] = np.count_nonzero(state == _RECOVERED)

    return Trajectory(
        infected_counts=infected,
        cumulative_infections=cumulative,
        susceptible_counts=susceptible,
        recovered_counts=recovered,
    )


def ground_truth(crn_stream_id: int = 0, **overrides) -> Trajectory:
    """The reference trajectory: beta = 0.069 with the index case centered."""
    return sir_run(
        SirConfig(beta=0.069, seed_id=0, crn_stream_id=crn_stream_id, **overrides)
    )


def toy_objective(point: DesignPoint) -> float:
    """Seed-shifted quadratic with a known minimizer per seed.

    Zero at x1 = 0.5 + 0.02 (r - 1), so each seed has a distinct optimum;
    cheap enough for end-to-end determinism tests.
    """
    return float((point.x[0] - 0.5 - 0.02 * (point.r - 1)) ** 2)


def to_table(trajectory: Trajectory) -> str:
    """Render a trajectory as comma-separated text (step, infected, cumulative)."""
    lines = ["step,infected,cumulative"]
    for t in range(len(trajectory)):
        lines.append(
            f"{t},{trajectory.infected_counts[t]},{trajectory.cumulative_infections[t]}"
        )
    return "\n".join(lines) + "\n"
