"""Seed-space growth: when to add a new seed id and what to run on it.

Policies decide when the discrete seed space grows: after a fixed number
of completed simulations, with a fixed per-check probability, or by a
user predicate over the emulator, dataset, and state.  On expansion the
workflow draws points that carry the new seed, either by re-seeding a
uniform draw from the refined grid (exploration, the default) or by
re-seeding the incumbent best coordinates (exploitation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataspace import DesignPoint

__all__ = [
    "ExpansionConfig",
    "ExpansionState",
    "check_for_expansion",
    "expand",
    "sample_from_expansion",
    "reseed_incumbents",
]

POLICIES = ("by-sims", "by-prob", "custom")


@dataclass(frozen=True)
class ExpansionConfig:
    """Initial seed-space size plus the growth policy and its parameters.

    policy "by-sims" triggers once ``nsims_expand`` simulations complete
    since the last expansion; "by-prob" triggers with probability ``p`` at
    each check; "custom" delegates to ``predicate(state, emulator,
    dataset)``.
    """

    nseeds: int
    nexpansion: int = 10
    policy: str = "by-sims"
    nsims_expand: int = 50
    p: float | None = None
    predicate: object = None

    def __post_init__(self):
        if self.nseeds < 1:
            raise ValueError("nseeds must be >= 1")
        if self.nexpansion < 0:
            raise ValueError("nexpansion must be >= 0")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        if self.policy == "by-sims" and self.nsims_expand < 1:
            raise ValueError("nsims_expand must be >= 1")
        if self.policy == "by-prob":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError("by-prob policy needs p in [0, 1]")
        if self.policy == "custom" and not callable(self.predicate):
            raise ValueError("custom policy needs a callable predicate")


@dataclass
class ExpansionState:
    """Mutable bookkeeping owned by the workflow's control loop."""

    current_k: int
    sims_since_expansion: int = 0
    expansion_events: list = field(default_factory=list)

    @classmethod
    def start(cls, config: ExpansionConfig, completed: int = 0) -> "ExpansionState":
        """Fresh state; ``completed`` seeds the counter with the evaluations
        already performed (the initial design counts toward the first check)."""
        return cls(current_k=config.nseeds, sims_since_expansion=int(completed))


def check_for_expansion(state: ExpansionState, config: ExpansionConfig,
                        rng: np.random.Generator, emulator=None, dataset=None) -> bool:
    """Should the seed space grow now?  Pure read except for by-prob's draw."""
    if config.policy == "by-sims":
        return state.sims_since_expansion >= config.nsims_expand
    if config.policy == "by-prob":
        return bool(rng.random() < config.p)
    return bool(config.predicate(state, emulator, dataset))


def expand(state: ExpansionState, config: ExpansionConfig, iteration: int) -> int:
    """Add the next contiguous seed id and record the event.

    The counter carries any overshoot past the by-sims interval instead of
    zeroing, so successive triggers stay aligned to absolute completed
    counts (multiples of nsims_expand past the initial design).
    """
    state.current_k += 1
    state.sims_since_expansion = max(0, state.sims_since_expansion - config.nsims_expand)
    state.expansion_events.append((int(iteration), state.current_k))
    return state.current_k


def sample_from_expansion(grid, nexpansion: int, new_seed: int,
                          rng: np.random.Generator) -> list[DesignPoint]:
    """Draw ``nexpansion`` grid points and stamp them with the new seed.

    Uniform without replacement from the refined grid; with replacement
    only when more samples are requested than the grid holds.
    """
    if nexpansion < 0:
        raise ValueError("nexpansion must be >= 0")
    if len(grid) == 0:
        raise ValueError("refined grid must be nonempty")
    if nexpansion == 0:
        return []
    replace = nexpansion > len(grid)
    idx = rng.choice(len(grid), size=nexpansion, replace=replace)
    return [DesignPoint(x=grid.X[i], r=int(new_seed)) for i in idx]


def reseed_incumbents(dataset, nexpansion: int, new_seed: int) -> list[DesignPoint]:
    """Exploitative expansion: re-run the best coordinates on the new seed.

    Takes the ``nexpansion`` distinct coordinate vectors with the lowest
    standardized objectives (fewer if the dataset holds fewer distinct
    ones), each stamped with the new seed.
    """
    if nexpansion < 0:
        raise ValueError("nexpansion must be >= 0")
    order = np.argsort(dataset.y_std, kind="stable")
    points = []
    seen = set()
    for i in order:
        key = dataset.X[i].tobytes()
        if key in seen:
            continue
        seen.add(key)
        points.append(DesignPoint(x=dataset.X[i], r=int(new_seed)))
        if len(points) == nexpansion:
            break
    return points
