"""Differential evolution in a bounded box, with population memory.

The scheme is classic rand/1/bin: for each member x_i pick three distinct
partners a, b, c (all different from i), build the mutant
x_a + w * (x_b - x_c), clamp it into the box, binomially cross it with x_i
(one coordinate, the forced index, always comes from the mutant), and keep
the trial only if it is STRICTLY better. Ties keep the incumbent, which is
what makes repeated runs on an unchanged objective stick to their previous
solution once it is seeded back in.

Memory vectors are injected verbatim into the first slots of the otherwise
uniform initial population, most recent first.

Determinism contract: all randomness comes from one numpy PCG64 generator
seeded with ``config.rng_seed``, and trial evaluation is batched per
iteration with selection applied afterwards, so results are independent of
how the evaluations are scheduled. Same seed + config + memory means a
bit-identical outcome on a given platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = ["DEConfig", "DEMemory", "DEOutcome", "de_minimize", "push_memory"]


@dataclass(frozen=True)
class DEConfig:
    bounds: tuple
    population_size: int = 200
    crossover_prob: float = 0.5
    differential_weight: float = 0.8
    max_iterations: int = 250
    rng_seed: int = 0

    def __post_init__(self) -> None:
        lower = np.asarray([b[0] for b in self.bounds], dtype=float)
        upper = np.asarray([b[1] for b in self.bounds], dtype=float)
        if lower.size == 0:
            raise ValueError("bounds must be non-empty")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        if np.any(lower >= upper):
            raise ValueError("each lower bound must be below its upper bound")
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4 (three partners plus self)")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must be in [0, 1]")
        if not 0.0 <= self.differential_weight <= 1.0:
            raise ValueError("differential_weight must be in [0, 1]")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    def lower_upper(self) -> tuple[np.ndarray, np.ndarray]:
        lower = np.asarray([b[0] for b in self.bounds], dtype=float)
        upper = np.asarray([b[1] for b in self.bounds], dtype=float)
        return lower, upper


@dataclass(frozen=True)
class DEMemory:
    """FIFO ring of recent solutions, each validated against the box."""

    bounds: tuple
    capacity: int = 50
    ring: tuple = ()

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if len(self.ring) > self.capacity:
            raise ValueError("ring longer than capacity")

    def __len__(self) -> int:
        return len(self.ring)

    def newest_first(self) -> list[np.ndarray]:
        return [np.asarray(v, dtype=float) for v in reversed(self.ring)]


def push_memory(memory: DEMemory, solution: np.ndarray) -> DEMemory:
    """Append a solution; the oldest entry is evicted at capacity."""
    sol = np.asarray(solution, dtype=float)
    lower = np.asarray([b[0] for b in memory.bounds], dtype=float)
    upper = np.asarray([b[1] for b in memory.bounds], dtype=float)
    if sol.shape != lower.shape:
        raise ValueError(f"solution has shape {sol.shape}, expected {lower.shape}")
    if np.any(sol < lower) or np.any(sol > upper):
        raise ValueError(f"solution {sol} outside bounds")
    ring = memory.ring + (tuple(float(v) for v in sol),)
    if len(ring) > memory.capacity:
        ring = ring[len(ring) - memory.capacity :]
    return DEMemory(bounds=memory.bounds, capacity=memory.capacity, ring=ring)


@dataclass(frozen=True)
class DEOutcome:
    best_vector: np.ndarray
    best_value: float
    history: tuple = field(repr=False, default=())
    evaluations: int = 0

    def __post_init__(self) -> None:
        if self.history and self.history[-1] != self.best_value:
            raise ValueError("best_value must equal the last history entry")


def _distinct_partners(rng: np.random.Generator, v: int) -> tuple[np.ndarray, ...]:
    """Index arrays a, b, c with a, b, c, i all distinct for every row i."""
    own = np.arange(v)
    picks = []
    for _ in range(3):
        cand = rng.integers(0, v, size=v)
        while True:
            bad = cand == own
            for prev in picks:
                bad |= cand == prev
            if not bad.any():
                break
            cand[bad] = rng.integers(0, v, size=int(bad.sum()))
        picks.append(cand)
    return tuple(picks)


def _crossover_mask(rng: np.random.Generator, v: int, d: int, pi: float) -> np.ndarray:
    """Binomial crossover mask; one forced column per row is always True."""
    mask = rng.random((v, d)) < pi
    forced = rng.integers(0, d, size=v)
    mask[np.arange(v), forced] = True
    return mask


def _evaluate(objective, pop: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        out = np.asarray(objective(pop), dtype=float)
        if out.shape != (len(pop),):
            raise ValueError("vectorized objective must return one value per row")
        return out
    return np.asarray([float(objective(row)) for row in pop])


def de_minimize(
    objective: Callable,
    config: DEConfig,
    memory: DEMemory | Sequence | None = None,
    vectorized: bool = False,
    init_observer: Callable | None = None,
) -> DEOutcome:
    """Minimize ``objective`` over the box.

    ``memory`` may be a DEMemory or any sequence of in-box vectors; its
    entries replace the first slots of the random initial population.
    ``init_observer``, when given, receives a copy of the initial population
    (introspection hook for tests). ``history[0]`` is the best value of the
    initial population; one entry is appended per iteration.
    """
    lower, upper = config.lower_upper()
    v, d = config.population_size, config.dimension
    rng = np.random.Generator(np.random.PCG64(config.rng_seed))

    pop = lower + rng.random((v, d)) * (upper - lower)
    if memory is not None:
        seeds = memory.newest_first() if isinstance(memory, DEMemory) else list(memory)
        for i, vec in enumerate(seeds[:v]):
            pop[i] = np.asarray(vec, dtype=float)
    if init_observer is not None:
        init_observer(pop.copy())

    values = _evaluate(objective, pop, vectorized)
    evaluations = v
    best_idx = int(np.argmin(values))
    best_x = pop[best_idx].copy()
    best_f = float(values[best_idx])
    history = [best_f]

    w = config.differential_weight
    for _ in range(config.max_iterations):
        a, b, c = _distinct_partners(rng, v)
        mutant = pop[a] + w * (pop[b] - pop[c])
        np.clip(mutant, lower, upper, out=mutant)
        mask = _crossover_mask(rng, v, d, config.crossover_prob)
        trial = np.where(mask, mutant, pop)
        trial_values = _evaluate(objective, trial, vectorized)
        evaluations += v
        improved = trial_values < values  # strict: ties keep the incumbent
        pop[improved] = trial[improved]
        values[improved] = trial_values[improved]
        idx = int(np.argmin(values))
        if values[idx] < best_f:
            best_f = float(values[idx])
            best_x = pop[idx].copy()
        history.append(best_f)

    return DEOutcome(
        best_vector=best_x,
        best_value=best_f,
        history=tuple(history),
        evaluations=evaluations,
    )
