"""Generational genetic algorithm over binary genomes.

A population is a single uint8 array of shape ``(n_pop, n_slots,
n_components, depth)`` so fitness evaluation vectorizes across all
candidates.  Randomness comes from four named PCG64 streams derived from the
run seed (population init, parent selection, crossover cut points, mutation);
within a generation the draws happen in that fixed order, which makes every
run a pure function of (config, task, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import genome as genome_mod
from .genome import CodecConfig
from .tasks import TaskSpec, population_fitness

__all__ = [
    "GAConfig",
    "Population",
    "RngStreams",
    "RunRecord",
    "crossover",
    "evaluate",
    "fitness_fluctuation",
    "mutate",
    "next_generation",
    "run",
    "select_pair",
    "selection_probabilities",
]

STREAM_LABELS = ("init", "selection", "crossover", "mutation")

CROSSOVER_MODES = ("two-point-segment",)

TERMINATED_CONVERGED = "converged"
TERMINATED_CAP = "generation-cap"


@dataclass(frozen=True)
class RngStreams:
    """The four labeled random streams of one run."""

    init: np.random.Generator
    selection: np.random.Generator
    crossover: np.random.Generator
    mutation: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RngStreams":
        # stream k uses PCG64 seeded by SeedSequence(seed, spawn_key=(k,)),
        # k following STREAM_LABELS order; ports must match this derivation
        gens = [
            np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(k,))))
            for k in range(len(STREAM_LABELS))
        ]
        return cls(*gens)


@dataclass(frozen=True)
class GAConfig:
    """Search settings; ``codec`` and ``n_slots`` fix the genome shape."""

    n_pop: int
    threshold: float
    codec: CodecConfig
    n_slots: int
    mutation_rate: float = 0.0
    crossover_mode: str = "two-point-segment"
    elitism: int = 0
    max_generations: int = 500

    def __post_init__(self):
        if self.n_pop < 2:
            raise ValueError(f"population size must be >= 2, got {self.n_pop}")
        if not self.threshold > 0:
            raise ValueError(f"termination threshold must be positive, got {self.threshold}")
        if self.n_slots < 1:
            raise ValueError(f"n_slots must be >= 1, got {self.n_slots}")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError(f"mutation rate must be in [0, 1], got {self.mutation_rate}")
        if self.crossover_mode not in CROSSOVER_MODES:
            raise ValueError(f"unknown crossover mode {self.crossover_mode!r}")
        if not 0 <= self.elitism <= self.n_pop:
            raise ValueError(f"elitism must be in [0, n_pop], got {self.elitism}")
        if self.max_generations < 1:
            raise ValueError(f"max_generations must be >= 1, got {self.max_generations}")


@dataclass
class Population:
    """Genome stack plus cached fitness (descending after evaluation)."""

    genomes: np.ndarray
    fitness: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.genomes.shape[0]

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    @property
    def mean_fitness(self) -> float:
        return float(self.fitness.mean())

    @property
    def best_fitness(self) -> float:
        return float(self.fitness[0])

    @property
    def best_genome(self) -> np.ndarray:
        return self.genomes[0]


@dataclass
class RunRecord:
    """Telemetry of one run.

    Per-generation series all have length ``q_c``; ``best_genome`` and the
    derived ``best_fitness``/``epsilon_opt`` describe the top individual of
    the final generation, i.e. the solution the run hands back.
    """

    seed: int
    config: GAConfig
    mean_fitness: np.ndarray
    fluctuation: np.ndarray
    best_fitness_series: np.ndarray
    q_c: int
    termination_reason: str
    best_genome: np.ndarray
    best_fitness: float
    epsilon_opt: float


def selection_probabilities(n_pop: int) -> np.ndarray:
    """Rank-selection distribution: weight n_pop**(-(n-1)/(n_pop-1)) for rank n.

    Strictly decreasing, normalized to one, and the worst rank's probability
    is exactly the best rank's divided by ``n_pop``.
    """
    if n_pop < 2:
        raise ValueError(f"rank selection needs n_pop >= 2, got {n_pop}")
    ranks = np.arange(n_pop, dtype=float)
    w = float(n_pop) ** (-ranks / (n_pop - 1))
    p = w / w.sum()
    p[-1] = p[0] / n_pop  # pin the exact tail identity against libm rounding
    return p


def _draw_rank(cum: np.ndarray, rng: np.random.Generator) -> int:
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    return min(idx, len(cum) - 1)


def select_pair(pop: Population, probs: np.ndarray, rng: np.random.Generator):
    """Two distinct ranks drawn from the selection distribution.

    The second rank is redrawn until it differs from the first.
    """
    if len(probs) != pop.size:
        raise ValueError(f"probability table size {len(probs)} != population {pop.size}")
    cum = np.cumsum(probs)
    first = _draw_rank(cum, rng)
    second = _draw_rank(cum, rng)
    while second == first:
        second = _draw_rank(cum, rng)
    return first, second


@lru_cache(maxsize=None)
def _segment_masks(depth: int) -> np.ndarray:
    """Boolean swap masks for every cut pair 1 <= s <= e <= depth (lexicographic)."""
    rows = []
    for s in range(1, depth + 1):
        for e in range(s, depth + 1):
            row = np.zeros(depth, dtype=bool)
            row[s - 1 : e] = True
            rows.append(row)
    table = np.stack(rows)
    table.flags.writeable = False
    return table


def crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator):
    """Exchange one uniformly chosen contiguous gene segment per chromosome.

    Every chromosome position in the genome gets its own cut pair, drawn
    uniformly over the ``L(L+1)/2`` ordered pairs.  Returns two offspring;
    the multiset of genes at each position is conserved across the pair.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"parent shapes do not match: {a.shape} vs {b.shape}")
    masks = _segment_masks(a.shape[-1])
    picks = rng.integers(0, len(masks), size=a.shape[:-1])
    m = masks[picks]
    return np.where(m, b, a), np.where(m, a, b)


def mutate(g: np.ndarray, p_mut: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each gene independently with probability ``p_mut``.

    A zero rate returns the genome unchanged and consumes no randomness.
    """
    if not 0.0 <= p_mut <= 1.0:
        raise ValueError(f"mutation probability must be in [0, 1], got {p_mut}")
    g = np.asarray(g)
    if p_mut == 0.0:
        return g
    flips = rng.random(g.shape) < p_mut
    return np.where(flips, 1 - g, g).astype(np.uint8)


def fitness_fluctuation(pop: Population) -> float:
    """Population standard deviation of fitness (the termination statistic)."""
    f = pop.fitness
    mean = f.mean()
    var = float((f * f).mean() - mean * mean)
    return math.sqrt(max(var, 0.0))  # radicand can dip ~-1e-16 in floats


def evaluate(pop: Population, task: TaskSpec, codec: CodecConfig) -> Population:
    """Score every genome and sort descending (stable, so ties keep order)."""
    params = genome_mod.decode(pop.genomes, codec)
    fitness = population_fitness(task, params)
    order = np.argsort(-fitness, kind="stable")
    return Population(pop.genomes[order], fitness[order])


def next_generation(pop: Population, cfg: GAConfig, task: TaskSpec,
                    streams: RngStreams) -> Population:
    """Breed, score, and sort the successor population.

    The top ``elitism`` individuals are copied unchanged; remaining slots are
    filled pair by pair (select two distinct parents, exchange segments,
    mutate both) with any excess offspring discarded.
    """
    if not pop.evaluated:
        raise ValueError("population must be evaluated before breeding")
    probs = selection_probabilities(cfg.n_pop)
    children = [pop.genomes[i] for i in range(cfg.elitism)]
    while len(children) < cfg.n_pop:
        first, second = select_pair(pop, probs, streams.selection)
        kid_a, kid_b = crossover(pop.genomes[first], pop.genomes[second], streams.crossover)
        kid_a = mutate(kid_a, cfg.mutation_rate, streams.mutation)
        kid_b = mutate(kid_b, cfg.mutation_rate, streams.mutation)
        children.append(kid_a)
        if len(children) < cfg.n_pop:
            children.append(kid_b)
    return evaluate(Population(np.stack(children)), task, cfg.codec)


def run(cfg: GAConfig, task: TaskSpec, seed: int) -> RunRecord:
    """One full search: random population, evolve until the fitness spread
    drops below the threshold or the generation cap is reached.

    Deterministic in (cfg, task, seed); a cap stop is a valid outcome, not an
    error.  Generation indices are 1-based and ``q_c`` counts evaluated
    generations, so the initial random population is generation 1.  The
    initial genomes are one uint8 draw of shape (n_pop, n_slots, components,
    depth) from the init stream, fixed here so ports can match run for run.
    """
    if cfg.n_slots != task.n_slots:
        raise ValueError(f"config expects {cfg.n_slots} slots, task has {task.n_slots}")
    if cfg.codec.dim != task.dim:
        raise ValueError(f"codec dimension {cfg.codec.dim} != task dimension {task.dim}")
    streams = RngStreams.from_seed(seed)
    genomes = streams.init.integers(
        0, 2, size=(cfg.n_pop, cfg.n_slots, cfg.codec.n_components, cfg.codec.depth),
        dtype=np.uint8,
    )
    pop = evaluate(Population(genomes), task, cfg.codec)

    means, flucts, bests = [], [], []
    generation = 0
    while True:
        generation += 1
        spread = fitness_fluctuation(pop)
        means.append(pop.mean_fitness)
        flucts.append(spread)
        bests.append(pop.best_fitness)
        if spread < cfg.threshold:
            reason = TERMINATED_CONVERGED
            break
        if generation >= cfg.max_generations:
            reason = TERMINATED_CAP
            break
        pop = next_generation(pop, cfg, task, streams)

    best = float(pop.best_fitness)
    return RunRecord(
        seed=seed,
        config=cfg,
        mean_fitness=np.array(means),
        fluctuation=np.array(flucts),
        best_fitness_series=np.array(bests),
        q_c=generation,
        termination_reason=reason,
        best_genome=pop.best_genome.copy(),
        best_fitness=best,
        epsilon_opt=1.0 - best,
    )
