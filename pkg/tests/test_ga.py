import math

import numpy as np
import pytest

from evogate import ga, genome, tasks
from evogate.ga import GAConfig, Population, RngStreams
from evogate.genome import CodecConfig

CODEC = CodecConfig(depth=15, dim=2)
TASK = tasks.deutsch_task()


def make_config(n_pop=20, **kw):
    defaults = dict(n_pop=n_pop, threshold=1e-4, codec=CODEC, n_slots=2)
    defaults.update(kw)
    return GAConfig(**defaults)


def random_population(n_pop, seed=0):
    rng = np.random.default_rng(seed)
    genomes = rng.integers(0, 2, size=(n_pop, 2, 3, 15), dtype=np.uint8)
    return Population(genomes)


# ---------------------------------------------------------------- selection

def test_selection_probabilities_two_individuals():
    p = ga.selection_probabilities(2)
    assert p[0] == 2.0 / 3.0
    assert p[1] == 1.0 / 3.0


def test_selection_rank_identity_exact():
    for n in range(2, 401):
        p = ga.selection_probabilities(n)
        assert p[-1] == p[0] / n


def test_selection_probabilities_shape():
    p = ga.selection_probabilities(100)
    assert np.all(np.diff(p) < 0)
    assert abs(p.sum() - 1.0) <= 1e-12
    with pytest.raises(ValueError):
        ga.selection_probabilities(1)


def test_select_pair_two_individuals():
    pop = random_population(2)
    probs = ga.selection_probabilities(2)
    rng = np.random.default_rng(0)
    for _ in range(50):
        pair = ga.select_pair(pop, probs, rng)
        assert set(pair) == {0, 1}


def test_select_pair_bounds_and_distinctness():
    pop = random_population(10)
    probs = ga.selection_probabilities(10)
    rng = np.random.default_rng(1)
    for _ in range(2000):
        a, b = ga.select_pair(pop, probs, rng)
        assert 0 <= a < 10 and 0 <= b < 10
        assert a != b


def test_select_pair_first_rank_frequency():
    # the first parent is an unconditioned rank draw
    n = 10
    pop = random_population(n)
    probs = ga.selection_probabilities(n)
    rng = np.random.default_rng(123)
    draws = 100_000
    hits = sum(ga.select_pair(pop, probs, rng)[0] == 0 for _ in range(draws))
    sigma = np.sqrt(draws * probs[0] * (1 - probs[0]))
    assert abs(hits - draws * probs[0]) <= 3 * sigma


# ---------------------------------------------------------------- crossover

def test_crossover_identical_parents():
    rng = np.random.default_rng(2)
    a = rng.integers(0, 2, size=(2, 3, 15), dtype=np.uint8)
    c1, c2 = ga.crossover(a, a.copy(), np.random.default_rng(3))
    assert np.array_equal(c1, a)
    assert np.array_equal(c2, a)


def test_crossover_conserves_bits_per_position():
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        a = rng.integers(0, 2, size=(2, 3, 8), dtype=np.uint8)
        b = rng.integers(0, 2, size=(2, 3, 8), dtype=np.uint8)
        c1, c2 = ga.crossover(a, b, rng)
        assert np.array_equal(
            c1.astype(np.int64) + c2.astype(np.int64),
            a.astype(np.int64) + b.astype(np.int64),
        )


def test_crossover_swaps_one_contiguous_segment():
    # with all-zero vs all-one parents the offspring exposes the swap mask
    depth = 6
    a = np.zeros((1, 1, depth), dtype=np.uint8)
    b = np.ones((1, 1, depth), dtype=np.uint8)
    rng = np.random.default_rng(7)
    n_pairs = depth * (depth + 1) // 2
    draws = 4200
    counts = {}
    for _ in range(draws):
        c1, _ = ga.crossover(a, b, rng)
        mask = c1[0, 0]
        ones = np.flatnonzero(mask)
        assert ones.size >= 1  # a cut pair always swaps something
        assert np.all(np.diff(ones) == 1)  # contiguous
        key = (int(ones[0]), int(ones[-1]))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == n_pairs  # every ordered cut pair occurs
    # and uniformly: each within 4 binomial sigma of draws / n_pairs
    expected = draws / n_pairs
    sigma = math.sqrt(draws * (1 / n_pairs) * (1 - 1 / n_pairs))
    worst = max(abs(c - expected) for c in counts.values())
    assert worst <= 4 * sigma


def test_crossover_shape_mismatch():
    with pytest.raises(ValueError):
        ga.crossover(
            np.zeros((1, 3, 5), dtype=np.uint8),
            np.zeros((2, 3, 5), dtype=np.uint8),
            np.random.default_rng(0),
        )


# ---------------------------------------------------------------- mutation

def test_mutate_zero_rate_is_identity():
    g = np.ones((2, 3, 15), dtype=np.uint8)
    assert np.array_equal(ga.mutate(g, 0.0, np.random.default_rng(0)), g)


def test_mutate_full_rate_is_complement():
    rng = np.random.default_rng(1)
    g = rng.integers(0, 2, size=(2, 3, 15), dtype=np.uint8)
    assert np.array_equal(ga.mutate(g, 1.0, np.random.default_rng(2)), 1 - g)


def test_mutate_flip_fraction():
    g = np.zeros((1, 1, 1_000_000), dtype=np.uint8)
    flipped = ga.mutate(g, 0.01, np.random.default_rng(3)).mean()
    assert 0.008 <= flipped <= 0.012


def test_mutate_rejects_bad_rate():
    g = np.zeros((1, 1, 4), dtype=np.uint8)
    with pytest.raises(ValueError):
        ga.mutate(g, -0.1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        ga.mutate(g, 1.1, np.random.default_rng(0))


# ------------------------------------------------------------- fluctuation

def test_fluctuation_uniform_population():
    pop = Population(np.zeros((4, 1, 3, 5), dtype=np.uint8), np.full(4, 0.7))
    assert ga.fitness_fluctuation(pop) == 0.0


def test_fluctuation_extreme_split():
    pop = Population(np.zeros((2, 1, 3, 5), dtype=np.uint8), np.array([1.0, 0.0]))
    assert ga.fitness_fluctuation(pop) == 0.5


def test_fluctuation_bounded():
    rng = np.random.default_rng(6)
    for _ in range(100):
        f = rng.uniform(0, 1, size=rng.integers(2, 30))
        pop = Population(np.zeros((f.size, 1, 3, 5), dtype=np.uint8), f)
        assert 0.0 <= ga.fitness_fluctuation(pop) <= 0.5


# ---------------------------------------------------------------- evaluate

def test_evaluate_sorts_descending():
    pop = ga.evaluate(random_population(30, seed=9), TASK, CODEC)
    assert np.all(np.diff(pop.fitness) <= 0)
    assert np.all((pop.fitness >= 0) & (pop.fitness <= 1))


def test_evaluate_scores_known_genomes():
    p_h = (np.pi / 2) * np.array([1 / np.sqrt(2), 0.0, 1 / np.sqrt(2)])
    near_h = np.stack([genome.encode_nearest(p_h, CODEC)] * 2)
    near_id = np.stack([genome.encode_nearest(np.zeros(3), CODEC)] * 2)
    pop = ga.evaluate(Population(np.stack([near_id, near_h])), TASK, CODEC)
    bound = genome.rounding_error_bound(CODEC, 2)
    assert pop.fitness[0] >= 1.0 - bound  # near-perfect solution ranks first
    assert abs(pop.fitness[1] - 0.5) <= 1e-3  # near-identity cannot see balance


# --------------------------------------------------------- next generation

def test_next_generation_full_elitism_copies_population():
    cfg = make_config(n_pop=12, elitism=12)
    pop = ga.evaluate(random_population(12, seed=4), TASK, CODEC)
    nxt = ga.next_generation(pop, cfg, TASK, RngStreams.from_seed(0))
    assert np.array_equal(nxt.genomes, pop.genomes)
    assert np.array_equal(nxt.fitness, pop.fitness)


@pytest.mark.parametrize("n_pop", [5, 8])
def test_next_generation_size(n_pop):
    cfg = make_config(n_pop=n_pop)
    pop = ga.evaluate(random_population(n_pop, seed=1), TASK, CODEC)
    nxt = ga.next_generation(pop, cfg, TASK, RngStreams.from_seed(5))
    assert nxt.size == n_pop


def test_next_generation_homogeneous_fixed_point():
    g = np.random.default_rng(10).integers(0, 2, size=(1, 2, 3, 15), dtype=np.uint8)
    genomes = np.repeat(g, 6, axis=0)
    cfg = make_config(n_pop=6)
    pop = ga.evaluate(Population(genomes), TASK, CODEC)
    nxt = ga.next_generation(pop, cfg, TASK, RngStreams.from_seed(2))
    assert np.array_equal(nxt.genomes, pop.genomes)


def test_next_generation_requires_evaluated_population():
    cfg = make_config(n_pop=6)
    with pytest.raises(ValueError):
        ga.next_generation(random_population(6), cfg, TASK, RngStreams.from_seed(0))


def test_elitism_makes_best_fitness_monotone():
    cfg = make_config(n_pop=10, elitism=1, threshold=1e-9, max_generations=30)
    record = ga.run(cfg, TASK, seed=3)
    assert np.all(np.diff(record.best_fitness_series) >= 0)


# --------------------------------------------------------------------- run

def test_run_is_deterministic():
    cfg = make_config(n_pop=15, max_generations=40)
    a = ga.run(cfg, TASK, seed=11)
    b = ga.run(cfg, TASK, seed=11)
    assert a.q_c == b.q_c
    assert a.termination_reason == b.termination_reason
    assert np.array_equal(a.mean_fitness, b.mean_fitness)
    assert np.array_equal(a.fluctuation, b.fluctuation)
    assert np.array_equal(a.best_fitness_series, b.best_fitness_series)
    assert np.array_equal(a.best_genome, b.best_genome)
    assert a.best_fitness == b.best_fitness
    assert a.epsilon_opt == b.epsilon_opt


def test_run_huge_threshold_stops_immediately():
    # the fluctuation never exceeds 0.5, so h = 1 stops at generation 1
    cfg = make_config(n_pop=10, threshold=1.0)
    record = ga.run(cfg, TASK, seed=0)
    assert record.q_c == 1
    assert record.termination_reason == "converged"
    assert len(record.mean_fitness) == 1


def test_run_generation_cap():
    cfg = make_config(n_pop=6, threshold=1e-12, max_generations=4)
    record = ga.run(cfg, TASK, seed=1)
    assert record.termination_reason in ("generation-cap", "converged")
    assert record.q_c <= 4
    if record.termination_reason == "generation-cap":
        assert record.q_c == 4


def test_run_series_are_bounded():
    cfg = make_config(n_pop=25, max_generations=80)
    record = ga.run(cfg, TASK, seed=7)
    assert record.q_c == len(record.mean_fitness) == len(record.fluctuation)
    assert np.all((record.mean_fitness >= 0) & (record.mean_fitness <= 1))
    assert np.all((record.fluctuation >= 0) & (record.fluctuation <= 0.5))
    assert 0.0 <= record.epsilon_opt <= 1.0
    assert record.best_fitness == record.best_fitness_series[-1]


def test_run_deutsch_terminates_quickly():
    cfg = make_config(n_pop=100, max_generations=300)
    for seed in (1, 2, 3):
        record = ga.run(cfg, TASK, seed=seed)
        assert record.termination_reason == "converged"
        assert record.q_c <= 60


def test_run_validates_config_against_task():
    bad_slots = make_config(n_pop=6, n_slots=3)
    with pytest.raises(ValueError):
        ga.run(bad_slots, TASK, seed=0)
    bad_dim = make_config(n_pop=6, codec=CodecConfig(depth=15, dim=3), n_slots=2)
    with pytest.raises(ValueError):
        ga.run(bad_dim, TASK, seed=0)


def test_config_validation():
    with pytest.raises(ValueError):
        make_config(n_pop=1)
    with pytest.raises(ValueError):
        make_config(threshold=0.0)
    with pytest.raises(ValueError):
        make_config(mutation_rate=1.5)
    with pytest.raises(ValueError):
        make_config(elitism=25)
    with pytest.raises(ValueError):
        make_config(max_generations=0)
    with pytest.raises(ValueError):
        make_config(crossover_mode="uniform")
