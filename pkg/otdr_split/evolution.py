"""Classical differential evolution (rand/1/bin) over fixed-length real
vectors, with reproducible results whatever the number of workers"""
import logging
import math
import time
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .base import ParameterError

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]

# called after each generation with (generation, best); True stops the run
EarlyStop = Callable[[int, "Individual"], bool]

Bounds = Tuple[Tuple[float, float], ...]


@dataclass(frozen=True)
class DeConfig:
    """Settings of a differential evolution run.

    Attributes:
        population_size (int): individuals per generation (N). At least 4:
            a target plus three distinct donors.
        generations (int): number of generations to run (G)
        crossover_rate (float): binomial crossover probability C in [0, 1]
        scale_factor (float): differential weight eta > 0
        seed (int): seed of the random generator
        workers (int): concurrent fitness evaluations per generation
        bounds (tuple of (lo, hi) pairs, optional): the search box, one pair
            per dimension. Callers such as the separator may fill it in.
    """

    population_size: int = 100
    generations: int = 400
    crossover_rate: float = 0.3
    scale_factor: float = 0.05
    seed: int = 0
    workers: int = 1
    bounds: Optional[Bounds] = None

    def __post_init__(self) -> None:
        if self.population_size < 4:
            raise ParameterError("differential evolution needs 4 individuals")
        if self.generations < 0:
            raise ParameterError("generations cannot be negative")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ParameterError("crossover rate must lie in [0, 1]")
        if not self.scale_factor > 0:
            raise ParameterError("scale factor must be positive")
        if self.workers < 1:
            raise ParameterError("at least one worker is required")
        if self.bounds is not None:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if not bounds:
                raise ParameterError("bounds need at least one dimension")
            for lo, hi in bounds:
                if not lo < hi:
                    raise ParameterError(
                        "bound [{}, {}] is empty".format(lo, hi)
                    )
            object.__setattr__(self, "bounds", bounds)

    def with_bounds(self, bounds: Sequence[Tuple[float, float]]) -> "DeConfig":
        return replace(self, bounds=tuple(bounds))

    @property
    def dimension(self) -> int:
        return len(self._require_bounds())

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self._require_bounds()])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self._require_bounds()])

    def _require_bounds(self) -> Bounds:
        if self.bounds is None:
            raise ParameterError("the search bounds have not been set")
        return self.bounds


@dataclass(frozen=True, eq=False)
class Individual:
    """A candidate solution.

    Attributes:
        genome (ndarray): the real vector being optimized. Read-only.
        fitness (float, optional): objective value (lower is better), None
            until evaluated
    """

    genome: np.ndarray
    fitness: Optional[float] = None

    def __post_init__(self) -> None:
        genome = np.array(self.genome, dtype=float).ravel()
        genome.flags.writeable = False
        object.__setattr__(self, "genome", genome)

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    def with_fitness(self, fitness: float) -> "Individual":
        return Individual(self.genome, float(fitness))


def _check_dimensions(*genomes: np.ndarray) -> None:
    sizes = {np.size(genome) for genome in genomes}
    if len(sizes) != 1:
        raise ParameterError(
            "genomes have mismatched dimensions {}".format(sorted(sizes))
        )


def mutate(
    r1: Sequence[float],
    r2: Sequence[float],
    r3: Sequence[float],
    eta: float,
    bounds: Optional[Bounds] = None,
) -> np.ndarray:
    """Differential mutation ``u = r1 + eta * (r2 - r3)``

    Args:
        r1 (array): the base vector
        r2, r3 (arrays): the pair whose difference perturbs the base
        eta (float): the scale factor
        bounds (tuple of (lo, hi) pairs, optional): if given, components are
            clamped to the violated bound

    Returns:
        ndarray: the mutant genome

    Raises:
        ParameterError: if the genomes differ in dimension
    """
    r1, r2, r3 = (np.asarray(r, dtype=float) for r in (r1, r2, r3))
    _check_dimensions(r1, r2, r3)
    mutant = r1 + eta * (r2 - r3)
    if bounds is not None:
        _check_dimensions(r1, np.empty(len(bounds)))
        lower = np.array([lo for lo, _ in bounds])
        upper = np.array([hi for _, hi in bounds])
        mutant = np.clip(mutant, lower, upper)
    return mutant


def crossover(
    target: Sequence[float],
    mutant: Sequence[float],
    rate: float,
    delta: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Binomial crossover with a forced index

    Component j of the trial comes from the mutant when a uniform draw on
    (0, 1] is <= rate, or when j == delta; otherwise it comes from the target.

    Args:
        target (array): the current individual's genome
        mutant (array): the mutant genome
        rate (float): the crossover rate C
        delta (int): the forced index, 1-based (1 <= delta <= n)
        rng (numpy Generator): source of the uniform draws

    Returns:
        ndarray: the trial genome
    """
    target = np.asarray(target, dtype=float)
    mutant = np.asarray(mutant, dtype=float)
    _check_dimensions(target, mutant)
    if not 1 <= delta <= target.size:
        raise ParameterError(
            "forced index {} outside 1..{}".format(delta, target.size)
        )
    draws = 1.0 - rng.random(target.size)
    take = draws <= rate
    take[delta - 1] = True
    return np.where(take, mutant, target)


def select(target: Individual, trial: Individual) -> Individual:
    """Greedy selection: the trial survives if it is at least as fit

    A trial whose fitness is NaN never survives; a NaN target is always
    replaced by a trial with a real fitness.

    Raises:
        ParameterError: if either individual has not been evaluated
    """
    if not (target.evaluated and trial.evaluated):
        raise ParameterError("selection needs two evaluated individuals")
    if math.isnan(trial.fitness):
        return target
    if math.isnan(target.fitness):
        return trial
    if trial.fitness <= target.fitness:
        return trial
    return target


def choose_donors(
    rng: np.random.Generator, population_size: int, target_index: int
) -> Tuple[int, int, int]:
    """Draw three distinct population indices, all different from the target"""
    picks = rng.choice(population_size - 1, size=3, replace=False)
    picks[picks >= target_index] += 1
    r1, r2, r3 = (int(pick) for pick in picks)
    return r1, r2, r3


def evaluate(
    objective: Objective,
    genomes: Sequence[np.ndarray],
    executor: Optional[Executor] = None,
) -> List[float]:
    """Evaluate genomes, concurrently when an executor is provided. The result
    order always matches the input order."""
    if executor is None:
        return [float(objective(genome)) for genome in genomes]
    return [float(value) for value in executor.map(objective, genomes)]


@dataclass(frozen=True)
class DeResult:
    """Outcome of a run.

    Attributes:
        best (Individual): the fittest individual ever evaluated
        history (tuple of floats): best fitness of the initial population
            followed by the best fitness after each generation
        generations (int): generations actually executed
        evaluations (int): calls made to the objective
    """

    best: Individual
    history: Tuple[float, ...]
    generations: int
    evaluations: int


def _best(population: Sequence[Individual]) -> Individual:
    fitnesses = np.array([individual.fitness for individual in population])
    if np.isnan(fitnesses).all():
        return population[0]
    return population[int(np.nanargmin(fitnesses))]


def _initial_population(
    config: DeConfig,
    rng: np.random.Generator,
    initial: Optional[Sequence[Sequence[float]]],
) -> np.ndarray:
    lower, upper = config.lower, config.upper
    genomes = rng.uniform(
        lower, upper, size=(config.population_size, config.dimension)
    )
    for i, genome in enumerate(list(initial or [])[: config.population_size]):
        genome = np.asarray(genome, dtype=float)
        _check_dimensions(genome, lower)
        genomes[i] = np.clip(genome, lower, upper)
    return genomes


def run(
    objective: Objective,
    config: DeConfig,
    initial: Optional[Sequence[Sequence[float]]] = None,
    callback: Optional[EarlyStop] = None,
) -> DeResult:
    """Minimize an objective with differential evolution

    The population starts uniformly at random inside the bounds. Every
    generation, each individual gets a trial built by differential mutation
    from three distinct donors and binomial crossover; the trial replaces it
    if it is at least as fit. All random draws are made serially, so only the
    fitness evaluations run concurrently and the result does not depend on
    `config.workers`.

    Args:
        objective (callable): maps a genome (ndarray) to a fitness. It must be
            pure (and thread-safe if workers > 1).
        config (DeConfig): the run settings. Bounds are required.
        initial (list of genomes, optional): genomes seeded into the initial
            population in place of the first random individuals
        callback (callable, optional): called as callback(generation, best)
            after every generation; returning True stops the run early

    Returns:
        DeResult: the best individual, the best-fitness history and counts
    """
    rng = np.random.default_rng(config.seed)
    bounds = config._require_bounds()
    dimension = config.dimension
    started = time.perf_counter()
    logger.info(
        "differential evolution: N=%d G=%d C=%g eta=%g n=%d workers=%d",
        config.population_size,
        config.generations,
        config.crossover_rate,
        config.scale_factor,
        dimension,
        config.workers,
    )

    executor = None
    if config.workers > 1:
        executor = ThreadPoolExecutor(max_workers=config.workers)
    try:
        genomes = _initial_population(config, rng, initial)
        fitnesses = evaluate(objective, list(genomes), executor)
        evaluations = len(fitnesses)
        population = [
            Individual(genome, fitness)
            for genome, fitness in zip(genomes, fitnesses)
        ]
        best = _best(population)
        history = [best.fitness]

        generation = 0
        while generation < config.generations:
            trials = []
            for i, target in enumerate(population):
                r1, r2, r3 = choose_donors(rng, config.population_size, i)
                mutant = mutate(
                    population[r1].genome,
                    population[r2].genome,
                    population[r3].genome,
                    config.scale_factor,
                    bounds,
                )
                delta = int(rng.integers(1, dimension + 1))
                trials.append(
                    crossover(
                        target.genome,
                        mutant,
                        config.crossover_rate,
                        delta,
                        rng,
                    )
                )
            fitnesses = evaluate(objective, trials, executor)
            evaluations += len(fitnesses)
            population = [
                select(target, Individual(trial, fitness))
                for target, trial, fitness in zip(
                    population, trials, fitnesses
                )
            ]
            generation += 1
            best = _best(population)
            history.append(best.fitness)
            logger.debug("generation %d: best %.6g", generation, best.fitness)
            if callback is not None and callback(generation, best):
                logger.info("stopped early after generation %d", generation)
                break
    finally:
        if executor is not None:
            executor.shutdown()

    logger.info(
        "differential evolution done: best %.6g after %d generations"
        " (%.2f s)",
        best.fitness,
        generation,
        time.perf_counter() - started,
    )
    return DeResult(best, tuple(history), generation, evaluations)
