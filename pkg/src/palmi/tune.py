"""Genetic-algorithm search over model hyperparameters.

A genome is one value per gene of a ``SearchSpace``; its fitness is the mean
validation score (accuracy or R2) of a cross-validation run. The population
evolves by tournament selection, uniform crossover, per-gene resampling
mutation and (mu + lambda) survival, which keeps the best genome alive.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PalmiError
from .evaluate import FoldPlan, cross_validate
from .models import ModelSpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntRange:
    low: int
    high: int  # inclusive

    def sample(self, rng):
        return int(rng.integers(self.low, self.high + 1))


@dataclass(frozen=True)
class RealRange:
    low: float
    high: float
    log: bool = False

    def sample(self, rng):
        if self.log:
            return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class Choice:
    options: tuple

    def sample(self, rng):
        return self.options[int(rng.integers(0, len(self.options)))]


def parse_domain(text: str):
    """``int:LO:HI``, ``real:LO:HI``, ``logreal:LO:HI`` or ``choice:A,B,...``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind == "int":
        lo, hi = rest.split(":")
        return IntRange(int(lo), int(hi))
    if kind in ("real", "logreal"):
        lo, hi = rest.split(":")
        return RealRange(float(lo), float(hi), kind == "logreal")
    if kind == "choice":
        return Choice(tuple(_coerce(v.strip()) for v in rest.split(",")))
    raise ValueError(f"cannot parse search domain {text!r}")


def _coerce(v: str):
    if v in ("none", "None"):
        return None
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


@dataclass(frozen=True)
class SearchSpace:
    """Gene domains keyed by hyperparameter name. ``algorithm`` may be
    fixed or be a ``Choice`` gene itself."""

    task: str
    genes: tuple  # of (name, domain)
    algorithm: str | None = "rf"

    def __post_init__(self):
        for name, dom in self.genes:
            if isinstance(dom, IntRange) and dom.low > dom.high:
                raise ValueError(f"empty integer domain for {name}")
            if isinstance(dom, RealRange) and (dom.low > dom.high or (dom.log and dom.low <= 0)):
                raise ValueError(f"invalid real domain for {name}")
            if isinstance(dom, Choice) and not dom.options:
                raise ValueError(f"empty choice domain for {name}")
        if self.algorithm is None and "algorithm" not in dict(self.genes):
            raise ValueError("search space needs a fixed algorithm or an 'algorithm' gene")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.genes)

    def to_spec(self, genome: tuple, seed: int = 0) -> ModelSpec:
        values = dict(zip(self.names, genome))
        algorithm = values.pop("algorithm", self.algorithm)
        return ModelSpec(algorithm, self.task, values, seed)


def sample_genome(space: SearchSpace, rng) -> tuple:
    return tuple(dom.sample(rng) for _, dom in space.genes)


@dataclass
class GaConfig:
    generations: int = 10
    population: int = 20
    offspring: int = 10
    tournament: int = 3
    crossover: float = 0.9
    mutation: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.generations < 0 or self.population < 1 or self.offspring < 0:
            raise ValueError("generations >= 0, population >= 1 and offspring >= 0 required")
        if self.offspring > self.population:
            raise ValueError("offspring cannot exceed population")
        if self.tournament < 1:
            raise ValueError("tournament size must be >= 1")
        for name in ("crossover", "mutation"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} probability must lie in [0, 1]")

    @classmethod
    def full_scale(cls, seed: int = 0) -> "GaConfig":
        return cls(generations=100, population=150, offspring=20, seed=seed)


class Fitness:
    """Memoized cross-validation score of genomes.

    Failed trainings score -inf. ``evaluations`` counts distinct genomes
    actually scored.
    """

    def __init__(self, space: SearchSpace, X, y, plan: FoldPlan, model_seed: int = 0):
        self.space = space
        self.X, self.y, self.plan = X, y, plan
        self.model_seed = model_seed
        self.cache: dict[tuple, float] = {}
        self.evaluations = 0

    def __call__(self, genome: tuple) -> float:
        if genome in self.cache:
            return self.cache[genome]
        self.evaluations += 1
        try:
            spec = self.space.to_spec(genome, self.model_seed)
            result = cross_validate(spec, self.X, self.y, self.plan, with_train=False)
            metric = "acc" if self.space.task == "classification" else "r2"
            score = result.mean(metric)
            if not math.isfinite(score):
                score = -math.inf
        except (PalmiError, ValueError, FloatingPointError) as exc:
            log.info("genome %s failed: %s", genome, exc)
            score = -math.inf
        self.cache[genome] = score
        return score


@dataclass
class SearchResult:
    best_genome: tuple
    best_score: float
    best_spec: ModelSpec
    history: list = field(default_factory=list)  # (generation, best, mean, std)
    evaluations: int = 0


def _stats(scores):
    finite = [s for s in scores if math.isfinite(s)]
    if not finite:
        return -math.inf, -math.inf, 0.0
    return max(scores), float(np.mean(finite)), float(np.std(finite))


def evolve(space: SearchSpace, cfg: GaConfig, fitness: Fitness) -> SearchResult:
    rng = np.random.default_rng(cfg.seed)
    pop = [sample_genome(space, rng) for _ in range(cfg.population)]
    scores = [fitness(g) for g in pop]
    history = [(0, *_stats(scores))]

    def tournament():
        picks = rng.integers(0, len(pop), size=cfg.tournament)
        best = picks[0]
        for i in picks[1:]:
            if scores[i] > scores[best]:
                best = i
        return pop[best]

    for gen in range(1, cfg.generations + 1):
        children = []
        for _ in range(cfg.offspring):
            a, b = tournament(), tournament()
            if rng.random() < cfg.crossover:
                mask = rng.random(len(a)) < 0.5
                child = tuple(x if m else y for x, y, m in zip(a, b, mask))
            else:
                child = a
            child = tuple(
                dom.sample(rng) if rng.random() < cfg.mutation else v
                for v, (_, dom) in zip(child, space.genes)
            )
            children.append(child)
        child_scores = [fitness(c) for c in children]
        merged = list(zip(pop + children, scores + child_scores))
        # stable sort keeps incumbents ahead of equally scored newcomers
        merged.sort(key=lambda gs: -gs[1] if math.isfinite(gs[1]) else math.inf)
        merged = merged[: cfg.population]
        pop = [g for g, _ in merged]
        scores = [s for _, s in merged]
        history.append((gen, *_stats(scores)))
        log.info("generation %d: best %.4f", gen, scores[0])

    best = int(np.argmax(scores))
    return SearchResult(
        pop[best], scores[best], space.to_spec(pop[best], fitness.model_seed), history, fitness.evaluations
    )


def default_rf_space(task: str = "classification") -> SearchSpace:
    """Forest hyperparameters around the reference tuned configurations."""
    return SearchSpace(
        task,
        (
            ("n_estimators", Choice((50, 100))),
            ("max_depth", Choice((None, 4, 6, 8, 10, 12, 16))),
            ("max_features", Choice((0.1, 0.2, 0.3, 0.5, 0.7, 1.0))),
            ("min_samples_leaf", IntRange(1, 10)),
            ("min_samples_split", IntRange(2, 14)),
            ("subsample", Choice((0.5, 0.75, 0.85, 1.0))),
        ),
        "rf",
    )
