"""Reward-steered evolutionary search over class designs.

A single population is evolved with binary tournaments. Each tournament is
judged on one objective, drawn with probability equal to its selection
weight. Elegance weights are the designer's mean star rating for that measure
times 0.04; coupling takes the remaining mass, so before any rating the search
is a plain coupling minimiser.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .genome import DesignSolution, crossover, mutate, random_solution
from .metrics import ELEGANCE_MEASURES, OBJECTIVES, MetricVector, evaluate
from .problem import DesignProblem

# maps a 5-star mean reward onto the 0.2 weight ceiling; 0.04 held exactly
REWARD_SCALE = Fraction(1, 25)
# serialisation order for weight rows: w_nac, w_ec, w_iu, w_atmr, w_c
WEIGHT_ORDER = ELEGANCE_MEASURES + ("coupling",)

Population = list[tuple[DesignSolution, MetricVector]]


class ProtocolError(RuntimeError):
    """Operation issued out of order (e.g. rating with nothing pending)."""


class EpisodeHalted(ProtocolError):
    pass


def _check_stars(stars: object) -> int:
    if isinstance(stars, bool) or not isinstance(stars, int) or not 1 <= stars <= 5:
        raise ValueError(f"stars must be an integer in 1..5, got {stars!r}")
    return stars


class RewardState:
    """Rating history per elegance measure and the selection weights it implies.

    Means and weights are kept as exact rationals and rounded once on read.
    """

    def __init__(self) -> None:
        self.ratings: dict[str, list[int]] = {m: [] for m in ELEGANCE_MEASURES}
        self._exact_weights: dict[str, Fraction] = {m: Fraction(0) for m in ELEGANCE_MEASURES}

    def add_rating(self, measure: str, stars: int) -> None:
        if measure not in self.ratings:
            raise ValueError(f"unknown elegance measure {measure!r}")
        self.ratings[measure].append(_check_stars(stars))
        self._exact_weights[measure] = self._exact_mean(measure) * REWARD_SCALE

    def _exact_mean(self, measure: str) -> Fraction:
        history = self.ratings[measure]
        return Fraction(sum(history), len(history)) if history else Fraction(0)

    def mean_reward(self, measure: str) -> float:
        return float(self._exact_mean(measure))

    @property
    def mean_rewards(self) -> list[float]:
        return [self.mean_reward(m) for m in ELEGANCE_MEASURES]

    @property
    def weights(self) -> dict[str, float]:
        """Selection weight per objective name."""
        out = {m: float(w) for m, w in self._exact_weights.items()}
        out["coupling"] = float(1 - sum(self._exact_weights.values()))
        return out

    @property
    def weight_row(self) -> list[float]:
        w = self.weights
        return [w[name] for name in WEIGHT_ORDER]

    def copy(self) -> "RewardState":
        other = RewardState()
        other.ratings = {m: list(r) for m, r in self.ratings.items()}
        other._exact_weights = dict(self._exact_weights)
        return other


def draw_objective(weights: dict[str, float], rng: random.Random) -> str:
    u = rng.random()
    acc = 0.0
    last = "coupling"
    for name in OBJECTIVES:
        w = weights[name]
        if w <= 0:
            continue
        acc += w
        last = name
        if u < acc:
            return name
    return last


def select_parent(population: Population, reward: RewardState, rng: random.Random) -> DesignSolution:
    """Binary tournament judged on an objective drawn by selection weight."""
    if not population:
        raise ValueError("empty population")
    if len(population) == 1:
        return population[0][0]
    objective = draw_objective(reward.weights, rng)
    i, j = rng.sample(range(len(population)), 2)
    vi = getattr(population[i][1], objective)
    vj = getattr(population[j][1], objective)
    if vi == vj:
        winner = i if rng.random() < 0.5 else j
    else:
        winner = i if vi < vj else j
    return population[winner][0]


@dataclass
class EpisodeConfig:
    k: int = 5
    population_size: int = 100
    max_generations: int = 1000
    mutation_rate: Optional[float] = None  # None: 1 / element count
    crossover_rate: float = 0.9
    elitism: int = 1
    interaction_interval: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.interaction_interval < 1:
            raise ValueError("interaction_interval must be >= 1")
        if not 0 <= self.elitism <= self.population_size:
            raise ValueError("elitism must lie in [0, population_size]")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must lie in [0, 1]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.max_generations < 0:
            raise ValueError("max_generations must be >= 0")

    def effective_mutation_rate(self, problem: DesignProblem) -> float:
        if self.mutation_rate is not None:
            return self.mutation_rate
        return 1.0 / problem.n_elements

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "EpisodeConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**obj)


@dataclass
class InteractionRecord:
    generation: int
    chosen_measure: str
    candidate: dict
    candidate_metrics: MetricVector
    stars: int
    mean_rewards_after: list[float]
    weights_after: list[float]

    def to_dict(self) -> dict:
        return {
            "kind": "interaction",
            "generation": self.generation,
            "chosen_measure": self.chosen_measure,
            "candidate": self.candidate,
            "candidate_metrics": self.candidate_metrics.to_dict(),
            "stars": self.stars,
            "mean_rewards_after": list(self.mean_rewards_after),
            "weights_after": list(self.weights_after),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "InteractionRecord":
        return cls(
            generation=obj["generation"],
            chosen_measure=obj["chosen_measure"],
            candidate=obj["candidate"],
            candidate_metrics=MetricVector.from_dict(obj["candidate_metrics"]),
            stars=obj["stars"],
            mean_rewards_after=list(obj["mean_rewards_after"]),
            weights_after=list(obj["weights_after"]),
        )


@dataclass
class EpisodeLog:
    """Append-only episode record; serialises to JSON lines.

    The first line is a ``header`` record (problem name, config); the rest are
    ``generation``, ``interaction`` and a final ``halt`` record.
    """

    records: list[dict] = field(default_factory=list)

    def append(self, record: dict) -> None:
        if self.halted:
            raise EpisodeHalted("log is closed")
        self.records.append(record)

    def of_kind(self, kind: str) -> list[dict]:
        return [r for r in self.records if r["kind"] == kind]

    @property
    def generations(self) -> list[dict]:
        return self.of_kind("generation")

    @property
    def interactions(self) -> list[InteractionRecord]:
        return [InteractionRecord.from_dict(r) for r in self.of_kind("interaction")]

    @property
    def halt_record(self) -> Optional[dict]:
        halts = self.of_kind("halt")
        return halts[-1] if halts else None

    @property
    def halted(self) -> bool:
        return bool(self.records) and self.records[-1]["kind"] == "halt"

    def dumps(self) -> str:
        return "".join(json.dumps(r, separators=(", ", ": ")) + "\n" for r in self.records)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "EpisodeLog":
        return cls([json.loads(line) for line in text.splitlines() if line.strip()])

    @classmethod
    def read(cls, path: Union[str, Path]) -> "EpisodeLog":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def _summary(metrics: Iterable[MetricVector]) -> tuple[MetricVector, MetricVector]:
    rows = list(metrics)
    cols = list(zip(*rows))
    best = MetricVector(*(min(c) for c in cols))
    mean = MetricVector(*(sum(c) / len(c) for c in cols))
    return best, mean


@dataclass
class Presentation:
    generation: int
    measure: str
    solution: DesignSolution
    metrics: MetricVector


class Episode:
    """One design episode: population, reward state, pending presentation, log.

    Driving sequence::

        while not ep.halted:
            if ep.interaction_due:
                p = ep.present_candidate()
                ep.apply_rating(p.measure, stars)
            else:
                ep.step_generation()

    ``step_generation`` refuses to run while an interaction is due or pending,
    so the search never moves past an interaction point without a rating.
    """

    def __init__(self, problem: DesignProblem, config: EpisodeConfig):
        self.problem = problem
        self.config = config
        self.rng = random.Random(config.seed)
        self.reward = RewardState()
        self.generation = 0
        self.pending: Optional[Presentation] = None
        self._last_rated_generation = -1
        self.mutation_rate = config.effective_mutation_rate(problem)
        self.log = EpisodeLog()
        self.log.append(
            {
                "kind": "header",
                "problem": problem.name,
                "n_attributes": problem.n_attributes,
                "n_methods": problem.n_methods,
                "n_uses": len(problem.uses),
                "config": config.to_dict(),
                "mutation_rate": self.mutation_rate,
            }
        )
        self.population: Population = []
        for _ in range(config.population_size):
            s = random_solution(problem, config.k, self.rng)
            self.population.append((s, evaluate(problem, s)))

    @property
    def halted(self) -> bool:
        return self.log.halted

    @property
    def interaction_due(self) -> bool:
        return (
            not self.halted
            and self.generation > 0
            and self.generation % self.config.interaction_interval == 0
            and self._last_rated_generation != self.generation
        )

    @property
    def status(self) -> str:
        if self.halted:
            return "halted"
        if self.pending is not None:
            return "awaiting-rating"
        return "running"

    def _elite_indices(self) -> list[int]:
        order = sorted(range(len(self.population)), key=lambda i: (self.population[i][1].coupling, i))
        return order[: self.config.elitism]

    def step_generation(self) -> dict:
        """Replace the population with the next generation and log its summary."""
        if self.halted:
            raise EpisodeHalted("episode has halted")
        if self.pending is not None or self.interaction_due:
            raise ProtocolError(f"generation {self.generation} awaits a designer rating")
        cfg, rng, problem = self.config, self.rng, self.problem
        nxt: Population = [self.population[i] for i in self._elite_indices()]
        while len(nxt) < cfg.population_size:
            first = select_parent(self.population, self.reward, rng)
            second = select_parent(self.population, self.reward, rng)
            if rng.random() < cfg.crossover_rate:
                child = crossover(first, second, rng)
            else:
                child = first
            child = mutate(child, self.mutation_rate, rng)
            nxt.append((child, evaluate(problem, child)))
        self.population = nxt
        self.generation += 1
        best, mean = _summary(m for _, m in nxt)
        record = {
            "kind": "generation",
            "gen": self.generation,
            "best": best.to_dict(),
            "mean": mean.to_dict(),
            "weights": self.reward.weight_row,
        }
        self.log.append(record)
        if self.generation >= cfg.max_generations:
            self.halt()
        return record

    def present_candidate(self) -> Presentation:
        """Pick an elegance measure at random and return the population's best on it."""
        if self.halted:
            raise EpisodeHalted("episode has halted")
        if self.pending is not None:
            return self.pending
        measure = ELEGANCE_MEASURES[self.rng.randrange(len(ELEGANCE_MEASURES))]
        best = min(range(len(self.population)), key=lambda i: (getattr(self.population[i][1], measure), i))
        solution, metrics = self.population[best]
        self.pending = Presentation(self.generation, measure, solution, metrics)
        return self.pending

    def apply_rating(self, measure: str, stars: int) -> InteractionRecord:
        if self.halted:
            raise EpisodeHalted("episode has halted")
        if self.pending is None:
            raise ProtocolError("no presentation is awaiting a rating")
        if measure != self.pending.measure:
            raise ProtocolError(f"rating for {measure!r} but {self.pending.measure!r} is pending")
        _check_stars(stars)
        p = self.pending
        self.reward.add_rating(measure, stars)
        record = InteractionRecord(
            generation=p.generation,
            chosen_measure=measure,
            candidate=p.solution.to_dict(),
            candidate_metrics=p.metrics,
            stars=stars,
            mean_rewards_after=self.reward.mean_rewards,
            weights_after=self.reward.weight_row,
        )
        self.log.append(record.to_dict())
        self.pending = None
        self._last_rated_generation = p.generation
        return record

    def rate_pending(self, stars: int) -> InteractionRecord:
        """Rate whatever is pending without naming its measure (blind designers)."""
        if self.pending is None:
            raise ProtocolError("no presentation is awaiting a rating")
        return self.apply_rating(self.pending.measure, stars)

    def halt(self) -> EpisodeLog:
        if self.halted:
            return self.log
        self.pending = None
        best, mean = _summary(m for _, m in self.population)
        self.log.append(
            {
                "kind": "halt",
                "gen": self.generation,
                "final_population_summary": {
                    "best": best.to_dict(),
                    "average": mean.to_dict(),
                    "final_weights": self.reward.weight_row,
                    "mean_rewards": self.reward.mean_rewards,
                    "n_interactions": sum(len(r) for r in self.reward.ratings.values()),
                },
            }
        )
        return self.log

    def skip_interaction(self) -> None:
        """Let the current interaction point pass without presenting anything."""
        if self.pending is not None:
            raise ProtocolError("a presentation is pending; rate it or halt")
        self._last_rated_generation = self.generation

    def advance(self) -> Optional[Presentation]:
        """Evolve until the next interaction point or halt; present there."""
        while not self.halted:
            if self.pending is not None:
                return self.pending
            if self.interaction_due:
                return self.present_candidate()
            self.step_generation()
        return None


def run_episode(
    problem: DesignProblem,
    config: EpisodeConfig,
    designer=None,
    ratings: Optional[Sequence[int]] = None,
) -> EpisodeLog:
    """Run an episode to its generation cap.

    Ratings come from ``designer`` (anything with ``rate(metrics, measure)``)
    or, if given, from the fixed ``ratings`` sequence; the episode halts early
    when a fixed sequence runs out. With neither, interaction points are
    skipped and the search stays a pure coupling minimiser.
    """
    ep = Episode(problem, config)
    if designer is None and ratings is None:
        while not ep.halted:
            if ep.interaction_due:
                ep.skip_interaction()
            else:
                ep.step_generation()
        return ep.log
    scripted = iter(ratings) if ratings is not None else None
    while not ep.halted:
        presentation = ep.advance()
        if presentation is None:
            break
        if scripted is not None:
            stars = next(scripted, None)
            if stars is None:
                ep.halt()
                break
        else:
            stars = designer.rate(presentation.metrics, presentation.measure)
        ep.apply_rating(presentation.measure, stars)
        if getattr(designer, "wants_halt", lambda: False)():
            ep.halt()
    return ep.log
