"""Interactive evolutionary search for elegant object-oriented class designs."""

from .designers import ConstantDesigner, PuristDesigner, RandomDesigner, parse_designer
from .evolution import (
    Episode,
    EpisodeConfig,
    EpisodeLog,
    InteractionRecord,
    RewardState,
    run_episode,
    select_parent,
)
from .genome import DesignSolution, crossover, mutate, random_solution
from .metrics import MetricVector, evaluate
from .problem import DesignProblem, generate_fixture, load_problem, save_problem, scale_fixture

__all__ = [
    "ConstantDesigner",
    "DesignProblem",
    "DesignSolution",
    "Episode",
    "EpisodeConfig",
    "EpisodeLog",
    "InteractionRecord",
    "MetricVector",
    "PuristDesigner",
    "RandomDesigner",
    "RewardState",
    "crossover",
    "evaluate",
    "generate_fixture",
    "load_problem",
    "mutate",
    "parse_designer",
    "random_solution",
    "run_episode",
    "save_problem",
    "scale_fixture",
    "select_parent",
]
