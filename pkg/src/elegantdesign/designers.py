"""Simulated designers that turn a presented candidate into a 1-5 star rating.

Spec strings: ``constant:3``, ``random:SEED``, ``purist:nac`` (measure one of
nac, ec, iu, atmr).
"""

from __future__ import annotations

import math
import random
from typing import Optional, Protocol

from .metrics import ELEGANCE_MEASURES, MetricVector


class Designer(Protocol):
    def rate(self, metrics: MetricVector, presented_measure: str) -> int: ...


class DesignerSpecError(ValueError):
    pass


class ConstantDesigner:
    kind = "constant"

    def __init__(self, stars: int):
        if not 1 <= stars <= 5:
            raise DesignerSpecError(f"constant rating must be in 1..5, got {stars}")
        self.stars = stars

    def rate(self, metrics: MetricVector, presented_measure: str) -> int:
        return self.stars

    def __repr__(self):
        return f"constant:{self.stars}"


class RandomDesigner:
    kind = "random"

    def __init__(self, seed: int):
        self.seed = seed
        self.rng = random.Random(seed)

    def rate(self, metrics: MetricVector, presented_measure: str) -> int:
        return self.rng.randint(1, 5)

    def __repr__(self):
        return f"random:{self.seed}"


class PuristDesigner:
    """Rates every candidate by one private target measure, whatever was presented.

    Values are normalised against the running range seen so far; the lowest
    value seen scores 5, the highest 1.
    """

    kind = "purist"

    def __init__(self, target: str):
        if target not in ELEGANCE_MEASURES:
            raise DesignerSpecError(f"purist target must be one of {ELEGANCE_MEASURES}, got {target!r}")
        self.target = target
        self.low: Optional[float] = None
        self.high: Optional[float] = None

    def rate(self, metrics: MetricVector, presented_measure: str) -> int:
        v = getattr(metrics, self.target)
        if self.low is None or self.high is None:
            self.low = self.high = v
            return 3
        self.low = min(self.low, v)
        self.high = max(self.high, v)
        if self.high == self.low:
            return 3
        stars = 1 + math.floor(4 * (self.high - v) / (self.high - self.low) + 0.5)
        return max(1, min(5, stars))

    def __repr__(self):
        return f"purist:{self.target}"


def parse_designer(spec: str):
    kind, sep, arg = spec.partition(":")
    kind = kind.strip().lower()
    if not sep or not arg:
        raise DesignerSpecError(f"designer spec {spec!r} must look like kind:argument")
    if kind == "constant":
        try:
            return ConstantDesigner(int(arg))
        except ValueError as exc:
            raise DesignerSpecError(f"bad constant rating in {spec!r}") from exc
    if kind == "random":
        try:
            return RandomDesigner(int(arg))
        except ValueError as exc:
            raise DesignerSpecError(f"bad seed in {spec!r}") from exc
    if kind == "purist":
        return PuristDesigner(arg.strip().lower())
    raise DesignerSpecError(f"unknown designer kind {kind!r} (expected constant, random or purist)")
