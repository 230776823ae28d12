"""Design problems: attributes, methods and the method->attribute 'uses' relation.

Problems are stored as UTF-8 JSON::

    {"name": "...", "attributes": [...], "methods": [...], "uses": [[method, attribute], ...]}

Array order is the canonical element order used everywhere else in the package
(attributes first, then methods).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import BinaryIO, Iterable, Union

# (attributes, methods, uses) of the three reference problems
SCALES: dict[str, tuple[int, int, int]] = {
    "cbs": (16, 15, 39),
    "gdp": (43, 12, 121),
    "sc": (52, 30, 126),
}


class ProblemError(ValueError):
    pass


class ProblemFormatError(ProblemError):
    """Malformed problem file. ``lineno``/``colno`` are 1-based, 0 when unknown."""

    def __init__(self, msg: str, lineno: int = 0, colno: int = 0):
        where = f" (line {lineno}, column {colno})" if lineno else ""
        super().__init__(msg + where)
        self.lineno = lineno
        self.colno = colno


class ProblemValidationError(ProblemError):
    def __init__(self, msg: str, offender: object = None):
        super().__init__(msg)
        self.offender = offender


@dataclass(frozen=True)
class DesignProblem:
    name: str
    attributes: tuple[str, ...]
    methods: tuple[str, ...]
    uses: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "uses", tuple((m, a) for m, a in self.uses))
        self.validate()

    def validate(self) -> None:
        if not self.attributes:
            raise ProblemValidationError("problem has no attributes")
        if not self.methods:
            raise ProblemValidationError("problem has no methods")
        if not self.uses:
            raise ProblemValidationError("problem has no uses")
        seen: set[str] = set()
        for ident in self.attributes + self.methods:
            if not isinstance(ident, str):
                raise ProblemValidationError(f"identifier {ident!r} is not a string", ident)
            if ident in seen:
                raise ProblemValidationError(f"duplicate identifier {ident!r}", ident)
            seen.add(ident)
        attrs, meths = set(self.attributes), set(self.methods)
        pairs: set[tuple[str, str]] = set()
        for m, a in self.uses:
            if m not in meths:
                raise ProblemValidationError(f"use ({m!r}, {a!r}) names unknown method {m!r}", m)
            if a not in attrs:
                raise ProblemValidationError(f"use ({m!r}, {a!r}) names unknown attribute {a!r}", a)
            if (m, a) in pairs:
                raise ProblemValidationError(f"duplicate use ({m!r}, {a!r})", (m, a))
            pairs.add((m, a))

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def n_methods(self) -> int:
        return len(self.methods)

    @property
    def n_elements(self) -> int:
        return len(self.attributes) + len(self.methods)

    @property
    def elements(self) -> tuple[str, ...]:
        """All element ids in canonical order: attributes, then methods."""
        return self.attributes + self.methods

    @cached_property
    def use_index(self) -> tuple[tuple[int, int], ...]:
        """Uses as (method element index, attribute element index) pairs."""
        a_pos = {a: i for i, a in enumerate(self.attributes)}
        offset = len(self.attributes)
        m_pos = {m: offset + i for i, m in enumerate(self.methods)}
        return tuple((m_pos[m], a_pos[a]) for m, a in self.uses)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "attributes": list(self.attributes),
            "methods": list(self.methods),
            "uses": [[m, a] for m, a in self.uses],
        }

    @classmethod
    def from_dict(cls, obj: object) -> "DesignProblem":
        if not isinstance(obj, dict):
            raise ProblemFormatError("problem must be a JSON object")
        missing = [k for k in ("name", "attributes", "methods", "uses") if k not in obj]
        if missing:
            raise ProblemFormatError(f"missing key(s): {', '.join(missing)}")
        if not isinstance(obj["name"], str):
            raise ProblemFormatError("'name' must be a string")
        for key in ("attributes", "methods", "uses"):
            if not isinstance(obj[key], list):
                raise ProblemFormatError(f"'{key}' must be an array")
        uses = []
        for pair in obj["uses"]:
            if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(s, str) for s in pair)):
                raise ProblemFormatError(f"use {pair!r} is not a [method, attribute] pair of strings")
            uses.append((pair[0], pair[1]))
        return cls(obj["name"], tuple(obj["attributes"]), tuple(obj["methods"]), tuple(uses))


def parse_problem(data: Union[bytes, str]) -> DesignProblem:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProblemFormatError(f"not valid UTF-8: {exc}") from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(exc.msg, exc.lineno, exc.colno) from exc
    return DesignProblem.from_dict(obj)


def load_problem(source: Union[BinaryIO, str, Path]) -> DesignProblem:
    """Read a problem from a binary stream or a file path."""
    if isinstance(source, (str, Path)):
        return parse_problem(Path(source).read_bytes())
    return parse_problem(source.read())


def dumps_problem(problem: DesignProblem) -> str:
    return json.dumps(problem.to_dict(), indent=2, ensure_ascii=False) + "\n"


def save_problem(problem: DesignProblem, target: Union[BinaryIO, str, Path]) -> None:
    data = dumps_problem(problem).encode("utf-8")
    if isinstance(target, (str, Path)):
        Path(target).write_bytes(data)
    else:
        target.write(data)


def generate_fixture(
    n_attributes: int, n_methods: int, n_uses: int, seed: int, name: str | None = None
) -> DesignProblem:
    """Synthetic problem with exactly the requested counts.

    Uses are sampled without replacement from all method/attribute pairs and
    listed in (method, attribute) canonical order.
    """
    if n_attributes < 1 or n_methods < 1 or n_uses < 1:
        raise ValueError("counts must be positive")
    if n_uses > n_attributes * n_methods:
        raise ValueError(
            f"n_uses={n_uses} exceeds the {n_attributes * n_methods} possible method/attribute pairs"
        )
    rng = random.Random(seed)
    attributes = tuple(f"attr{i:02d}" for i in range(n_attributes))
    methods = tuple(f"meth{i:02d}" for i in range(n_methods))
    picked = sorted(rng.sample(range(n_attributes * n_methods), n_uses))
    uses = tuple((methods[p // n_attributes], attributes[p % n_attributes]) for p in picked)
    if name is None:
        name = f"synthetic-{n_attributes}x{n_methods}x{n_uses}-s{seed}"
    return DesignProblem(name, attributes, methods, uses)


def scale_fixture(scale: str, seed: int = 1) -> DesignProblem:
    """Fixture at one of the named reference scales ('cbs', 'gdp', 'sc')."""
    n_a, n_m, n_u = SCALES[scale.lower()]
    return generate_fixture(n_a, n_m, n_u, seed, name=f"{scale.lower()}-s{seed}")


def iter_problem_files(directory: Union[str, Path]) -> Iterable[Path]:
    return sorted(Path(directory).glob("*.json"))
