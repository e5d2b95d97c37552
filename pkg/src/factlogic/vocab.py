"""Fact and class vocabularies shared across the pipeline."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Predicate:
    """One atomic binary observation, e.g. ``rail_down``."""

    id: str
    label: str
    index: int


@dataclass
class FactVocabulary:
    predicates: list[Predicate] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [p.id for p in self.predicates]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate predicate ids")
        for i, p in enumerate(self.predicates):
            if p.index != i:
                raise ValueError(f"predicate {p.id!r} has index {p.index}, expected {i}")
        if not self.predicates:
            raise ValueError("vocabulary must contain at least one predicate")

    @classmethod
    def from_ids(cls, ids: list[str]) -> "FactVocabulary":
        return cls([Predicate(pid, pid.replace("_", " "), i) for i, pid in enumerate(ids)])

    def __len__(self) -> int:
        return len(self.predicates)

    def index_of(self, fact_id: str) -> int:
        for p in self.predicates:
            if p.id == fact_id:
                return p.index
        raise KeyError(f"unknown fact id: {fact_id!r}")

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.predicates]


@dataclass(frozen=True)
class ClassInfo:
    """Target class with an alarm flag used by the false-alarm metric."""

    name: str
    index: int
    risk: bool = False


@dataclass
class ClassVocabulary:
    classes: list[ClassInfo] = field(default_factory=list)

    def __post_init__(self) -> None:
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate class names")
        for i, c in enumerate(self.classes):
            if c.index != i:
                raise ValueError(f"class {c.name!r} has index {c.index}, expected {i}")

    @classmethod
    def from_names(cls, names: list[str], risk: set[str] | None = None) -> "ClassVocabulary":
        risk = risk or set()
        return cls([ClassInfo(n, i, n in risk) for i, n in enumerate(names)])

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.classes]

    @property
    def risk_indices(self) -> list[int]:
        return [c.index for c in self.classes if c.risk]
