"""Survey schema: indicator names, category counts, labels, extreme outcomes.

Category indices are 1-based everywhere outside the numerical kernels.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import SchemaError


@dataclass(frozen=True)
class Indicator:
    """One manifest variable (survey question)."""

    name: str
    n_categories: int
    labels: tuple[str, ...]
    extreme_positive: int
    extreme_negative: int
    description: str = ""

    def __post_init__(self):
        if self.n_categories < 2:
            raise SchemaError(f"indicator {self.name!r}: needs at least 2 categories")
        if len(self.labels) != self.n_categories:
            raise SchemaError(
                f"indicator {self.name!r}: {len(self.labels)} labels for "
                f"{self.n_categories} categories"
            )
        for which, k in (("extreme_positive", self.extreme_positive),
                         ("extreme_negative", self.extreme_negative)):
            if not 1 <= k <= self.n_categories:
                raise SchemaError(f"indicator {self.name!r}: {which}={k} out of range")
        if self.extreme_positive == self.extreme_negative:
            raise SchemaError(
                f"indicator {self.name!r}: extreme outcomes must differ"
            )

    def negative_side(self) -> tuple[int, ...]:
        """Outcomes strictly closer to the extreme negative than the extreme positive one."""
        return tuple(
            k for k in range(1, self.n_categories + 1)
            if abs(k - self.extreme_negative) < abs(k - self.extreme_positive)
        )


@dataclass(frozen=True)
class SurveySchema:
    indicators: tuple[Indicator, ...]
    title: str = ""
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.indicators:
            raise SchemaError("schema has no indicators")
        names = [ind.name for ind in self.indicators]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise SchemaError(f"duplicate indicator names: {sorted(dup)}")
        object.__setattr__(self, "_index", {n: j for j, n in enumerate(names)})

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(ind.name for ind in self.indicators)

    @property
    def n_categories(self) -> tuple[int, ...]:
        return tuple(ind.n_categories for ind in self.indicators)

    @property
    def n_indicators(self) -> int:
        return len(self.indicators)

    def index(self, name: str) -> int:
        return self._index[name]

    @classmethod
    def uniform(cls, names, n_categories: int, labels=None, extreme_positive=1,
                extreme_negative=None, title=""):
        """Schema where every indicator shares the same outcome set."""
        if labels is None:
            labels = tuple(str(k) for k in range(1, n_categories + 1))
        if extreme_negative is None:
            extreme_negative = n_categories
        return cls(
            tuple(
                Indicator(n, n_categories, tuple(labels), extreme_positive, extreme_negative)
                for n in names
            ),
            title=title,
        )

    @classmethod
    def from_categories(cls, names, n_categories):
        """Schema with numeric labels and extremes at the first and last outcome."""
        return cls(tuple(
            Indicator(n, k, tuple(str(c) for c in range(1, k + 1)), 1, k)
            for n, k in zip(names, n_categories)
        ))

    # -- serialization ---------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict) -> "SurveySchema":
        default_labels = doc.get("outcome_labels")
        default_pos = doc.get("extreme_positive_outcome", 1)
        default_neg = doc.get("extreme_negative_outcome")
        raw = doc.get("indicator") or doc.get("indicators")
        if not raw:
            raise SchemaError("schema lists no indicators")
        indicators = []
        for entry in raw:
            if "name" not in entry:
                raise SchemaError(f"indicator entry without a name: {entry!r}")
            labels = entry.get("outcome_labels", default_labels)
            k = entry.get("n_categories")
            if k is None:
                if labels is None:
                    raise SchemaError(f"indicator {entry['name']!r}: no n_categories or labels")
                k = len(labels)
            if labels is None:
                labels = [str(c) for c in range(1, k + 1)]
            neg = entry.get("extreme_negative_outcome", default_neg)
            indicators.append(Indicator(
                name=str(entry["name"]),
                n_categories=int(k),
                labels=tuple(str(x) for x in labels),
                extreme_positive=int(entry.get("extreme_positive_outcome", default_pos)),
                extreme_negative=int(k if neg is None else neg),
                description=str(entry.get("description", "")),
            ))
        return cls(tuple(indicators), title=str(doc.get("title", "")))

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "indicators": [
                {
                    "name": ind.name,
                    "n_categories": ind.n_categories,
                    "outcome_labels": list(ind.labels),
                    "extreme_positive_outcome": ind.extreme_positive,
                    "extreme_negative_outcome": ind.extreme_negative,
                    "description": ind.description,
                }
                for ind in self.indicators
            ],
        }


def load_schema(path) -> SurveySchema:
    """Read a TOML schema file."""
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from exc
    return SurveySchema.from_dict(doc)


def iesh_schema() -> SurveySchema:
    """The shipped household inflation-expectations schema (indicators D to O)."""
    ref = resources.files("latentclass") / "data" / "iesh_schema.toml"
    with resources.as_file(ref) as p:
        return load_schema(Path(p))
