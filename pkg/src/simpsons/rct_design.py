"""Factorial control-group arithmetic for stratified trials.

Every full state combination of the design factors (treatment included)
is one control group.  Counts use Python integers, so the growth with the
number of factors is exact at any size.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

MAX_MATERIALIZED_GROUPS = 10**6


class DesignError(ValueError):
    pass


@dataclass(frozen=True)
class Factor:
    name: str
    states: tuple[str, ...]

    @classmethod
    def binary(cls, name: str) -> "Factor":
        return cls(name, ("0", "1"))

    @classmethod
    def of(cls, name: str, spec: int | Sequence[str]) -> "Factor":
        """``spec`` is a cardinality (states labelled ``0..k-1``) or explicit labels."""
        if isinstance(spec, int) and not isinstance(spec, bool):
            if spec < 2:
                raise DesignError(f"factor {name!r}: cardinality must be >= 2, got {spec}")
            return cls(name, tuple(str(i) for i in range(spec)))
        states = tuple(str(s) for s in spec)
        if len(states) < 2 or len(set(states)) != len(states):
            raise DesignError(f"factor {name!r}: needs >= 2 distinct states, got {states}")
        return cls(name, states)

    @property
    def cardinality(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class DesignSpec:
    factors: tuple[Factor, ...]
    min_per_group: int = 50

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise DesignError("a design needs at least one factor")
        names = [f.name for f in factors]
        if len(set(names)) != len(names):
            raise DesignError(f"duplicate factor names: {names}")
        for f in factors:
            if f.cardinality < 2:
                raise DesignError(f"factor {f.name!r} has fewer than two states")
        if isinstance(self.min_per_group, bool) or not isinstance(self.min_per_group, int) or self.min_per_group < 1:
            raise DesignError(f"min_per_group must be a positive integer, got {self.min_per_group!r}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_cardinalities(cls, pairs, min_per_group: int = 50) -> "DesignSpec":
        return cls(tuple(Factor.of(name, k) for name, k in pairs), min_per_group)

    def to_dict(self) -> dict:
        return {
            "factors": [{"name": f.name, "states": list(f.states)} for f in self.factors],
            "min_per_group": self.min_per_group,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DesignSpec":
        factors = []
        for entry in data["factors"]:
            if "states" in entry:
                factors.append(Factor.of(entry["name"], entry["states"]))
            else:
                factors.append(Factor.of(entry["name"], int(entry["cardinality"])))
        return cls(tuple(factors), int(data.get("min_per_group", 50)))

    @classmethod
    def load(cls, path: str | Path) -> "DesignSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class DesignPlan:
    group_count: int
    subjects_required: int
    factor_names: tuple[str, ...] = ()
    groups: tuple[tuple[tuple[str, ...], int], ...] | None = None

    @property
    def total(self) -> int | None:
        return None if self.groups is None else sum(size for _, size in self.groups)

    def to_dict(self) -> dict:
        out = {"group_count": self.group_count, "subjects_required": self.subjects_required}
        if self.groups is not None:
            out["groups"] = [
                {"states": dict(zip(self.factor_names, key)), "size": size} for key, size in self.groups
            ]
        return out

    def to_csv(self) -> str:
        if self.groups is None:
            raise DesignError("plan has no materialized groups")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.factor_names, "size"])
        for key, size in self.groups:
            w.writerow([*key, size])
        return buf.getvalue()


def group_count(spec: DesignSpec) -> int:
    return math.prod(f.cardinality for f in spec.factors)


def subjects_required(spec: DesignSpec) -> int:
    return group_count(spec) * spec.min_per_group


def plan(spec: DesignSpec) -> DesignPlan:
    """Arithmetic-only plan, no groups listed."""
    return DesignPlan(group_count(spec), subjects_required(spec), tuple(f.name for f in spec.factors))


def allocate(spec: DesignSpec, total: int) -> DesignPlan:
    """Split ``total`` subjects evenly over every state combination.

    Groups follow the factors' declared state order, last factor varying
    fastest.
    """
    groups = group_count(spec)
    if groups > MAX_MATERIALIZED_GROUPS:
        raise DesignError(f"{groups} groups exceed the materialization cap {MAX_MATERIALIZED_GROUPS}")
    if isinstance(total, bool) or not isinstance(total, int) or total < 1:
        raise DesignError(f"total must be a positive integer, got {total!r}")
    size, remainder = divmod(total, groups)
    if remainder:
        raise DesignError(f"total {total} is not divisible by {groups} groups (remainder {remainder})")
    layout = tuple((key, size) for key in itertools.product(*(f.states for f in spec.factors)))
    return DesignPlan(groups, subjects_required(spec), tuple(f.name for f in spec.factors), layout)
