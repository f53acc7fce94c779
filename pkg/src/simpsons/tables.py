"""N-way categorical contingency tables and Simpson-style reversal checks.

A :class:`ContingencyTable` holds integer counts over the full cross
product of a list of named categorical variables.  Treatment and outcome
are ordinary variables of the table; the association functions pick them
out by name and pool every other variable.

Reversal verdicts are decided with exact integer cross-multiplication,
never by comparing rounded floating point rates.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

UINT64_MAX = 2**64 - 1


class TableError(ValueError):
    """Invalid table construction or an invalid request against a table."""


class UndefinedRateError(TableError):
    """A rate was requested for an arm with no subjects."""


class CountOverflowError(TableError):
    """A count or a sum of counts does not fit in an unsigned 64-bit integer."""


def _checked_sum(values: Iterable[int]) -> int:
    total = sum(values)
    if total > UINT64_MAX:
        raise CountOverflowError(f"count sum {total} exceeds the unsigned 64-bit range")
    return total


@dataclass(frozen=True)
class Variable:
    """A categorical variable with an ordered list of state labels."""

    name: str
    states: tuple[str, ...]

    def __init__(self, name: str, states: Sequence[str]):
        states = tuple(str(s) for s in states)
        if not name:
            raise TableError("variable name must be non-empty")
        if len(states) < 2:
            raise TableError(f"variable {name!r} needs at least two states, got {states}")
        if len(set(states)) != len(states):
            raise TableError(f"variable {name!r} has duplicate state labels: {states}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "states", states)

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise TableError(
                f"{state!r} is not a state of variable {self.name!r} {self.states}"
            ) from None


class ContingencyTable:
    """Counts over every state combination of ``variables``.

    ``counts`` maps full state tuples (ordered like ``variables``) to
    non-negative integers.  Missing cells are zero; zero cells are not
    stored, so two tables compare equal whenever their variables and
    non-zero counts agree.
    """

    __slots__ = ("_variables", "_counts", "_total")

    def __init__(self, variables: Sequence[Variable], counts: Mapping[tuple, int] | None = None):
        variables = tuple(variables)
        if not variables:
            raise TableError("a table needs at least one variable")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise TableError(f"duplicate variable names: {names}")
        clean: dict[tuple[str, ...], int] = {}
        for key, count in (counts or {}).items():
            key = tuple(str(k) for k in key)
            if len(key) != len(variables):
                raise TableError(
                    f"cell {key} has arity {len(key)}, table has {len(variables)} variables"
                )
            for var, state in zip(variables, key):
                var.index(state)
            if isinstance(count, bool) or int(count) != count:
                raise TableError(f"cell {key} has non-integer count {count!r}")
            count = int(count)
            if count < 0:
                raise TableError(f"cell {key} has negative count {count}")
            if count > UINT64_MAX:
                raise CountOverflowError(f"cell {key} count {count} exceeds the unsigned 64-bit range")
            if count:
                clean[key] = _checked_sum((clean.get(key, 0), count))
        self._variables = variables
        self._counts = MappingProxyType(clean)
        self._total = _checked_sum(clean.values())

    @classmethod
    def from_rows(cls, variables: Sequence[Variable], rows: Iterable[Sequence]) -> "ContingencyTable":
        """Build from ``(state_1, ..., state_k, count)`` rows."""
        counts: dict[tuple, int] = {}
        for row in rows:
            *key, count = row
            key = tuple(str(k) for k in key)
            counts[key] = counts.get(key, 0) + int(count)
        return cls(variables, counts)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self._variables

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self._variables)

    @property
    def counts(self) -> Mapping[tuple[str, ...], int]:
        return self._counts

    @property
    def total(self) -> int:
        return self._total

    def variable(self, name: str) -> Variable:
        for v in self._variables:
            if v.name == name:
                return v
        raise TableError(f"unknown variable {name!r}; table has {list(self.names)}")

    def axis(self, name: str) -> int:
        self.variable(name)
        return self.names.index(name)

    def __getitem__(self, key: Sequence[str]) -> int:
        return self._counts.get(tuple(key), 0)

    def cells(self) -> Iterable[tuple[tuple[str, ...], int]]:
        """Every cell of the full grid in variable order, zeros included."""
        for key in itertools.product(*(v.states for v in self._variables)):
            yield key, self._counts.get(key, 0)

    def expand(self) -> list[tuple[str, ...]]:
        """One row per counted subject, in grid order."""
        rows = []
        for key, count in self.cells():
            rows.extend([key] * count)
        return rows

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return self._variables == other._variables and dict(self._counts) == dict(other._counts)

    def __hash__(self) -> int:
        return hash((self._variables, frozenset(self._counts.items())))

    def __repr__(self) -> str:
        return f"ContingencyTable(variables={list(self.names)}, total={self._total})"


def weighted_average(pairs: Sequence[tuple[float, float]]) -> float:
    """Average of ``value`` weighted by ``weight`` over ``(value, weight)`` pairs.

    >>> weighted_average([(50, 7), (70, 3)])
    56.0
    """
    pairs = list(pairs)
    if not pairs:
        raise TableError("weighted_average needs at least one (value, weight) pair")
    if any(w < 0 for _, w in pairs):
        raise TableError("weights must be non-negative")
    total_weight = sum(w for _, w in pairs)
    if total_weight <= 0:
        raise TableError("total weight must be positive")
    return sum(v * w for v, w in pairs) / total_weight


def marginalize(table: ContingencyTable, drop: Iterable[str]) -> ContingencyTable:
    """Sum ``table`` over the variables named in ``drop``."""
    drop = set(drop)
    for name in drop:
        table.variable(name)
    if len(drop) == len(table.variables):
        raise TableError("cannot marginalize out every variable")
    if not drop:
        return table
    keep = [i for i, v in enumerate(table.variables) if v.name not in drop]
    summed: dict[tuple, list[int]] = {}
    for key, count in table.counts.items():
        summed.setdefault(tuple(key[i] for i in keep), []).append(count)
    counts = {k: _checked_sum(v) for k, v in summed.items()}
    return ContingencyTable([table.variables[i] for i in keep], counts)


def restrict(table: ContingencyTable, keep: Sequence[str]) -> ContingencyTable:
    """Marginalize onto ``keep``, reordering variables to match it."""
    for name in keep:
        table.variable(name)
    reduced = marginalize(table, set(table.names) - set(keep))
    order = [reduced.axis(name) for name in keep]
    counts = {tuple(k[i] for i in order): c for k, c in reduced.counts.items()}
    return ContingencyTable([reduced.variables[i] for i in order], counts)


@dataclass(frozen=True)
class AssociationSummary:
    """Recovery counts and rates for a treated and a control arm."""

    treated_recovered: int
    treated_total: int
    control_recovered: int
    control_total: int

    @property
    def defined(self) -> bool:
        return self.treated_total > 0 and self.control_total > 0

    def _require(self) -> None:
        if not self.defined:
            raise UndefinedRateError(
                f"rate undefined: treated_total={self.treated_total}, "
                f"control_total={self.control_total}"
            )

    @property
    def treated_fraction(self) -> Fraction:
        self._require()
        return Fraction(self.treated_recovered, self.treated_total)

    @property
    def control_fraction(self) -> Fraction:
        self._require()
        return Fraction(self.control_recovered, self.control_total)

    @property
    def treated_rate(self) -> float:
        self._require()
        return self.treated_recovered / self.treated_total

    @property
    def control_rate(self) -> float:
        self._require()
        return self.control_recovered / self.control_total

    @property
    def delta(self) -> float:
        return self.treated_rate - self.control_rate

    @property
    def direction(self) -> int:
        """Sign of the risk difference, from integer cross-multiplication."""
        self._require()
        lhs = self.treated_recovered * self.control_total
        rhs = self.control_recovered * self.treated_total
        return (lhs > rhs) - (lhs < rhs)

    def __add__(self, other: "AssociationSummary") -> "AssociationSummary":
        return AssociationSummary(
            self.treated_recovered + other.treated_recovered,
            self.treated_total + other.treated_total,
            self.control_recovered + other.control_recovered,
            self.control_total + other.control_total,
        )

    def as_dict(self) -> dict:
        out = {
            "treated_recovered": self.treated_recovered,
            "treated_total": self.treated_total,
            "control_recovered": self.control_recovered,
            "control_total": self.control_total,
            "treated_rate": None,
            "control_rate": None,
            "delta": None,
        }
        if self.defined:
            out.update(treated_rate=self.treated_rate, control_rate=self.control_rate, delta=self.delta)
        return out


@dataclass(frozen=True)
class Treatment:
    """Treatment variable name with its treated and control state labels."""

    variable: str
    treated: str
    control: str


@dataclass(frozen=True)
class Outcome:
    """Outcome variable name with the state label counted as success."""

    variable: str
    success: str


def _summarize(table: ContingencyTable, treatment: Treatment, outcome: Outcome) -> AssociationSummary:
    if treatment.variable == outcome.variable:
        raise TableError("treatment and outcome must be different variables")
    two_way = restrict(table, [treatment.variable, outcome.variable])
    tvar, ovar = two_way.variables
    tvar.index(treatment.treated)
    tvar.index(treatment.control)
    if treatment.treated == treatment.control:
        raise TableError("treated and control labels must differ")
    ovar.index(outcome.success)
    arm_total = {s: 0 for s in tvar.states}
    arm_success = {s: 0 for s in tvar.states}
    for (t, o), count in two_way.counts.items():
        arm_total[t] += count
        if o == outcome.success:
            arm_success[t] += count
    return AssociationSummary(
        arm_success[treatment.treated],
        arm_total[treatment.treated],
        arm_success[treatment.control],
        arm_total[treatment.control],
    )


def association(table: ContingencyTable, treatment: Treatment, outcome: Outcome) -> AssociationSummary:
    """Pooled treated-vs-control success rates, all other variables summed out.

    Raises :class:`UndefinedRateError` when either arm is empty.
    """
    summary = _summarize(table, treatment, outcome)
    summary._require()
    return summary


@dataclass(frozen=True)
class StratifiedAssociation:
    aggregate: AssociationSummary
    strata_variables: tuple[str, ...]
    strata: Mapping[tuple[str, ...], AssociationSummary] = field(repr=False)
    undefined_strata: tuple[tuple[str, ...], ...]
    full_reversal: bool

    def as_dict(self) -> dict:
        return {
            "aggregate": self.aggregate.as_dict(),
            "strata_variables": list(self.strata_variables),
            "strata": [
                {"stratum": dict(zip(self.strata_variables, key)), **summary.as_dict()}
                for key, summary in self.strata.items()
            ],
            "undefined_strata": [dict(zip(self.strata_variables, k)) for k in self.undefined_strata],
            "full_reversal": self.full_reversal,
        }


def detect_reversal(
    table: ContingencyTable,
    treatment: Treatment,
    outcome: Outcome,
    strata: Iterable[str],
) -> StratifiedAssociation:
    """Compare the pooled association with the association inside every stratum.

    Strata are the cross product of the states of ``strata`` variables,
    taken in table order.  A full reversal needs a non-zero aggregate
    direction and a strictly opposite direction in every stratum; a
    stratum with an empty arm is listed in ``undefined_strata`` and rules
    a full reversal out.
    """
    strata = set(strata)
    roles = {treatment.variable, outcome.variable}
    if strata & roles:
        raise TableError(f"strata {sorted(strata & roles)} overlap treatment/outcome")
    for name in strata:
        table.variable(name)

    aggregate = association(table, treatment, outcome)
    names = tuple(n for n in table.names if n in strata)
    if not names:
        return StratifiedAssociation(aggregate, (), {}, (), False)

    reduced = restrict(table, [*names, treatment.variable, outcome.variable])
    k = len(names)
    buckets: dict[tuple, dict] = {}
    for key, count in reduced.counts.items():
        buckets.setdefault(key[:k], {})[key[k:]] = count
    tvar = reduced.variables[k]
    ovar = reduced.variables[k + 1]
    per_stratum: dict[tuple[str, ...], AssociationSummary] = {}
    for skey in itertools.product(*(v.states for v in reduced.variables[:k])):
        sub = ContingencyTable([tvar, ovar], buckets.get(skey, {}))
        per_stratum[skey] = _summarize(sub, treatment, outcome)

    undefined = tuple(key for key, s in per_stratum.items() if not s.defined)
    agg_dir = aggregate.direction
    full = (
        agg_dir != 0
        and not undefined
        and all(s.direction == -agg_dir for s in per_stratum.values())
    )
    return StratifiedAssociation(aggregate, names, MappingProxyType(per_stratum), undefined, full)


def scan_confounders(
    table: ContingencyTable,
    treatment: Treatment,
    outcome: Outcome,
    max_subset_size: int,
) -> list[tuple[tuple[str, ...], StratifiedAssociation]]:
    """Every covariate subset, up to ``max_subset_size`` variables, that fully reverses.

    Subsets are visited by size, then lexicographically by variable name.
    """
    if max_subset_size < 1:
        raise TableError(f"max_subset_size must be >= 1, got {max_subset_size}")
    candidates = sorted(n for n in table.names if n not in (treatment.variable, outcome.variable))
    hits = []
    for size in range(1, min(max_subset_size, len(candidates)) + 1):
        for subset in itertools.combinations(candidates, size):
            result = detect_reversal(table, treatment, outcome, subset)
            if result.full_reversal:
                hits.append((subset, result))
    return hits


def from_records(records: Iterable[Sequence], schema: Sequence[Variable]) -> ContingencyTable:
    """Count rows of state labels into a table over ``schema``."""
    schema = tuple(schema)
    tally: Counter = Counter()
    for i, row in enumerate(records):
        row = tuple(str(v) for v in row)
        if len(row) != len(schema):
            raise TableError(f"row {i}: expected {len(schema)} values, got {len(row)}")
        for var, state in zip(schema, row):
            if state not in var.states:
                raise TableError(
                    f"row {i}: {state!r} is not a state of {var.name!r} {var.states}"
                )
        tally[row] += 1
    return ContingencyTable(schema, tally)
