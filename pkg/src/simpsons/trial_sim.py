"""Ancestral sampling of synthetic trials from a :class:`ParadoxBnSpec`.

Random numbers come from numpy's counter-based Philox generator keyed by
the seed.  Record ``i`` owns a fixed block of ``block_width(n)`` uniforms
starting at counter ``i * block_width(n) // 4``, used in the order
``X1 .. Xn, D, R`` (the tail of the block is padding).  Any range of
records can therefore be drawn on its own, in any order or in parallel,
and the result matches a single sequential pass exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .paradox_bn import ParadoxBnSpec
from .tables import ContingencyTable, Outcome, TableError, Treatment, Variable, from_records

DRUG_COLUMN = "Drug"
OUTCOME_COLUMN = "Recovered"
BOOL_STATES = ("false", "true")
DRUG = Treatment(DRUG_COLUMN, treated="true", control="false")
RECOVERED = Outcome(OUTCOME_COLUMN, success="true")

_CHUNK = 1 << 16
_SEED_MASK = 2**64 - 1


@dataclass(frozen=True)
class TrialRecord:
    x: tuple[bool, ...]
    d: bool
    r: bool


@dataclass(frozen=True)
class TrialDataset:
    spec_fingerprint: str
    seed: int
    records: tuple[TrialRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n(self) -> int:
        return len(self.records[0].x) if self.records else 0


def block_width(n: int) -> int:
    """Uniforms reserved per record: ``n + 2`` rounded up to a multiple of 4."""
    return 4 * -(-(n + 2) // 4)


def _uniforms(seed: int, n: int, start: int, stop: int) -> np.ndarray:
    width = block_width(n)
    bitgen = np.random.Philox(key=seed & _SEED_MASK)
    bitgen.advance(start * width // 4)
    u = np.random.Generator(bitgen).random((stop - start) * width)
    return u.reshape(stop - start, width)[:, : n + 2]


def sample_arrays(spec: ParadoxBnSpec, seed: int, start: int, stop: int):
    """Boolean arrays ``(x, d, r)`` for records ``start .. stop - 1``."""
    n = spec.n
    u = _uniforms(seed, n, start, stop)
    x = u[:, :n] < np.asarray(spec.priors)
    xn = x[:, n - 1]
    d = u[:, n] < np.where(xn, spec.p, spec.q)
    p_r = np.where(xn, np.where(d, spec.p4, spec.p2), np.where(d, spec.p3, spec.p1))
    r = u[:, n + 1] < p_r
    return x, d, r


def sample(spec: ParadoxBnSpec, size: int, seed: int) -> TrialDataset:
    """Draw ``size`` independent subjects; reproducible from ``(spec, size, seed)``."""
    if isinstance(size, bool) or not isinstance(size, (int, np.integer)) or size < 1:
        raise ValueError(f"size must be a positive integer, got {size!r}")
    seed = int(seed)
    if not 0 <= seed <= _SEED_MASK:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    records = []
    for start in range(0, size, _CHUNK):
        x, d, r = sample_arrays(spec, seed, start, min(start + _CHUNK, size))
        records.extend(
            TrialRecord(tuple(xi), di, ri)
            for xi, di, ri in zip(x.tolist(), d.tolist(), r.tolist())
        )
    return TrialDataset(spec.fingerprint(), seed, tuple(records))


def column_names(n: int) -> list[str]:
    return [f"X{i + 1}" for i in range(n)] + [DRUG_COLUMN, OUTCOME_COLUMN]


def _lab(b: bool) -> str:
    return BOOL_STATES[bool(b)]


def to_table(dataset: TrialDataset) -> ContingencyTable:
    """Counts over ``X1 .. Xn, Drug, Recovered`` with states ``false``/``true``."""
    if not dataset.records:
        raise TableError("cannot tabulate an empty dataset")
    n = dataset.n
    schema = [Variable(name, BOOL_STATES) for name in column_names(n)]
    rows = ((*map(_lab, rec.x), _lab(rec.d), _lab(rec.r)) for rec in dataset.records)
    return from_records(rows, schema)


def to_csv(dataset: TrialDataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(column_names(dataset.n))
    for rec in dataset.records:
        w.writerow([*map(_lab, rec.x), _lab(rec.d), _lab(rec.r)])
    return buf.getvalue()


def sample_table(spec: ParadoxBnSpec, size: int, seed: int) -> ContingencyTable:
    """Equivalent to ``to_table(sample(spec, size, seed))`` without building records."""
    if isinstance(size, bool) or not isinstance(size, (int, np.integer)) or size < 1:
        raise ValueError(f"size must be a positive integer, got {size!r}")
    n = spec.n
    weights = 1 << np.arange(n + 1, -1, -1)
    tally = np.zeros(1 << (n + 2), dtype=np.int64)
    for start in range(0, size, _CHUNK * 16):
        x, d, r = sample_arrays(spec, int(seed), start, min(start + _CHUNK * 16, size))
        bits = np.column_stack([x, d, r]).astype(np.int64)
        tally += np.bincount(bits @ weights, minlength=tally.size)
    schema = [Variable(name, BOOL_STATES) for name in column_names(n)]
    counts = {}
    for code in np.flatnonzero(tally):
        key = tuple(BOOL_STATES[(int(code) >> (n + 1 - i)) & 1] for i in range(n + 2))
        counts[key] = int(tally[code])
    return ContingencyTable(schema, counts)


def write_csv(dataset: TrialDataset, path: str | Path) -> None:
    Path(path).write_text(to_csv(dataset), encoding="utf-8")


def _parse_bool(value: str, lineno: int) -> bool:
    v = value.strip().lower()
    if v not in BOOL_STATES:
        raise TableError(f"line {lineno}: expected true/false, got {value!r}")
    return v == "true"


def read_csv(path: str | Path, spec_fingerprint: str = "", seed: int = 0) -> TrialDataset:
    """Load records written by :func:`write_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or len(header) < 3:
            raise TableError(f"{path}: expected header X1,...,Xn,{DRUG_COLUMN},{OUTCOME_COLUMN}")
        n = len(header) - 2
        if header != column_names(n):
            raise TableError(f"{path}: header {header} does not match {column_names(n)}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != n + 2:
                raise TableError(f"line {lineno}: expected {n + 2} fields, got {len(row)}")
            vals: Sequence[bool] = [_parse_bool(v, lineno) for v in row]
            records.append(TrialRecord(tuple(vals[:n]), vals[n], vals[n + 1]))
    return TrialDataset(spec_fingerprint, seed, tuple(records))
