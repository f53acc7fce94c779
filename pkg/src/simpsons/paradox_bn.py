"""A Boolean network family where one hidden confounder inverts every stratum.

Nodes are ``X1 .. Xn``, ``D`` (drug taken) and ``R`` (recovered).  Every
``Xi`` is a root and a parent of ``R``; ``Xn`` is also the only parent of
``D``.  ``P(R = T)`` depends on ``(Xn, D)`` alone:

=========  =====  =======
``Xn``     ``D``  P(R=T)
=========  =====  =======
False      False  ``p1``
True       False  ``p2``
False      True   ``p3``
True       True   ``p4``
=========  =====  =======

and ``P(D = T | Xn = T) = p``, ``P(D = T | Xn = F) = q``.  With ``p3 < p1``
and ``p4 < p2`` the drug is worse in every ``(X1..Xn)`` cell, yet when
``p`` is near 1 and ``q`` near 0, summing ``Xn`` out makes the drug look
better in every ``(X1..Xn-1)`` cell.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

MAX_JOINT_N = 24

_PROB_FIELDS = ("p1", "p2", "p3", "p4", "p", "q", "prior_xn")


class SpecError(ValueError):
    """A parameter of :class:`ParadoxBnSpec` is out of range."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class RegimeWarning(UserWarning):
    """The parameters leave the near-deterministic regime of the construction."""


@dataclass(frozen=True)
class ParadoxBnSpec:
    n: int = 3
    p1: float = 0.52
    p2: float = 0.9
    p3: float = 0.48
    p4: float = 0.8
    p: float = 0.999
    q: float = 0.001
    prior_xn: float = 0.5
    priors_x: tuple[float, ...] | None = None

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise SpecError("n", f"must be an integer >= 1, got {self.n!r}")
        for name in _PROB_FIELDS:
            _check_prob(name, getattr(self, name))
        priors = self.priors_x
        if priors is None:
            priors = (0.5,) * (self.n - 1)
        priors = tuple(float(v) for v in priors)
        if len(priors) != self.n - 1:
            raise SpecError("priors_x", f"needs n-1 = {self.n - 1} entries, got {len(priors)}")
        for i, v in enumerate(priors):
            _check_prob(f"priors_x[{i}]", v)
        object.__setattr__(self, "priors_x", priors)
        for name in _PROB_FIELDS:
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def priors(self) -> tuple[float, ...]:
        """``P(Xi = T)`` for ``X1 .. Xn``."""
        return self.priors_x + (self.prior_xn,)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["priors_x"] = list(self.priors_x)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ParadoxBnSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SpecError(sorted(unknown)[0], "unknown field")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ParadoxBnSpec":
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ParadoxBnSpec":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _check_prob(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(name, f"must be a number, got {value!r}")
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise SpecError(name, f"must lie in [0, 1], got {value!r}")


def regime_warnings(spec: ParadoxBnSpec) -> list[str]:
    """Ways ``spec`` departs from the near-deterministic confounding regime."""
    out = []
    if not spec.p1 > 0.5:
        out.append(f"p1={spec.p1} is not above 0.5")
    if not spec.p3 < 0.5:
        out.append(f"p3={spec.p3} is not below 0.5")
    if not spec.p4 < spec.p2:
        out.append(f"p4={spec.p4} is not below p2={spec.p2}")
    if spec.p2 < 0.75 or spec.p4 < 0.75:
        out.append(f"p2={spec.p2}, p4={spec.p4} are not both close to 1 (>= 0.75)")
    if spec.p < 0.9:
        out.append(f"p={spec.p} is not close to 1 (>= 0.9)")
    if spec.q > 0.1:
        out.append(f"q={spec.q} is not close to 0 (<= 0.1)")
    return out


def validate(spec: ParadoxBnSpec) -> ParadoxBnSpec:
    """Emit a :class:`RegimeWarning` per regime departure; never rejects."""
    for message in regime_warnings(spec):
        warnings.warn(message, RegimeWarning, stacklevel=2)
    return spec


@dataclass(frozen=True)
class RecoveredNpt:
    """``P(R | X1..Xn, D)``, stored as the four ``(Xn, D)`` entries."""

    n: int
    p1: float
    p2: float
    p3: float
    p4: float

    def prob(self, xn: bool, d: bool) -> float:
        """``P(R = T | Xn = xn, D = d)``."""
        return ((self.p1, self.p3), (self.p2, self.p4))[bool(xn)][bool(d)]

    def array(self) -> np.ndarray:
        """Dense ``P(R = T)`` with axes ``(X1, .., Xn, D)``, index 1 meaning True."""
        core = np.array([[self.p1, self.p3], [self.p2, self.p4]])
        return np.broadcast_to(core, (2,) * (self.n - 1) + (2, 2)).copy()

    def columns(self):
        """Parent assignments in display order: ``D`` outermost, then ``Xn`` .. ``X1``."""
        for combo in itertools.product((False, True), repeat=self.n + 1):
            d, xs_desc = combo[0], combo[1:]
            yield d, tuple(reversed(xs_desc))

    def to_csv(self) -> str:
        """The full table, parents as header rows and ``R = False/True`` as value rows."""
        cols = list(self.columns())
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Drug taken"] + [_label(d) for d, _ in cols])
        for i in reversed(range(self.n)):
            w.writerow([f"X{i + 1}"] + [_label(x[i]) for _, x in cols])
        true_row = [self.prob(x[-1], d) for d, x in cols]
        w.writerow(["False"] + [_fmt(1.0 - v) for v in true_row])
        w.writerow(["True"] + [_fmt(v) for v in true_row])
        return buf.getvalue()


def _label(b: bool) -> str:
    return "True" if b else "False"


def _fmt(v: float) -> str:
    return repr(round(v, 12))


def build_npt(spec: ParadoxBnSpec) -> RecoveredNpt:
    return RecoveredNpt(spec.n, spec.p1, spec.p2, spec.p3, spec.p4)


def case1_recovery(spec: ParadoxBnSpec, xn: bool, d: bool) -> float:
    """``P(R = T | X1..Xn-1, Xn = xn, D = d)`` with the confounder observed."""
    return build_npt(spec).prob(xn, d)


def drug_probability(spec: ParadoxBnSpec, d: bool) -> float:
    """Marginal ``P(D = d)``."""
    pt = spec.prior_xn * spec.p + (1.0 - spec.prior_xn) * spec.q
    return pt if d else 1.0 - pt


def posterior_xn(spec: ParadoxBnSpec, d: bool) -> float:
    """``P(Xn = T | D = d)`` by Bayes' rule."""
    like_t = spec.p if d else 1.0 - spec.p
    like_f = spec.q if d else 1.0 - spec.q
    num = like_t * spec.prior_xn
    den = num + like_f * (1.0 - spec.prior_xn)
    if den <= 0.0:
        raise ZeroDivisionError(f"P(D={_label(d)}) is zero under this spec")
    return num / den


def case2_recovery(spec: ParadoxBnSpec, d: bool) -> float:
    """``P(R = T | X1..Xn-1, D = d)`` with ``Xn`` summed out."""
    w = posterior_xn(spec, d)
    return w * case1_recovery(spec, True, d) + (1.0 - w) * case1_recovery(spec, False, d)


@dataclass(frozen=True)
class ReversalCertificate:
    stratified_drug_worse: bool
    hidden_drug_better: bool
    case2_drug_rate: float
    case2_placebo_rate: float
    paradox: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "paradox", self.stratified_drug_worse and self.hidden_drug_better)

    def to_dict(self) -> dict:
        return asdict(self)


def certify_reversal(spec: ParadoxBnSpec) -> ReversalCertificate:
    drug = case2_recovery(spec, True)
    placebo = case2_recovery(spec, False)
    return ReversalCertificate(
        stratified_drug_worse=spec.p3 < spec.p1 and spec.p4 < spec.p2,
        hidden_drug_better=drug > placebo,
        case2_drug_rate=drug,
        case2_placebo_rate=placebo,
    )


def exact_joint(spec: ParadoxBnSpec) -> np.ndarray:
    """Full joint over ``(X1, .., Xn, D, R)`` by the chain rule.

    Axis order is ``X1 .. Xn, D, R``; index 1 is True.  Memory grows as
    ``2 ** (n + 2)`` floats, so ``n`` is capped at ``MAX_JOINT_N``.
    """
    if spec.n > MAX_JOINT_N:
        raise ValueError(f"n={spec.n} exceeds the enumeration cap {MAX_JOINT_N}")
    n = spec.n
    joint = np.ones((2,) * (n + 2))
    for i, prior in enumerate(spec.priors):
        shape = [1] * (n + 2)
        shape[i] = 2
        joint = joint * np.array([1.0 - prior, prior]).reshape(shape)
    # P(D | Xn) on axes (Xn, D)
    d_given_xn = np.array([[1.0 - spec.q, spec.q], [1.0 - spec.p, spec.p]])
    shape = [1] * (n + 2)
    shape[n - 1], shape[n] = 2, 2
    joint = joint * d_given_xn.reshape(shape)
    # P(R | Xn, D) on axes (Xn, D, R), independent of X1..Xn-1
    r_true = np.array([[spec.p1, spec.p3], [spec.p2, spec.p4]])
    r_given = np.stack([1.0 - r_true, r_true], axis=-1)
    shape = [1] * (n + 2)
    shape[n - 1], shape[n], shape[n + 1] = 2, 2, 2
    return joint * r_given.reshape(shape)


def joint_query(joint: np.ndarray, target: dict[int, int], evidence: dict[int, int]) -> float:
    """``P(target | evidence)`` from a joint table; keys are axes, values 0/1."""
    def mass(assign):
        idx = tuple(assign.get(a, slice(None)) for a in range(joint.ndim))
        return float(joint[idx].sum())

    den = mass(evidence)
    if den <= 0.0:
        raise ZeroDivisionError(f"evidence {evidence} has zero probability")
    return mass({**evidence, **target}) / den
