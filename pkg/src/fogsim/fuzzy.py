"""Fuzzy scoring of device health.

Two scorers drive the failure-handling policy: a reactive one over
(mobility, response, power) and a predictive one that adds CPU and network
telemetry. Both map crisp percent readings through three trapezoidal sets
per input (GOOD / MID / BAD), evaluate a generated min-AND / max-OR rule
base, accumulate rule strengths with max per output set, and collapse the
result to a crisp [0, 100] score as the activation-weighted average of the
output-set centers.

Everything here is a pure function of its inputs; all value types are
frozen and safe to share between threads.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import ConfigurationError, UndefinedScoreError

log = logging.getLogger(__name__)


class SetLabel(str, Enum):
    """Linguistic value of an input set, ordered from healthy to failing.

    GOOD covers the paper-of-record styles "low mobility" / "fast response" /
    "rich power"; BAD covers "high" / "slow" / "poor".
    """

    GOOD = "GOOD"
    MID = "MID"
    BAD = "BAD"


class OutputLabel(str, Enum):
    LOW = "LOW"
    NORMAL = "NORMAL"
    HIGH = "HIGH"


class Connective(str, Enum):
    AND = "AND"
    OR = "OR"


@dataclass(frozen=True)
class TrapezoidSet:
    """One membership set over the normalized percent scale.

    The shape is selected by ``label``: GOOD is a left shoulder (membership 1
    below ``c``, falling to 0 at ``d``), BAD is a right shoulder (0 below
    ``a``, rising to 1 at ``b``), MID is a full trapezoid on (a, b, c, d).
    """

    label: SetLabel
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.a <= self.b <= self.c <= self.d <= 100.0):
            raise ConfigurationError(
                f"trapezoid breakpoints must satisfy 0 <= a <= b <= c <= d <= 100, "
                f"got ({self.a}, {self.b}, {self.c}, {self.d})"
            )

    def membership(self, x: float) -> float:
        """Piecewise-linear membership degree of ``x`` in [0, 100]."""
        if not 0.0 <= x <= 100.0:
            raise ValueError(f"membership input {x!r} outside [0, 100]")
        if self.label is SetLabel.GOOD:
            if x < self.c:
                return 1.0
            if x > self.d:
                return 0.0
            if self.d == self.c:
                return 1.0
            return (self.d - x) / (self.d - self.c)
        if self.label is SetLabel.BAD:
            if x < self.a:
                return 0.0
            if x > self.b:
                return 1.0
            if self.b == self.a:
                return 1.0
            return (x - self.a) / (self.b - self.a)
        # MID trapezoid
        if x < self.a or x > self.d:
            return 0.0
        if self.b <= x <= self.c:
            return 1.0
        if x < self.b:
            return (x - self.a) / (self.b - self.a)
        return (self.d - x) / (self.d - self.c)

    def to_dict(self) -> dict:
        return {"label": self.label.value, "a": self.a, "b": self.b, "c": self.c, "d": self.d}

    @classmethod
    def from_dict(cls, data: Mapping) -> "TrapezoidSet":
        return cls(SetLabel(data["label"]), data["a"], data["b"], data["c"], data["d"])


# Default breakpoints shared by every input variable: the GOOD plateau ends
# at 30 and reaches 0 at 50; MID rises 30-50, plateaus 50-70, falls 70-90;
# BAD rises 70-90 and plateaus to 100. These partition [0, 100] exactly.
DEFAULT_BREAKPOINTS = (30.0, 50.0, 70.0, 90.0)


@dataclass(frozen=True)
class FuzzyVariable:
    """A named input with its three sets and raw-value normalization range."""

    name: str
    good: TrapezoidSet
    mid: TrapezoidSet
    bad: TrapezoidSet
    alpha: float = 0.0
    beta: float = 100.0

    def __post_init__(self) -> None:
        if self.beta <= self.alpha:
            raise ConfigurationError(
                f"variable {self.name!r}: beta ({self.beta}) must exceed alpha ({self.alpha})"
            )

    @classmethod
    def default(
        cls,
        name: str,
        breakpoints: tuple[float, float, float, float] = DEFAULT_BREAKPOINTS,
        alpha: float = 0.0,
        beta: float = 100.0,
    ) -> "FuzzyVariable":
        a, b, c, d = breakpoints
        return cls(
            name=name,
            good=TrapezoidSet(SetLabel.GOOD, 0.0, 0.0, a, b),
            mid=TrapezoidSet(SetLabel.MID, a, b, c, d),
            bad=TrapezoidSet(SetLabel.BAD, c, d, 100.0, 100.0),
            alpha=alpha,
            beta=beta,
        )

    def set_for(self, label: SetLabel) -> TrapezoidSet:
        return {SetLabel.GOOD: self.good, SetLabel.MID: self.mid, SetLabel.BAD: self.bad}[label]

    def memberships(self, x: float) -> tuple[float, float, float]:
        """(GOOD, MID, BAD) membership degrees at percent value ``x``."""
        return (self.good.membership(x), self.mid.membership(x), self.bad.membership(x))

    def percent_from_raw(self, raw: float) -> float:
        """Normalize a raw reading to the percent scale, clamping drift.

        Telemetry can momentarily overshoot its nominal range, so values
        outside [alpha, beta] are clamped (with a warning) instead of
        rejected. For the strict operation see :func:`normalize`.
        """
        pct = 100.0 * (raw - self.alpha) / (self.beta - self.alpha)
        if pct < 0.0 or pct > 100.0:
            log.warning(
                "telemetry %s=%.4g outside [%g, %g]; clamping", self.name, raw, self.alpha, self.beta
            )
            pct = min(100.0, max(0.0, pct))
        return pct

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "alpha": self.alpha,
            "beta": self.beta,
            "good": self.good.to_dict(),
            "mid": self.mid.to_dict(),
            "bad": self.bad.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FuzzyVariable":
        return cls(
            name=data["name"],
            good=TrapezoidSet.from_dict(data["good"]),
            mid=TrapezoidSet.from_dict(data["mid"]),
            bad=TrapezoidSet.from_dict(data["bad"]),
            alpha=data["alpha"],
            beta=data["beta"],
        )


def normalize(raw: float, alpha: float, beta: float, name: str = "value") -> float:
    """Map ``raw`` from [alpha, beta] onto [0, 1].

    Strict variant: a reading outside the declared range raises, naming the
    offending parameter.
    """
    if beta <= alpha:
        raise ValueError(f"{name}: beta ({beta}) must exceed alpha ({alpha})")
    if raw < alpha or raw > beta:
        raise ValueError(f"{name}: raw value {raw!r} outside [{alpha}, {beta}]")
    return (raw - alpha) / (beta - alpha)


@dataclass(frozen=True)
class Rule:
    """IF <antecedent> <connective> ... THEN score IS <consequent>."""

    antecedent: tuple[tuple[str, SetLabel], ...]
    connective: Connective
    consequent: OutputLabel

    def to_dict(self) -> dict:
        return {
            "antecedent": [[var, label.value] for var, label in self.antecedent],
            "connective": self.connective.value,
            "consequent": self.consequent.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Rule":
        return cls(
            antecedent=tuple((var, SetLabel(label)) for var, label in data["antecedent"]),
            connective=Connective(data["connective"]),
            consequent=OutputLabel(data["consequent"]),
        )


@dataclass(frozen=True)
class RuleBase:
    """The generated rules over an ordered variable list."""

    variables: tuple[str, ...]
    rules: tuple[Rule, ...]

    def counts(self) -> dict[OutputLabel, int]:
        out = {label: 0 for label in OutputLabel}
        for rule in self.rules:
            out[rule.consequent] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "rules": [rule.to_dict() for rule in self.rules],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RuleBase":
        return cls(
            variables=tuple(data["variables"]),
            rules=tuple(Rule.from_dict(r) for r in data["rules"]),
        )


def build_rule_base(variables: Sequence[str]) -> RuleBase:
    """Generate the canonical rule base for ``k = len(variables)`` inputs.

    Emits, in order: one OR rule (any input BAD -> HIGH), one AND rule (all
    inputs GOOD -> LOW), then the 2^k - 1 AND rules covering every
    {GOOD, MID} combination except all-GOOD -> NORMAL. Total 2^k + 1 rules:
    9 for k=3 and 33 for k=5.
    """
    if not variables:
        raise ConfigurationError("rule base needs at least one variable")
    names = tuple(variables)
    rules = [
        Rule(tuple((v, SetLabel.BAD) for v in names), Connective.OR, OutputLabel.HIGH),
        Rule(tuple((v, SetLabel.GOOD) for v in names), Connective.AND, OutputLabel.LOW),
    ]
    for combo in itertools.product((SetLabel.GOOD, SetLabel.MID), repeat=len(names)):
        if all(label is SetLabel.GOOD for label in combo):
            continue
        rules.append(Rule(tuple(zip(names, combo)), Connective.AND, OutputLabel.NORMAL))
    return RuleBase(variables=names, rules=tuple(rules))


@dataclass(frozen=True)
class OutputVariable:
    """Score zones on [0, 100] and the representative center of each zone."""

    low: TrapezoidSet
    normal: TrapezoidSet
    high: TrapezoidSet
    centers: Mapping[OutputLabel, float] = field(
        default_factory=lambda: {OutputLabel.LOW: 25.0, OutputLabel.NORMAL: 65.0, OutputLabel.HIGH: 90.0}
    )

    def __post_init__(self) -> None:
        lo, no, hi = (
            self.centers[OutputLabel.LOW],
            self.centers[OutputLabel.NORMAL],
            self.centers[OutputLabel.HIGH],
        )
        if not lo < no < hi:
            raise ConfigurationError(f"output centers must be strictly increasing, got {lo}, {no}, {hi}")

    @classmethod
    def default(cls) -> "OutputVariable":
        # Zones 0-50 / 50-80 / 80-100; centers at the low-zone midpoint, the
        # normal-zone midpoint, and the start of the high plateau.
        return cls(
            low=TrapezoidSet(SetLabel.GOOD, 0.0, 0.0, 30.0, 50.0),
            normal=TrapezoidSet(SetLabel.MID, 50.0, 60.0, 70.0, 80.0),
            high=TrapezoidSet(SetLabel.BAD, 80.0, 90.0, 100.0, 100.0),
        )

    def to_dict(self) -> dict:
        return {
            "low": self.low.to_dict(),
            "normal": self.normal.to_dict(),
            "high": self.high.to_dict(),
            "centers": {label.value: self.centers[label] for label in OutputLabel},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "OutputVariable":
        return cls(
            low=TrapezoidSet.from_dict(data["low"]),
            normal=TrapezoidSet.from_dict(data["normal"]),
            high=TrapezoidSet.from_dict(data["high"]),
            centers={OutputLabel(k): v for k, v in data["centers"].items()},
        )


def infer(
    rule_base: RuleBase,
    variables: Mapping[str, FuzzyVariable],
    inputs: Mapping[str, float],
) -> dict[OutputLabel, float]:
    """Evaluate every rule and accumulate per-output-set activations with max.

    AND rules take the min of their antecedent memberships, the OR rule the
    max of the BAD memberships.
    """
    for name in rule_base.variables:
        if name not in inputs:
            raise ConfigurationError(f"missing input for variable {name!r}")
        if name not in variables:
            raise ConfigurationError(f"no variable definition for {name!r}")
    activations = {label: 0.0 for label in OutputLabel}
    for rule in rule_base.rules:
        degrees = [
            variables[var].set_for(label).membership(inputs[var]) for var, label in rule.antecedent
        ]
        strength = max(degrees) if rule.connective is Connective.OR else min(degrees)
        if strength > activations[rule.consequent]:
            activations[rule.consequent] = strength
    return activations


def defuzzify(activations: Mapping[OutputLabel, float], output: OutputVariable) -> float:
    """Weighted average of the output-set centers under the given activations."""
    num = 0.0
    den = 0.0
    for label in OutputLabel:
        act = activations.get(label, 0.0)
        num += act * output.centers[label]
        den += act
    if den == 0.0:
        raise UndefinedScoreError("no output set activated; score is undefined")
    return num / den


class FuzzyScorer:
    """Bundles variables, rule base and output zones into one callable scorer.

    ``score`` is a flat, allocation-light evaluation of the same semantics as
    :func:`infer` + :func:`defuzzify`; it sits on the simulator's hot path.
    """

    def __init__(self, variables: Sequence[FuzzyVariable], output: OutputVariable | None = None):
        self.variables = tuple(variables)
        self.output = output or OutputVariable.default()
        self.rule_base = build_rule_base([v.name for v in self.variables])
        index = {v.name: i for i, v in enumerate(self.variables)}
        set_index = {SetLabel.GOOD: 0, SetLabel.MID: 1, SetLabel.BAD: 2}
        out_index = {OutputLabel.LOW: 0, OutputLabel.NORMAL: 1, OutputLabel.HIGH: 2}
        self._compiled = tuple(
            (
                out_index[rule.consequent],
                rule.connective is Connective.OR,
                tuple((index[var], set_index[label]) for var, label in rule.antecedent),
            )
            for rule in self.rule_base.rules
        )
        self._centers = (
            self.output.centers[OutputLabel.LOW],
            self.output.centers[OutputLabel.NORMAL],
            self.output.centers[OutputLabel.HIGH],
        )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def activations(self, inputs: Mapping[str, float]) -> dict[OutputLabel, float]:
        return infer(self.rule_base, {v.name: v for v in self.variables}, inputs)

    def score(self, values: Sequence[float]) -> float:
        """Crisp score in [center(LOW), center(HIGH)] for percent ``values``.

        Values are taken in the scorer's variable order; anything outside
        [0, 100] is clamped with a warning.
        """
        if len(values) != len(self.variables):
            raise ConfigurationError(
                f"expected {len(self.variables)} inputs {self.names}, got {len(values)}"
            )
        memb = []
        for var, x in zip(self.variables, values):
            if x < 0.0 or x > 100.0:
                log.warning("input %s=%.4g outside [0, 100]; clamping", var.name, x)
                x = min(100.0, max(0.0, x))
            memb.append(var.memberships(x))
        acts = [0.0, 0.0, 0.0]
        for cons, is_or, antecedent in self._compiled:
            if is_or:
                strength = 0.0
                for vi, si in antecedent:
                    m = memb[vi][si]
                    if m > strength:
                        strength = m
            else:
                strength = 1.0
                for vi, si in antecedent:
                    m = memb[vi][si]
                    if m < strength:
                        strength = m
                        if strength == 0.0:
                            break
            if strength > acts[cons]:
                acts[cons] = strength
        den = acts[0] + acts[1] + acts[2]
        if den == 0.0:
            raise UndefinedScoreError("no output set activated; score is undefined")
        c = self._centers
        return (acts[0] * c[0] + acts[1] * c[1] + acts[2] * c[2]) / den

    def score_map(self, inputs: Mapping[str, float]) -> float:
        return self.score([inputs[name] for name in self.names])

    def to_dict(self) -> dict:
        return {
            "variables": [v.to_dict() for v in self.variables],
            "rules": self.rule_base.to_dict(),
            "output": self.output.to_dict(),
        }


MRP_VARIABLES = ("mobility", "response", "power")
CPMNR_VARIABLES = ("cpu", "power", "mobility", "network", "response")


def mrp_scorer(
    breakpoints: Mapping[str, tuple[float, float, float, float]] | None = None,
    output: OutputVariable | None = None,
) -> FuzzyScorer:
    """Reactive failure scorer over mobility, response time and power."""
    bp = breakpoints or {}
    return FuzzyScorer(
        [FuzzyVariable.default(name, bp.get(name, DEFAULT_BREAKPOINTS)) for name in MRP_VARIABLES],
        output,
    )


def cpmnr_scorer(
    breakpoints: Mapping[str, tuple[float, float, float, float]] | None = None,
    output: OutputVariable | None = None,
) -> FuzzyScorer:
    """Predictive failure scorer over cpu, power, mobility, network, response."""
    bp = breakpoints or {}
    return FuzzyScorer(
        [FuzzyVariable.default(name, bp.get(name, DEFAULT_BREAKPOINTS)) for name in CPMNR_VARIABLES],
        output,
    )


_DEFAULT_MRP = mrp_scorer()
_DEFAULT_CPMNR = cpmnr_scorer()


def mrp_score(mobility: float, response: float, power: float) -> float:
    return _DEFAULT_MRP.score((mobility, response, power))


def cpmnr_score(cpu: float, power: float, mobility: float, network: float, response: float) -> float:
    return _DEFAULT_CPMNR.score((cpu, power, mobility, network, response))


def rules_document(scorers: Mapping[str, FuzzyScorer] | None = None) -> dict:
    """JSON-serializable audit document with every rule and breakpoint."""
    scorers = scorers or {"mrp": _DEFAULT_MRP, "cpmnr": _DEFAULT_CPMNR}
    return {"scorers": {name: scorer.to_dict() for name, scorer in scorers.items()}}


def dump_rules(path: str | None = None) -> str:
    text = json.dumps(rules_document(), indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text
