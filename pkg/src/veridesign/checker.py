"""Evaluation of parsed properties against a concrete chain.

Every query is reduced to the exact analysis routines: constrained
reachability, one-step probability, reachability reward, and steady-state
composition.  ``filter(state, ...)`` re-anchors the evaluation state; for
steady-state inner queries the anchor only matters on reducible chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import analysis, properties as props
from .dtmc import ConcreteDtmc
from .errors import EvaluationError, FilterNotUnique, VeridesignError

PROBABILITY = "probability"
EXPECTED_REWARD = "expected-reward"
LONG_RUN_AVERAGE = "long-run-average"


@dataclass(frozen=True)
class PropertyValue:
    value: float
    kind: str

    def __float__(self) -> float:
        return self.value


@dataclass
class PropertyVector:
    """Property values in property-set order."""

    ids: list[str]
    values: list[PropertyValue]

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(zip(self.ids, self.values))

    def value_of(self, pid: str) -> float:
        return self.values[self.ids.index(pid)].value

    def as_dict(self) -> dict[str, float]:
        return {pid: pv.value for pid, pv in zip(self.ids, self.values)}


def _product_value(a: float, b: float) -> float:
    # 0 * inf is 0: a zero-probability filter zeroes the product.
    if a == 0.0 or b == 0.0:
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return float("inf")
    return a * b


def _product_kind(a: str, b: str) -> str:
    if EXPECTED_REWARD in (a, b):
        return EXPECTED_REWARD
    if LONG_RUN_AVERAGE in (a, b):
        return LONG_RUN_AVERAGE
    return PROBABILITY


def evaluate(chain: ConcreteDtmc, prop: props.PropertyAst, anchor: int | None = None) -> PropertyValue:
    """Evaluate one property, anchored at ``anchor`` (default: the initial state)."""
    s0 = chain.initial if anchor is None else anchor

    if isinstance(prop, props.UntilProbability):
        stay = props.predicate_states(prop.stay, chain)
        avoid = frozenset(range(chain.n_states)) - stay
        target = props.predicate_states(prop.target, chain)
        x = analysis.reach_probability(chain, avoid, target)
        return PropertyValue(float(x[s0]), PROBABILITY)

    if isinstance(prop, props.NextProbability):
        target = props.predicate_states(prop.target, chain)
        return PropertyValue(analysis.next_probability(chain, s0, target), PROBABILITY)

    if isinstance(prop, props.ReachReward):
        target = props.predicate_states(prop.target, chain)
        value = analysis.expected_total_reward(chain, prop.reward, target, from_state=s0)
        return PropertyValue(value, EXPECTED_REWARD)

    if isinstance(prop, props.SteadyStateProbability):
        pred = props.predicate_states(prop.pred, chain)
        ss = analysis.steady_state(chain, from_state=s0)
        total = float(sum(ss[s] for s in pred))
        return PropertyValue(min(max(total, 0.0), 1.0), PROBABILITY)

    if isinstance(prop, props.SteadyStateReward):
        value = analysis.long_run_average_reward(chain, prop.reward, from_state=s0)
        return PropertyValue(value, LONG_RUN_AVERAGE)

    if isinstance(prop, props.FilterState):
        cond = props.predicate_states(prop.condition, chain)
        if len(cond) != 1:
            raise FilterNotUnique(len(cond))
        return evaluate(chain, prop.inner, anchor=next(iter(cond)))

    if isinstance(prop, props.Product):
        left = evaluate(chain, prop.left, anchor=anchor)
        right = evaluate(chain, prop.right, anchor=anchor)
        return PropertyValue(_product_value(left.value, right.value),
                             _product_kind(left.kind, right.kind))

    raise TypeError(f"not a property: {prop!r}")


def evaluate_all(chain: ConcreteDtmc, property_set: props.PropertySet) -> PropertyVector:
    """Evaluate every property in set order; the first failure aborts with its id."""
    ids: list[str] = []
    values: list[PropertyValue] = []
    for entry in property_set:
        try:
            values.append(evaluate(chain, entry.ast))
        except VeridesignError as err:
            raise EvaluationError(entry.pid, err) from err
        ids.append(entry.pid)
    return PropertyVector(ids, values)
