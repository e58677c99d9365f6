"""Score computation and ranking of verified designs.

Raw property values are direction-corrected onto [0,1] (complement for
bounded percentages where higher is worse, min-max over the surviving
population for unbounded magnitudes), combined per criterion by a convex
weighted sum, then rescaled so the worst surviving variant scores 0 and the
best scores 10.  Variants are ranked by the average of their criterion
scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import (
    InfinitePopulationValue,
    ModelSyntaxError,
    RangeViolation,
    ScoringError,
    WeightMismatch,
    WeightSumViolation,
)
from .properties import PropertySet
from .space import Configuration

HIGHER_IS_BETTER = "higher-is-better"
HIGHER_IS_WORSE = "higher-is-worse"
BOUNDED_PERCENTAGE = "bounded-percentage"
UNBOUNDED_MAGNITUDE = "unbounded-magnitude"

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class PropertyContribution:
    prop_id: str
    direction: str = HIGHER_IS_BETTER
    kind: str = BOUNDED_PERCENTAGE
    weight: float | None = None  # None: uniform across the criterion


@dataclass
class CriterionMapping:
    """How one design criterion is computed from property values."""

    cid: str
    contributions: list[PropertyContribution]

    def __post_init__(self):
        if not self.contributions:
            raise ScoringError(f"criterion '{self.cid}' lists no properties")
        explicit = [c.weight is not None for c in self.contributions]
        if any(explicit) and not all(explicit):
            raise ScoringError(
                f"criterion '{self.cid}': either all or none of the weights must be given")

    def weights(self) -> list[float]:
        if self.contributions[0].weight is None:
            n = len(self.contributions)
            return [1.0 / n] * n
        return [c.weight for c in self.contributions]


def map_value(r: float, direction: str, kind: str, population) -> float:
    """Map one raw property value onto [0,1] with 1 = best.

    Bounded percentages are complemented when higher is worse; unbounded
    magnitudes are min-max normalized over the surviving population.  A
    constant population maps to 1.0: identical performance is not penalized.
    """
    if kind == BOUNDED_PERCENTAGE:
        if not 0.0 <= r <= 1.0:
            raise ScoringError(f"percentage value {r!r} outside [0,1]")
        return 1.0 - r if direction == HIGHER_IS_WORSE else r
    if kind != UNBOUNDED_MAGNITUDE:
        raise ScoringError(f"unknown value kind '{kind}'")
    values = list(population)
    if not values:
        raise ScoringError("magnitude mapping needs a non-empty population")
    if math.isinf(r) or any(math.isinf(v) for v in values):
        raise InfinitePopulationValue(
            "cannot range-map an infinite expected value; the variant should have "
            "been filtered by the success criteria")
    lo, hi = min(values), max(values)
    if hi == lo:
        return 1.0
    norm = (r - lo) / (hi - lo)
    return 1.0 - norm if direction == HIGHER_IS_WORSE else norm


def weighted_sum(values, weights) -> float:
    """Convex combination of mapped values; weights must sum to 1 and be >= 0."""
    values = list(values)
    weights = list(weights)
    if len(values) != len(weights):
        raise WeightMismatch(len(values), len(weights))
    if any(w < 0 for w in weights):
        raise WeightSumViolation(sum(weights))
    if abs(sum(weights) - 1.0) > WEIGHT_TOL:
        raise WeightSumViolation(sum(weights))
    return float(sum(w * v for w, v in zip(weights, values)))


def scale_to_ten(values) -> list[float]:
    """Rescale so the population minimum maps to 0 and the maximum to 10.

    Order-preserving; a constant population maps to all 10.0 so that uniform
    performance is never penalized and division by zero cannot occur.
    """
    values = list(values)
    if not values:
        return []
    lo, hi = min(values), max(values)
    if hi == lo:
        return [10.0] * len(values)
    return [10.0 * (v - lo) / (hi - lo) for v in values]


@dataclass
class ScoreRow:
    theta: int
    name: str
    scores: dict[str, float]
    average: float = field(init=False)

    def __post_init__(self):
        self.average = sum(self.scores.values()) / len(self.scores)


@dataclass
class ScoreTable:
    criteria: list[str]
    rows: list[ScoreRow]


def score_table(success: list[tuple[Configuration, "PropertyVector"]],
                mappings: list[CriterionMapping]) -> ScoreTable:
    """Score every surviving variant on every criterion.

    Each criterion's property values are mapped onto [0,1], weighted, and
    scaled to [0,10] across the success set; the row average is the
    arithmetic mean of the criterion scores.
    """
    if not success:
        raise ScoringError("cannot score an empty success set")
    per_criterion: dict[str, list[float]] = {}
    for mapping in mappings:
        weights = mapping.weights()
        combined = []
        for _, vector in success:
            mapped = []
            for contrib in mapping.contributions:
                population = [vec.value_of(contrib.prop_id) for _, vec in success]
                mapped.append(map_value(vector.value_of(contrib.prop_id),
                                        contrib.direction, contrib.kind, population))
            combined.append(weighted_sum(mapped, weights))
        per_criterion[mapping.cid] = scale_to_ten(combined)

    criteria = [m.cid for m in mappings]
    rows = []
    for i, (cfg, _) in enumerate(success):
        scores = {cid: per_criterion[cid][i] for cid in criteria}
        rows.append(ScoreRow(cfg.index, cfg.name, scores))
    return ScoreTable(criteria, rows)


@dataclass
class RankedDesigns:
    """Rows ordered by descending average; ties broken by ascending index."""

    rows: list[ScoreRow]
    k: int

    @property
    def top(self) -> list[ScoreRow]:
        return self.rows[: self.k]


def rank(table: ScoreTable, k: int = 3) -> RankedDesigns:
    if k > len(table.rows):
        k = len(table.rows)
    ordered = sorted(table.rows, key=lambda r: (-r.average, r.theta))
    return RankedDesigns(ordered, k)


def merge_external_criteria(table: ScoreTable,
                            external: dict[int, dict[str, float]]) -> ScoreTable:
    """Extend each row with externally supplied criterion scores.

    External scores must lie in [0,10] and cover every row of the table;
    averages are recomputed over all criteria present.
    """
    if not external:
        return table
    new_cids: list[str] = []
    for scores in external.values():
        for cid in scores:
            if cid not in new_cids:
                new_cids.append(cid)
        break
    for theta, scores in external.items():
        if sorted(scores) != sorted(new_cids):
            raise ScoringError(f"external criteria for variant {theta} name a different column set")
        for cid, value in scores.items():
            if not 0.0 <= value <= 10.0:
                raise RangeViolation(f"external score {cid}={value!r} for variant {theta} outside [0,10]")

    rows = []
    for row in table.rows:
        if row.theta not in external:
            raise ScoringError(f"external criteria missing for variant {row.theta}")
        merged = dict(row.scores)
        merged.update(external[row.theta])
        rows.append(ScoreRow(row.theta, row.name, merged))
    return ScoreTable(table.criteria + new_cids, rows)


# ---------------------------------------------------------------------------
# Criteria-mapping text format
#
#   criterion <id> {
#     prop <prop-id> [weight <w>] [better higher|lower] [kind percentage|magnitude]
#     ...
#   }
#
# Defaults: weight uniform, better higher, kind percentage.  '#' comments.
# ---------------------------------------------------------------------------

def parse_criteria_mapping(text: str, properties: PropertySet | None = None) -> list[CriterionMapping]:
    mappings: list[CriterionMapping] = []
    current: tuple[str, list[PropertyContribution]] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "criterion":
            if current is not None:
                raise ModelSyntaxError("nested 'criterion' block", lineno)
            if len(toks) != 3 or toks[2] != "{":
                raise ModelSyntaxError("usage: criterion <id> {", lineno)
            current = (toks[1], [])
        elif toks[0] == "}":
            if current is None or len(toks) != 1:
                raise ModelSyntaxError("unmatched '}'", lineno)
            mappings.append(CriterionMapping(current[0], current[1]))
            current = None
        elif toks[0] == "prop":
            if current is None:
                raise ModelSyntaxError("'prop' outside a criterion block", lineno)
            if len(toks) < 2:
                raise ModelSyntaxError("usage: prop <id> [weight w] [better higher|lower] [kind ...]", lineno)
            pid = toks[1]
            if properties is not None:
                properties.get(pid)
            contrib = PropertyContribution(pid)
            i = 2
            while i < len(toks):
                key = toks[i]
                if i + 1 >= len(toks):
                    raise ModelSyntaxError(f"option '{key}' needs a value", lineno)
                val = toks[i + 1]
                if key == "weight":
                    try:
                        contrib = replace(contrib, weight=float(val))
                    except ValueError:
                        raise ModelSyntaxError(f"bad weight '{val}'", lineno) from None
                elif key == "better":
                    if val not in ("higher", "lower"):
                        raise ModelSyntaxError("better must be 'higher' or 'lower'", lineno)
                    contrib = replace(
                        contrib, direction=HIGHER_IS_BETTER if val == "higher" else HIGHER_IS_WORSE)
                elif key == "kind":
                    if val not in ("percentage", "magnitude"):
                        raise ModelSyntaxError("kind must be 'percentage' or 'magnitude'", lineno)
                    contrib = replace(
                        contrib, kind=BOUNDED_PERCENTAGE if val == "percentage" else UNBOUNDED_MAGNITUDE)
                else:
                    raise ModelSyntaxError(f"unknown option '{key}'", lineno)
                i += 2
            current[1].append(contrib)
        else:
            raise ModelSyntaxError(f"unknown keyword '{toks[0]}'", lineno)
    if current is not None:
        raise ModelSyntaxError("unterminated criterion block")
    if not mappings:
        raise ModelSyntaxError("criteria mapping declares no criteria")
    for mapping in mappings:
        weighted_sum([0.0] * len(mapping.contributions), mapping.weights())  # validates weights
    return mappings


def load_criteria_mapping(path, properties: PropertySet | None = None) -> list[CriterionMapping]:
    with open(path, encoding="utf-8") as fh:
        return parse_criteria_mapping(fh.read(), properties)
