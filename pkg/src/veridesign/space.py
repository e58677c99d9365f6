"""Design space: sub-systems with alternatives, configuration enumeration, sweep.

A design space is an ordered list of sub-systems, each offering alternatives
that assign the same group of transition-probability parameters.  The
configuration set is the Cartesian product of the alternatives, enumerated
lexicographically with the first sub-system most significant, indexed from 1.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .checker import PropertyVector, evaluate_all
from .dtmc import ParametricDtmc, instantiate
from .errors import DesignSpaceError, DuplicateParameter, ModelSyntaxError, VeridesignError
from .properties import PropertySet, SuccessCriterion


@dataclass
class SubSystem:
    """A named sub-system and its design alternatives.

    Every alternative must assign exactly the same set of parameters, so a
    choice of alternative is a drop-in substitution.
    """

    name: str
    alternatives: list[tuple[str, dict[str, float]]]

    def __post_init__(self):
        if not self.alternatives:
            raise DesignSpaceError(f"sub-system '{self.name}' has no alternatives")
        names = [alt for alt, _ in self.alternatives]
        if len(set(names)) != len(names):
            raise DesignSpaceError(f"sub-system '{self.name}' repeats an alternative name")
        first = set(self.alternatives[0][1])
        for alt, assignment in self.alternatives[1:]:
            if set(assignment) != first:
                raise DesignSpaceError(
                    f"alternative '{alt}' of sub-system '{self.name}' assigns a different "
                    f"parameter set than '{self.alternatives[0][0]}'")

    @property
    def parameter_names(self) -> frozenset[str]:
        return frozenset(self.alternatives[0][1])


@dataclass
class DesignSpace:
    subsystems: list[SubSystem]

    def __post_init__(self):
        owner: dict[str, str] = {}
        for sub in self.subsystems:
            for p in sub.parameter_names:
                if p in owner:
                    raise DuplicateParameter(p, (owner[p], sub.name))
                owner[p] = sub.name

    @property
    def size(self) -> int:
        n = 1
        for sub in self.subsystems:
            n *= len(sub.alternatives)
        return n


@dataclass(frozen=True)
class Configuration:
    """One fully specified design variant: an alternative per sub-system."""

    index: int  # 1-based
    choices: tuple[tuple[str, str], ...]  # (subsystem, alternative) in space order
    assignment: dict[str, float] = field(hash=False)

    @property
    def name(self) -> str:
        return "-".join(alt for _, alt in self.choices)

    def __str__(self) -> str:
        return f"theta{self.index} ({self.name})"


def enumerate_configurations(space: DesignSpace) -> list[Configuration]:
    """All configurations in lexicographic order, first sub-system most significant."""
    configs: list[tuple[tuple[tuple[str, str], ...], dict[str, float]]] = [((), {})]
    for sub in space.subsystems:
        nxt = []
        for choices, assignment in configs:
            for alt, fragment in sub.alternatives:
                nxt.append((choices + ((sub.name, alt),), {**assignment, **fragment}))
        configs = nxt
    return [Configuration(k, choices, assignment)
            for k, (choices, assignment) in enumerate(configs, start=1)]


def check_success(vector: PropertyVector, criteria: list[SuccessCriterion]) -> tuple[bool, list[str]]:
    """Apply every success criterion; returns (all hold, ids of violated criteria).

    Comparisons are exact floating comparisons on the evaluated values; an
    empty criteria list accepts everything.
    """
    violated = [c.prop_id for c in criteria if not c.holds(vector.value_of(c.prop_id))]
    return (not violated, violated)


@dataclass
class SweepResults:
    """Partition of the configuration set after verification.

    ``success``/``fail``/``errors`` are disjoint and cover every enumerated
    configuration; all three are ordered by configuration index.
    """

    success: list[tuple[Configuration, PropertyVector]] = field(default_factory=list)
    fail: list[tuple[Configuration, PropertyVector, list[str]]] = field(default_factory=list)
    errors: list[tuple[Configuration, Exception]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.success) + len(self.fail) + len(self.errors)

    def rows(self):
        """All results merged back into configuration order."""
        merged: list[tuple[Configuration, str, PropertyVector | None, list[str] | None, Exception | None]] = []
        for cfg, vec in self.success:
            merged.append((cfg, "success", vec, [], None))
        for cfg, vec, violated in self.fail:
            merged.append((cfg, "fail", vec, violated, None))
        for cfg, err in self.errors:
            merged.append((cfg, "error", None, None, err))
        merged.sort(key=lambda row: row[0].index)
        return merged


def run_sweep(model: ParametricDtmc,
              space: DesignSpace,
              property_set: PropertySet,
              criteria: list[SuccessCriterion],
              jobs: int = 1) -> SweepResults:
    """Instantiate, sanity-check, and verify every configuration.

    Per-configuration failures (row-sum violations, evaluation errors) are
    recorded and do not abort the sweep; one broken variant must not hide
    results for the others.  Results are ordered by configuration index
    regardless of the degree of parallelism.
    """
    configs = enumerate_configurations(space)

    def verify(cfg: Configuration):
        chain = instantiate(model, cfg.assignment)
        return evaluate_all(chain, property_set)

    outcomes: list[tuple[Configuration, PropertyVector | None, Exception | None]] = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [(cfg, pool.submit(verify, cfg)) for cfg in configs]
            for cfg, fut in futures:
                try:
                    outcomes.append((cfg, fut.result(), None))
                except VeridesignError as err:
                    outcomes.append((cfg, None, err))
    else:
        for cfg in configs:
            try:
                outcomes.append((cfg, verify(cfg), None))
            except VeridesignError as err:
                outcomes.append((cfg, None, err))

    results = SweepResults()
    for cfg, vector, err in sorted(outcomes, key=lambda o: o[0].index):
        if err is not None:
            results.errors.append((cfg, err))
            continue
        ok, violated = check_success(vector, criteria)
        if ok:
            results.success.append((cfg, vector))
        else:
            results.fail.append((cfg, vector, violated))
    return results


# ---------------------------------------------------------------------------
# Design-space text format
#
#   subsystem <name>
#   alt <name> { <param>=<value> [<param>=<value> ...] }
#
# The braces and every assignment stay on one line; '#' starts a comment.
# ---------------------------------------------------------------------------

def parse_design_space(text: str) -> DesignSpace:
    subsystems: list[tuple[str, list[tuple[str, dict[str, float]]]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split(None, 1)
        if toks[0] == "subsystem":
            if len(toks) != 2 or len(toks[1].split()) != 1:
                raise ModelSyntaxError("usage: subsystem <name>", lineno)
            subsystems.append((toks[1].strip(), []))
        elif toks[0] == "alt":
            if not subsystems:
                raise ModelSyntaxError("'alt' before any 'subsystem'", lineno)
            if len(toks) != 2:
                raise ModelSyntaxError("usage: alt <name> { k=v ... }", lineno)
            rest = toks[1].strip()
            if "{" not in rest or not rest.endswith("}"):
                raise ModelSyntaxError("alternative body must be enclosed in { } on one line", lineno)
            name, body = rest.split("{", 1)
            name = name.strip()
            if not name:
                raise ModelSyntaxError("alternative needs a name", lineno)
            assignment: dict[str, float] = {}
            for item in body[:-1].split():
                if "=" not in item:
                    raise ModelSyntaxError(f"expected <param>=<value>, got '{item}'", lineno)
                key, val = item.split("=", 1)
                try:
                    assignment[key] = float(val)
                except ValueError:
                    raise ModelSyntaxError(f"bad value '{val}' for parameter '{key}'", lineno) from None
            subsystems[-1][1].append((name, assignment))
        else:
            raise ModelSyntaxError(f"unknown keyword '{toks[0]}'", lineno)
    if not subsystems:
        raise ModelSyntaxError("design space declares no sub-systems")
    return DesignSpace([SubSystem(name, alts) for name, alts in subsystems])


def load_design_space(path) -> DesignSpace:
    with open(path, encoding="utf-8") as fh:
        return parse_design_space(fh.read())
