"""Parametric discrete-time Markov chains: types, validation, instantiation, file format.

A :class:`ParametricDtmc` carries transitions whose probabilities are either
constants or named parameters.  Fixing a parameter assignment with
:func:`instantiate` produces a :class:`ConcreteDtmc` with a row-stochastic
sparse matrix, which is what the analysis routines operate on.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (
    MissingParameter,
    ModelError,
    ModelSyntaxError,
    RowSumViolation,
    UnknownReward,
)

#: Tolerance for |row sum - 1| on every instantiated chain.
ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Param:
    """A reference to a named transition-probability parameter."""

    name: str


@dataclass(frozen=True)
class TransitionEntry:
    source: int
    target: int
    probability: float | Param


@dataclass
class RewardStructure:
    """Named reward assignment: non-negative rewards on states and/or transitions."""

    name: str
    state_rewards: dict[int, float] = field(default_factory=dict)
    transition_rewards: dict[tuple[int, int], float] = field(default_factory=dict)

    def state_vector(self, n_states: int) -> np.ndarray:
        vec = np.zeros(n_states)
        for s, r in self.state_rewards.items():
            vec[s] = r
        return vec

    def transition_matrix(self, n_states: int) -> np.ndarray:
        mat = np.zeros((n_states, n_states))
        for (s, t), r in self.transition_rewards.items():
            mat[s, t] = r
        return mat


@dataclass
class ParametricDtmc:
    """A DTMC whose selected transition probabilities are named parameters.

    States are dense 0-based indices; ``state_names[i]`` gives the display
    name of state ``i``.  ``labels[i]`` is the set of atomic propositions
    holding in state ``i``.
    """

    state_names: list[str]
    initial: int
    labels: dict[int, frozenset[str]]
    transitions: list[TransitionEntry]
    rewards: dict[str, RewardStructure] = field(default_factory=dict)
    parameters: frozenset[str] = frozenset()

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    def state_index(self, name: str) -> int:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise ModelError(f"unknown state '{name}'") from None


@dataclass
class ConcreteDtmc:
    """A fully instantiated chain: row-stochastic matrix plus labels and rewards.

    Instances are treated as immutable after construction and are safe to
    share across parallel workers.
    """

    matrix: sp.csr_matrix
    state_names: list[str]
    initial: int
    labels: dict[int, frozenset[str]]
    rewards: dict[str, RewardStructure] = field(default_factory=dict)

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def label_universe(self) -> frozenset[str]:
        out: set[str] = set()
        for labs in self.labels.values():
            out |= labs
        return frozenset(out)

    def states_with_label(self, label: str) -> frozenset[int]:
        return frozenset(s for s, labs in self.labels.items() if label in labs)

    def reward(self, name: str) -> RewardStructure:
        try:
            return self.rewards[name]
        except KeyError:
            raise UnknownReward(name) from None


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: [{self.kind}] {self.message}"


def validate_model(model: ParametricDtmc) -> list[Diagnostic]:
    """Check every structural invariant of a parametric chain.

    Returns an empty list iff the model is clean.  Violations are reported
    as one diagnostic each rather than raised, so a single pass surfaces
    all problems; unreachable states are warnings, the rest are errors.
    """
    out: list[Diagnostic] = []
    n = model.n_states

    def err(kind, msg):
        out.append(Diagnostic("error", kind, msg))

    def warn(kind, msg):
        out.append(Diagnostic("warning", kind, msg))

    def sname(i):
        return model.state_names[i] if 0 <= i < n else f"<{i}>"

    if not 0 <= model.initial < n:
        err("invalid-initial", f"initial state index {model.initial} out of range")

    seen_pairs: set[tuple[int, int]] = set()
    has_outgoing = [False] * n
    for t in model.transitions:
        if not (0 <= t.source < n) or not (0 <= t.target < n):
            err("invalid-state", f"transition ({t.source},{t.target}) references a state out of range")
            continue
        has_outgoing[t.source] = True
        if (t.source, t.target) in seen_pairs:
            err("duplicate-transition",
                f"transition {sname(t.source)} -> {sname(t.target)} appears more than once")
        seen_pairs.add((t.source, t.target))
        if isinstance(t.probability, Param):
            if t.probability.name not in model.parameters:
                err("unknown-parameter",
                    f"transition {sname(t.source)} -> {sname(t.target)} references "
                    f"undeclared parameter '{t.probability.name}'")
        else:
            p = float(t.probability)
            if not np.isfinite(p) or p < 0.0 or p > 1.0:
                err("probability-out-of-range",
                    f"transition {sname(t.source)} -> {sname(t.target)} has probability {p!r} outside [0,1]")

    for s in range(n):
        if not has_outgoing[s]:
            err("dangling-state", f"state {sname(s)} has no outgoing transitions")

    for name, rs in model.rewards.items():
        for s, r in rs.state_rewards.items():
            if not (0 <= s < n):
                err("invalid-state", f"reward '{name}' references state index {s} out of range")
            elif not np.isfinite(r) or r < 0.0:
                err("invalid-reward", f"reward '{name}' on state {sname(s)} is {r!r}, must be finite and >= 0")
        for (s, t), r in rs.transition_rewards.items():
            if not (0 <= s < n) or not (0 <= t < n):
                err("invalid-state", f"reward '{name}' references transition ({s},{t}) out of range")
            elif not np.isfinite(r) or r < 0.0:
                err("invalid-reward",
                    f"reward '{name}' on transition {sname(s)} -> {sname(t)} is {r!r}, must be finite and >= 0")

    # Reachability warning: treat every declared edge as potentially positive.
    if 0 <= model.initial < n:
        succ: dict[int, list[int]] = {}
        for t in model.transitions:
            if 0 <= t.source < n and 0 <= t.target < n:
                succ.setdefault(t.source, []).append(t.target)
        seen = {model.initial}
        queue = deque([model.initial])
        while queue:
            s = queue.popleft()
            for t in succ.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        for s in range(n):
            if s not in seen:
                warn("unreachable-state", f"state {sname(s)} is not reachable from the initial state")

    return out


def instantiate(model: ParametricDtmc, assignment: dict[str, float]) -> ConcreteDtmc:
    """Substitute parameter values and build the concrete row-stochastic chain.

    ``assignment`` must give a value in [0,1] for every declared parameter.
    Every state's outgoing probabilities must sum to 1 within
    :data:`ROW_SUM_TOL`; a violating state signals an inconsistent
    design-variant assignment and raises :class:`RowSumViolation`.
    """
    for name in model.parameters:
        if name not in assignment:
            raise MissingParameter(name)
    for name, value in assignment.items():
        if name not in model.parameters:
            raise ModelError(f"assignment for undeclared parameter '{name}'")
        v = float(value)
        if not np.isfinite(v) or v < 0.0 or v > 1.0:
            raise ModelError(f"parameter '{name}' = {value!r} outside [0,1]")

    n = model.n_states
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    seen_pairs: set[tuple[int, int]] = set()
    for t in model.transitions:
        if (t.source, t.target) in seen_pairs:
            raise ModelError(
                f"transition {model.state_names[t.source]} -> {model.state_names[t.target]} appears more than once")
        seen_pairs.add((t.source, t.target))
        if isinstance(t.probability, Param):
            p = float(assignment[t.probability.name])
        else:
            p = float(t.probability)
        if not np.isfinite(p) or p < 0.0 or p > 1.0:
            raise ModelError(
                f"transition {model.state_names[t.source]} -> {model.state_names[t.target]} "
                f"resolves to probability {p!r} outside [0,1]")
        rows.append(t.source)
        cols.append(t.target)
        vals.append(p)

    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    sums = np.asarray(matrix.sum(axis=1)).ravel()
    for s in range(n):
        if sums[s] == 0.0:
            raise ModelError(f"state {model.state_names[s]} has no outgoing transitions")
        if abs(sums[s] - 1.0) > ROW_SUM_TOL:
            raise RowSumViolation(model.state_names[s], float(sums[s]))

    return ConcreteDtmc(
        matrix=matrix,
        state_names=list(model.state_names),
        initial=model.initial,
        labels=dict(model.labels),
        rewards=dict(model.rewards),
    )


# ---------------------------------------------------------------------------
# Model text format
#
#   state <name> [<label>[,<label>...]]
#   init <name>
#   param <name>
#   trans <src> <dst> (<float> | $<param>)
#   reward <name> state <state> <value>
#   reward <name> trans <src> <dst> <value>
#
# '#' starts a comment; blank lines are ignored.  The grammar is documented
# bit-exactly in docs/formats.md.
# ---------------------------------------------------------------------------

def parse_model(text: str) -> ParametricDtmc:
    """Parse the line-oriented model format into a :class:`ParametricDtmc`."""
    state_names: list[str] = []
    labels: dict[int, frozenset[str]] = {}
    initial: int | None = None
    parameters: set[str] = set()
    transitions: list[TransitionEntry] = []
    rewards: dict[str, RewardStructure] = {}

    index: dict[str, int] = {}

    def state_of(name: str, lineno: int) -> int:
        if name not in index:
            raise ModelSyntaxError(f"unknown state '{name}'", lineno)
        return index[name]

    def parse_value(tok: str, lineno: int) -> float:
        try:
            return float(tok)
        except ValueError:
            raise ModelSyntaxError(f"expected a number, got '{tok}'", lineno) from None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kw = toks[0]
        if kw == "state":
            if len(toks) < 2:
                raise ModelSyntaxError("state declaration needs a name", lineno)
            name = toks[1]
            if name in index:
                raise ModelSyntaxError(f"state '{name}' declared twice", lineno)
            index[name] = len(state_names)
            state_names.append(name)
            labs = [l for l in " ".join(toks[2:]).replace(",", " ").split() if l]
            labels[index[name]] = frozenset(labs)
        elif kw == "init":
            if len(toks) != 2:
                raise ModelSyntaxError("usage: init <state>", lineno)
            initial = state_of(toks[1], lineno)
        elif kw == "param":
            if len(toks) != 2:
                raise ModelSyntaxError("usage: param <name>", lineno)
            parameters.add(toks[1])
        elif kw == "trans":
            if len(toks) != 4:
                raise ModelSyntaxError("usage: trans <src> <dst> <prob>", lineno)
            src = state_of(toks[1], lineno)
            dst = state_of(toks[2], lineno)
            prob: float | Param
            if toks[3].startswith("$"):
                pname = toks[3][1:]
                if not pname:
                    raise ModelSyntaxError("empty parameter reference '$'", lineno)
                prob = Param(pname)
            else:
                prob = parse_value(toks[3], lineno)
            transitions.append(TransitionEntry(src, dst, prob))
        elif kw == "reward":
            if len(toks) >= 2:
                rs = rewards.setdefault(toks[1], RewardStructure(toks[1]))
            if len(toks) == 5 and toks[2] == "state":
                rs.state_rewards[state_of(toks[3], lineno)] = parse_value(toks[4], lineno)
            elif len(toks) == 6 and toks[2] == "trans":
                key = (state_of(toks[3], lineno), state_of(toks[4], lineno))
                rs.transition_rewards[key] = parse_value(toks[5], lineno)
            else:
                raise ModelSyntaxError(
                    "usage: reward <name> state <state> <value> | reward <name> trans <src> <dst> <value>",
                    lineno)
        else:
            raise ModelSyntaxError(f"unknown keyword '{kw}'", lineno)

    if not state_names:
        raise ModelSyntaxError("model declares no states")
    if initial is None:
        raise ModelSyntaxError("model declares no initial state")

    return ParametricDtmc(
        state_names=state_names,
        initial=initial,
        labels=labels,
        transitions=transitions,
        rewards=rewards,
        parameters=frozenset(parameters),
    )


def load_model(path) -> ParametricDtmc:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def format_model(model: ParametricDtmc) -> str:
    """Render a model back into the text format (canonical ordering)."""
    lines = []
    for i, name in enumerate(model.state_names):
        labs = ",".join(sorted(model.labels.get(i, frozenset())))
        lines.append(f"state {name} {labs}".rstrip())
    lines.append(f"init {model.state_names[model.initial]}")
    for p in sorted(model.parameters):
        lines.append(f"param {p}")
    for t in model.transitions:
        if isinstance(t.probability, Param):
            prob = f"${t.probability.name}"
        else:
            prob = format(t.probability, ".17g")
        lines.append(f"trans {model.state_names[t.source]} {model.state_names[t.target]} {prob}")
    for rname in sorted(model.rewards):
        rs = model.rewards[rname]
        for s in sorted(rs.state_rewards):
            lines.append(f"reward {rname} state {model.state_names[s]} {format(rs.state_rewards[s], '.17g')}")
        for (s, t) in sorted(rs.transition_rewards):
            val = rs.transition_rewards[(s, t)]
            lines.append(
                f"reward {rname} trans {model.state_names[s]} {model.state_names[t]} {format(val, '.17g')}")
    return "\n".join(lines) + "\n"
