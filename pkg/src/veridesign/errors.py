"""Exception types shared across the toolkit."""


class VeridesignError(Exception):
    """Base class for all toolkit errors."""


# --- model construction / instantiation ---

class ModelError(VeridesignError):
    """A chain definition violates a structural invariant."""


class MissingParameter(ModelError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"no value assigned to parameter '{name}'")


class RowSumViolation(ModelError):
    """An instantiated row does not sum to 1 within tolerance."""

    def __init__(self, state, total):
        self.state = state
        self.total = total
        super().__init__(f"outgoing probabilities of state '{state}' sum to {total:.12g}, expected 1")


class UnknownReward(ModelError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"chain has no reward structure named '{name}'")


class SolverFailure(VeridesignError):
    """A linear system could not be solved to the required residual."""


class ModelSyntaxError(ModelError):
    """A model or design-space file does not match its documented grammar."""

    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


# --- property language ---

class PropertySyntaxError(VeridesignError):
    """Input does not match the property grammar.

    Carries the 0-based character position and the token set the parser
    would have accepted there.
    """

    def __init__(self, message, position, expected=(), line=None):
        self.position = position
        self.expected = tuple(expected)
        self.line = line
        loc = f"line {line}, " if line is not None else ""
        suffix = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{loc}position {position}: {message}{suffix}")


class UnknownConstruct(VeridesignError):
    """Recognizably PCTL, but outside the supported subset."""

    def __init__(self, construct, position=None):
        self.construct = construct
        self.position = position
        super().__init__(f"unsupported construct '{construct}'")


class UnknownPropertyId(VeridesignError):
    def __init__(self, prop_id):
        self.prop_id = prop_id
        super().__init__(f"unknown property id '{prop_id}'")


# --- evaluation ---

class UnknownLabel(VeridesignError):
    def __init__(self, label):
        self.label = label
        super().__init__(f"label '{label}' does not occur on any state")


class FilterNotUnique(VeridesignError):
    """A filter(state, ...) condition matched zero or several states."""

    def __init__(self, count):
        self.count = count
        super().__init__(f"filter condition must match exactly one state, matched {count}")


class EvaluationError(VeridesignError):
    """Evaluation of one property failed; carries the property id."""

    def __init__(self, prop_id, cause):
        self.prop_id = prop_id
        self.cause = cause
        super().__init__(f"evaluating '{prop_id}': {cause}")


# --- design space ---

class DesignSpaceError(VeridesignError):
    """A design-space definition violates a structural invariant."""


class DuplicateParameter(DesignSpaceError):
    def __init__(self, name, subsystems):
        self.name = name
        super().__init__(f"parameter '{name}' is assigned by more than one sub-system: {subsystems}")


# --- scoring ---

class ScoringError(VeridesignError):
    pass


class WeightMismatch(ScoringError):
    def __init__(self, n_values, n_weights):
        super().__init__(f"{n_values} values but {n_weights} weights")


class WeightSumViolation(ScoringError):
    def __init__(self, total):
        self.total = total
        super().__init__(f"weights sum to {total:.15g}, expected 1 within 1e-12")


class InfinitePopulationValue(ScoringError):
    """A value being range-mapped (or its population) is infinite."""


class RangeViolation(ScoringError):
    pass


# --- simulation ---

class NotAlmostSureReach(VeridesignError):
    """Hitting-time estimation refused: the target is not reached almost surely."""
