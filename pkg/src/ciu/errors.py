"""Exception hierarchy shared by every ciu module."""


class CiuError(Exception):
    """Base class for all errors raised by ciu."""


class DimensionError(CiuError, ValueError):
    """A vector has the wrong number of components."""


class RangeViolationError(CiuError, ValueError):
    """A value falls outside its declared range."""

    def __init__(self, message, name=None, value=None):
        super().__init__(message)
        self.name = name
        self.value = value


class DataError(CiuError, ValueError):
    """A dataset or persisted document is unreadable or ill-formed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TrainingError(CiuError, RuntimeError):
    """Training diverged (non-finite loss)."""


class ModelEvaluationError(CiuError, RuntimeError):
    """A black-box model failed on a sample; the sample is attached."""

    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class BudgetExceededError(CiuError, ValueError):
    """A grid estimate would need more model evaluations than allowed."""

    def __init__(self, required, budget):
        super().__init__(
            f"grid needs {required} evaluations, budget is {budget}; "
            "reduce points_per_dim or the varied set, or raise the budget"
        )
        self.required = required
        self.budget = budget


class ConsistencyError(CiuError, RuntimeError):
    """An internal invariant was broken (e.g. cmax < cmin, or y outside [cmin, cmax])."""


class UnsupportedOperationError(CiuError, ValueError):
    """The requested operation does not apply to this model."""


class MismatchError(CiuError, ValueError):
    """Two explanations being compared come from different models or outputs."""
