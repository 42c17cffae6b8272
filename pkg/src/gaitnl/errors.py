"""Exception types shared across the toolkit.

Every error carries a stable ``name`` (the class name) so batch runs and
language bindings can report failures without string-parsing messages.
"""


class GaitnlError(Exception):
    """Base class for all toolkit errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


# --- ingestion ---------------------------------------------------------

class UnreadableFile(GaitnlError):
    pass


class UnknownFormat(GaitnlError):
    pass


class EmptyDataset(GaitnlError):
    pass


class EmptyAttributeList(GaitnlError):
    pass


class DuplicateAttribute(GaitnlError):
    def __init__(self, name):
        super().__init__(f"duplicate attribute {name!r}")
        self.attribute = name


class MissingColumn(GaitnlError):
    def __init__(self, name):
        super().__init__(f"column {name!r} not present in dataset")
        self.column = name


class NonNumericColumn(GaitnlError):
    def __init__(self, name, reason="non-numeric values"):
        super().__init__(f"column {name!r} unusable: {reason}")
        self.column = name
        self.reason = reason


# --- algorithm preconditions -------------------------------------------

class SeriesTooShort(GaitnlError):
    pass


class DegenerateSeries(GaitnlError):
    pass


class LengthMismatch(GaitnlError):
    pass


class InvalidOrder(GaitnlError):
    pass


class DegenerateFit(GaitnlError):
    pass


class EmptyStateMatrix(GaitnlError):
    pass


class NoValidNeighbors(GaitnlError):
    pass


class NoReplacementFound(GaitnlError):
    pass


class Unreachable(GaitnlError):
    """Recurrence-rate target cannot be met; reports the closest achievable."""

    def __init__(self, target_pct, closest_pct, radius):
        super().__init__(
            f"target recurrence rate {target_pct}% unreachable; "
            f"closest achievable {closest_pct}% at radius {radius}"
        )
        self.target_pct = target_pct
        self.closest_pct = closest_pct
        self.radius = radius


class MemoryBudgetExceeded(GaitnlError):
    """Raised before allocation when an estimate exceeds the configured budget."""

    def __init__(self, estimated_bytes, budget_bytes):
        super().__init__(
            f"estimated allocation {estimated_bytes} B exceeds budget {budget_bytes} B"
        )
        self.estimated_bytes = estimated_bytes
        self.budget_bytes = budget_bytes


# --- batch orchestration -----------------------------------------------

class OutputDirUnwritable(GaitnlError):
    pass


class NoRunnableTasks(GaitnlError):
    pass


class DuplicateAlgorithmName(GaitnlError):
    pass


class UnknownAlgorithm(GaitnlError):
    pass


class AutoResolutionFailed(GaitnlError):
    def __init__(self, parameter, cause):
        super().__init__(f"cannot auto-resolve {parameter!r}: {cause}")
        self.parameter = parameter
        self.cause = cause


class PlotWriteFailed(GaitnlError):
    pass
