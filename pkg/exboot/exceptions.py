"""Custom exceptions for exboot."""


class ExbootError(Exception):
    """Base exception for all exboot errors."""

    exit_code = 1

    def __init__(self, message: str, suggestion: str | None = None):
        self.message = message
        self.suggestion = suggestion
        super().__init__(self.message)

    def to_dict(self) -> dict:
        """Machine-readable form written next to failed run artifacts."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "suggestion": self.suggestion,
            "exit_code": self.exit_code,
        }


class InputError(ExbootError):
    """Raised when input data or parameters are unusable."""

    exit_code = 2


class DegenerateError(ExbootError):
    """Raised when the data carry no usable variation."""

    exit_code = 3


class ConfigurationError(InputError):
    """Raised when there's an issue with a run configuration file."""

    def __init__(self, path: str, details: str):
        message = f"Invalid configuration in {path}: {details}"
        suggestion = "Use 'exboot config create' to write a file with every known key"
        super().__init__(message, suggestion)


class MalformedRowError(InputError):
    """Raised when a CSV row is ragged or holds a non-numeric value."""

    def __init__(self, line: int, details: str):
        message = f"Malformed row at line {line}: {details}"
        suggestion = "Check the column count (index columns then value columns) and numeric fields"
        super().__init__(message, suggestion)


class DuplicateIndexError(InputError):
    """Raised when the same cell or edge appears twice."""

    def __init__(self, index: tuple):
        message = f"Duplicate entry for index {index}"
        suggestion = "Aggregate repeated observations before loading"
        super().__init__(message, suggestion)


class MissingCellError(InputError):
    """Raised when a multiway grid is incomplete."""

    def __init__(self, dims: tuple[int, ...], present: int):
        expected = 1
        for size in dims:
            expected *= size
        message = f"Array with dims {dims} needs {expected} cells but only {present} were given"
        suggestion = "Every index combination must be observed exactly once"
        super().__init__(message, suggestion)


class SelfLoopError(InputError):
    """Raised when an edge list contains a self-loop."""

    def __init__(self, unit: str, line: int):
        message = f"Self-loop on unit '{unit}' at line {line}"
        suggestion = "Dyadic arrays have no diagonal; drop rows with identical endpoints"
        super().__init__(message, suggestion)


class UnparseableWeightError(InputError):
    """Raised when an edge weight is not a number."""

    def __init__(self, value: str, line: int):
        message = f"Cannot parse edge weight '{value}' at line {line}"
        suggestion = "The third column of an edge list must be numeric"
        super().__init__(message, suggestion)


class InvalidInputError(InputError):
    """Raised when user input is invalid."""

    def __init__(self, field: str, value, reason: str):
        message = f"Invalid {field}: '{value}' - {reason}"
        suggestion = "Please provide a valid value and try again"
        super().__init__(message, suggestion)


class TooFewUnitsError(InputError):
    """Raised when an array has too few units along some axis."""

    def __init__(self, found: int, required: int, what: str = "units"):
        message = f"Found {found} {what}, at least {required} are required"
        suggestion = "Inference needs at least two levels per index (n >= 3 for dyads)"
        super().__init__(message, suggestion)


class AsymmetricDataError(InputError):
    """Raised when an operation needs X_ij = X_ji but the array is directed."""

    def __init__(self):
        message = "Dyadic data are not symmetric"
        suggestion = "Load the edge list with --symmetrize"
        super().__init__(message, suggestion)


class ModeMismatchError(InputError):
    """Raised when a band is requested in a mode the draws were not built for."""

    def __init__(self, result_mode: str, requested_mode: str):
        message = f"Bootstrap result is in {result_mode} mode, {requested_mode} band requested"
        suggestion = "Use restudentize() to switch modes on the same draws"
        super().__init__(message, suggestion)


class SupportTooLargeError(InputError):
    """Raised when a latent grid exceeds the enumeration budget."""

    def __init__(self, size: int, budget: int):
        message = f"Latent grid has {size} combinations, budget is {budget}"
        suggestion = "Shrink the latent supports or raise the enumeration budget"
        super().__init__(message, suggestion)


class NotConvergedError(ExbootError):
    """Raised on request when coordinate descent exhausts its iterations."""

    def __init__(self, iterations: int, kkt_violation: float):
        message = f"Coordinate descent stopped after {iterations} sweeps with KKT violation {kkt_violation:.3e}"
        suggestion = "Increase max_iter or loosen the tolerance"
        super().__init__(message, suggestion)


class DegenerateScaleError(DegenerateError):
    """Raised when a studentized band meets a zero standard deviation."""

    def __init__(self, coordinates: list[int]):
        shown = ", ".join(str(c) for c in coordinates[:10])
        if len(coordinates) > 10:
            shown += ", ..."
        message = f"Zero estimated standard deviation at coordinate(s) {shown}"
        suggestion = "Use --mode raw (constant width) or drop constant coordinates"
        super().__init__(message, suggestion)


class DegenerateDataError(DegenerateError):
    """Raised when a statistic cannot be formed from the data."""

    def __init__(self, details: str):
        message = f"Degenerate data: {details}"
        suggestion = "Supply a bandwidth explicitly or check the input values"
        super().__init__(message, suggestion)


class ZeroMassOnlyError(DegenerateError):
    """Raised when every dyadic outcome is exactly zero."""

    def __init__(self):
        message = "All dyadic outcomes are zero, the continuous part has no mass"
        suggestion = "Use --a-known-one or check the weight column"
        super().__init__(message, suggestion)
