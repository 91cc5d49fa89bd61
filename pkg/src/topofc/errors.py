"""Exception types shared across the package.

Every error carries enough context to name the offending subject, row, or
entry; the CLI maps these onto exit codes (see ``topofc.cli``).
"""


class TopofcError(Exception):
    """Base class for all package errors."""


class ZeroVarianceRow(TopofcError):
    """A time-series row is constant, so Pearson correlation is undefined."""

    def __init__(self, row: int, subject_id: str = ""):
        self.row = row
        self.subject_id = subject_id
        where = f" (subject {subject_id})" if subject_id else ""
        super().__init__(f"row {row} has zero sample variance{where}")


class DimensionTooSmall(TopofcError):
    """Fewer regions or time points than the minimum the pipeline supports."""


class ParseError(TopofcError):
    """A CSV cell failed to parse; carries 1-based line and column."""

    def __init__(self, line: int, column: int, detail: str = ""):
        self.line = line
        self.column = column
        msg = f"parse error at line {line}, column {column}"
        super().__init__(msg + (f": {detail}" if detail else ""))


class InvariantViolation(TopofcError):
    """Loaded data violates a domain invariant; wraps the failing rule."""


class NotSymmetric(TopofcError):
    """Distance matrix asymmetry beyond the 1e-9 tolerance."""


class EntryOutOfRange(TopofcError):
    """Distance matrix entry outside [0, 2]."""

    def __init__(self, i: int, j: int, value: float):
        self.i = i
        self.j = j
        self.value = value
        super().__init__(f"entry ({i},{j}) = {value} outside [0, 2]")


class NonzeroDiagonal(TopofcError):
    """Distance matrix has a nonzero diagonal entry."""

    def __init__(self, i: int, value: float):
        self.i = i
        self.value = value
        super().__init__(f"diagonal entry ({i},{i}) = {value} is not 0")


class TooFewPoints(TopofcError):
    """Synthetic point cloud request below the 4-point minimum."""


class ComplexTooLarge(TopofcError):
    """Rips complex would exceed the configured simplex cap."""

    def __init__(self, n_simplices: int, cap: int):
        self.n_simplices = n_simplices
        self.cap = cap
        super().__init__(
            f"complex would hold {n_simplices} simplices, over the cap of {cap}; "
            "reduce max_eps or max_dim"
        )


class OracleTooLarge(TopofcError):
    """Brute-force Betti oracle called above its dense-rank guard."""


class DegenerateGroups(TopofcError):
    """Both groups constant with equal means: the t-statistic is undefined."""


class SingleClassTraining(TopofcError):
    """Training data contains only one label."""


class DimensionMismatch(TopofcError):
    """Feature dimension disagrees with the model or the cohort."""


class TooFewSamples(TopofcError):
    """Not enough samples per class for the requested fold count."""


class NotAnMLP(TopofcError):
    """Embedding extraction requested from a non-MLP model."""


class LayoutMismatch(TopofcError):
    """Segment lengths disagree with the vectorization config."""


class ConfigError(TopofcError):
    """Pipeline config file is missing, malformed, or inconsistent."""


class CohortDataError(TopofcError):
    """One or more subjects failed to process; carries every failure.

    A partial cohort is never used silently: group statistics on a
    shrunken cohort would be biased, so the whole run aborts.
    """

    def __init__(self, failures: list[tuple[str, Exception]]):
        self.failures = failures
        lines = "; ".join(f"{sid}: {exc}" for sid, exc in failures)
        super().__init__(f"{len(failures)} subject(s) failed: {lines}")
