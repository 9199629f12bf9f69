"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for every data or computation error raised by this package."""


class DataFormatError(WorkbenchError):
    """A data file is malformed (bad header, unparsable row, empty field)."""


class IntegrityError(WorkbenchError):
    """Records reference each other inconsistently (dangling ids, conflicting definitions)."""


class NotFoundError(WorkbenchError):
    """A referenced entity does not exist in the loaded data."""


class EmptyCohortError(WorkbenchError):
    """A statistic was requested over an empty set of users."""


class UndefinedSimilarityError(WorkbenchError):
    """Similarity is undefined for the given inputs (empty vector or empty sets)."""


class EmptyProfileError(WorkbenchError):
    """An operation that needs a nonempty profile received an empty one."""
