"""Exception hierarchy.

Every error a user can trigger with bad input or parameters derives from
:class:`InputError`; the CLI maps those to exit code 2.
"""


class BubbleStampError(Exception):
    """Base class for all package errors."""


class InputError(BubbleStampError):
    """Raised for invalid user data or parameters."""


# series_core
class InvalidDate(InputError, ValueError):
    pass


class EmptyInput(InputError):
    pass


class MissingMonth(InputError):
    def __init__(self, month, source=None):
        self.month = month
        where = f" in {source}" if source else ""
        super().__init__(f"missing month {month}{where}")


class DuplicateDate(InputError):
    def __init__(self, month, source=None):
        self.month = month
        where = f" in {source}" if source else ""
        super().__init__(f"duplicate date {month}{where}")


class NonNumericValue(InputError):
    pass


class NonPositiveValue(InputError):
    def __init__(self, month, value, label=""):
        self.month = month
        self.value = value
        super().__init__(f"non-positive value {value!r} at {month}" + (f" in {label}" if label else ""))


class SeriesLengthError(InputError):
    pass


class RangeTooShort(InputError):
    pass


class BreakOutOfRange(InputError):
    pass


# ols_adf / recursive_tests
class WindowTooShort(InputError):
    pass


class SingularDesign(InputError):
    def __init__(self, message, window=None):
        self.window = window
        if window is not None:
            message = f"{message} (window r1={window[0]}, r2={window[1]})"
        super().__init__(message)


# montecarlo_cv
class InsufficientReps(InputError):
    pass


class CacheMismatch(InputError):
    pass


# datestamp
class LengthMismatch(InputError):
    pass


class EpisodeOutOfRange(InputError):
    pass


# logit_attrib
class AllSameOutcome(InputError):
    pass


class PerfectSeparation(InputError):
    pass


class CollinearCovariates(InputError):
    pass


class NoConvergence(InputError):
    pass


class NotConverged(InputError):
    pass


# dgp_sim / cli
class ConfigInvalid(InputError):
    pass
