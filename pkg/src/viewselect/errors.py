"""Exception hierarchy shared by all viewselect modules."""


class ViewSelectError(Exception):
    """Base class for every error raised by this package."""


# ---- scene / pool construction ----

class DuplicateId(ViewSelectError):
    pass


class TooFewViews(ViewSelectError):
    pass


class DegenerateCenter(ViewSelectError):
    pass


# ---- distances ----

class NotUnit(ViewSelectError):
    pass


class EmptyCovisibility(ViewSelectError):
    pass


class UnknownView(ViewSelectError):
    pass


# ---- selection ----

class BudgetExceedsPool(ViewSelectError):
    pass


class TooFewSelected(ViewSelectError):
    pass


class DrawExceedsPool(ViewSelectError):
    pass


class NotOnSphere(ViewSelectError):
    pass


class ScheduleExhaustsPool(ViewSelectError):
    pass


# ---- relaxation ----

class DegenerateHull(ViewSelectError):
    pass


class PoolExhausted(ViewSelectError):
    pass


# ---- coverage ----

class EmptyMesh(ViewSelectError):
    pass


class MissingIntrinsics(ViewSelectError):
    pass


class SampleMismatch(ViewSelectError):
    pass


# ---- evaluator ----

class EvaluatorFailure(ViewSelectError):
    pass


class SpawnFailure(EvaluatorFailure):
    pass


class Timeout(EvaluatorFailure):
    pass


class MalformedResponse(EvaluatorFailure):
    pass


class IncompleteScores(EvaluatorFailure):
    pass


# ---- io ----

class ParseError(ViewSelectError):
    pass


class MissingFile(ViewSelectError):
    pass


class NonOrthonormalRotation(ViewSelectError):
    pass


class IoError(ViewSelectError):
    pass


class SchemaVersionMismatch(ViewSelectError):
    pass


class ConfigError(ViewSelectError):
    """Invalid run configuration (bad flag combination, missing parameter)."""
