"""Exception hierarchy shared by all equicycle modules."""


class EquicycleError(Exception):
    """Base class for every error raised by this package."""


class GraphFormatError(EquicycleError):
    """Malformed graph file. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidGraphError(EquicycleError):
    """Graph construction violated a structural invariant."""


class SamplingError(EquicycleError):
    """Infeasible sampling request (odd balanced size, exhausted side, ...)."""


class ExpanderModeError(EquicycleError):
    """Exact enumeration requested above the configured n_exact gate."""


class ExtractionError(EquicycleError):
    """Expander extraction degenerated before certification.

    The partial trace is attached so the failure is reproducible.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class RegularisationError(EquicycleError):
    """Degree-flattening failed (retry cascade or paper-mode assertion).

    Carries the step log accumulated so far.
    """

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log if log is not None else []


class ConnectionError(EquicycleError):
    """Disjoint-path request could not be completed.

    ``partial`` maps pair indices that were routed to their paths and
    ``diagnosis`` names the blocking pair / bottleneck.
    """

    def __init__(self, message, partial=None, diagnosis=None):
        super().__init__(message)
        self.partial = partial if partial is not None else {}
        self.diagnosis = diagnosis


class HallViolation(EquicycleError):
    """A required matching does not exist; carries the deficient set."""

    def __init__(self, message, deficient=None, neighbourhood=None):
        super().__init__(message)
        self.deficient = deficient
        self.neighbourhood = neighbourhood


class AbsorberError(EquicycleError):
    """Absorber construction failed; ``stage`` names the failing phase."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class RMBGError(EquicycleError):
    """Robustly matchable bipartite graph failed verification after retries."""


class LeftoverError(EquicycleError):
    """Leftover-bounded matching draw failed; carries the best attempt."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PipelineError(EquicycleError):
    """Pipeline stage failure; carries the structured FailureReport."""

    def __init__(self, report):
        super().__init__(f"pipeline failed at stage '{report.stage}': {report.reason}")
        self.report = report
