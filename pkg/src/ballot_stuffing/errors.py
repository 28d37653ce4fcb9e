"""Exception hierarchy shared by the solvers and the CLI."""


class BallotGameError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(BallotGameError, ValueError):
    pass


class DegenerateInput(InvalidArgument):
    pass


class PreconditionViolation(BallotGameError):
    pass


class NumericFailure(BallotGameError):
    """A root finder or certifier could not produce a trustworthy answer."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class InfeasibleStructure(NumericFailure):
    pass


class OracleInconsistency(NumericFailure):
    pass


class InternalError(BallotGameError, AssertionError):
    pass
