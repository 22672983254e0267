"""Exception hierarchy shared by all stages."""

from __future__ import annotations


class CfaForgeError(Exception):
    """Base class for every error raised by the toolkit."""


class SourceError(CfaForgeError):
    """An error tied to a position in the input program."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")
        self.message = message


class LexError(SourceError):
    pass


class ParseError(SourceError):
    pass


class UnsupportedFeatureError(SourceError):
    def __init__(self, feature: str, line: int = 0, column: int = 0, detail: str = ""):
        self.feature = feature
        msg = f"unsupported feature: {feature}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg, line, column)


class TypeCheckError(SourceError):
    pass


class RecursiveCallError(UnsupportedFeatureError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("recursion", detail=" -> ".join(cycle + cycle[:1]))


class MissingMainError(CfaForgeError):
    pass


class InternalError(CfaForgeError):
    pass


class NoExitPathError(CfaForgeError):
    pass


class NoAssertError(CfaForgeError):
    pass


class UnknownPredicateError(CfaForgeError):
    pass


class FixpointCapExceeded(CfaForgeError):
    pass


class ExternalSolverError(CfaForgeError):
    pass


class SolverUnknownError(CfaForgeError):
    pass


class RefinementStuck(CfaForgeError):
    pass


class ResourceLimit(CfaForgeError):
    pass
