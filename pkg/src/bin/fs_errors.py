"""fs_errors.py.

Exception hierarchy shared by every System Fs module.

Library functions raise these; only the command line catches them and turns
them into `Error: ...` lines and exit codes.
"""


class FsError(Exception):
    """Base class for every error raised by the kernel.

    Args:
        message (str): Human readable description
        node (object): The offending syntax node, when there is one
    """

    def __init__(self, message: str, node: object = None):
        super().__init__(message)
        self.message = message
        self.node = node


class FsSyntaxError(FsError):
    """Surface text does not follow the grammar."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# --- Skeleton validity ---
class SkeletonError(FsError):
    """A skeleton violates one of the typing rules."""


class UnboundVariable(SkeletonError):
    pass


class MalformedEnv(SkeletonError):
    pass


class NotAnArrow(SkeletonError):
    pass


class DomainMismatch(SkeletonError):
    pass


class EnvironmentMismatch(SkeletonError):
    pass


class EscapingVariable(SkeletonError):
    pass


class ForbiddenSetTooSmall(SkeletonError):
    pass


class SupportOverlap(SkeletonError):
    pass


# --- Properties and derivations ---
class PreconditionViolation(FsError):
    """A property was called on inputs outside its precondition."""


class TermMismatch(FsError):
    """Two skeletons were expected to type the same term."""


class DerivationError(FsError):
    """A constructed substitution fails to reproduce its target judgement."""


# --- Solvedness and reduction ---
class NotSolved(FsError):
    pass


class NotAStep(FsError):
    pass


class BadSubProof(FsError):
    """A subtyping proof term is ill formed."""


class PreservationError(FsError):
    """The reduction engine met a skeleton shape it cannot rebuild."""


class SystemFError(FsError):
    """The independent System F checker rejected a node."""
