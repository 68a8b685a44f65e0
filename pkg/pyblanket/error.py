from enum import IntEnum


class BlanketErrno(IntEnum):
    OK = 0
    NOT_SQUARE = 1
    NOT_HERMITIAN = 2
    NEGATIVE_EIGENVALUE = 3
    NOT_NORMALIZED = 4
    DIM_MISMATCH = 5
    EMPTY_REGION = 6
    REGION_OUT_OF_RANGE = 7
    REGION_OVERLAP = 8
    NOT_TRACE_PRESERVING = 9
    NOT_UNITARY = 10
    POVM_INCOMPLETE = 11
    INSUFFICIENT_SUBSYSTEMS = 12
    INVALID_ARGUMENT = 13
    TOO_LARGE = 14
    INVARIANT_VIOLATION = 15


class BlanketError(ValueError):
    """Raised on invalid quantum objects or arguments.

    ``errcode`` is a :class:`BlanketErrno` member.
    """

    def __init__(self, errcode: BlanketErrno, message: str):
        super().__init__(f"[{errcode.name}] {message}")
        self.errcode = errcode
        self.message = message


class InvariantViolation(BlanketError):
    """A computed result broke one of the proven inequalities."""

    def __init__(self, message: str):
        super().__init__(BlanketErrno.INVARIANT_VIOLATION, message)


class DegenerateGroundStateWarning(UserWarning):
    pass
