"""Exception types. Every error carries a stable machine-readable ``code``."""


class PbitError(Exception):
    code = "E_PBIT"
    exit_status = 1

    def __init__(self, message, *, line=None, node=None):
        self.line = line
        self.node = node
        where = []
        if line is not None:
            where.append(f"line {line}")
        if node is not None:
            where.append(f"node {node!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class InputDomainError(PbitError, ValueError):
    code = "E_INPUT"
    exit_status = 2


class CapacityError(PbitError):
    code = "E_CAPACITY"
    exit_status = 3


class ValidationError(PbitError, ValueError):
    code = "E_VALIDATION"
    exit_status = 4


class BnFormatError(PbitError, ValueError):
    """Malformed BN description."""

    code = "E_SYNTAX"
    exit_status = 10


class UnknownParentError(BnFormatError):
    code = "E_UNKNOWN_PARENT"
    exit_status = 11


class DuplicateNodeError(BnFormatError):
    code = "E_DUPLICATE_NODE"
    exit_status = 12


class BadProbabilityError(BnFormatError):
    code = "E_BAD_PROBABILITY"
    exit_status = 13


class UnsupportedArityError(BnFormatError):
    code = "E_ARITY"
    exit_status = 14


class IncompleteCptError(BnFormatError):
    code = "E_INCOMPLETE_CPT"
    exit_status = 15


class CycleError(BnFormatError):
    code = "E_CYCLE"
    exit_status = 16


class NetlistFormatError(PbitError, ValueError):
    code = "E_NETLIST"
    exit_status = 20
