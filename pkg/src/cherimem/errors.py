"""Memory error taxonomy.

Failures are split the same way the hardware and the language split them:
capability faults (``CapErr``) and language-level faults (``LogicErr``).
Both are exceptions; a failing action raises exactly one of them and leaves
the heap untouched.
"""

import enum


class CapErrKind(enum.Enum):
    TAG_VIOLATION = "TagViolation"
    PERMIT_LOAD_VIOLATION = "PermitLoadViolation"
    PERMIT_STORE_VIOLATION = "PermitStoreViolation"
    PERMIT_STORE_CAP_VIOLATION = "PermitStoreCapViolation"
    LENGTH_VIOLATION = "LengthViolation"

    def __str__(self):
        return self.value


class LogicErrKind(enum.Enum):
    USE_AFTER_FREE = "UseAfterFree"
    MISSING_RESOURCE = "MissingResource"
    UNALIGNED = "Unaligned"
    INVALID_FREE = "InvalidFree"
    WRONG_ARG_TYPE = "WrongArgType"

    def __str__(self):
        return self.value


class MemError(Exception):
    """Base class for every memory-model failure.

    Two errors compare equal when they have the same class and kind, so
    outcome lists from different engines can be compared with ``==``.
    """

    def __init__(self, kind, detail=""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else str(kind))

    def __eq__(self, other):
        return type(self) is type(other) and self.kind == other.kind

    def __hash__(self):
        return hash((type(self).__name__, self.kind))

    def __repr__(self):
        return f"{type(self).__name__}({self.kind})"


class CapErr(MemError):
    pass


class LogicErr(MemError):
    pass
