"""Executable CHERI-C memory model.

Abstract tagged capabilities, a block-offset heap with separate tagged
memory and freed-block tracking, the alloc/free/load/store actions plus a
tag-aware memcpy, and a small GOTO-style IL to drive them.
"""

from .capability import (
    AccessKind, Capability, CapInfo, MemCap, Metadata, Perm, bounds_set, cap_arith,
    cap_query, check_access, make_cap, null_cap, perms_and, tag_clear, tag_get,
)
from .errors import CapErr, CapErrKind, LogicErr, LogicErrKind, MemError
from .heap import FREED, Heap, LiveBlock, empty_heap, wf
from .sepalg import compose, disjoint
from .value import (
    UNDEF, Byte, CapFragVal, CapVal, CheriType, IntVal, MCapFrag, decode_prim, encode_prim,
    reassemble_cap, size_of, split_cap, type_of,
)

__version__ = "0.1.0"
