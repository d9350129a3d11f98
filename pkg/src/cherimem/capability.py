"""Abstract (uncompressed) CHERI capabilities.

A capability is a block-offset address plus bounds, permissions and an
out-of-band validity tag. No bit layout is fixed here; all values are
immutable and every operation returns a new capability.
"""

import enum
from dataclasses import dataclass, replace
from typing import NamedTuple

from .errors import CapErr, CapErrKind, LogicErr, LogicErrKind

MAX_ADDRESS = 2**64 - 1


class Perm(enum.Flag):
    """Permission set. The integer values double as the IL bitmask."""

    NONE = 0
    LOAD = 1
    STORE = 2
    CAP_LOAD = 4
    CAP_STORE = 8
    ALL = LOAD | STORE | CAP_LOAD | CAP_STORE


class AccessKind(enum.Enum):
    LOAD = "load"
    STORE = "store"


@dataclass(frozen=True)
class Metadata:
    base: int
    length: int
    perms: Perm = Perm.ALL

    def __post_init__(self):
        if self.base < 0 or self.length < 0:
            raise ValueError("bounds must be non-negative")
        if self.base + self.length > MAX_ADDRESS:
            raise ValueError("bounds overflow the 64-bit address range")

    @property
    def top(self):
        return self.base + self.length


@dataclass(frozen=True)
class MemCap:
    """A capability as it sits in memory: no tag."""

    block: int
    offset: int
    meta: Metadata


@dataclass(frozen=True)
class Capability:
    mcap: MemCap
    tag: bool

    @property
    def block(self):
        return self.mcap.block

    @property
    def offset(self):
        return self.mcap.offset

    @property
    def base(self):
        return self.mcap.meta.base

    @property
    def length(self):
        return self.mcap.meta.length

    @property
    def perms(self):
        return self.mcap.meta.perms

    def __str__(self):
        t = "v" if self.tag else "x"
        return (f"cap[{t} b{self.block}+{self.offset} "
                f"[{self.base},{self.base + self.length}) {self.perms.value:#x}]")


class CapInfo(NamedTuple):
    address: int
    base: int
    length: int
    perms: Perm
    tag: bool


_NULL = Capability(MemCap(0, 0, Metadata(0, 0, Perm.NONE)), False)


def null_cap():
    return _NULL


def make_cap(block, offset, base, length, perms=Perm.ALL, tag=True):
    return Capability(MemCap(block, offset, Metadata(base, length, perms)), tag)


def _with_meta(c, **changes):
    mcap = replace(c.mcap, meta=replace(c.mcap.meta, **changes))
    return replace(c, mcap=mcap)


def cap_arith(c, delta):
    """Move the address by ``delta``. Out-of-bounds results are allowed and
    the tag is kept; abstract capabilities are always representable."""
    return replace(c, mcap=replace(c.mcap, offset=c.mcap.offset + delta))


def tag_get(c):
    return c.tag


def tag_clear(c):
    if not c.tag:
        return c
    return replace(c, tag=False)


def perms_and(c, mask):
    return _with_meta(c, perms=c.perms & mask)


def bounds_set(c, new_base, new_length):
    """Narrow the bounds to ``[new_base, new_base + new_length)``.

    Raises ``CapErr(LengthViolation)`` unless the new range lies inside the
    current one.
    """
    if new_base < c.base or new_base + new_length > c.base + c.length or new_length < 0:
        raise CapErr(CapErrKind.LENGTH_VIOLATION,
                     f"cannot widen [{c.base},{c.base + c.length}) to "
                     f"[{new_base},{new_base + new_length})")
    return _with_meta(c, base=new_base, length=new_length)


def cap_query(c):
    return CapInfo(c.offset, c.base, c.length, c.perms, c.tag)


def check_access(c, kind, size, cap_align=False, cap_size=16, store_cap=False):
    """Run the hardware access checks for ``size`` bytes at ``c``.

    Order is fixed and the first failure wins: tag, load/store permission,
    capability-store permission (only when ``store_cap``), bounds, then
    capability alignment (only when ``cap_align``).
    """
    if not c.tag:
        raise CapErr(CapErrKind.TAG_VIOLATION)
    if kind is AccessKind.LOAD:
        if Perm.LOAD not in c.perms:
            raise CapErr(CapErrKind.PERMIT_LOAD_VIOLATION)
    else:
        if Perm.STORE not in c.perms:
            raise CapErr(CapErrKind.PERMIT_STORE_VIOLATION)
        if store_cap and Perm.CAP_STORE not in c.perms:
            raise CapErr(CapErrKind.PERMIT_STORE_CAP_VIOLATION)
    if c.offset < c.base or c.offset + size > c.base + c.length:
        raise CapErr(CapErrKind.LENGTH_VIOLATION,
                     f"access [{c.offset},{c.offset + size}) outside "
                     f"[{c.base},{c.base + c.length})")
    if cap_align and c.offset % cap_size != 0:
        raise LogicErr(LogicErrKind.UNALIGNED, f"offset {c.offset} not {cap_size}-aligned")
