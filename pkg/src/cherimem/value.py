"""CHERI-C types and values, at language level and memory level.

Language values (``IntVal``, ``CapVal``, ``CapFragVal``, ``UNDEF``) are what
loads return and stores accept. Memory cells (``Byte``, ``MCapFrag``) are
what the heap holds: a capability is stored as ``cap_size`` fragments, one
per byte, with its tag kept elsewhere.
"""

import enum
from dataclasses import dataclass

from .capability import Capability, MemCap

DEFAULT_CAP_SIZE = 16
CAP_SIZES = (16, 32)


class CheriType(enum.Enum):
    U8 = "u8"
    S8 = "s8"
    U16 = "u16"
    S16 = "s16"
    U32 = "u32"
    S32 = "s32"
    U64 = "u64"
    S64 = "s64"
    CAP = "cap"

    @property
    def signed(self):
        return self.value.startswith("s")

    def __str__(self):
        return self.value


_WIDTH = {
    CheriType.U8: 1, CheriType.S8: 1,
    CheriType.U16: 2, CheriType.S16: 2,
    CheriType.U32: 4, CheriType.S32: 4,
    CheriType.U64: 8, CheriType.S64: 8,
}

PRIM_TYPES = tuple(_WIDTH)
BYTE_TYPES = (CheriType.U8, CheriType.S8)


def size_of(t, cap_size=DEFAULT_CAP_SIZE):
    if t is CheriType.CAP:
        return cap_size
    return _WIDTH[t]


@dataclass(frozen=True)
class IntVal:
    """A sized integer. ``bits`` is always the unsigned bit pattern."""

    type: CheriType
    bits: int

    def __post_init__(self):
        if self.type is CheriType.CAP:
            raise ValueError("IntVal cannot have capability type")
        if not 0 <= self.bits < 1 << (8 * _WIDTH[self.type]):
            raise ValueError(f"{self.bits:#x} does not fit {self.type}")

    @classmethod
    def of(cls, t, n):
        """Build from any Python int, wrapping to the type's width."""
        return cls(t, n & ((1 << (8 * _WIDTH[t])) - 1))

    @property
    def value(self):
        width = 8 * _WIDTH[self.type]
        if self.type.signed and self.bits >> (width - 1):
            return self.bits - (1 << width)
        return self.bits


@dataclass(frozen=True)
class CapVal:
    cap: Capability


@dataclass(frozen=True)
class CapFragVal:
    cap: Capability
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("fragment index must be non-negative")


class _Undef:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEF"

    def __reduce__(self):
        return (_Undef, ())


UNDEF = _Undef()


@dataclass(frozen=True)
class Byte:
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < 256:
            raise ValueError(f"{self.bits} is not a byte")


@dataclass(frozen=True)
class MCapFrag:
    mcap: MemCap
    index: int


def type_of(v):
    """Type of a language value; ``None`` for UNDEF.

    Fragments report ``U8``; loads accept ``S8`` for them as well.
    """
    if isinstance(v, IntVal):
        return v.type
    if isinstance(v, CapVal):
        return CheriType.CAP
    if isinstance(v, CapFragVal):
        return CheriType.U8
    return None


def encode_prim(v):
    """Little-endian byte cells for an integer value."""
    return [Byte(b) for b in v.bits.to_bytes(_WIDTH[v.type], "little")]


def decode_prim(t, cells):
    if t in BYTE_TYPES and len(cells) == 1 and isinstance(cells[0], MCapFrag):
        frag = cells[0]
        return CapFragVal(Capability(frag.mcap, False), frag.index)
    if len(cells) != _WIDTH[t] or not all(isinstance(c, Byte) for c in cells):
        return UNDEF
    return IntVal(t, int.from_bytes(bytes(c.bits for c in cells), "little"))


def split_cap(v, cap_size=DEFAULT_CAP_SIZE):
    """Split a capability value into ``cap_size`` fragments and its tag."""
    mcap = v.cap.mcap
    return [MCapFrag(mcap, k) for k in range(cap_size)], v.cap.tag


def reassemble_cap(cells, tag):
    if not cells or not isinstance(cells[0], MCapFrag):
        return UNDEF
    mcap = cells[0].mcap
    for k, cell in enumerate(cells):
        if not isinstance(cell, MCapFrag) or cell.mcap != mcap or cell.index != k:
            return UNDEF
    return CapVal(Capability(mcap, tag))
