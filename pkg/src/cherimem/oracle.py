"""Brute-force reference model used as a differential target in tests.

Written independently of ``cherimem.heap``: blocks are dense arrays sized
at allocation, every byte write eagerly clears the tag slot containing it,
and the access checks are spelled out inline rather than going through
``capability.check_access``. Only the datatypes and the error taxonomy are
shared.
"""

from dataclasses import dataclass, field

from .capability import Capability, MemCap, Metadata, Perm
from .errors import CapErr, CapErrKind, LogicErr, LogicErrKind, MemError
from .value import UNDEF, Byte, CapFragVal, CapVal, CheriType, IntVal, MCapFrag

_BYTES = {"u8": 1, "s8": 1, "u16": 2, "s16": 2, "u32": 4, "s32": 4, "u64": 8, "s64": 8}


@dataclass
class RefBlock:
    freed: bool
    cells: list
    slot_tags: dict = field(default_factory=dict)


class RefModel:
    def __init__(self, cap_size=16):
        self.cap_size = cap_size
        self.blocks = {}
        self.counter = 0

    def width(self, t):
        return self.cap_size if t is CheriType.CAP else _BYTES[t.value]

    def block(self, b):
        if b not in self.blocks:
            raise LogicErr(LogicErrKind.MISSING_RESOURCE)
        blk = self.blocks[b]
        if blk.freed:
            raise LogicErr(LogicErrKind.USE_AFTER_FREE)
        return blk

    def write_byte(self, blk, i, cell):
        blk.cells[i] = cell
        blk.slot_tags[i // self.cap_size * self.cap_size] = False

    def snapshot(self):
        """Block id -> None when freed, else (written cells, set tag slots)."""
        out = {}
        for b, blk in self.blocks.items():
            if blk.freed:
                out[b] = None
                continue
            cells = {i: c for i, c in enumerate(blk.cells) if c is not None}
            out[b] = (cells, frozenset(k for k, v in blk.slot_tags.items() if v))
        return out

    # actions

    def alloc(self, n):
        b = self.counter
        self.counter += 1
        self.blocks[b] = RefBlock(False, [None] * n)
        return Capability(MemCap(b, 0, Metadata(0, n, Perm.ALL)), True)

    def free(self, c):
        if c.tag is False:
            raise CapErr(CapErrKind.TAG_VIOLATION)
        lo, hi = c.mcap.meta.base, c.mcap.meta.base + c.mcap.meta.length
        if c.mcap.offset < lo or c.mcap.offset > hi:
            raise CapErr(CapErrKind.LENGTH_VIOLATION)
        if c.mcap.offset != 0:
            raise LogicErr(LogicErrKind.INVALID_FREE)
        self.block(c.mcap.block).freed = True
        return Capability(c.mcap, False)

    def load(self, c, t):
        n = self.width(t)
        meta, off = c.mcap.meta, c.mcap.offset
        if not c.tag:
            raise CapErr(CapErrKind.TAG_VIOLATION)
        if not meta.perms & Perm.LOAD:
            raise CapErr(CapErrKind.PERMIT_LOAD_VIOLATION)
        if off < meta.base or off + n > meta.base + meta.length:
            raise CapErr(CapErrKind.LENGTH_VIOLATION)
        if t is CheriType.CAP and off % self.cap_size:
            raise LogicErr(LogicErrKind.UNALIGNED)
        blk = self.block(c.mcap.block)
        region = blk.cells[off:off + n]

        if t is CheriType.CAP:
            first = region[0]
            if not isinstance(first, MCapFrag):
                return UNDEF
            for k in range(n):
                cell = region[k]
                if not isinstance(cell, MCapFrag) or cell.mcap != first.mcap or cell.index != k:
                    return UNDEF
            tag = False
            if meta.perms & Perm.CAP_LOAD:
                tag = blk.slot_tags.get(off, False)
            return CapVal(Capability(first.mcap, tag))

        if n == 1 and isinstance(region[0], MCapFrag):
            return CapFragVal(Capability(region[0].mcap, False), region[0].index)
        if any(not isinstance(cell, Byte) for cell in region):
            return UNDEF
        total = 0
        for k in reversed(range(n)):
            total = total * 256 + region[k].bits
        return IntVal(t, total)

    def store(self, c, v):
        meta, off = c.mcap.meta, c.mcap.offset
        if not c.tag:
            raise CapErr(CapErrKind.TAG_VIOLATION)
        if not meta.perms & Perm.STORE:
            raise CapErr(CapErrKind.PERMIT_STORE_VIOLATION)
        if v is UNDEF:
            raise LogicErr(LogicErrKind.WRONG_ARG_TYPE)
        if isinstance(v, CapVal) and v.cap.tag and not meta.perms & Perm.CAP_STORE:
            raise CapErr(CapErrKind.PERMIT_STORE_CAP_VIOLATION)
        if isinstance(v, CapVal):
            n = self.cap_size
        elif isinstance(v, CapFragVal):
            n = 1
        else:
            n = _BYTES[v.type.value]
        if off < meta.base or off + n > meta.base + meta.length:
            raise CapErr(CapErrKind.LENGTH_VIOLATION)
        if isinstance(v, CapVal) and off % self.cap_size:
            raise LogicErr(LogicErrKind.UNALIGNED)
        blk = self.block(c.mcap.block)

        if isinstance(v, CapVal):
            for k in range(n):
                self.write_byte(blk, off + k, MCapFrag(v.cap.mcap, k))
            blk.slot_tags[off] = v.cap.tag
        elif isinstance(v, CapFragVal):
            self.write_byte(blk, off, MCapFrag(v.cap.mcap, v.index))
        else:
            bits = v.bits
            for k in range(n):
                self.write_byte(blk, off + k, Byte(bits & 0xFF))
                bits >>= 8

    def memcpy(self, dst, src, n):
        if n == 0:
            return None
        sm, dm = src.mcap, dst.mcap
        if not src.tag:
            raise CapErr(CapErrKind.TAG_VIOLATION)
        if not sm.meta.perms & Perm.LOAD:
            raise CapErr(CapErrKind.PERMIT_LOAD_VIOLATION)
        if sm.offset < sm.meta.base or sm.offset + n > sm.meta.base + sm.meta.length:
            raise CapErr(CapErrKind.LENGTH_VIOLATION)
        if not dst.tag:
            raise CapErr(CapErrKind.TAG_VIOLATION)
        if not dm.meta.perms & Perm.STORE:
            raise CapErr(CapErrKind.PERMIT_STORE_VIOLATION)
        if dm.offset < dm.meta.base or dm.offset + n > dm.meta.base + dm.meta.length:
            raise CapErr(CapErrKind.LENGTH_VIOLATION)
        sblk = self.block(sm.block)
        dblk = self.block(dm.block)
        s, d, cs = sm.offset, dm.offset, self.cap_size

        copied = list(sblk.cells[s:s + n])
        tags_before = dict(sblk.slot_tags)
        for k in range(n):
            self.write_byte(dblk, d + k, copied[k])
        if (d - s) % cs != 0:
            return None
        if not (sm.meta.perms & Perm.CAP_LOAD and dm.meta.perms & Perm.CAP_STORE):
            return None
        for k in range(n):
            if (d + k) % cs == 0 and k + cs <= n:
                dblk.slot_tags[d + k] = tags_before.get(s + k, False)
        return None


def ref_run(actions, cap_size=16):
    """Run ``(name, *operands)`` tuples against a fresh reference model.

    Returns the model and the outcomes, each being the action's payload or
    the ``MemError`` it raised.
    """
    model = RefModel(cap_size)
    outcomes = []
    for name, *operands in actions:
        try:
            outcomes.append(getattr(model, name)(*operands))
        except MemError as e:
            outcomes.append(e)
    return model, outcomes


def ref_exec(actions, cap_size=16):
    return ref_run(actions, cap_size)[1]
