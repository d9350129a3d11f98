"""Block-offset CHERI-C heap.

Each block id maps either to ``FREED`` or to a live block holding two
partial maps: offset -> memory cell, and capability-aligned offset -> tag.
Uninitialised cells are simply absent and read back as ``UNDEF``.

Actions check everything before touching state, so a raised ``MemError``
always leaves the heap exactly as it was.
"""

from dataclasses import dataclass, field

from .capability import AccessKind, Perm, check_access, make_cap, tag_clear
from .errors import CapErr, CapErrKind, LogicErr, LogicErrKind
from .value import (
    CAP_SIZES, DEFAULT_CAP_SIZE, CapFragVal, CapVal, CheriType, MCapFrag, decode_prim,
    encode_prim, reassemble_cap, size_of, split_cap, type_of,
)


class _Freed:
    def __repr__(self):
        return "FREED"

    def __reduce__(self):
        return "FREED"


FREED = _Freed()


@dataclass
class LiveBlock:
    cells: dict = field(default_factory=dict)
    tags: dict = field(default_factory=dict)

    def copy(self):
        return LiveBlock(dict(self.cells), dict(self.tags))


class Heap:
    """The heap plus its fresh-block counter.

    The counter is always one past the largest block id ever used. Blocks
    are never removed (freeing marks them ``FREED``), so deriving it from
    the key set gives the same allocator while keeping heap equality a
    function of the block map alone.
    """

    def __init__(self, blocks=None, cap_size=DEFAULT_CAP_SIZE):
        if cap_size not in CAP_SIZES:
            raise ValueError(f"cap_size must be one of {CAP_SIZES}")
        self.cap_size = cap_size
        self.blocks = dict(blocks or {})
        self.next_block = max(self.blocks) + 1 if self.blocks else 0

    def __eq__(self, other):
        if not isinstance(other, Heap):
            return NotImplemented
        return self.cap_size == other.cap_size and self.blocks == other.blocks

    def __repr__(self):
        return f"Heap(blocks={self.blocks!r}, cap_size={self.cap_size})"

    def copy(self):
        return Heap({b: s if s is FREED else s.copy() for b, s in self.blocks.items()},
                    self.cap_size)

    def _live(self, block):
        state = self.blocks.get(block)
        if state is None:
            raise LogicErr(LogicErrKind.MISSING_RESOURCE, f"no block {block}")
        if state is FREED:
            raise LogicErr(LogicErrKind.USE_AFTER_FREE, f"block {block} was freed")
        return state

    def _slots(self, start, stop):
        """Aligned tag-slot keys overlapping ``[start, stop)``."""
        cs = self.cap_size
        return range(start - start % cs, stop, cs)

    def alloc(self, n):
        """Allocate ``n`` bytes; never fails."""
        if n < 0:
            raise ValueError("allocation size must be non-negative")
        block = self.next_block
        self.blocks[block] = LiveBlock()
        self.next_block = block + 1
        return make_cap(block, 0, 0, n, Perm.ALL, True)

    def free(self, c):
        """Free the block ``c`` points at and return ``c`` untagged."""
        if not c.tag:
            raise CapErr(CapErrKind.TAG_VIOLATION)
        if not c.base <= c.offset <= c.base + c.length:
            raise CapErr(CapErrKind.LENGTH_VIOLATION)
        if c.offset != 0:
            raise LogicErr(LogicErrKind.INVALID_FREE,
                           f"offset {c.offset} is not the start of an allocation")
        self._live(c.block)
        self.blocks[c.block] = FREED
        return tag_clear(c)

    def load(self, c, t):
        size = size_of(t, self.cap_size)
        check_access(c, AccessKind.LOAD, size, cap_align=t is CheriType.CAP,
                     cap_size=self.cap_size)
        blk = self._live(c.block)
        cells = [blk.cells.get(i) for i in range(c.offset, c.offset + size)]
        if t is CheriType.CAP:
            tag = Perm.CAP_LOAD in c.perms and blk.tags.get(c.offset, False)
            return reassemble_cap(cells, tag)
        return decode_prim(t, cells)

    def store(self, c, v):
        t = type_of(v)
        is_cap = isinstance(v, CapVal)
        if t is None:
            # Undef has no size, so bounds and alignment do not apply.
            if not c.tag:
                raise CapErr(CapErrKind.TAG_VIOLATION)
            if Perm.STORE not in c.perms:
                raise CapErr(CapErrKind.PERMIT_STORE_VIOLATION)
            raise LogicErr(LogicErrKind.WRONG_ARG_TYPE, "cannot store Undef")
        size = size_of(t, self.cap_size)
        check_access(c, AccessKind.STORE, size, cap_align=is_cap, cap_size=self.cap_size,
                     store_cap=is_cap and v.cap.tag)
        blk = self._live(c.block)
        off = c.offset
        if is_cap:
            frags, tag = split_cap(v, self.cap_size)
            for k, frag in enumerate(frags):
                blk.cells[off + k] = frag
            blk.tags[off] = tag
            return
        if isinstance(v, CapFragVal):
            blk.cells[off] = MCapFrag(v.cap.mcap, v.index)
        else:
            for k, cell in enumerate(encode_prim(v)):
                blk.cells[off + k] = cell
        for slot in self._slots(off, off + size):
            blk.tags[slot] = False

    def memcpy(self, dst, src, n):
        """Tag-aware copy of ``n`` bytes with memmove semantics.

        Cell contents are copied verbatim. A destination tag slot fully
        covered by the copy inherits the source tag only when source and
        destination share the same capability alignment phase and the
        capabilities carry CAP_LOAD / CAP_STORE respectively; every other
        overlapped slot is cleared.
        """
        if n == 0:
            return
        cs = self.cap_size
        check_access(src, AccessKind.LOAD, n, cap_size=cs)
        check_access(dst, AccessKind.STORE, n, cap_size=cs)
        sblk = self._live(src.block)
        dblk = self._live(dst.block)
        s, d = src.offset, dst.offset
        snapshot = [sblk.cells.get(s + k) for k in range(n)]
        src_tags = dict(sblk.tags)
        keep = ((s - d) % cs == 0 and Perm.CAP_LOAD in src.perms
                and Perm.CAP_STORE in dst.perms)
        for k, cell in enumerate(snapshot):
            if cell is None:
                dblk.cells.pop(d + k, None)
            else:
                dblk.cells[d + k] = cell
        for slot in self._slots(d, d + n):
            full = slot >= d and slot + cs <= d + n
            dblk.tags[slot] = bool(full and keep and src_tags.get(slot - d + s, False))

    def execute(self, action, *operands):
        """Action execution entry point: dispatch ``action`` by name.

        Returns the action's payload (a capability for alloc/free, a value
        for load, ``None`` for store/memcpy) or raises ``MemError``.
        """
        try:
            fn = _ACTIONS[action]
        except KeyError:
            raise ValueError(f"unknown action {action!r}") from None
        return fn(self, *operands)


_ACTIONS = {
    "alloc": Heap.alloc,
    "free": Heap.free,
    "load": Heap.load,
    "store": Heap.store,
    "memcpy": Heap.memcpy,
}


def empty_heap(cap_size=DEFAULT_CAP_SIZE):
    return Heap(cap_size=cap_size)


def wf(heap):
    """Well-formedness: every tag key is capability-aligned and the fresh
    counter lies above every block id."""
    if heap.blocks and heap.next_block <= max(heap.blocks):
        return False
    for state in heap.blocks.values():
        if state is FREED:
            continue
        if any(k % heap.cap_size for k in state.tags):
            return False
    return True

