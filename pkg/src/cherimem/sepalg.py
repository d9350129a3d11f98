"""Separation-algebra structure on heaps.

Heaps compose by disjoint union of their block maps, with the empty heap
as unit. Composition is partial: overlapping heaps have no composite and
``compose`` returns ``None`` for them.
"""

from .heap import FREED, Heap


def disjoint(h1, h2):
    return h1.blocks.keys().isdisjoint(h2.blocks.keys())


def compose(h1, h2):
    if h1.cap_size != h2.cap_size:
        raise ValueError("cannot compose heaps with different capability sizes")
    if not disjoint(h1, h2):
        return None
    blocks = {b: s if s is FREED else s.copy() for b, s in h1.blocks.items()}
    blocks.update((b, s if s is FREED else s.copy()) for b, s in h2.blocks.items())
    return Heap(blocks, h1.cap_size)
