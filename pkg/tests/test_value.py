import itertools
import random

import pytest
from hypothesis import given, strategies as st

from cherimem import (
    UNDEF, Byte, CapFragVal, CapVal, CheriType, IntVal, MCapFrag, decode_prim, encode_prim,
    make_cap, null_cap, reassemble_cap, size_of, split_cap, type_of,
)

PRIM = [t for t in CheriType if t is not CheriType.CAP]


def test_size_of():
    assert size_of(CheriType.U32, 16) == 4
    assert size_of(CheriType.CAP, 16) == 16
    assert size_of(CheriType.CAP, 32) == 32
    assert [size_of(t) for t in PRIM] == [1, 1, 2, 2, 4, 4, 8, 8]


def test_type_of():
    c = make_cap(0, 0, 0, 4)
    assert type_of(IntVal(CheriType.U16, 7)) is CheriType.U16
    assert type_of(UNDEF) is None
    assert type_of(CapFragVal(c, 3)) is CheriType.U8
    assert type_of(CapVal(c)) is CheriType.CAP


def test_intval_width_checked():
    with pytest.raises(ValueError):
        IntVal(CheriType.U8, 256)
    with pytest.raises(ValueError):
        IntVal(CheriType.CAP, 0)
    assert IntVal.of(CheriType.S8, -1) == IntVal(CheriType.S8, 0xFF)
    assert IntVal(CheriType.S8, 0xFF).value == -1
    assert IntVal(CheriType.U8, 0xFF).value == 255


def test_encode_prim():
    assert encode_prim(IntVal(CheriType.U8, 0xAB)) == [Byte(0xAB)]
    assert encode_prim(IntVal(CheriType.U32, 0x11223344)) == [Byte(0x44), Byte(0x33),
                                                               Byte(0x22), Byte(0x11)]
    assert encode_prim(IntVal(CheriType.U16, 0)) == [Byte(0), Byte(0)]


def test_decode_prim():
    m = make_cap(0, 0, 0, 4).mcap
    assert decode_prim(CheriType.U16, [Byte(1), Byte(0)]) == IntVal(CheriType.U16, 1)
    mixed = [Byte(1), MCapFrag(m, 1), Byte(2), Byte(3)]
    assert decode_prim(CheriType.U32, mixed) is UNDEF
    assert decode_prim(CheriType.U8, [MCapFrag(m, 5)]) == CapFragVal(make_cap(0, 0, 0, 4, tag=False), 5)
    assert decode_prim(CheriType.S8, [MCapFrag(m, 5)]).index == 5
    assert decode_prim(CheriType.U16, [Byte(1), None]) is UNDEF
    assert decode_prim(CheriType.U8, [None]) is UNDEF


@pytest.mark.parametrize("t", [CheriType.U8, CheriType.S8, CheriType.U16, CheriType.S16])
def test_prim_roundtrip_exhaustive(t):
    for n in range(1 << (8 * size_of(t))):
        v = IntVal(t, n)
        assert decode_prim(t, encode_prim(v)) == v


@pytest.mark.parametrize("t", [CheriType.U32, CheriType.S32, CheriType.U64, CheriType.S64])
def test_prim_roundtrip_random(t):
    rng = random.Random(t.value)
    for _ in range(5000):
        v = IntVal(t, rng.getrandbits(8 * size_of(t)))
        cells = encode_prim(v)
        assert len(cells) == size_of(t)
        assert decode_prim(t, cells) == v


def test_decode_matches_int_from_bytes():
    # independent route: Python's struct-free little-endian reading
    raw = bytes([0x44, 0x33, 0x22, 0x11])
    assert decode_prim(CheriType.U32, [Byte(b) for b in raw]).bits == int.from_bytes(raw, "little")


caps = st.builds(make_cap, st.integers(0, 20), st.integers(-8, 64), st.integers(0, 32),
                 st.integers(0, 32), tag=st.booleans())


@pytest.mark.parametrize("cs", [16, 32])
def test_split_cap(cs):
    c = make_cap(1, 0, 0, 8)
    cells, tag = split_cap(CapVal(c), cs)
    assert [f.index for f in cells] == list(range(cs))
    assert all(f.mcap == c.mcap for f in cells)
    assert tag is True
    cells2, tag2 = split_cap(CapVal(make_cap(1, 0, 0, 8, tag=False)), cs)
    assert cells2 == cells and tag2 is False


@given(caps, st.sampled_from([16, 32]))
def test_split_reassemble_roundtrip(c, cs):
    assert reassemble_cap(*split_cap(CapVal(c), cs)) == CapVal(c)


def test_reassemble_rejects_rotation_and_mixing():
    c, d = make_cap(1, 0, 0, 8), make_cap(2, 0, 0, 8)
    cells, _ = split_cap(CapVal(c), 16)
    assert reassemble_cap(cells, True) == CapVal(c)
    assert reassemble_cap(cells[1:] + cells[:1], True) is UNDEF
    other, _ = split_cap(CapVal(d), 16)
    assert reassemble_cap(cells[:8] + other[8:], True) is UNDEF
    assert reassemble_cap(cells[:15] + [Byte(0)], True) is UNDEF
    assert reassemble_cap(cells[:15] + [None], True) is UNDEF


def test_reassemble_rejects_non_identity_permutations():
    cells, _ = split_cap(CapVal(null_cap()), 16)
    rng = random.Random(7)
    perms = [p for p in itertools.islice(itertools.permutations(range(16)), 1, 2000)]
    for _ in range(2000):
        p = list(range(16))
        rng.shuffle(p)
        perms.append(p)
    for p in perms:
        if list(p) == list(range(16)):
            continue
        assert reassemble_cap([cells[i] for i in p], False) is UNDEF
