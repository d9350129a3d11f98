"""Evaluator for the mini IL.

The machine holds a heap, an environment of dynamically sorted values
(64-bit integers, capabilities, capability fragments or ``UNDEF``) and a
program counter. Memory instructions go straight to the heap actions; any
``MemError`` they raise becomes a ``Faulted`` status, which is terminal.
"""

from dataclasses import dataclass, field

from . import capability as capmod
from .capability import Capability, Perm
from .errors import LogicErr, LogicErrKind, MemError
from .heap import Heap, wf
from .parser import (
    Alloc, Assert, Assign, BinOp, FailCmd, Free, Goto, Halt, IfGoto, Intrinsic, Lit,
    Load, Memcpy, Null, Store, Var,
)
from .value import (
    BYTE_TYPES, DEFAULT_CAP_SIZE, UNDEF, CapFragVal, CapVal, CheriType, IntVal,
)

DEFAULT_MAX_STEPS = 1_000_000


def wrap64(n):
    return (n + 2**63) % 2**64 - 2**63


@dataclass(frozen=True)
class Running:
    pass


@dataclass(frozen=True)
class Halted:
    code: int = 0


@dataclass(frozen=True)
class Faulted:
    error: MemError
    pc: int


@dataclass(frozen=True)
class AssertFailed:
    pc: int
    message: str = "assertion failed"


RUNNING = Running()


@dataclass
class MachineState:
    program: object
    heap: Heap
    env: dict = field(default_factory=dict)
    pc: int = 0
    status: object = RUNNING
    steps: int = 0

    @property
    def running(self):
        return isinstance(self.status, Running)


def initial_state(program, cap_size=DEFAULT_CAP_SIZE):
    # ``capsize`` is predefined so programs can be written once for 16 and 32.
    return MachineState(program, Heap(cap_size=cap_size), {"capsize": cap_size})


def _wrong(msg):
    return LogicErr(LogicErrKind.WRONG_ARG_TYPE, msg)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def eval_expr(env, e):
    if isinstance(e, Lit):
        return wrap64(e.value)
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise _wrong(f"unbound variable {e.name!r}") from None
    if isinstance(e, Null):
        return capmod.null_cap()
    if isinstance(e, BinOp):
        a = eval_expr(env, e.left)
        b = eval_expr(env, e.right)
        if _is_int(a) and _is_int(b):
            if e.op == "+":
                return wrap64(a + b)
            if e.op == "-":
                return wrap64(a - b)
            if e.op == "*":
                return wrap64(a * b)
            if e.op == "=":
                return int(a == b)
            if e.op == "<":
                return int(a < b)
            if e.op == "<=":
                return int(a <= b)
        if isinstance(a, Capability) and _is_int(b) and e.op in "+-":
            return capmod.cap_arith(a, b if e.op == "+" else -b)
        if _is_int(a) and isinstance(b, Capability) and e.op == "+":
            return capmod.cap_arith(b, a)
        raise _wrong(f"ill-sorted operands for {e.op!r}")
    raise TypeError(f"not an expression: {e!r}")


def _cap(env, e):
    v = eval_expr(env, e)
    if not isinstance(v, Capability):
        raise _wrong("expected a capability")
    return v


def _int(env, e):
    v = eval_expr(env, e)
    if not _is_int(v):
        raise _wrong("expected an integer")
    return v


def _to_env(v):
    """Map a loaded CHERI-C value into the environment's value sorts."""
    if isinstance(v, IntVal):
        return wrap64(v.value)
    if isinstance(v, CapVal):
        return v.cap
    return v


def _to_cheri(t, v):
    if v is UNDEF:
        return UNDEF
    if t is CheriType.CAP:
        if isinstance(v, Capability):
            return CapVal(v)
    elif _is_int(v):
        return IntVal.of(t, v)
    elif isinstance(v, CapFragVal) and t in BYTE_TYPES:
        return v
    raise _wrong(f"cannot store this value as {t}")


def _intrinsic(name, args):
    c = args[0]
    if not isinstance(c, Capability):
        raise _wrong(f"{name} expects a capability")
    if name == "cheri_tag_get":
        return int(capmod.tag_get(c))
    if name == "cheri_tag_clear":
        return capmod.tag_clear(c)
    if name == "cheri_perms_get":
        return c.perms.value
    if name == "cheri_address_get":
        return c.offset
    if name == "cheri_offset_get":
        return c.offset - c.base
    if name == "cheri_base_get":
        return c.base
    if name == "cheri_length_get":
        return c.length
    n = args[1]
    if not _is_int(n):
        raise _wrong(f"{name} expects an integer")
    if name == "cheri_perms_and":
        return capmod.perms_and(c, Perm(n & Perm.ALL.value))
    if name == "cheri_bounds_set":
        if n < 0:
            raise _wrong("negative length")
        return capmod.bounds_set(c, c.offset, n)
    raise ValueError(f"unknown intrinsic {name!r}")


def _execute(state, ins):
    """Execute one instruction; returns the next pc."""
    env, heap, pc = state.env, state.heap, state.pc
    if isinstance(ins, Assign):
        env[ins.var] = eval_expr(env, ins.expr)
    elif isinstance(ins, Alloc):
        n = _int(env, ins.size)
        if n < 0:
            raise _wrong("negative allocation size")
        env[ins.var] = heap.alloc(n)
    elif isinstance(ins, Free):
        env[ins.var] = heap.free(_cap(env, ins.cap))
    elif isinstance(ins, Load):
        env[ins.var] = _to_env(heap.load(_cap(env, ins.cap), ins.type))
    elif isinstance(ins, Store):
        c = _cap(env, ins.cap)
        heap.store(c, _to_cheri(ins.type, eval_expr(env, ins.value)))
    elif isinstance(ins, Memcpy):
        dst, src, n = _cap(env, ins.dst), _cap(env, ins.src), _int(env, ins.size)
        if n < 0:
            raise _wrong("negative memcpy length")
        heap.memcpy(dst, src, n)
    elif isinstance(ins, Intrinsic):
        args = [eval_expr(env, a) for a in ins.args]
        env[ins.var] = _intrinsic(ins.name, args)
    elif isinstance(ins, Assert):
        if _int(env, ins.cond) == 0:
            state.status = AssertFailed(pc)
            return pc
    elif isinstance(ins, Goto):
        return ins.target
    elif isinstance(ins, IfGoto):
        if _int(env, ins.cond) != 0:
            return ins.target
    elif isinstance(ins, Halt):
        state.status = Halted(0)
        return pc
    elif isinstance(ins, FailCmd):
        state.status = AssertFailed(pc, ins.message)
        return pc
    else:
        raise TypeError(f"not an instruction: {ins!r}")
    return pc + 1


def step(state):
    """Execute the instruction at ``state.pc`` in place and return the state.

    Memory faults are recorded in ``status``; nothing is raised.
    """
    if not state.running:
        raise ValueError("step on a stopped machine")
    program = state.program
    try:
        nxt = _execute(state, program.instrs[state.pc])
    except MemError as err:
        state.status = Faulted(err, state.pc)
        nxt = state.pc
    state.steps += 1
    state.pc = nxt
    if state.running and state.pc >= len(program):
        state.status = Halted(0)
    return state


def run(program, max_steps=DEFAULT_MAX_STEPS, cap_size=DEFAULT_CAP_SIZE, trace=False,
        check_wf=False):
    """Run ``program`` to completion or until ``max_steps`` instructions.

    Returns ``(state, trace_lines)``. A state that is still running on
    return ran out of budget. With ``check_wf`` the heap's well-formedness
    is asserted after every step.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    state = initial_state(program, cap_size)
    lines = []
    if len(program) == 0:
        state.status = Halted(0)
        return state, lines
    while state.running and state.steps < max_steps:
        if trace:
            lines.append(f"pc={state.pc} {program.texts[state.pc]}")
        step(state)
        if check_wf and not wf(state.heap):
            raise AssertionError(f"heap not well-formed after pc={state.pc}")
    return state, lines
