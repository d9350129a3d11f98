"""Concrete syntax for the GOTO-style mini IL.

One instruction per line, ``#`` starts a comment, and a label is a line of
the form ``name:``. Instructions::

    x := alloc E          x := free E           x := load <ty> E
    store <ty> E E        memcpy E E E          x := <intrinsic> E [E]
    x := E                assert E              goto L
    ifgoto E L            halt                  fail [message]

Operand lists are juxtaposed expressions, parsed greedily, so an operand
that starts with a minus sign must be parenthesised: ``store u8 p (-1)``.
Expressions support ``+ - *``, comparisons ``= < <=``, parentheses,
integer literals (decimal or ``0x``), variables and ``null``.
"""

import re
from dataclasses import dataclass

from .value import CheriType

INTRINSICS = {
    "cheri_tag_get": 1,
    "cheri_tag_clear": 1,
    "cheri_perms_get": 1,
    "cheri_perms_and": 2,
    "cheri_bounds_set": 2,
    "cheri_address_get": 1,
    "cheri_offset_get": 1,
    "cheri_base_get": 1,
    "cheri_length_get": 1,
}

KEYWORDS = {"alloc", "free", "load", "store", "memcpy", "assert", "goto", "ifgoto",
            "halt", "fail", "null"}

TYPES = {t.value: t for t in CheriType}


class ParseError(Exception):
    def __init__(self, message, line, col=1):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}")


# expressions

@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Null:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


# instructions

@dataclass(frozen=True)
class Assign:
    var: str
    expr: object


@dataclass(frozen=True)
class Alloc:
    var: str
    size: object


@dataclass(frozen=True)
class Free:
    var: str
    cap: object


@dataclass(frozen=True)
class Load:
    var: str
    type: CheriType
    cap: object


@dataclass(frozen=True)
class Store:
    type: CheriType
    cap: object
    value: object


@dataclass(frozen=True)
class Memcpy:
    dst: object
    src: object
    size: object


@dataclass(frozen=True)
class Intrinsic:
    var: str
    name: str
    args: tuple


@dataclass(frozen=True)
class Assert:
    cond: object


@dataclass(frozen=True)
class Goto:
    label: str
    target: int


@dataclass(frozen=True)
class IfGoto:
    cond: object
    label: str
    target: int


@dataclass(frozen=True)
class Halt:
    pass


@dataclass(frozen=True)
class FailCmd:
    message: str


@dataclass(frozen=True)
class Program:
    instrs: tuple
    texts: tuple
    lines: tuple
    labels: dict

    def __len__(self):
        return len(self.instrs)


_TOKEN = re.compile(r"\s*(?:(0[xX][0-9a-fA-F]+|\d+)|([A-Za-z_]\w*)|(<=|:=|[-+*=<()]))")


def _tokenize(text, lineno):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ParseError(f"unexpected character {text[col - 1]!r}", lineno, col)
        col = m.start(m.lastindex) + 1
        if m.group(1):
            tokens.append(("num", int(m.group(1), 0), col))
        elif m.group(2):
            tokens.append(("name", m.group(2), col))
        else:
            tokens.append(("op", m.group(3), col))
        pos = m.end()
    return tokens


class _LineParser:
    def __init__(self, tokens, lineno, eol_col):
        self.toks = tokens
        self.i = 0
        self.lineno = lineno
        self.eol_col = eol_col

    def error(self, message):
        col = self.toks[self.i][2] if self.i < len(self.toks) else self.eol_col
        raise ParseError(message, self.lineno, col)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of line")
        self.i += 1
        return tok

    def at_op(self, *ops):
        tok = self.peek()
        return tok is not None and tok[0] == "op" and tok[1] in ops

    def expect_op(self, op):
        if not self.at_op(op):
            self.error(f"expected {op!r}")
        self.i += 1

    def name(self, what):
        tok = self.peek()
        if tok is None or tok[0] != "name" or tok[1] in KEYWORDS:
            self.error(f"expected {what}")
        self.i += 1
        return tok[1]

    def type(self):
        tok = self.peek()
        if tok is None or tok[0] != "name" or tok[1] not in TYPES:
            self.error("expected a type (u8, s8, ..., s64, cap)")
        self.i += 1
        return TYPES[tok[1]]

    def end(self):
        if self.peek() is not None:
            self.error("unexpected trailing input")

    def expr(self):
        left = self.additive()
        if self.at_op("=", "<", "<="):
            op = self.take()[1]
            left = BinOp(op, left, self.additive())
        return left

    def additive(self):
        left = self.term()
        while self.at_op("+", "-"):
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.at_op("*"):
            self.take()
            left = BinOp("*", left, self.unary())
        return left

    def unary(self):
        if self.at_op("-"):
            self.take()
            return BinOp("-", Lit(0), self.unary())
        return self.atom()

    def atom(self):
        tok = self.peek()
        if tok is None:
            self.error("expected an expression")
        kind, val, _ = tok
        if kind == "num":
            self.i += 1
            return Lit(val)
        if kind == "name" and val == "null":
            self.i += 1
            return Null()
        if kind == "name" and val not in KEYWORDS and val not in INTRINSICS:
            self.i += 1
            return Var(val)
        if kind == "op" and val == "(":
            self.i += 1
            e = self.expr()
            self.expect_op(")")
            return e
        self.error("expected an expression")


def _parse_line(text, lineno):
    """Return ``(instr, pending_label)`` for one non-empty code line."""
    tokens = _tokenize(text, lineno)
    p = _LineParser(tokens, lineno, len(text.rstrip()) + 1)
    head = p.peek()
    if len(tokens) >= 2 and head[0] == "name" and tokens[1][:2] == ("op", ":="):
        var = p.name("a variable name")
        p.take()
        nxt = p.peek()
        word = nxt[1] if nxt is not None and nxt[0] == "name" else None
        if word == "alloc":
            p.take()
            instr = Alloc(var, p.expr())
        elif word == "free":
            p.take()
            instr = Free(var, p.expr())
        elif word == "load":
            p.take()
            ty = p.type()
            instr = Load(var, ty, p.expr())
        elif word is not None and word.startswith("cheri_"):
            if word not in INTRINSICS:
                p.error(f"unknown intrinsic {word!r}")
            p.take()
            args = tuple(p.expr() for _ in range(INTRINSICS[word]))
            instr = Intrinsic(var, word, args)
        else:
            instr = Assign(var, p.expr())
        p.end()
        return instr, None

    if head[0] != "name":
        p.error("expected an instruction")
    word = head[1]
    p.take()
    if word == "store":
        ty = p.type()
        instr = Store(ty, p.expr(), p.expr())
    elif word == "memcpy":
        instr = Memcpy(p.expr(), p.expr(), p.expr())
    elif word == "assert":
        instr = Assert(p.expr())
    elif word == "goto":
        return None, ("goto", p.name("a label"), p)
    elif word == "ifgoto":
        cond = p.expr()
        return None, ("ifgoto", p.name("a label"), p, cond)
    elif word == "halt":
        instr = Halt()
    elif word == "fail":
        rest = text.split("fail", 1)[1].strip()
        return FailCmd(rest or "fail"), None
    else:
        p.i -= 1
        p.error(f"unknown instruction {word!r}")
    p.end()
    return instr, None


_LABEL = re.compile(r"^\s*([A-Za-z_]\w*)\s*:\s*$")


def parse_program(text):
    """Parse program text; raises ``ParseError`` with a line/column."""
    instrs, texts, lines = [], [], []
    labels = {}
    jumps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("#", 1)[0]
        if not code.strip():
            continue
        m = _LABEL.match(code)
        if m:
            name = m.group(1)
            if name in KEYWORDS:
                raise ParseError(f"{name!r} is reserved", lineno, m.start(1) + 1)
            if name in labels:
                raise ParseError(f"label {name!r} defined twice", lineno, m.start(1) + 1)
            labels[name] = len(instrs)
            continue
        instr, jump = _parse_line(code, lineno)
        if jump is not None:
            jump[2].end()
            jumps.append((len(instrs), lineno, jump))
        instrs.append(instr)
        texts.append(" ".join(code.split()))
        lines.append(lineno)

    for idx, lineno, jump in jumps:
        kind, label, p = jump[0], jump[1], jump[2]
        if label not in labels:
            col = next(t[2] for t in reversed(p.toks) if t[1] == label)
            raise ParseError(f"undefined label {label!r}", lineno, col)
        if kind == "goto":
            instrs[idx] = Goto(label, labels[label])
        else:
            instrs[idx] = IfGoto(jump[3], label, labels[label])
    return Program(tuple(instrs), tuple(texts), tuple(lines), labels)
