"""Past-time linear temporal logic (PLTL) over finite traces.

Formulas are immutable ASTs built from atoms, boolean connectives and the
past-time operators H (historically), O (once), S (since) and Y (yesterday).
A trace is a finite sequence of observations, each observation a set of atom
names; satisfaction is judged at the final position of the trace.

Three evaluation paths are provided:

* ``evaluate`` fills a truth table over all positions bottom-up.
* ``monitor_init`` / ``monitor_step`` maintain an incremental state vector
  with one boolean per subformula and never look back at the trace.

Both agree with the textbook recursive semantics (see the test suite's
direct-recursion oracle).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import AbstractSet


class ParseError(ValueError):
    """Raised on malformed formula text; carries the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownAtomError(ValueError):
    """Raised when a formula mentions an atom outside the trace alphabet."""

    def __init__(self, name: str):
        super().__init__(f"unknown atom {name!r}")
        self.name = name


# ------------------------- formula classes -------------------------


@dataclass(frozen=True)
class Formula:
    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Historically(Formula):
    child: Formula


@dataclass(frozen=True)
class Once(Formula):
    child: Formula


@dataclass(frozen=True)
class Since(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Yesterday(Formula):
    child: Formula


TRUE = Const(True)
FALSE = Const(False)

_UNARY = (Not, Historically, Once, Yesterday)
_BINARY = (And, Or, Implies, Since)


def size(phi: Formula) -> int:
    """Number of AST nodes."""
    if isinstance(phi, _UNARY):
        return 1 + size(phi.child)
    if isinstance(phi, _BINARY):
        return 1 + size(phi.left) + size(phi.right)
    return 1


def atoms(phi: Formula) -> frozenset[str]:
    """Set of atom names mentioned anywhere in the formula."""
    if isinstance(phi, Atom):
        return frozenset((phi.name,))
    if isinstance(phi, _UNARY):
        return atoms(phi.child)
    if isinstance(phi, _BINARY):
        return atoms(phi.left) | atoms(phi.right)
    return frozenset()


def subformulas(phi: Formula) -> list[Formula]:
    """All AST nodes in postorder (children before parents, root last).

    Structurally equal nodes occurring at different places are listed once
    each, so the length always equals ``size(phi)``.
    """
    out: list[Formula] = []

    def walk(node: Formula) -> None:
        if isinstance(node, _UNARY):
            walk(node.child)
        elif isinstance(node, _BINARY):
            walk(node.left)
            walk(node.right)
        out.append(node)

    walk(phi)
    return out


def check_atoms(phi: Formula, alphabet: AbstractSet[str]) -> None:
    """Raise UnknownAtomError if the formula uses an atom outside alphabet."""
    for name in sorted(atoms(phi)):
        if name not in alphabet:
            raise UnknownAtomError(name)


# ------------------------- compiled form -------------------------
#
# Formulas are compiled once into a flat postorder instruction list so the
# monitor, the planner and the single-trace evaluator all share one set of
# update rules.  Instruction operands are indices into the postorder.

_OP_ATOM = 0
_OP_CONST = 1
_OP_NOT = 2
_OP_AND = 3
_OP_OR = 4
_OP_IMPLIES = 5
_OP_HIST = 6
_OP_ONCE = 7
_OP_SINCE = 8
_OP_YESTERDAY = 9


_OPCODE = {
    Not: _OP_NOT,
    And: _OP_AND,
    Or: _OP_OR,
    Implies: _OP_IMPLIES,
    Historically: _OP_HIST,
    Once: _OP_ONCE,
    Since: _OP_SINCE,
    Yesterday: _OP_YESTERDAY,
}


@lru_cache(maxsize=None)
def compile_ops(phi: Formula) -> tuple[tuple[int, int, int, object], ...]:
    """Flat postorder instruction form, the fast path behind the monitor.

    Each entry is (opcode, left_index, right_index, payload); bits_init and
    bits_step run these over int bitmasks, one bit per subformula. Search
    code uses the bitmask directly as a compact hashable monitor state.
    """
    ops: list[tuple[int, int, int, object]] = []

    def walk(node: Formula) -> int:
        if isinstance(node, Atom):
            ops.append((_OP_ATOM, -1, -1, node.name))
        elif isinstance(node, Const):
            ops.append((_OP_CONST, -1, -1, node.value))
        elif isinstance(node, _UNARY):
            i = walk(node.child)
            ops.append((_OPCODE[type(node)], i, -1, None))
        elif isinstance(node, _BINARY):
            i = walk(node.left)
            j = walk(node.right)
            ops.append((_OPCODE[type(node)], i, j, None))
        else:
            raise TypeError(f"not a formula node: {node!r}")
        return len(ops) - 1

    walk(phi)
    return tuple(ops)


def bits_init(ops, obs: AbstractSet[str]) -> int:
    """State bitmask after reading the first observation."""
    bits = 0
    for k, (code, i, j, payload) in enumerate(ops):
        if code == _OP_ATOM:
            v = payload in obs
        elif code == _OP_CONST:
            v = payload
        elif code == _OP_NOT:
            v = not (bits >> i) & 1
        elif code == _OP_AND:
            v = (bits >> i) & (bits >> j) & 1
        elif code == _OP_OR:
            v = ((bits >> i) | (bits >> j)) & 1
        elif code == _OP_IMPLIES:
            v = not ((bits >> i) & 1 and not (bits >> j) & 1)
        elif code == _OP_HIST or code == _OP_ONCE:
            v = (bits >> i) & 1
        elif code == _OP_SINCE:
            v = (bits >> j) & 1
        else:  # yesterday: there is no previous position
            v = False
        if v:
            bits |= 1 << k
    return bits


def bits_step(ops, prev: int, obs: AbstractSet[str]) -> int:
    """State bitmask after one more observation; prev is the old bitmask."""
    bits = 0
    for k, (code, i, j, payload) in enumerate(ops):
        if code == _OP_ATOM:
            v = payload in obs
        elif code == _OP_CONST:
            v = payload
        elif code == _OP_NOT:
            v = not (bits >> i) & 1
        elif code == _OP_AND:
            v = (bits >> i) & (bits >> j) & 1
        elif code == _OP_OR:
            v = ((bits >> i) | (bits >> j)) & 1
        elif code == _OP_IMPLIES:
            v = not ((bits >> i) & 1 and not (bits >> j) & 1)
        elif code == _OP_HIST:
            v = (prev >> k) & (bits >> i) & 1
        elif code == _OP_ONCE:
            v = ((prev >> k) | (bits >> i)) & 1
        elif code == _OP_SINCE:
            v = ((bits >> j) | ((bits >> i) & (prev >> k))) & 1
        else:  # yesterday: child's value at the previous position
            v = (prev >> i) & 1
        if v:
            bits |= 1 << k
    return bits


# ------------------------- monitor -------------------------


@dataclass(frozen=True)
class MonitorState:
    """Incremental monitor state: one boolean per subformula, postorder."""

    values: tuple[bool, ...]
    step: int

    @property
    def satisfied(self) -> bool:
        """Truth of the monitored formula at the current position."""
        return self.values[-1]


def _bits_to_tuple(bits: int, n: int) -> tuple[bool, ...]:
    return tuple(bool((bits >> k) & 1) for k in range(n))


def _tuple_to_bits(values: tuple[bool, ...]) -> int:
    bits = 0
    for k, v in enumerate(values):
        if v:
            bits |= 1 << k
    return bits


def monitor_init(phi: Formula, obs: AbstractSet[str]) -> MonitorState:
    """State after observing the first trace position."""
    ops = compile_ops(phi)
    return MonitorState(_bits_to_tuple(bits_init(ops, obs), len(ops)), 0)


def monitor_step(phi: Formula, state: MonitorState, obs: AbstractSet[str]) -> MonitorState:
    """State after one further observation."""
    ops = compile_ops(phi)
    if len(state.values) != len(ops):
        raise ValueError(
            f"monitor state has {len(state.values)} entries, "
            f"formula has {len(ops)} subformulas"
        )
    bits = bits_step(ops, _tuple_to_bits(state.values), obs)
    return MonitorState(_bits_to_tuple(bits, len(ops)), state.step + 1)


# ------------------------- evaluation -------------------------


def evaluate(phi: Formula, trace, alphabet: AbstractSet[str] | None = None) -> bool:
    """Satisfaction of ``phi`` at the final position of ``trace``.

    ``trace`` is a sequence of observations (sets of atom names) or any
    object exposing such a sequence as ``.observations``.  When ``alphabet``
    is given, formula atoms are checked against it first.
    """
    obs_seq = getattr(trace, "observations", trace)
    if len(obs_seq) == 0:
        raise ValueError("empty trace")
    if alphabet is not None:
        check_atoms(phi, alphabet)

    n = len(obs_seq)
    table: dict[int, list[bool]] = {}

    def column(node: Formula) -> list[bool]:
        key = id(node)
        got = table.get(key)
        if got is not None:
            return got
        if isinstance(node, Atom):
            col = [node.name in obs_seq[i] for i in range(n)]
        elif isinstance(node, Const):
            col = [node.value] * n
        elif isinstance(node, Not):
            c = column(node.child)
            col = [not c[i] for i in range(n)]
        elif isinstance(node, And):
            a, b = column(node.left), column(node.right)
            col = [a[i] and b[i] for i in range(n)]
        elif isinstance(node, Or):
            a, b = column(node.left), column(node.right)
            col = [a[i] or b[i] for i in range(n)]
        elif isinstance(node, Implies):
            a, b = column(node.left), column(node.right)
            col = [(not a[i]) or b[i] for i in range(n)]
        elif isinstance(node, Historically):
            c = column(node.child)
            col, acc = [], True
            for i in range(n):
                acc = acc and c[i]
                col.append(acc)
        elif isinstance(node, Once):
            c = column(node.child)
            col, acc = [], False
            for i in range(n):
                acc = acc or c[i]
                col.append(acc)
        elif isinstance(node, Since):
            a, b = column(node.left), column(node.right)
            col, acc = [], False
            for i in range(n):
                acc = b[i] or (a[i] and acc)
                col.append(acc)
        elif isinstance(node, Yesterday):
            c = column(node.child)
            col = [False] + c[: n - 1]
        else:
            raise TypeError(f"not a formula node: {node!r}")
        table[key] = col
        return col

    return column(phi)[n - 1]


# ------------------------- parsing -------------------------
#
# Grammar (highest precedence first):
#
#   unary   := '!' unary | 'H' unary | 'O' unary | 'Y' unary
#            | ident | 'true' | 'false' | '(' implies ')'
#   since   := unary ('S' unary)*            left associative
#   and     := since ('&' since)*            left associative
#   or      := and ('|' and)*                left associative
#   implies := or ('->' implies)?            right associative
#
# Atoms are lowercase identifiers; H, O, Y and S are single uppercase
# letters; 'true' and 'false' are reserved words.

_TEMPORAL_PREFIX = {"H": Historically, "O": Once, "Y": Yesterday}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == "-":
            if text[i : i + 2] == "->":
                tokens.append(("->", "->", i))
                i += 2
                continue
            raise ParseError("expected '->'", i)
        if ch in "!&|()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch in "HOYS":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.islower():
            j = i
            while j < n and (text[j].islower() or text[j].isdigit() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word == "true":
                tokens.append(("true", word, i))
            elif word == "false":
                tokens.append(("false", word, i))
            else:
                tokens.append(("ident", word, i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.k]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.take()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def parse(self) -> Formula:
        phi = self.implies()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return phi

    def implies(self) -> Formula:
        left = self.or_()
        if self.peek()[0] == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def or_(self) -> Formula:
        phi = self.and_()
        while self.peek()[0] == "|":
            self.take()
            phi = Or(phi, self.and_())
        return phi

    def and_(self) -> Formula:
        phi = self.since()
        while self.peek()[0] == "&":
            self.take()
            phi = And(phi, self.since())
        return phi

    def since(self) -> Formula:
        phi = self.unary()
        while self.peek()[0] == "S":
            self.take()
            phi = Since(phi, self.unary())
        return phi

    def unary(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "!":
            self.take()
            return Not(self.unary())
        if kind in _TEMPORAL_PREFIX:
            self.take()
            return _TEMPORAL_PREFIX[kind](self.unary())
        if kind == "ident":
            self.take()
            return Atom(value)
        if kind == "true":
            self.take()
            return TRUE
        if kind == "false":
            self.take()
            return FALSE
        if kind == "(":
            self.take()
            phi = self.implies()
            self.expect(")")
            return phi
        raise ParseError(f"unexpected {value or 'end of input'!r}", pos)


def parse_formula(text: str) -> Formula:
    """Parse formula text; raises ParseError with a position on bad input."""
    return _Parser(text).parse()


def read_formula_lines(text: str) -> list[Formula]:
    """Parse a formulas file: one formula per line, '#' starts a comment."""
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(parse_formula(line))
    return out


# ------------------------- printing -------------------------

_LEVEL_IMPLIES = 0
_LEVEL_OR = 1
_LEVEL_AND = 2
_LEVEL_SINCE = 3
_LEVEL_UNARY = 4


def _fmt(phi: Formula, min_level: int) -> str:
    if isinstance(phi, Atom):
        return phi.name
    if isinstance(phi, Const):
        return "true" if phi.value else "false"
    if isinstance(phi, Not):
        return _wrap("!" + _fmt(phi.child, _LEVEL_UNARY), _LEVEL_UNARY, min_level)
    if isinstance(phi, Historically):
        return _wrap("H " + _fmt(phi.child, _LEVEL_UNARY), _LEVEL_UNARY, min_level)
    if isinstance(phi, Once):
        return _wrap("O " + _fmt(phi.child, _LEVEL_UNARY), _LEVEL_UNARY, min_level)
    if isinstance(phi, Yesterday):
        return _wrap("Y " + _fmt(phi.child, _LEVEL_UNARY), _LEVEL_UNARY, min_level)
    if isinstance(phi, Since):
        s = _fmt(phi.left, _LEVEL_SINCE) + " S " + _fmt(phi.right, _LEVEL_SINCE + 1)
        return _wrap(s, _LEVEL_SINCE, min_level)
    if isinstance(phi, And):
        s = _fmt(phi.left, _LEVEL_AND) + " & " + _fmt(phi.right, _LEVEL_AND + 1)
        return _wrap(s, _LEVEL_AND, min_level)
    if isinstance(phi, Or):
        s = _fmt(phi.left, _LEVEL_OR) + " | " + _fmt(phi.right, _LEVEL_OR + 1)
        return _wrap(s, _LEVEL_OR, min_level)
    if isinstance(phi, Implies):
        s = _fmt(phi.left, _LEVEL_IMPLIES + 1) + " -> " + _fmt(phi.right, _LEVEL_IMPLIES)
        return _wrap(s, _LEVEL_IMPLIES, min_level)
    raise TypeError(f"not a formula node: {phi!r}")


def _wrap(text: str, level: int, min_level: int) -> str:
    return "(" + text + ")" if level < min_level else text


def format_formula(phi: Formula) -> str:
    """Render with minimal parentheses; parse_formula round-trips it."""
    return _fmt(phi, _LEVEL_IMPLIES)
