"""Finite-trace temporal logic: formulas, parsing, trace semantics, DFA compilation.

Formulas are immutable trees built from the frozen dataclasses below.
`eval_trace` implements the recursive finite-trace semantics directly and is
the single source of truth for satisfaction; `to_dfa` compiles a formula into
a deterministic automaton over explicit labels and is checked against
`eval_trace` by bounded-exhaustive tests.

Concrete syntax (tightest to loosest): `! X N F G`, `U R`, `&`, `|`, `->`,
plus `true`/`false`, identifiers, and parentheses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import AlphabetError, CapacityError

Label = frozenset  # frozenset[str]: the set of propositions true at one step
Trace = Sequence  # Sequence[Label], non-empty

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
RESERVED = {"true", "false", "X", "N", "U", "R", "F", "G"}


def make_label(*names: str) -> Label:
    return frozenset(names)


class Formula:
    """Base class for formula nodes. Instances are frozen and hashable."""

    __slots__ = ()

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not IDENT_RE.fullmatch(self.name) or self.name in RESERVED:
            raise ValueError(f"invalid proposition name: {self.name!r}")


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


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
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class WeakNext(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula


@dataclass(frozen=True)
class Globally(Formula):
    arg: Formula


TRUE = TrueF()
FALSE = FalseF()


def propositions(f: Formula) -> frozenset:
    """All proposition names occurring in `f`."""
    out: set = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            out.add(g.name)
        elif isinstance(g, (Not, Next, WeakNext, Eventually, Globally)):
            stack.append(g.arg)
        elif isinstance(g, (And, Or, Implies, Until, Release)):
            stack.append(g.left)
            stack.append(g.right)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Parsing


class LtlfSyntaxError(SyntaxError):
    """Raised on malformed formula text; `offset` is the 0-based position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_TOKEN_RE = re.compile(r"\s*(->|[!&|()]|[A-Za-z][A-Za-z0-9_]*)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise LtlfSyntaxError(
                f"unexpected character {stripped[0]!r}", len(text) - len(stripped)
            )
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.implies()
        if self.peek() is not None:
            raise LtlfSyntaxError(f"unexpected token {self.peek()!r}", self.pos())
        return f

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.until()
        while self.peek() == "&":
            self.take()
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        left = self.unary()
        tok = self.peek()
        if tok in ("U", "R"):
            self.take()
            right = self.until()
            return Until(left, right) if tok == "U" else Release(left, right)
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise LtlfSyntaxError("unexpected end of input", self.pos())
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "X":
            self.take()
            return Next(self.unary())
        if tok == "N":
            self.take()
            return WeakNext(self.unary())
        if tok == "F":
            self.take()
            return Eventually(self.unary())
        if tok == "G":
            self.take()
            return Globally(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise LtlfSyntaxError("unexpected end of input", self.pos())
        if tok == "(":
            self.take()
            f = self.implies()
            if self.peek() != ")":
                raise LtlfSyntaxError("expected ')'", self.pos())
            self.take()
            return f
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        if IDENT_RE.fullmatch(tok) and tok not in RESERVED:
            self.take()
            return Atom(tok)
        raise LtlfSyntaxError(f"unexpected token {tok!r}", self.pos())


def parse(text: str) -> Formula:
    """Parse concrete syntax into a Formula. Raises LtlfSyntaxError."""
    if not text.strip():
        raise LtlfSyntaxError("empty formula", 0)
    return _Parser(text).parse()


# Precedence levels for printing; larger binds tighter.
_LVL_IMPLIES, _LVL_OR, _LVL_AND, _LVL_UNTIL, _LVL_UNARY, _LVL_ATOM = range(6)


def _level(f: Formula) -> int:
    if isinstance(f, (TrueF, FalseF, Atom)):
        return _LVL_ATOM
    if isinstance(f, (Not, Next, WeakNext, Eventually, Globally)):
        return _LVL_UNARY
    if isinstance(f, (Until, Release)):
        return _LVL_UNTIL
    if isinstance(f, And):
        return _LVL_AND
    if isinstance(f, Or):
        return _LVL_OR
    return _LVL_IMPLIES


def pretty(f: Formula) -> str:
    """Minimal-parenthesis rendering; parse(pretty(f)) is structurally f."""

    def wrap(g: Formula, minlvl: int) -> str:
        s = pretty(g)
        return f"({s})" if _level(g) < minlvl else s

    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + wrap(f.arg, _LVL_UNARY)
    if isinstance(f, Next):
        return "X " + wrap(f.arg, _LVL_UNARY)
    if isinstance(f, WeakNext):
        return "N " + wrap(f.arg, _LVL_UNARY)
    if isinstance(f, Eventually):
        return "F " + wrap(f.arg, _LVL_UNARY)
    if isinstance(f, Globally):
        return "G " + wrap(f.arg, _LVL_UNARY)
    if isinstance(f, Until):
        # U/R associate to the right
        return wrap(f.left, _LVL_UNARY) + " U " + wrap(f.right, _LVL_UNTIL)
    if isinstance(f, Release):
        return wrap(f.left, _LVL_UNARY) + " R " + wrap(f.right, _LVL_UNTIL)
    if isinstance(f, And):
        return wrap(f.left, _LVL_AND) + " & " + wrap(f.right, _LVL_AND + 1)
    if isinstance(f, Or):
        return wrap(f.left, _LVL_OR) + " | " + wrap(f.right, _LVL_OR + 1)
    if isinstance(f, Implies):
        return wrap(f.left, _LVL_OR) + " -> " + wrap(f.right, _LVL_IMPLIES)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Trace semantics


def eval_trace(f: Formula, rho: Trace, i: int = 0) -> bool:
    """Does step `i` of trace `rho` satisfy `f`?

    Implements the recursive finite-trace semantics; top-level satisfaction
    is `eval_trace(f, rho, 0)`.
    """
    n = len(rho)
    if not 0 <= i < n:
        raise IndexError(f"position {i} outside trace of length {n}")
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Atom):
        return f.name in rho[i]
    if isinstance(f, Not):
        return not eval_trace(f.arg, rho, i)
    if isinstance(f, And):
        return eval_trace(f.left, rho, i) and eval_trace(f.right, rho, i)
    if isinstance(f, Or):
        return eval_trace(f.left, rho, i) or eval_trace(f.right, rho, i)
    if isinstance(f, Implies):
        return (not eval_trace(f.left, rho, i)) or eval_trace(f.right, rho, i)
    if isinstance(f, Next):
        return n > i + 1 and eval_trace(f.arg, rho, i + 1)
    if isinstance(f, WeakNext):
        return n == i + 1 or eval_trace(f.arg, rho, i + 1)
    if isinstance(f, Until):
        for j in range(i, n):
            if eval_trace(f.right, rho, j):
                return all(eval_trace(f.left, rho, k) for k in range(i, j))
        return False
    if isinstance(f, Release):
        for j in range(i, n):
            if not eval_trace(f.right, rho, j):
                return any(eval_trace(f.left, rho, k) for k in range(i, j))
        return True
    if isinstance(f, Eventually):
        return any(eval_trace(f.arg, rho, j) for j in range(i, n))
    if isinstance(f, Globally):
        return all(eval_trace(f.arg, rho, j) for j in range(i, n))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Negation normal form


def to_nnf(f: Formula) -> Formula:
    """Equivalent formula with negation only on atoms and F/G/-> eliminated."""
    return _nnf(f, False)


def _nnf(f: Formula, neg: bool) -> Formula:
    if isinstance(f, TrueF):
        return FALSE if neg else TRUE
    if isinstance(f, FalseF):
        return TRUE if neg else FALSE
    if isinstance(f, Atom):
        return Not(f) if neg else f
    if isinstance(f, Not):
        return _nnf(f.arg, not neg)
    if isinstance(f, And):
        if neg:
            return Or(_nnf(f.left, True), _nnf(f.right, True))
        return And(_nnf(f.left, False), _nnf(f.right, False))
    if isinstance(f, Or):
        if neg:
            return And(_nnf(f.left, True), _nnf(f.right, True))
        return Or(_nnf(f.left, False), _nnf(f.right, False))
    if isinstance(f, Implies):
        return _nnf(Or(Not(f.left), f.right), neg)
    if isinstance(f, Next):
        return WeakNext(_nnf(f.arg, True)) if neg else Next(_nnf(f.arg, False))
    if isinstance(f, WeakNext):
        return Next(_nnf(f.arg, True)) if neg else WeakNext(_nnf(f.arg, False))
    if isinstance(f, Until):
        if neg:
            return Release(_nnf(f.left, True), _nnf(f.right, True))
        return Until(_nnf(f.left, False), _nnf(f.right, False))
    if isinstance(f, Release):
        if neg:
            return Until(_nnf(f.left, True), _nnf(f.right, True))
        return Release(_nnf(f.left, False), _nnf(f.right, False))
    if isinstance(f, Eventually):
        return _nnf(Until(TRUE, f.arg), neg)
    if isinstance(f, Globally):
        return _nnf(Release(FALSE, f.arg), neg)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# DFA compilation by formula progression


def _key(f: Formula):
    """Total order on formulas, used to canonicalize ∧/∨ argument order."""
    if isinstance(f, TrueF):
        return (0,)
    if isinstance(f, FalseF):
        return (1,)
    if isinstance(f, Atom):
        return (2, f.name)
    if isinstance(f, Not):
        return (3, _key(f.arg))
    if isinstance(f, Next):
        return (4, _key(f.arg))
    if isinstance(f, WeakNext):
        return (5, _key(f.arg))
    if isinstance(f, Until):
        return (6, _key(f.left), _key(f.right))
    if isinstance(f, Release):
        return (7, _key(f.left), _key(f.right))
    if isinstance(f, And):
        return (8, _key(f.left), _key(f.right))
    if isinstance(f, Or):
        return (9, _key(f.left), _key(f.right))
    raise TypeError(f"unexpected node in NNF: {f!r}")


def _flatten(f: Formula, cls) -> Iterable[Formula]:
    if isinstance(f, cls):
        yield from _flatten(f.left, cls)
        yield from _flatten(f.right, cls)
    else:
        yield f


def _mk_and(left: Formula, right: Formula) -> Formula:
    parts = []
    seen = set()
    for g in _flatten(And(left, right), And):
        if isinstance(g, FalseF):
            return FALSE
        if isinstance(g, TrueF) or g in seen:
            continue
        seen.add(g)
        parts.append(g)
    if not parts:
        return TRUE
    parts.sort(key=_key)
    out = parts[0]
    for g in parts[1:]:
        out = And(out, g)
    return out


def _mk_or(left: Formula, right: Formula) -> Formula:
    parts = []
    seen = set()
    for g in _flatten(Or(left, right), Or):
        if isinstance(g, TrueF):
            return TRUE
        if isinstance(g, FalseF) or g in seen:
            continue
        seen.add(g)
        parts.append(g)
    if not parts:
        return FALSE
    parts.sort(key=_key)
    out = parts[0]
    for g in parts[1:]:
        out = Or(out, g)
    return out


def _canon(f: Formula) -> Formula:
    """Canonical representative of an NNF formula (sorted, deduplicated ∧/∨)."""
    if isinstance(f, And):
        return _mk_and(_canon(f.left), _canon(f.right))
    if isinstance(f, Or):
        return _mk_or(_canon(f.left), _canon(f.right))
    if isinstance(f, Next):
        return Next(_canon(f.arg))
    if isinstance(f, WeakNext):
        return WeakNext(_canon(f.arg))
    if isinstance(f, Until):
        return Until(_canon(f.left), _canon(f.right))
    if isinstance(f, Release):
        return Release(_canon(f.left), _canon(f.right))
    return f


def _step(f: Formula, label: Label) -> Formula:
    """Residual obligation after observing `label`, assuming more steps follow.

    With a further step guaranteed, strong and weak next coincide; the
    end-of-trace distinction is handled by the acceptance bit instead.
    """
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Atom):
        return TRUE if f.name in label else FALSE
    if isinstance(f, Not):  # NNF: argument is an Atom
        return FALSE if f.arg.name in label else TRUE
    if isinstance(f, And):
        return _mk_and(_step(f.left, label), _step(f.right, label))
    if isinstance(f, Or):
        return _mk_or(_step(f.left, label), _step(f.right, label))
    if isinstance(f, (Next, WeakNext)):
        return f.arg
    if isinstance(f, Until):
        return _mk_or(_step(f.right, label), _mk_and(_step(f.left, label), f))
    if isinstance(f, Release):
        return _mk_and(_step(f.right, label), _mk_or(_step(f.left, label), f))
    raise TypeError(f"unexpected node in NNF: {f!r}")


def _eval_empty(f: Formula) -> bool:
    # Convention for the initial state's acceptance bit only; the semantics
    # proper is defined on non-empty traces.
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Atom):
        return False
    if isinstance(f, Not):
        return not _eval_empty(f.arg)
    if isinstance(f, And):
        return _eval_empty(f.left) and _eval_empty(f.right)
    if isinstance(f, Or):
        return _eval_empty(f.left) or _eval_empty(f.right)
    if isinstance(f, Next):
        return False
    if isinstance(f, WeakNext):
        return True
    if isinstance(f, Until):
        return False
    if isinstance(f, Release):
        return True
    raise TypeError(f"unexpected node in NNF: {f!r}")


@dataclass(frozen=True, eq=True)
class Dfa:
    """Deterministic finite automaton over an explicit label alphabet.

    `delta` is total on states x alphabet; every state is reachable from
    `initial`.
    """

    num_states: int
    initial: int
    accepting: frozenset
    alphabet: tuple
    delta: dict

    def step(self, state: int, label: Label) -> int:
        try:
            return self.delta[(state, label)]
        except KeyError:
            raise AlphabetError(f"label {set(label)!r} not in DFA alphabet") from None

    def accepts(self, trace: Trace) -> bool:
        return dfa_accepts(self, trace)


def label_sort_key(label: Label):
    return (len(label), tuple(sorted(label)))


def all_labels(universe: Iterable[str]) -> tuple:
    """Every subset of `universe`, in a deterministic order."""
    names = sorted(universe)
    out = [frozenset()]
    for name in names:
        out.extend([s | {name} for s in out])
    return tuple(sorted(out, key=label_sort_key))


def to_dfa(
    f: Formula,
    universe: Iterable[str],
    alphabet: Iterable[Label] | None = None,
    max_states: int = 10**6,
) -> Dfa:
    """Compile `f` into a DFA accepting exactly the traces satisfying it.

    The alphabet defaults to all subsets of `universe`; callers may restrict
    it to the labels that will actually be fed (every label must be a subset
    of `universe`).
    """
    universe = frozenset(universe)
    extra = propositions(f) - universe
    if extra:
        raise AlphabetError(f"formula mentions propositions outside universe: {sorted(extra)}")
    if alphabet is None:
        sigma = all_labels(universe)
    else:
        sigma = tuple(sorted({frozenset(l) for l in alphabet}, key=label_sort_key))
        for label in sigma:
            if not label <= universe:
                raise AlphabetError(
                    f"label {set(label)!r} not within universe {sorted(universe)}"
                )

    g0 = _canon(to_nnf(f))
    start = (g0, _eval_empty(g0))
    index: dict = {start: 0}
    delta: dict = {}
    accepting = set()
    queue = [start]
    if start[1]:
        accepting.add(0)
    while queue:
        state = queue.pop(0)
        si = index[state]
        residual = state[0]
        for label in sigma:
            succ = (_step(residual, label), eval_trace(residual, (label,), 0))
            if succ not in index:
                if len(index) >= max_states:
                    raise CapacityError("DFA construction", len(index) + 1, max_states)
                index[succ] = len(index)
                if succ[1]:
                    accepting.add(index[succ])
                queue.append(succ)
            delta[(si, label)] = index[succ]
    return Dfa(
        num_states=len(index),
        initial=0,
        accepting=frozenset(accepting),
        alphabet=sigma,
        delta=delta,
    )


def dfa_accepts(d: Dfa, t: Trace) -> bool:
    """Run `d` over `t` and report membership of the final state."""
    if len(t) == 0:
        raise ValueError("trace must be non-empty")
    q = d.initial
    for label in t:
        q = d.step(q, frozenset(label))
    return q in d.accepting
