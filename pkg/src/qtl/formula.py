"""Temporal formulas over projective atomic propositions.

Atoms name subspaces of the embedded classical-quantum space; they are built
block-wise, one subspace of the data space per classical configuration, and
the embedded subspace is the direct sum of the blocks.  Conjunction of atoms
is subspace intersection; disjunction of atoms leaves the atom lattice and
is represented downstream as a finite union of subspaces.  Negation does not
exist in this logic.

The almost-surely modalities take atoms only: they speak about measurement
probabilities approaching one, which is not closed under the other
connectives.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass

from .errors import (
    AlmostOperatorOnNonAtom,
    DimensionMismatch,
    ParseError,
    UnknownAtom,
    UnknownConfiguration,
)
from .linalg import Mat
from .subspace import Subspace, satisfies
from .program import CQState, embed


@dataclass(frozen=True)
class Atom:
    """A named projective proposition on the embedded space."""

    name: str
    subspace: Subspace


# formula nodes


@dataclass(frozen=True)
class FTrue:
    pass


@dataclass(frozen=True)
class FFalse:
    pass


@dataclass(frozen=True)
class FAtom:
    name: str


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Next:
    body: object


@dataclass(frozen=True)
class Until:
    left: object
    right: object


@dataclass(frozen=True)
class AlmostUntil:
    left: str  # atom name
    right: str  # atom name


@dataclass(frozen=True)
class Eventually:
    body: object


@dataclass(frozen=True)
class AlmostEventually:
    atom: str  # atom name


@dataclass(frozen=True)
class Always:
    body: object


def atom_from_blocks(name: str, blocks: dict, program) -> Atom:
    """Assemble an atom from per-configuration subspaces of the data space.

    Missing configurations default to the zero subspace; the embedded
    subspace is the direct sum over configurations.
    """
    configs = program.configs()
    n_configs = len(configs)
    d = program.dim
    index_of = {}
    for i, c in enumerate(configs):
        index_of[c] = i
        index_of[repr(c)] = i
    by_index = {}
    for label, sub in blocks.items():
        key = label if label in index_of else repr(label)
        if key not in index_of:
            raise UnknownConfiguration(f"configuration {label!r} not in the program")
        if sub.ambient_dim != d:
            raise DimensionMismatch(f"block for {label!r} must live in dimension {d}")
        by_index[index_of[key]] = sub
    cols = []
    for idx, sub in sorted(by_index.items()):
        for col in sub.basis.column_vectors():
            entries = [0] * (d * n_configs)
            for h in range(d):
                entries[h * n_configs + idx] = col.entry(h, 0)
            cols.append(Mat.column(entries))
    return Atom(name, Subspace.from_vectors(d * n_configs, cols))


# ----------------------------------------------------------------------
# parser

_FORMULA_TOKENS = _re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<always>\[\])
  | (?P<almost_ev><>~)
  | (?P<eventually><>)
  | (?P<and>&&)
  | (?P<or>\|\|)
  | (?P<almost_until>U~)
  | (?P<until>U)
  | (?P<next>X)
  | (?P<true>true)
  | (?P<false>false)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
    """,
    _re.VERBOSE,
)


def _lex_formula(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _FORMULA_TOKENS.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r} in formula", 1, pos + 1)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(0), pos))
        pos = m.end()
    tokens.append(("eof", "", pos))
    return tokens


class _FormulaParser:
    """Precedence: unary ([] <> <>~ X) > U/U~ > && > ||, left-associative."""

    def __init__(self, tokens, atoms):
        self.tokens = tokens
        self.pos = 0
        self.atoms = atoms

    def cur(self):
        return self.tokens[self.pos]

    def eat(self, kind):
        tok = self.cur()
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r} in formula", 1, tok[2] + 1)
        self.pos += 1
        return tok

    def parse(self):
        node = self.or_level()
        self.eat("eof")
        return node

    def or_level(self):
        node = self.and_level()
        while self.cur()[0] == "or":
            self.eat("or")
            node = Or(node, self.and_level())
        return node

    def and_level(self):
        node = self.until_level()
        while self.cur()[0] == "and":
            self.eat("and")
            node = And(node, self.until_level())
        return node

    def until_level(self):
        node = self.unary()
        while self.cur()[0] in ("until", "almost_until"):
            kind = self.cur()[0]
            self.eat(kind)
            rhs = self.unary()
            if kind == "until":
                node = Until(node, rhs)
            else:
                node = AlmostUntil(self._atom_name(node), self._atom_name(rhs))
        return node

    def unary(self):
        tok = self.cur()
        if tok[0] == "always":
            self.eat("always")
            return Always(self.unary())
        if tok[0] == "eventually":
            self.eat("eventually")
            return Eventually(self.unary())
        if tok[0] == "almost_ev":
            self.eat("almost_ev")
            return AlmostEventually(self._atom_name(self.unary()))
        if tok[0] == "next":
            self.eat("next")
            return Next(self.unary())
        if tok[0] == "lpar":
            self.eat("lpar")
            node = self.or_level()
            self.eat("rpar")
            return node
        if tok[0] == "true":
            self.eat("true")
            return FTrue()
        if tok[0] == "false":
            self.eat("false")
            return FFalse()
        if tok[0] == "name":
            self.eat("name")
            if tok[1] not in self.atoms:
                raise UnknownAtom(f"atom {tok[1]!r} is not defined")
            return FAtom(tok[1])
        raise ParseError(f"unexpected {tok[1]!r} in formula", 1, tok[2] + 1)

    def _atom_name(self, node):
        if not isinstance(node, FAtom):
            raise AlmostOperatorOnNonAtom(
                "almost-surely modalities take atomic propositions only"
            )
        return node.name


def parse_formula(text: str, atoms: dict) -> object:
    """Parse a formula; atom names are resolved against the given table."""
    return _FormulaParser(_lex_formula(text), atoms).parse()


def formula_to_str(node) -> str:
    if isinstance(node, FTrue):
        return "true"
    if isinstance(node, FFalse):
        return "false"
    if isinstance(node, FAtom):
        return node.name
    if isinstance(node, And):
        return f"({formula_to_str(node.left)} && {formula_to_str(node.right)})"
    if isinstance(node, Or):
        return f"({formula_to_str(node.left)} || {formula_to_str(node.right)})"
    if isinstance(node, Next):
        return f"X {formula_to_str(node.body)}"
    if isinstance(node, Until):
        return f"({formula_to_str(node.left)} U {formula_to_str(node.right)})"
    if isinstance(node, AlmostUntil):
        return f"({node.left} U~ {node.right})"
    if isinstance(node, Eventually):
        return f"<> {formula_to_str(node.body)}"
    if isinstance(node, AlmostEventually):
        return f"<>~ {node.atom}"
    if isinstance(node, Always):
        return f"[] {formula_to_str(node.body)}"
    raise TypeError(f"not a formula: {node!r}")


# ----------------------------------------------------------------------
# finite-prefix trace semantics


HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PrefixVerdict:
    status: str
    step: int | None = None

    def __bool__(self):
        return self.status == HOLDS


def holds_prefix(states, formula, atoms: dict, program=None, delta: float | None = None):
    """Evaluate the trace-semantics clauses on a finite prefix of states.

    ``states`` is a list of CQState (with ``program`` for the embedding) or
    embedded matrices.  Clauses quantifying over infinite time return
    Inconclusive when the prefix neither witnesses nor refutes them.  The
    almost-surely modalities run in exact mode by default; with ``delta``
    they report Holds as soon as the satisfaction probability exceeds
    1 - delta somewhere on the prefix.
    """
    if not states:
        raise DimensionMismatch("need a nonempty prefix")
    mats = [embed(s, program) if isinstance(s, CQState) else s for s in states]
    n = len(mats)

    def sat(i, name) -> bool:
        return satisfies(mats[i], atoms[name].subspace)

    def prob(i, name) -> float:
        sub = atoms[name].subspace
        return float((sub.projector @ mats[i]).trace().re)

    def ev(node, i) -> PrefixVerdict:
        if isinstance(node, FTrue):
            return PrefixVerdict(HOLDS, i)
        if isinstance(node, FFalse):
            return PrefixVerdict(FAILS, i)
        if isinstance(node, FAtom):
            if node.name not in atoms:
                raise UnknownAtom(node.name)
            return PrefixVerdict(HOLDS if sat(i, node.name) else FAILS, i)
        if isinstance(node, And):
            a, b = ev(node.left, i), ev(node.right, i)
            if a.status == FAILS:
                return a
            if b.status == FAILS:
                return b
            if a.status == HOLDS and b.status == HOLDS:
                return PrefixVerdict(HOLDS, i)
            return PrefixVerdict(INCONCLUSIVE)
        if isinstance(node, Or):
            a, b = ev(node.left, i), ev(node.right, i)
            if a.status == HOLDS or b.status == HOLDS:
                return PrefixVerdict(HOLDS, i)
            if a.status == FAILS and b.status == FAILS:
                return PrefixVerdict(FAILS, i)
            return PrefixVerdict(INCONCLUSIVE)
        if isinstance(node, Next):
            if i + 1 >= n:
                return PrefixVerdict(INCONCLUSIVE)
            return ev(node.body, i + 1)
        if isinstance(node, Eventually):
            return ev(Until(FTrue(), node.body), i)
        if isinstance(node, Always):
            for j in range(i, n):
                v = ev(node.body, j)
                if v.status == FAILS:
                    return PrefixVerdict(FAILS, j)
            return PrefixVerdict(INCONCLUSIVE)
        if isinstance(node, Until):
            blocked = None
            for j in range(i, n):
                r = ev(node.right, j)
                if r.status == HOLDS:
                    return PrefixVerdict(HOLDS, j)
                l = ev(node.left, j)
                if l.status == FAILS and r.status == FAILS:
                    return PrefixVerdict(FAILS, j)
                if l.status != HOLDS:
                    blocked = j
                    break
            return PrefixVerdict(INCONCLUSIVE, blocked)
        if isinstance(node, AlmostEventually):
            for j in range(i, n):
                if sat(j, node.atom):
                    return PrefixVerdict(HOLDS, j)
                if delta is not None and prob(j, node.atom) > 1.0 - delta:
                    return PrefixVerdict(HOLDS, j)
            return PrefixVerdict(INCONCLUSIVE)
        if isinstance(node, AlmostUntil):
            for j in range(i, n):
                hit = sat(j, node.right) or (
                    delta is not None and prob(j, node.right) > 1.0 - delta
                )
                if hit:
                    return PrefixVerdict(HOLDS, j)
                if not sat(j, node.left):
                    # q broke before any exact hit: no i can serve every delta
                    if delta is None:
                        return PrefixVerdict(FAILS, j)
                    return PrefixVerdict(INCONCLUSIVE, j)
            return PrefixVerdict(INCONCLUSIVE)
        raise TypeError(f"not a formula: {node!r}")

    return ev(formula, 0)
