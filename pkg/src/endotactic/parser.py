"""Plain-text reaction network format (.crn): the package's only I/O boundary.

Grammar, one reaction per line::

    line      := complex ARROW complex
    ARROW     := "->" | "<->"        ("<->" expands to forward then reverse)
    complex   := "0" | term ("+" term)*
    term      := [coeff] species     (coeff := integer | integer "/" integer, default 1)
    species   := [A-Za-z_][A-Za-z0-9_]*
    comments  := "#" to end of line; blank lines ignored

Species are indexed in first-appearance order.  Coefficients must be
positive rationals written without interior whitespace ("3/2 X1").
"""

from __future__ import annotations

import re
import warnings

from .network import Complex, Reaction, ReactionNetwork, Species
from .rational import RAT, rat


class NetworkSyntaxError(ValueError):
    """Parse failure carrying 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DuplicateReactionWarning(UserWarning):
    pass


_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<number>\d+(?:/\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<plus>\+)
      | (?P<rarrow><->|->)
      | (?P<minus>-)
    """,
    re.VERBOSE,
)


def _tokenize(text: str, lineno: int):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise NetworkSyntaxError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind == "minus":
            raise NetworkSyntaxError(
                "negative coefficients are not allowed (stray '-')", lineno, pos + 1
            )
        if kind != "ws":
            out.append((kind, m.group(), pos + 1))
        pos = m.end()
    return out


class _LineParser:
    def __init__(self, tokens, lineno, line_len):
        self.tokens = tokens
        self.lineno = lineno
        self.line_len = line_len
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def error(self, message):
        col = self.tokens[self.i][2] if self.i < len(self.tokens) else self.line_len + 1
        raise NetworkSyntaxError(message, self.lineno, col)

    def parse_complex(self, species_of):
        tok = self.peek()
        if tok is None:
            self.error("expected a complex")
        if tok[0] == "number" and tok[1] == "0":
            nxt = self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None
            if nxt is None or nxt[0] in ("rarrow",):
                self.i += 1
                return Complex.make({})
        coeffs = {}
        while True:
            coeff = RAT(1)
            tok = self.peek()
            if tok is None:
                self.error("expected a term")
            if tok[0] == "number":
                try:
                    coeff = rat(tok[1])
                except ZeroDivisionError:
                    self.error("zero denominator in coefficient")
                if coeff <= 0:
                    self.error("coefficient must be positive")
                self.i += 1
                tok = self.peek()
            if tok is None or tok[0] != "ident":
                self.error("expected a species name")
            idx = species_of(tok[1])
            coeffs[idx] = coeffs.get(idx, RAT(0)) + coeff
            self.i += 1
            tok = self.peek()
            if tok is not None and tok[0] == "plus":
                self.i += 1
                continue
            return Complex.make(coeffs)


def parse_network(text: str, name: str = "") -> ReactionNetwork:
    """Parse .crn text into a ReactionNetwork.

    Raises NetworkSyntaxError (with line/column) on bad syntax, negative or
    zero coefficients, and self-loop reactions.  An exactly repeated reaction
    emits DuplicateReactionWarning but is kept, preserving multiplicity.
    """
    species_order: dict = {}
    species_of = lambda nm: species_order.setdefault(nm, len(species_order))
    reactions = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        tokens = _tokenize(line, lineno)
        lp = _LineParser(tokens, lineno, len(line))
        source = lp.parse_complex(species_of)
        tok = lp.peek()
        if tok is None or tok[0] != "rarrow":
            lp.error("expected '->' or '<->'")
        arrow = tok[1]
        lp.i += 1
        target = lp.parse_complex(species_of)
        if lp.peek() is not None:
            lp.error("unexpected trailing input")
        pairs = [(source, target)]
        if arrow == "<->":
            pairs.append((target, source))
        for src, tgt in pairs:
            if src == tgt:
                raise NetworkSyntaxError("self-loop reaction not allowed", lineno, 1)
            if (src, tgt) in seen:
                warnings.warn(
                    f"line {lineno}: duplicate reaction kept", DuplicateReactionWarning
                )
            seen.add((src, tgt))
            reactions.append(Reaction(src, tgt))
    species = tuple(Species(i, nm) for nm, i in species_order.items())
    return ReactionNetwork(species, tuple(reactions), allow_self_loops=False, name=name)


def serialize_network(net: ReactionNetwork) -> str:
    """Canonical .crn text: species in index order inside complexes, unit
    coefficients omitted, reversible pairs merged to "<->" (forward first).

    Species appearing in no reaction cannot be represented by the grammar
    and are dropped; the parser never produces such networks.
    """
    used = [False] * net.num_reactions
    lines = []
    for k, rxn in enumerate(net.reactions):
        if used[k]:
            continue
        used[k] = True
        arrow = "->"
        if not rxn.is_self_loop:
            for j in range(k + 1, net.num_reactions):
                if not used[j] and net.reactions[j] == rxn.reversed():
                    used[j] = True
                    arrow = "<->"
                    break
        lines.append(
            f"{rxn.source.format(net.species)} {arrow} {rxn.target.format(net.species)}"
        )
    return "\n".join(lines) + ("\n" if lines else "")
