"""Reading and writing BoolNet-style ``.bnet`` models.

A model is a list of ``NAME, EXPR`` lines. ``#`` starts a comment line and an
optional ``targets, factors`` header is ignored. Expressions use ``!``, ``&``,
``|`` (in decreasing precedence) and parentheses; ``NOT``/``AND``/``OR`` are
accepted in any case. Component order is the order in which targets are
declared, and it fixes the position of each component in bitstrings.
"""

from __future__ import annotations

import re

from .bits import parse_bits
from .errors import BnetSyntaxError, ModelError
from .model import And, BooleanNetwork, Const, Not, Or, Var

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_KEYWORDS = {"and": "&", "or": "|", "not": "!"}


class _Parser:
    def __init__(self, text, lineno, offset, resolve):
        self.text = text
        self.lineno = lineno
        self.offset = offset
        self.resolve = resolve
        self.pos = 0

    def error(self, message, pos=None):
        col = self.offset + (self.pos if pos is None else pos) + 1
        raise BnetSyntaxError(message, self.lineno, col)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        """Next token as (kind, value, start) without consuming it."""
        self.skip()
        if self.pos >= len(self.text):
            return ("end", None, self.pos)
        c = self.text[self.pos]
        if c in "!&|()":
            return (c, c, self.pos)
        if c in "01" and not _IDENT.match(self.text, self.pos + 1):
            return ("const", int(c), self.pos)
        m = _IDENT.match(self.text, self.pos)
        if m:
            word = m.group()
            op = _KEYWORDS.get(word.lower())
            if op:
                return (op, word, self.pos)
            return ("ident", word, self.pos)
        return ("bad", c, self.pos)

    def take(self):
        kind, value, start = self.peek()
        if kind == "ident" or kind in ("!", "&", "|") and value.isalpha():
            self.pos = start + len(value)
        elif kind != "end":
            self.pos = start + 1
        return kind, value, start

    def parse(self):
        expr = self.disjunction()
        kind, value, start = self.peek()
        if kind != "end":
            self.error(f"unexpected {value!r}", start)
        return expr

    def disjunction(self):
        children = [self.conjunction()]
        while self.peek()[0] == "|":
            self.take()
            children.append(self.conjunction())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def conjunction(self):
        children = [self.negation()]
        while self.peek()[0] == "&":
            self.take()
            children.append(self.negation())
        return children[0] if len(children) == 1 else And(tuple(children))

    def negation(self):
        if self.peek()[0] == "!":
            self.take()
            return Not(self.negation())
        return self.atom()

    def atom(self):
        kind, value, start = self.take()
        if kind == "const":
            return Const(value)
        if kind == "ident":
            index = self.resolve(value)
            if index is None:
                self.error(f"undeclared variable {value!r}", start)
            return Var(index)
        if kind == "(":
            expr = self.disjunction()
            kind, value, start = self.take()
            if kind != ")":
                self.error("expected ')'", start)
            return expr
        if kind == "end":
            self.error("unexpected end of expression", start)
        self.error(f"unexpected {value!r}", start)


def _rules(text):
    """Yield (lineno, name, expr_text, expr_offset) for each rule line."""
    header_allowed = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        name_part, comma, expr_text = line.partition(",")
        if not comma:
            raise BnetSyntaxError("expected 'NAME, EXPR'", lineno, len(line) + 1)
        name = name_part.strip()
        if header_allowed and name.lower() == "targets" and expr_text.strip().lower() == "factors":
            header_allowed = False
            continue
        header_allowed = False
        if not _IDENT.fullmatch(name):
            col = len(name_part) - len(name_part.lstrip()) + 1
            raise BnetSyntaxError(f"invalid component name {name!r}", lineno, col)
        yield lineno, name, expr_text, len(name_part) + 1


def parse_bnet(text: str) -> BooleanNetwork:
    rules = list(_rules(text))
    if not rules:
        raise ModelError("empty model")
    index = {}
    for lineno, name, _, _ in rules:
        if name in index:
            raise BnetSyntaxError(f"duplicate target {name!r}", lineno, 1)
        index[name] = len(index)
    functions = []
    for lineno, name, expr_text, offset in rules:
        functions.append(_Parser(expr_text, lineno, offset, index.get).parse())
    return BooleanNetwork(tuple(index), tuple(functions))


def read_bnet(path) -> BooleanNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_bnet(fh.read())


def format_expr(expr, names) -> str:
    if isinstance(expr, Var):
        return names[expr.index]
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Not):
        inner = format_expr(expr.child, names)
        if isinstance(expr.child, (And, Or)):
            inner = f"({inner})"
        return "!" + inner
    if not expr.children:
        return "1" if isinstance(expr, And) else "0"
    op = " & " if isinstance(expr, And) else " | "
    parts = []
    for c in expr.children:
        s = format_expr(c, names)
        # nested n-ary nodes keep their parentheses so that trees round-trip
        if isinstance(c, (And, Or)) and (isinstance(c, Or) or isinstance(expr, And)):
            s = f"({s})"
        parts.append(s)
    return op.join(parts)


def serialize_bnet(f: BooleanNetwork) -> str:
    lines = ["targets, factors"]
    for name, expr in zip(f.names, f.functions):
        lines.append(f"{name}, {format_expr(expr, f.names)}")
    return "\n".join(lines) + "\n"


def parse_configuration(text: str, f: BooleanNetwork) -> int:
    """Bitstring in component order, or ``NAME=0|1`` pairs covering all components."""
    text = text.strip()
    if "=" not in text:
        if len(text) != f.n:
            raise ValueError(f"configuration {text!r} has length {len(text)}, expected {f.n}")
        return parse_bits(text)
    x = 0
    assigned = set()
    for item in text.split(","):
        name, _, value = item.partition("=")
        name, value = name.strip(), value.strip()
        i = f.index(name)
        if value not in ("0", "1"):
            raise ValueError(f"non-binary value {value!r} for {name!r}")
        if i in assigned:
            raise ValueError(f"component {name!r} assigned twice")
        assigned.add(i)
        if value == "1":
            x |= 1 << i
    missing = [f.names[i] for i in range(f.n) if i not in assigned]
    if missing:
        raise ValueError(f"missing components: {', '.join(missing)}")
    return x
