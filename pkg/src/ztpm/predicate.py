"""A small, total condition language for policy predicates.

Predicates are boolean expressions over a flattened request context:
dotted paths (``subject.role``, ``tool.pit_class``, ``env.human_present``,
``params.speed``, ``chain.depth``, ``trust``), literals, comparisons,
``and``/``or``/``not``, list membership, and ``exists``. There is no
arithmetic and no user-defined functions, so evaluation always terminates
and a naive reference evaluator is easy to write.

Grammar::

    expr     := or_expr
    or_expr  := and_expr ("or" and_expr)*
    and_expr := not_expr ("not"? ...) -- see not_expr
    not_expr := ["not"] cmp
    cmp      := term (op term)? | term "in" "[" literal ("," literal)* "]"
              | "exists" path
    term     := literal | path | "(" expr ")"
    op       := "=" | "==" | "!=" | "<" | "<=" | ">" | ">="

Paths absent from the context collapse to false: ``exists`` is false, any
comparison or membership touching the missing value is false, and a bare
missing path is false. Comparing values of incompatible kinds (say a string
against a number) raises :class:`PredicateTypeError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence, Tuple, Union

LitValue = Union[bool, int, float, str]

_MISSING = object()


class PredicateSyntaxError(Exception):
    """Malformed predicate source. Positions are 1-based."""

    def __init__(self, line: int, col: int, message: str, expected: Sequence[str] = ()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        super().__init__(f"{line}:{col}: {message}")


class PredicateTypeError(Exception):
    """Operands of a comparison or membership test have incompatible kinds."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: LitValue


@dataclass(frozen=True)
class Path:
    parts: Tuple[str, ...]

    def dotted(self) -> str:
        return ".".join(self.parts)


@dataclass(frozen=True)
class Cmp:
    op: str  # one of = != < <= > >=
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Member:
    item: "Node"
    values: Tuple[Lit, ...]


@dataclass(frozen=True)
class Exists:
    path: Path


@dataclass(frozen=True)
class Not:
    operand: "Node"


@dataclass(frozen=True)
class Conj:
    items: Tuple["Node", ...]


@dataclass(frozen=True)
class Disj:
    items: Tuple["Node", ...]


Node = Union[Lit, Path, Cmp, Member, Exists, Not, Conj, Disj]


@dataclass(frozen=True)
class EvalContext:
    """Flattened view of a request: dotted path -> scalar value."""

    values: Mapping[str, Any] = field(default_factory=dict)

    def lookup(self, dotted: str) -> Any:
        return self.values.get(dotted, _MISSING)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_KEYWORDS = {"and", "or", "not", "in", "exists", "true", "false"}
_OPS = ("<=", ">=", "!=", "==", "=", "<", ">")
_PUNCT = "()[],"


@dataclass(frozen=True)
class _Token:
    kind: str  # kw, path, number, string, op, punct, eof
    text: str
    value: Any
    line: int
    col: int


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(src)

    def err(msg: str) -> PredicateSyntaxError:
        return PredicateSyntaxError(line, col, msg)

    while i < n:
        ch = src[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, ch, start_line, start_col))
            i += 1
            col += 1
            continue
        matched_op = next((op for op in _OPS if src.startswith(op, i)), None)
        if matched_op:
            tokens.append(_Token("op", matched_op, matched_op, start_line, start_col))
            i += len(matched_op)
            col += len(matched_op)
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while j < n and src[j] != '"':
                if src[j] == "\\" and j + 1 < n:
                    esc = src[j + 1]
                    buf.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                else:
                    buf.append(src[j])
                    j += 1
            if j >= n:
                raise err("unterminated string literal")
            tokens.append(_Token("string", src[i : j + 1], "".join(buf), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and src[i + 1].isdigit()):
            j = i + 1
            seen_dot = False
            while j < n and (src[j].isdigit() or (src[j] == "." and not seen_dot)):
                if src[j] == ".":
                    seen_dot = True
                j += 1
            text = src[i:j]
            if text.endswith("."):
                raise err(f"malformed number {text!r}")
            value: LitValue = float(text) if seen_dot else int(text)
            tokens.append(_Token("number", text, value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] in "._"):
                j += 1
            text = src[i:j]
            if text.startswith(".") or text.endswith(".") or ".." in text:
                raise err(f"malformed path {text!r}")
            kind = "kw" if text in _KEYWORDS else "path"
            tokens.append(_Token(kind, text, text, start_line, start_col))
            col += j - i
            i = j
            continue
        raise err(f"unexpected character {ch!r}")

    tokens.append(_Token("eof", "", None, line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent over the grammar above)
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise PredicateSyntaxError(
                tok.line, tok.col, f"expected {want}, found {tok.text or 'end of input'!r}",
                expected=(want,),
            )
        return self.advance()

    def at_kw(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "kw" and tok.text == word

    def parse(self) -> Node:
        node = self.or_expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise PredicateSyntaxError(
                tok.line, tok.col, f"unexpected trailing input {tok.text!r}"
            )
        return node

    def or_expr(self) -> Node:
        items = [self.and_expr()]
        while self.at_kw("or"):
            self.advance()
            items.append(self.and_expr())
        return items[0] if len(items) == 1 else Disj(tuple(items))

    def and_expr(self) -> Node:
        items = [self.not_expr()]
        while self.at_kw("and"):
            self.advance()
            items.append(self.not_expr())
        return items[0] if len(items) == 1 else Conj(tuple(items))

    def not_expr(self) -> Node:
        if self.at_kw("not"):
            self.advance()
            return Not(self.cmp())
        return self.cmp()

    def cmp(self) -> Node:
        if self.at_kw("exists"):
            self.advance()
            tok = self.expect("path")
            return Exists(Path(tuple(tok.text.split("."))))
        left = self.term()
        tok = self.peek()
        if tok.kind == "op":
            self.advance()
            right = self.term()
            op = "=" if tok.text == "==" else tok.text
            return Cmp(op, left, right)
        if self.at_kw("in"):
            self.advance()
            self.expect("punct", "[")
            values = [self.literal()]
            while self.peek().text == ",":
                self.advance()
                values.append(self.literal())
            self.expect("punct", "]")
            return Member(left, tuple(values))
        return left

    def term(self) -> Node:
        tok = self.peek()
        if tok.text == "(":
            self.advance()
            inner = self.or_expr()
            self.expect("punct", ")")
            return inner
        if tok.kind in ("number", "string"):
            self.advance()
            return Lit(tok.value)
        if tok.kind == "kw" and tok.text in ("true", "false"):
            self.advance()
            return Lit(tok.text == "true")
        if tok.kind == "path":
            self.advance()
            return Path(tuple(tok.text.split(".")))
        raise PredicateSyntaxError(
            tok.line, tok.col, f"expected a value, path, or '(', found {tok.text or 'end of input'!r}",
            expected=("term",),
        )

    def literal(self) -> Lit:
        tok = self.peek()
        if tok.kind in ("number", "string"):
            self.advance()
            return Lit(tok.value)
        if tok.kind == "kw" and tok.text in ("true", "false"):
            self.advance()
            return Lit(tok.text == "true")
        raise PredicateSyntaxError(
            tok.line, tok.col, f"expected a literal, found {tok.text or 'end of input'!r}",
            expected=("literal",),
        )


def parse(src: str) -> Node:
    """Parse predicate source into an AST or raise PredicateSyntaxError."""
    return _Parser(_tokenize(src)).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _kind(value: Any) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    return type(value).__name__


def _resolve(node: Node, ctx: EvalContext) -> Any:
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, Path):
        return ctx.lookup(node.dotted())
    # Parenthesized sub-expression used as a comparison operand.
    return evaluate(node, ctx)


def _compare(op: str, left: Any, right: Any) -> bool:
    lk, rk = _kind(left), _kind(right)
    if lk != rk:
        raise PredicateTypeError(f"cannot compare {lk} with {rk}")
    if op in ("<", "<=", ">", ">=") and lk != "number":
        raise PredicateTypeError(f"ordering comparison needs numbers, got {lk}")
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right


def evaluate(node: Node, ctx: EvalContext) -> bool:
    """Evaluate a parsed predicate to a boolean. Pure and deterministic."""
    if isinstance(node, Lit):
        if not isinstance(node.value, bool):
            raise PredicateTypeError(f"expression is not boolean: {node.value!r}")
        return node.value
    if isinstance(node, Path):
        value = ctx.lookup(node.dotted())
        if value is _MISSING:
            return False
        if not isinstance(value, bool):
            raise PredicateTypeError(f"path {node.dotted()} is not boolean")
        return value
    if isinstance(node, Exists):
        return ctx.lookup(node.path.dotted()) is not _MISSING
    if isinstance(node, Cmp):
        left = _resolve(node.left, ctx)
        right = _resolve(node.right, ctx)
        if left is _MISSING or right is _MISSING:
            return False
        return _compare(node.op, left, right)
    if isinstance(node, Member):
        value = _resolve(node.item, ctx)
        if value is _MISSING:
            return False
        return any(_compare("=", value, lit.value) for lit in node.values)
    if isinstance(node, Not):
        return not evaluate(node.operand, ctx)
    if isinstance(node, Conj):
        return all(evaluate(item, ctx) for item in node.items)
    if isinstance(node, Disj):
        return any(evaluate(item, ctx) for item in node.items)
    raise AssertionError(f"unhandled node {node!r}")


# ---------------------------------------------------------------------------
# Pretty printer (canonical source; parse(to_source(ast)) == ast)
# ---------------------------------------------------------------------------


def _lit_source(value: LitValue) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return repr(value)


def _term_source(node: Node) -> str:
    if isinstance(node, Lit):
        return _lit_source(node.value)
    if isinstance(node, Path):
        return node.dotted()
    return f"({to_source(node)})"


def to_source(node: Node) -> str:
    """Render an AST back to canonical predicate source."""
    if isinstance(node, (Lit, Path)):
        return _term_source(node)
    if isinstance(node, Cmp):
        return f"{_term_source(node.left)} {node.op} {_term_source(node.right)}"
    if isinstance(node, Member):
        values = ", ".join(_lit_source(v.value) for v in node.values)
        return f"{_term_source(node.item)} in [{values}]"
    if isinstance(node, Exists):
        return f"exists {node.path.dotted()}"
    if isinstance(node, Not):
        inner = node.operand
        if isinstance(inner, (Conj, Disj)):
            return f"not ({to_source(inner)})"
        if isinstance(inner, (Cmp, Member, Exists, Not)):
            return f"not ({to_source(inner)})"
        return f"not {_term_source(inner)}"
    if isinstance(node, Conj):
        parts = [
            f"({to_source(item)})" if isinstance(item, Disj) else to_source(item)
            for item in node.items
        ]
        return " and ".join(parts)
    if isinstance(node, Disj):
        return " or ".join(to_source(item) for item in node.items)
    raise AssertionError(f"unhandled node {node!r}")


__all__ = [
    "Lit",
    "Path",
    "Cmp",
    "Member",
    "Exists",
    "Not",
    "Conj",
    "Disj",
    "Node",
    "EvalContext",
    "PredicateSyntaxError",
    "PredicateTypeError",
    "parse",
    "evaluate",
    "to_source",
]
