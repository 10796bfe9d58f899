"""Group words over named generators: parsing, printing and evaluation.

Grammar (whitespace is ignored, juxtaposition is the product)::

    word   := factor*
    factor := atom ('^' int)?
    atom   := name | '(' word ')' | '[' word ',' word ']'
    name   := letter (letter | digit | '_')*
    int    := '-'? digit+

``[a,b]`` is the commutator ``a^-1 b^-1 a b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Union

__all__ = [
    "Identity",
    "Generator",
    "Product",
    "Power",
    "Commutator",
    "Word",
    "WordSyntaxError",
    "UnboundGeneratorError",
    "parse",
    "to_text",
    "evaluate",
    "read_corpus",
]


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class Generator:
    name: str


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Power:
    base: Any
    exponent: int


@dataclass(frozen=True)
class Commutator:
    left: Any
    right: Any


Word = Union[Identity, Generator, Product, Power, Commutator]


class WordSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at offset {position}")
        self.position = position
        self.text = text


class UnboundGeneratorError(KeyError):
    pass


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise WordSyntaxError(msg, self.pos, self.text)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def word(self):
        factors = []
        while True:
            ch = self.peek()
            if ch and (ch.isalpha() or ch in "(["):
                factors.append(self.factor())
            else:
                break
        if not factors:
            return Identity()
        if len(factors) == 1:
            return factors[0]
        return Product(tuple(factors))

    def factor(self):
        atom = self.atom()
        if self.peek() == "^":
            self.pos += 1
            atom = Power(atom, self.integer())
        return atom

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.word()
            self.expect(")")
            return inner
        if ch == "[":
            self.pos += 1
            left = self.word()
            self.expect(",")
            right = self.word()
            self.expect("]")
            return Commutator(left, right)
        start = self.pos
        if not (ch and ch.isascii() and ch.isalpha()):
            self.error("expected a generator name")
        self.pos += 1
        while self.pos < len(self.text) and (
            self.text[self.pos].isascii() and (self.text[self.pos].isalnum() or self.text[self.pos] == "_")
        ):
            self.pos += 1
        return Generator(self.text[start:self.pos])

    def integer(self):
        self.skip()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.error("expected an integer exponent")
        return int(self.text[start:self.pos])


def parse(text: str) -> Word:
    """Parse ``text``; raises :class:`WordSyntaxError` with the offending offset."""
    parser = _Parser(text)
    w = parser.word()
    if parser.peek():
        parser.error(f"unexpected {parser.peek()!r}")
    return w


def to_text(w: Word) -> str:
    """Canonical printer; ``parse(to_text(w)) == w`` for every parsed word."""
    if isinstance(w, Identity):
        return "()"
    if isinstance(w, Generator):
        return w.name
    if isinstance(w, Commutator):
        return f"[{_inner(w.left)},{_inner(w.right)}]"
    if isinstance(w, Power):
        base = w.base
        if isinstance(base, (Generator, Commutator)):
            return f"{to_text(base)}^{w.exponent}"
        return f"({_inner(base)})^{w.exponent}"
    if isinstance(w, Product):
        return " ".join(
            f"({to_text(f)})" if isinstance(f, Product) else to_text(f) for f in w.factors
        )
    raise TypeError(f"not a word: {w!r}")


def _inner(w: Word) -> str:
    # inside brackets/parens a bare product or the empty word needs no parens
    if isinstance(w, Identity):
        return ""
    return to_text(w)


def generators_of(w: Word) -> set[str]:
    if isinstance(w, Generator):
        return {w.name}
    if isinstance(w, Product):
        return set().union(*(generators_of(f) for f in w.factors))
    if isinstance(w, Power):
        return generators_of(w.base)
    if isinstance(w, Commutator):
        return generators_of(w.left) | generators_of(w.right)
    return set()


def _power(x, n: int, mul: Callable, inv: Callable, one):
    if n < 0:
        x, n = inv(x), -n
    result = one
    while n:
        if n & 1:
            result = mul(result, x)
        x = mul(x, x)
        n >>= 1
    return result


def evaluate(w: Word | str, env: Mapping[str, Any], ops) -> Any:
    """Evaluate ``w`` with generators bound by ``env``.

    ``ops`` supplies the group operations as attributes ``mul(a, b)``,
    ``inv(a)`` and ``identity()``.
    """
    if isinstance(w, str):
        w = parse(w)
    mul, inv, one = ops.mul, ops.inv, ops.identity()

    def ev(node):
        if isinstance(node, Identity):
            return one
        if isinstance(node, Generator):
            try:
                return env[node.name]
            except KeyError:
                raise UnboundGeneratorError(f"generator {node.name!r} is not bound") from None
        if isinstance(node, Product):
            acc = one
            for f in node.factors:
                acc = mul(acc, ev(f))
            return acc
        if isinstance(node, Power):
            return _power(ev(node.base), node.exponent, mul, inv, one)
        if isinstance(node, Commutator):
            a, b = ev(node.left), ev(node.right)
            return mul(mul(inv(a), inv(b)), mul(a, b))
        raise TypeError(f"not a word: {node!r}")

    return ev(w)


def read_corpus(path) -> list[str]:
    """Words from a corpus file: one per line, ``#`` starts a comment."""
    words = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                words.append(line)
    return words
