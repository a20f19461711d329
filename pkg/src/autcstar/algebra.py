"""Elements of the complex group algebra of an automaton group."""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

from .coeffs import ONE, ZERO, Gaussian, format_scalar
from .wreath_core import IDENTITY, Automaton, Word, format_word, free_reduce, inverse


def word_sort_key(w: Word):
    return (len(w), format_word(w))


class AlgebraElement:
    """A finite combination ``sum c_g g`` with exact Gaussian-rational coefficients.

    Keys are canonical representatives (see :meth:`Automaton.canonical`), so
    two keys never denote the same group element and equality of elements is
    plain dictionary equality.
    """

    __slots__ = ("automaton", "_terms")

    def __init__(self, automaton: Automaton, terms: Mapping[Word, object] | Iterable[tuple[Word, object]] = ()):
        self.automaton = automaton
        acc: dict[Word, Gaussian] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for w, c in items:
            key = automaton.canonical(w)
            acc[key] = acc.get(key, ZERO) + Gaussian.coerce(c)
        self._terms = {w: c for w, c in acc.items() if c}

    # constructors ----------------------------------------------------------

    @classmethod
    def zero(cls, automaton: Automaton) -> "AlgebraElement":
        return cls(automaton)

    @classmethod
    def identity(cls, automaton: Automaton) -> "AlgebraElement":
        return cls(automaton, {IDENTITY: ONE})

    @classmethod
    def scalar(cls, automaton: Automaton, c) -> "AlgebraElement":
        return cls(automaton, {IDENTITY: c})

    @classmethod
    def from_word(cls, automaton: Automaton, w: Word | str, c=1) -> "AlgebraElement":
        if isinstance(w, str):
            w = automaton.word(w)
        return cls(automaton, {w: c})

    # access ------------------------------------------------------------------

    def items(self) -> list[tuple[Word, Gaussian]]:
        return sorted(self._terms.items(), key=lambda kv: word_sort_key(kv[0]))

    def __iter__(self) -> Iterator[tuple[Word, Gaussian]]:
        return iter(self.items())

    def __len__(self):
        return len(self._terms)

    def support(self) -> list[Word]:
        return [w for w, _ in self.items()]

    def coefficient(self, w: Word) -> Gaussian:
        return self._terms.get(self.automaton.canonical(w), ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def monomial(self) -> tuple[Word, Gaussian] | None:
        """``(g, c)`` when the element is ``c*g``, else ``None``."""
        if len(self._terms) == 1:
            return next(iter(self._terms.items()))
        return None

    # arithmetic --------------------------------------------------------------

    def _check(self, other: "AlgebraElement"):
        if other.automaton is not self.automaton:
            raise ValueError("elements belong to different automata")

    def _lift(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            self._check(other)
            return other
        return AlgebraElement.scalar(self.automaton, Gaussian.coerce(other))

    def __add__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        terms = dict(self._terms)
        for w, c in o._terms.items():
            terms[w] = terms.get(w, ZERO) + c
        return AlgebraElement(self.automaton, terms)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.automaton, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, AlgebraElement):
            try:
                c = Gaussian.coerce(other)
            except TypeError:
                return NotImplemented
            return AlgebraElement(self.automaton, {w: v * c for w, v in self._terms.items()})
        self._check(other)
        acc: dict[Word, Gaussian] = {}
        for g, c in self._terms.items():
            for h, e in other._terms.items():
                w = free_reduce(g + h)
                acc[w] = acc.get(w, ZERO) + c * e
        return AlgebraElement(self.automaton, acc)

    def __rmul__(self, other):
        try:
            c = Gaussian.coerce(other)
        except TypeError:
            return NotImplemented
        return AlgebraElement(self.automaton, {w: c * v for w, v in self._terms.items()})

    def __truediv__(self, other):
        c = Gaussian.coerce(other)
        return self * (ONE / c)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = AlgebraElement.identity(self.automaton)
        for _ in range(k):
            out = out * self
        return out

    def inverse(self) -> "AlgebraElement":
        mono = self.monomial()
        if mono is None:
            raise ValueError("only scalar multiples of group elements can be inverted")
        w, c = mono
        return AlgebraElement(self.automaton, {inverse(w): ONE / c})

    def star(self) -> "AlgebraElement":
        return AlgebraElement(self.automaton, {inverse(w): c.conjugate() for w, c in self._terms.items()})

    def is_self_adjoint(self) -> bool:
        return self == self.star()

    # comparison / display ----------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, AlgebraElement):
            return self.automaton is other.automaton and self._terms == other._terms
        try:
            return self == self._lift(other)
        except TypeError:
            return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"AlgebraElement({self})"

    def __str__(self):
        return format_element(self)


def format_element(x: AlgebraElement) -> str:
    if x.is_zero():
        return "0"
    parts: list[str] = []
    for w, c in x.items():
        neg = c.im == 0 and c.re < 0
        mag = -c if neg else c
        if not w:
            body = format_scalar(mag)
        elif mag == ONE:
            body = format_word(w)
        else:
            body = f"{format_scalar(mag)}*{format_word(w)}"
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(parts)
