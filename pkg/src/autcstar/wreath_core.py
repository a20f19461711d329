"""Automata over the alphabet {1..d} and exact arithmetic in the groups they generate.

Words are tuples of ``(state, exponent)`` pairs with exponent +1 or -1; the
empty tuple is the identity.  A word ``l1*l2*...*lk`` acts as the composition
``l1 o l2 o ... o lk`` (the rightmost letter acts first), so ``act_level`` is a
homomorphism.

Sections are target-indexed: for a letter ``x`` and suffix ``w``

    g(x w) = g(x) . section(g, g(x))(w)

which is the tuple order of the recursion ``g -> (sec_1, ..., sec_d) . g_1``.
Vertices are tuples of 0-based letters internally and strings such as
``"12"`` (1-based) at the boundary.  Levels are indexed lexicographically,
first letter most significant.
"""

from __future__ import annotations

import os
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    AutomatonError,
    EmptyAlphabet,
    EmptyAutomaton,
    LevelTooLarge,
    MalformedPermutation,
    MalformedSections,
    UnknownGenerator,
    UnknownStateInSection,
    WordSyntaxError,
)

Letter = tuple[str, int]
Word = tuple[Letter, ...]
Vertex = tuple[int, ...]

IDENTITY: Word = ()
DEFAULT_LEVEL_CAP = 2**20
LEVEL_CAP_ENV = "AUTCSTAR_LEVEL_CAP"
NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_~']*\Z")
RESERVED_NAMES = {"star", "i"}

# is_trivial explores at most this many distinct sections; only automata whose
# sections are products of several states can get near it.
MAX_SECTION_NODES = 500_000


def default_level_cap() -> int:
    value = os.environ.get(LEVEL_CAP_ENV)
    return int(value) if value else DEFAULT_LEVEL_CAP


# ---------------------------------------------------------------------------
# words


def free_reduce(word: Sequence[Letter]) -> Word:
    out: list[Letter] = []
    for name, e in word:
        if out and out[-1][0] == name and out[-1][1] == -e:
            out.pop()
        else:
            out.append((name, e))
    return tuple(out)


def inverse(word: Sequence[Letter]) -> Word:
    return tuple((name, -e) for name, e in reversed(word))


def format_word(word: Sequence[Letter]) -> str:
    if not word:
        return "1"
    return "*".join(name if e == 1 else f"{name}^-1" for name, e in word)


def parse_word(text: str, states: Mapping | None = None) -> Word:
    """Parse ``"1"`` or ``"a*b^-1*c"``; names are checked against ``states`` if given."""
    s = text.strip()
    if s == "1" or s == "":
        return IDENTITY
    letters: list[Letter] = []
    for part in s.split("*"):
        part = part.strip()
        e = 1
        if part.endswith("^-1"):
            part, e = part[:-3].strip(), -1
        if part == "1":
            continue
        if not NAME_RE.match(part):
            raise WordSyntaxError(f"bad letter {part!r} in word {text!r}")
        if states is not None and part not in states:
            raise UnknownGenerator(f"unknown state {part!r} in word {text!r}")
        letters.append((part, e))
    return free_reduce(letters)


def parse_vertex(text: str | Sequence[int], d: int) -> Vertex:
    """``"12"`` -> ``(0, 1)``.  For d > 9 letters must be separated by dots."""
    if not isinstance(text, str):
        v = tuple(int(x) for x in text)
    elif text in ("", "root"):
        return ()
    elif "." in text or d > 9:
        v = tuple(int(x) - 1 for x in text.split("."))
    else:
        v = tuple(int(ch) - 1 for ch in text)
    if any(x < 0 or x >= d for x in v):
        raise ValueError(f"vertex {text!r} uses letters outside 1..{d}")
    return v


def format_vertex(v: Sequence[int], d: int = 2) -> str:
    if d > 9:
        return ".".join(str(x + 1) for x in v)
    return "".join(str(x + 1) for x in v)


def vertex_index(v: Sequence[int], d: int) -> int:
    idx = 0
    for x in v:
        idx = idx * d + x
    return idx


def vertex_at(index: int, n: int, d: int) -> Vertex:
    out = []
    for _ in range(n):
        index, x = divmod(index, d)
        out.append(x)
    return tuple(reversed(out))


def level_vertices(n: int, d: int) -> list[Vertex]:
    return [vertex_at(i, n, d) for i in range(d**n)]


# ---------------------------------------------------------------------------
# permutations


class Permutation:
    """A bijection of {0..m-1}, stored as an image array (0-based)."""

    __slots__ = ("images",)

    def __init__(self, images):
        arr = np.asarray(images, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("permutation images must be one-dimensional")
        m = len(arr)
        if m and (arr.min() < 0 or arr.max() >= m or np.bincount(arr, minlength=m).max() != 1):
            raise ValueError("images do not form a bijection")
        arr.setflags(write=False)
        object.__setattr__(self, "images", arr)

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(np.arange(m))

    @classmethod
    def from_one_based(cls, images: Sequence[int]) -> "Permutation":
        return cls(np.asarray(images) - 1)

    def __len__(self):
        return len(self.images)

    def __call__(self, i: int) -> int:
        return int(self.images[i])

    def compose(self, other: "Permutation") -> "Permutation":
        """``self o other``: apply ``other`` first."""
        return Permutation(self.images[other.images])

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.images)
        inv[self.images] = np.arange(len(self.images))
        return Permutation(inv)

    def is_identity(self) -> bool:
        return bool(np.all(self.images == np.arange(len(self.images))))

    def one_based(self) -> tuple[int, ...]:
        return tuple(int(x) + 1 for x in self.images)

    def fixed_points(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.images == np.arange(len(self.images)))]

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return len(self) == len(other) and bool(np.array_equal(self.images, other.images))

    def __hash__(self):
        return hash(self.images.tobytes())

    def __repr__(self):
        if len(self) <= 16:
            return f"Permutation{self.one_based()}"
        return f"Permutation(<{len(self)} points>)"


def is_bijection(images: Sequence[int], m: int) -> bool:
    return len(images) == m and sorted(images) == list(range(m))


# ---------------------------------------------------------------------------
# automaton


@dataclass(frozen=True)
class StateRule:
    output: tuple[int, ...]  # 0-based images of the letters
    sections: tuple[Word, ...]  # target-indexed
    inv_output: tuple[int, ...]


class Automaton:
    """A validated automaton; build one with :func:`validate_automaton`."""

    def __init__(self, alphabet_size: int, states: Mapping[str, StateRule], level_cap: int | None = None):
        self.alphabet_size = alphabet_size
        self.states: dict[str, StateRule] = dict(states)
        self.level_cap = level_cap if level_cap is not None else default_level_cap()
        self._letter_perm: dict[tuple[str, int, int], np.ndarray] = {}
        self._trivial: dict[Word, bool] = {}
        self._canon: dict[Word, Word] = {}
        self._buckets: dict[bytes, list[Word]] = {}
        d = alphabet_size
        self._fp_level = 0
        while d ** (self._fp_level + 1) <= 64:
            self._fp_level += 1

    @property
    def d(self) -> int:
        return self.alphabet_size

    @property
    def names(self) -> list[str]:
        return list(self.states)

    def letters(self) -> list[Letter]:
        """Generators and their inverses in declaration order."""
        out = []
        for name in self.states:
            out.append((name, 1))
            out.append((name, -1))
        return out

    def word(self, text: str) -> Word:
        return parse_word(text, self.states)

    def to_raw(self) -> dict:
        return {
            "alphabet_size": self.alphabet_size,
            "states": {
                name: {
                    "output": [x + 1 for x in rule.output],
                    "sections": [format_word(w) for w in rule.sections],
                }
                for name, rule in self.states.items()
            },
        }

    def __repr__(self):
        return f"Automaton(d={self.alphabet_size}, states={self.names})"

    # -- single level ------------------------------------------------------

    def _letter_out(self, letter: Letter, x: int) -> int:
        rule = self.states[letter[0]]
        return rule.output[x] if letter[1] == 1 else rule.inv_output[x]

    def root_permutation(self, g: Sequence[Letter]) -> Permutation:
        d = self.alphabet_size
        images = list(range(d))
        for letter in reversed(g):
            images = [self._letter_out(letter, y) for y in images]
        return Permutation(images)

    def _root_images(self, g: Word) -> tuple[int, ...]:
        images = range(self.alphabet_size)
        for letter in reversed(g):
            images = [self._letter_out(letter, y) for y in images]
        return tuple(images)

    def _section1(self, g: Word, y: int) -> Word:
        """Section of ``g`` at the first-level target ``y``, freely reduced."""
        pieces: list[Letter] = []
        for name, e in g:
            rule = self.states[name]
            if e == 1:
                pieces.extend(rule.sections[y])
                y = rule.inv_output[y]
            else:
                x = rule.output[y]
                pieces.extend(inverse(rule.sections[x]))
                y = x
        return free_reduce(pieces)

    # -- public operations ---------------------------------------------------

    def section(self, g: Sequence[Letter], v: Sequence[int]) -> Word:
        """Section of ``g`` at the target vertex ``v`` (identity word at the root)."""
        cur = free_reduce(g)
        for y in v:
            if not cur:
                return IDENTITY
            cur = self._section1(cur, y)
        return cur

    def act(self, g: Sequence[Letter], v: Sequence[int]) -> Vertex:
        cur = free_reduce(g)
        out = []
        for x in v:
            if not cur:
                out.append(x)
                continue
            y = x
            for letter in reversed(cur):
                y = self._letter_out(letter, y)
            out.append(y)
            cur = self._section1(cur, y)
        return tuple(out)

    def check_level(self, n: int) -> None:
        if n < 0:
            raise ValueError("level must be non-negative")
        if self.alphabet_size**n > self.level_cap:
            raise LevelTooLarge(
                f"level {n} has {self.alphabet_size}**{n} vertices, above the cap {self.level_cap}"
            )

    def _perm_array(self, letter: Letter, n: int) -> np.ndarray:
        key = (letter[0], letter[1], n)
        cached = self._letter_perm.get(key)
        if cached is not None:
            return cached
        if n == 0:
            arr = np.zeros(1, dtype=np.int64)
        elif letter[1] == -1:
            fwd = self._perm_array((letter[0], 1), n)
            arr = np.empty_like(fwd)
            arr[fwd] = np.arange(len(fwd))
        else:
            rule = self.states[letter[0]]
            d = self.alphabet_size
            m = d ** (n - 1)
            arr = np.empty(d * m, dtype=np.int64)
            for x in range(d):
                y = rule.output[x]
                arr[x * m:(x + 1) * m] = y * m + self._word_array(rule.sections[y], n - 1)
        arr.setflags(write=False)
        self._letter_perm[key] = arr
        return arr

    def _word_array(self, g: Sequence[Letter], n: int) -> np.ndarray:
        size = self.alphabet_size**n
        out = np.arange(size)
        for letter in reversed(g):
            out = self._perm_array(letter, n)[out]
        return out

    def act_level(self, g: Sequence[Letter], n: int) -> Permutation:
        """Permutation induced on level ``n`` (lexicographic vertex order)."""
        self.check_level(n)
        return Permutation(self._word_array(free_reduce(g), n))

    def is_trivial(self, g: Sequence[Letter]) -> bool:
        """Decide ``g == 1`` by exploring the closure of ``g`` under sections."""
        start = free_reduce(g)
        if not start:
            return True
        cached = self._trivial.get(start)
        if cached is not None:
            return cached
        d = self.alphabet_size
        ident = tuple(range(d))
        seen = {start}
        queue = deque([start])
        result = True
        while queue:
            w = queue.popleft()
            known = self._trivial.get(w)
            if known is True:
                continue
            if known is False or self._root_images(w) != ident:
                result = False
                break
            for y in range(d):
                s = self._section1(w, y)
                if s and s not in seen:
                    seen.add(s)
                    queue.append(s)
            if len(seen) > MAX_SECTION_NODES:
                raise RuntimeError("section closure exceeded the exploration budget")
        if result:
            # every explored node is then trivial as well
            for w in seen:
                self._trivial[w] = True
        else:
            self._trivial[start] = False
        return result

    def equal(self, g: Sequence[Letter], h: Sequence[Letter]) -> bool:
        return self.is_trivial(free_reduce(tuple(g) + inverse(h)))

    def fingerprint(self, g: Sequence[Letter]) -> bytes:
        return self._word_array(free_reduce(g), self._fp_level).tobytes()

    def canonical(self, g: Sequence[Letter]) -> Word:
        """First-seen representative of the group element ``g``.

        Two words get the same representative iff they are equal in the group.
        Representatives depend only on the order of calls within a process.
        """
        w = free_reduce(g)
        rep = self._canon.get(w)
        if rep is not None:
            return rep
        bucket = self._buckets.setdefault(self.fingerprint(w), [])
        for cand in bucket:
            if self.equal(cand, w):
                self._canon[w] = cand
                return cand
        if not w or not self.is_trivial(w):
            bucket.append(w)
            self._canon[w] = w
            return w
        self._canon[w] = IDENTITY
        return IDENTITY

    def level_transitive(self, n: int) -> bool:
        if n < 1:
            raise ValueError("level must be at least 1")
        self.check_level(n)
        gens = [self._word_array(((name, 1),), n) for name in self.states]
        size = self.alphabet_size**n
        seen = np.zeros(size, dtype=bool)
        seen[0] = True
        frontier = np.array([0])
        while frontier.size:
            nxt = np.unique(np.concatenate([p[frontier] for p in gens]))
            nxt = nxt[~seen[nxt]]
            seen[nxt] = True
            frontier = nxt
        return bool(seen.all())

    def words(self, max_len: int) -> Iterator[Word]:
        """Freely reduced words of length <= max_len, shortlex order."""
        letters = self.letters()
        layer: list[Word] = [IDENTITY]
        yield IDENTITY
        for _ in range(max_len):
            nxt = []
            for w in layer:
                for name, e in letters:
                    if w and w[-1][0] == name and w[-1][1] == -e:
                        continue
                    nw = w + ((name, e),)
                    nxt.append(nw)
                    yield nw
            layer = nxt

    def distinct_elements(self, max_len: int) -> list[Word]:
        """One word per group element among reduced words of length <= max_len."""
        out = []
        seen = set()
        for w in self.words(max_len):
            rep = self.canonical(w)
            if rep not in seen:
                seen.add(rep)
                out.append(rep)
        return out

    def fixes_subtree(self, g: Sequence[Letter], v: Sequence[int]) -> bool:
        return self.act(g, v) == tuple(v) and self.is_trivial(self.section(g, v))

    def subtree_stabilizer_search(self, v: Sequence[int], max_len: int) -> Word | None:
        """A nontrivial word of length <= max_len fixing the subtree at ``v`` pointwise.

        ``None`` only means nothing was found within the bound.
        """
        v = tuple(v)
        for w in self.words(max_len):
            if w and self.fixes_subtree(w, v) and not self.is_trivial(w):
                return w
        return None


# ---------------------------------------------------------------------------
# validation


def _parse_section_word(text, states: Mapping) -> tuple[Word, list[str], str | None]:
    if isinstance(text, int) and text == 1:
        return IDENTITY, [], None
    try:
        w = parse_word(str(text))
    except WordSyntaxError as exc:
        return IDENTITY, [], str(exc)
    unknown = sorted({name for name, _ in w if name not in states})
    return w, unknown, None


def validate_automaton(raw: Mapping, level_cap: int | None = None) -> Automaton:
    """Check a raw description and build an :class:`Automaton`.

    ``raw`` has the keys ``alphabet_size`` and ``states``; each state maps to
    ``{"output": [1-based images], "sections": [section words]}``.  All
    violations are collected; the raised error's class is that of the first
    one and its ``issues`` attribute lists all of them.
    """
    issues: list[tuple[type[AutomatonError], str]] = []
    d = raw.get("alphabet_size")
    if not isinstance(d, int) or d < 2:
        raise EmptyAlphabet(f"alphabet_size must be an integer >= 2, got {d!r}")
    states_raw = raw.get("states") or {}
    if not states_raw:
        raise EmptyAutomaton("automaton has no states")

    rules: dict[str, StateRule] = {}
    for name, body in states_raw.items():
        name = str(name)
        if not NAME_RE.match(name) or name in RESERVED_NAMES:
            issues.append((AutomatonError, f"state {name!r}: invalid state name"))
            continue
        body = body or {}
        output = body.get("output")
        if output is None:
            output = list(range(1, d + 1))
        try:
            out0 = [int(x) - 1 for x in output]
        except (TypeError, ValueError):
            out0 = []
        if not is_bijection(out0, d):
            issues.append((MalformedPermutation, f"state {name!r}: output {list(output)} is not a permutation of 1..{d}"))
            out0 = list(range(d))
        sections_raw = body.get("sections")
        if sections_raw is None:
            sections_raw = ["1"] * d
        if len(sections_raw) != d:
            issues.append((MalformedSections, f"state {name!r}: expected {d} sections, got {len(sections_raw)}"))
            sections_raw = (list(sections_raw) + ["1"] * d)[:d]
        sections = []
        for text in sections_raw:
            w, unknown, syntax = _parse_section_word(text, states_raw)
            if syntax:
                issues.append((MalformedSections, f"state {name!r}: {syntax}"))
            for b in unknown:
                issues.append((UnknownStateInSection, f"state {name!r}: section {text!r} references unknown state {b!r}"))
            sections.append(w)
        inv = [0] * d
        for x, y in enumerate(out0):
            inv[y] = x
        rules[name] = StateRule(tuple(out0), tuple(sections), tuple(inv))

    if issues:
        cls, first = issues[0]
        raise cls(first if len(issues) == 1 else f"{first} (and {len(issues) - 1} more)", [m for _, m in issues])
    return Automaton(d, rules, level_cap=level_cap)
