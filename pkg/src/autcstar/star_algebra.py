"""Recursion matrices, the conditional expectation onto their image, and kernel certificates.

``phi_matrix(x, n)`` is the d**n x d**n matrix over the group algebra with
``(i, j)`` entry the section of ``g`` at ``v_i`` whenever ``g(v_j) = v_i``
(summed linearly over the support of ``x``).  Evaluating every entry on level
``m`` gives back ``rho_{n+m}(x)`` exactly, since vertices are ordered with
their first letters most significant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .algebra import AlgebraElement
from .coeffs import ZERO, Gaussian
from .errors import NonCommutingInputs, NonUniqueLift, UnsupportedAlphabet
from .level_rep import rho_sparse
from .wreath_core import (
    IDENTITY,
    Automaton,
    StateRule,
    Vertex,
    Word,
    format_vertex,
    format_word,
    free_reduce,
    inverse,
    level_vertices,
)


# ---------------------------------------------------------------------------
# recursion matrices


class RecursionMatrix:
    """A sparse square matrix with :class:`AlgebraElement` entries."""

    def __init__(self, automaton: Automaton, n: int, entries: dict | None = None):
        self.automaton = automaton
        self.n = n
        self.size = automaton.alphabet_size**n
        self.entries: dict[tuple[int, int], AlgebraElement] = {
            k: v for k, v in (entries or {}).items() if not v.is_zero()
        }

    @classmethod
    def unit(cls, automaton: Automaton, n: int, i: int, j: int, x: AlgebraElement | Word | str) -> "RecursionMatrix":
        """``e_{i,j} (x) x`` with 0-based ``i``, ``j``."""
        if not isinstance(x, AlgebraElement):
            x = AlgebraElement.from_word(automaton, x)
        return cls(automaton, n, {(i, j): x})

    def __getitem__(self, key: tuple[int, int]) -> AlgebraElement:
        return self.entries.get(key, AlgebraElement.zero(self.automaton))

    def _same(self, other: "RecursionMatrix"):
        if other.automaton is not self.automaton or other.n != self.n:
            raise ValueError("recursion matrices of different shape or automaton")

    def __add__(self, other: "RecursionMatrix") -> "RecursionMatrix":
        self._same(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return RecursionMatrix(self.automaton, self.n, out)

    def __sub__(self, other: "RecursionMatrix") -> "RecursionMatrix":
        return self + other.scale(-1)

    def scale(self, c) -> "RecursionMatrix":
        return RecursionMatrix(self.automaton, self.n, {k: v * c for k, v in self.entries.items()})

    def __mul__(self, other):
        if not isinstance(other, RecursionMatrix):
            return self.scale(other)
        self._same(other)
        by_row: dict[int, list] = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, []).append((j, v))
        out: dict = {}
        for (i, k), u in self.entries.items():
            for j, v in by_row.get(k, ()):
                p = u * v
                out[(i, j)] = out[(i, j)] + p if (i, j) in out else p
        return RecursionMatrix(self.automaton, self.n, out)

    def __rmul__(self, c):
        return self.scale(c)

    def star(self) -> "RecursionMatrix":
        return RecursionMatrix(self.automaton, self.n, {(j, i): v.star() for (i, j), v in self.entries.items()})

    def __eq__(self, other):
        if not isinstance(other, RecursionMatrix):
            return NotImplemented
        return (
            self.automaton is other.automaton
            and self.n == other.n
            and set(self.entries) == set(other.entries)
            and all(self.entries[k] == other.entries[k] for k in self.entries)
        )

    __hash__ = None

    def identity_trace(self) -> Fraction | Gaussian:
        """Normalized matrix trace of the identity coefficients: ``tau(B)``."""
        total = ZERO
        for i in range(self.size):
            total = total + self[(i, i)].coefficient(IDENTITY)
        return total / self.size

    def evaluate(self, m: int) -> np.ndarray:
        """Dense block matrix with each entry replaced by its level-``m`` matrix."""
        b = self.automaton.alphabet_size**m
        out = np.zeros((self.size * b, self.size * b), dtype=complex)
        for (i, j), v in self.entries.items():
            out[i * b:(i + 1) * b, j * b:(j + 1) * b] = rho_sparse(v, m).toarray()
        return out

    def rows(self) -> list[list[str]]:
        return [[str(self[(i, j)]) for j in range(self.size)] for i in range(self.size)]

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(r) + "]" for r in self.rows()) + "]"

    def __repr__(self):
        return f"RecursionMatrix(n={self.n}, {self})"


def phi_matrix(x: AlgebraElement, n: int) -> RecursionMatrix:
    A = x.automaton
    if n < 1:
        raise ValueError("level must be at least 1")
    A.check_level(n)
    verts = level_vertices(n, A.alphabet_size)
    acc: dict[tuple[int, int], dict] = {}
    for w, c in x.items():
        perm = A.act_level(w, n).images
        for j, i in enumerate(perm.tolist()):
            sec = A.section(w, verts[i])
            cell = acc.setdefault((i, j), {})
            cell[sec] = cell.get(sec, ZERO) + c
    return RecursionMatrix(A, n, {k: AlgebraElement(A, v) for k, v in acc.items()})


# ---------------------------------------------------------------------------
# conditional expectation


@dataclass
class LiftTable:
    """All reduced words ``h`` with ``|h| <= search_len`` indexed by ``(i, j, Phi(h)_{ij})``."""

    n: int
    search_len: int
    lifts: dict[tuple[int, int, Word], list[Word]]


@lru_cache(maxsize=32)
def lift_table(automaton: Automaton, n: int, search_len: int) -> LiftTable:
    A = automaton
    A.check_level(n)
    verts = level_vertices(n, A.alphabet_size)
    lifts: dict[tuple[int, int, Word], list[Word]] = {}
    seen: set[Word] = set()
    for h in A.words(search_len):
        rep = A.canonical(h)
        if rep in seen:
            continue
        seen.add(rep)
        perm = A.act_level(h, n).images
        for j, i in enumerate(perm.tolist()):
            g = A.canonical(A.section(h, verts[i]))
            lifts.setdefault((i, j, g), []).append(h)
    return LiftTable(n, search_len, lifts)


@dataclass
class ExpectationResult:
    matrix: RecursionMatrix
    exhausted: list[tuple[int, int, Word]] = field(default_factory=list)
    lifts: dict[tuple[int, int, Word], Word] = field(default_factory=dict)

    @property
    def search_exhausted(self) -> bool:
        return bool(self.exhausted)


def find_lift(automaton: Automaton, n: int, i: int, j: int, g: Word, search_len: int) -> Word | None:
    """Shortest ``h`` with ``Phi^(n)(h)_{ij} = g``; raises if another lift of the same length exists."""
    table = lift_table(automaton, n, search_len)
    cands = table.lifts.get((i, j, automaton.canonical(g)))
    if not cands:
        return None
    first = cands[0]
    rivals = [h for h in cands[1:] if len(h) == len(first)]
    if rivals:
        raise NonUniqueLift(
            f"entry ({i + 1},{j + 1}) = {format_word(g)} has lifts {format_word(first)} and {format_word(rivals[0])}",
            [first, rivals[0]],
        )
    return first


def conditional_expectation(B: RecursionMatrix, search_len: int) -> ExpectationResult:
    """Expectation onto the image of ``phi_matrix`` at level ``B.n``.

    Each ``c * e_{ij} (x) g`` goes to ``c / d**n * Phi(h)`` for the lift ``h``
    found by a bounded shortlex search, or to 0 when none exists within
    ``search_len`` (recorded in ``exhausted``; that 0 may be a false negative).
    """
    A = B.automaton
    n = B.n
    total = RecursionMatrix(A, n)
    exhausted = []
    lifts = {}
    phi_cache: dict[Word, RecursionMatrix] = {}
    scale = Fraction(1, B.size)
    acc: dict[Word, Gaussian] = {}
    for (i, j), x in sorted(B.entries.items()):
        for g, c in x.items():
            h = find_lift(A, n, i, j, g, search_len)
            if h is None:
                exhausted.append((i, j, g))
                continue
            lifts[(i, j, g)] = h
            acc[h] = acc.get(h, ZERO) + c
    for h, c in acc.items():
        if not c:
            continue
        if h not in phi_cache:
            phi_cache[h] = phi_matrix(AlgebraElement.from_word(A, h), n)
        total = total + phi_cache[h].scale(c * scale)
    return ExpectationResult(total, exhausted, lifts)


# ---------------------------------------------------------------------------
# kernel elements


@dataclass
class KernelCandidate:
    element: AlgebraElement
    factors: list[Word]
    nonzero: bool
    case: str = "product"


def commute(automaton: Automaton, g: Word, h: Word) -> bool:
    return automaton.equal(free_reduce(g + h), free_reduce(h + g))


def kernel_candidate_stab(automaton: Automaton, gs: Sequence[Word], case: str = "product") -> KernelCandidate:
    """Expand ``prod (1 - g_i)``; the ``g_i`` must commute pairwise."""
    A = automaton
    gs = [A.canonical(g) for g in gs]
    for a, b in itertools.combinations(gs, 2):
        if not commute(A, a, b):
            raise NonCommutingInputs(f"{format_word(a)} and {format_word(b)} do not commute")
    one = AlgebraElement.identity(A)
    x = one
    for g in gs:
        x = x * (one - AlgebraElement.from_word(A, g))
    return KernelCandidate(x, gs, not x.is_zero(), case)


def _integer_coeffs(coeffs: Sequence[Gaussian]) -> tuple[list[int], list[int]]:
    den = 1
    for c in coeffs:
        den = lcm(den, c.re.denominator, c.im.denominator)
    return [int(c.re * den) for c in coeffs], [int(c.im * den) for c in coeffs]


def _tensor_zero(x: AlgebraElement, levels: Sequence[int]) -> bool:
    """Is the diagonal action of ``x`` zero on the product of the given levels?"""
    A = x.automaton
    d = A.alphabet_size
    items = x.items()
    re, im = _integer_coeffs([c for _, c in items])
    sizes = [d**n for n in levels]
    total = int(np.prod(sizes))
    src = np.arange(total, dtype=np.int64)
    keys, vre, vim = [], [], []
    for (w, _), cr, ci in zip(items, re, im):
        dst = np.zeros(total, dtype=np.int64)
        rem = src.copy()
        stride = total
        for n, size in zip(levels, sizes):
            stride //= size
            digit, rem = np.divmod(rem, stride)
            dst += A.act_level(w, n).images[digit] * stride
        keys.append(dst * total + src)
        vre.append(np.full(total, cr, dtype=np.int64))
        vim.append(np.full(total, ci, dtype=np.int64))
    uniq, inv = np.unique(np.concatenate(keys), return_inverse=True)
    sre = np.zeros(len(uniq), dtype=np.int64)
    sim = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(sre, inv, np.concatenate(vre))
    np.add.at(sim, inv, np.concatenate(vim))
    return not (sre.any() or sim.any())


def verify_kernel(x: AlgebraElement, p: int, max_level: int) -> bool:
    """True iff ``x`` kills every ``delta_{z_1} (x) ... (x) delta_{z_p}`` with levels <= max_level.

    Finite evidence for ``rho^{(x)p}(x) = 0``; exact integer arithmetic.
    """
    if p < 1:
        raise ValueError("p must be positive")
    A = x.automaton
    A.check_level(max_level)
    if x.is_zero():
        return True
    for levels in itertools.product(range(max_level + 1), repeat=p):
        if not _tensor_zero(x, levels):
            return False
    return True


@dataclass
class KernelCertificate:
    candidate: KernelCandidate
    p: int
    verified: bool | None = None

    @property
    def element(self) -> AlgebraElement:
        return self.candidate.element

    @property
    def case(self) -> str:
        return self.candidate.case


def _nontrivial_words(A: Automaton, max_len: int) -> list[Word]:
    return [w for w in A.distinct_elements(max_len) if w]


def _fixes_subtrees(A: Automaton, g: Word, letters: Iterable[int]) -> bool:
    return all(A.is_trivial(A.section(g, (x,))) for x in letters)


def kernel_driver(automaton: Automaton, max_len: int = 3, verify_level: int | None = None) -> KernelCertificate | None:
    """Build a nonzero kernel element of ``rho`` for d = 2 or d = 3 from bounded searches.

    d = 2: ``(1 - g)(1 - h g h^-1)`` with ``g`` fixing a first-level subtree and
    ``h`` the first generator moving the first level.
    d = 3: try two-subtree stabilizers (case 1), then commutators of
    one-subtree stabilizers (case 2), then a triple product (case 3).
    Returns ``None`` when the bounded search finds no ingredients.
    """
    A = automaton
    d = A.alphabet_size
    # register short words first so shortlex-minimal words become the representatives
    A.distinct_elements(max_len)
    movers = [((name, 1),) for name in A.states if not A.root_permutation(((name, 1),)).is_identity()]
    if d == 2:
        cand = None
        for v in range(2):
            g = A.subtree_stabilizer_search((v,), max_len)
            if g is not None and movers:
                h = movers[0]
                cand = kernel_candidate_stab(A, [g, free_reduce(h + g + inverse(h))], case="d2")
                break
    elif d == 3:
        cand = _kernel_d3(A, max_len, movers)
    else:
        raise UnsupportedAlphabet("the kernel driver handles d = 2 and d = 3; use rist_product otherwise")
    if cand is None:
        return None
    cert = KernelCertificate(cand, 1)
    if verify_level is not None:
        cert.verified = verify_kernel(cand.element, 1, verify_level)
    return cert


def _kernel_d3(A: Automaton, max_len: int, movers: list[Word]) -> KernelCandidate | None:
    level1 = [w for w in _nontrivial_words(A, max_len) if A.root_permutation(w).is_identity()]
    one_fix = {v: [g for g in level1 if _fixes_subtrees(A, g, [v])] for v in range(3)}

    def case1(g: Word, pair: tuple[int, int], label: str) -> KernelCandidate | None:
        for h in movers + [w for w in _nontrivial_words(A, max_len) if w not in movers]:
            perm = A.root_permutation(h)
            if any(perm(x) not in pair for x in pair):
                return kernel_candidate_stab(A, [g, free_reduce(h + g + inverse(h))], case=label)
        return None

    for pair in itertools.combinations(range(3), 2):
        for g in level1:
            if _fixes_subtrees(A, g, pair):
                cand = case1(g, pair, "d3-case1")
                if cand is not None:
                    return cand
    for v1, v2 in itertools.combinations(range(3), 2):
        for g1 in one_fix[v1]:
            for g2 in one_fix[v2]:
                if not commute(A, g1, g2):
                    c = free_reduce(g1 + g2 + inverse(g1) + inverse(g2))
                    cand = case1(c, (v1, v2), "d3-case2")
                    if cand is not None:
                        return cand
    for g1 in one_fix[0]:
        for g2 in one_fix[1]:
            for g3 in one_fix[2]:
                try:
                    cand = kernel_candidate_stab(A, [g1, g2, g3], case="d3-case3")
                except NonCommutingInputs:
                    continue
                if cand.nonzero:
                    return cand
    return None


def rist_witness(automaton: Automaton, v: Sequence[int], max_len: int) -> Word | None:
    """A nontrivial word fixing pointwise every subtree at the level of ``v`` except ``v``'s own."""
    A = automaton
    v = tuple(v)
    others = [w for w in level_vertices(len(v), A.alphabet_size) if w != v]
    for h in A.words(max_len):
        if h and all(A.fixes_subtree(h, w) for w in others) and not A.is_trivial(h):
            return h
    return None


def rist_product(automaton: Automaton, n: int, max_len: int) -> KernelCertificate | None:
    """``prod_{v in L_n} (1 - g_v)`` with ``g_v`` a rigid-stabilizer witness at each ``v``.

    The product kills the ``(d**n - 1)``-fold tensor power of ``rho``.
    """
    A = automaton
    A.distinct_elements(max_len)
    gs = []
    for v in level_vertices(n, A.alphabet_size):
        g = rist_witness(A, v, max_len)
        if g is None:
            return None
        gs.append(g)
    cand = kernel_candidate_stab(A, gs, case="rist")
    return KernelCertificate(cand, A.alphabet_size**n - 1)


# ---------------------------------------------------------------------------
# the tilde construction


def _tilde_name(base: str, taken: set[str]) -> str:
    name = f"{base}~"
    while name in taken:
        name += "'"
    return name


def tensor_construction(automaton: Automaton, times: int = 1) -> Automaton:
    """Add, for every state ``g``, a state with trivial output and sections ``(1, g)``."""
    A = automaton
    if A.alphabet_size != 2:
        raise UnsupportedAlphabet("the construction is defined for d = 2")
    for _ in range(times):
        states = dict(A.states)
        taken = set(states)
        for name in A.states:
            new = _tilde_name(name, taken)
            taken.add(new)
            states[new] = StateRule((0, 1), (IDENTITY, ((name, 1),)), (0, 1))
        A = Automaton(2, states, level_cap=A.level_cap)
    return A


def format_lift_key(key: tuple[int, int, Word], d: int) -> str:
    i, j, g = key
    return f"({i + 1},{j + 1}):{format_word(g)}"


def vertex_label(v: Vertex, d: int) -> str:
    return format_vertex(v, d) or "root"
