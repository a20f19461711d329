"""Exact boundary traces of automaton-group elements.

``tr_level(g, n)`` is the fraction of level-n vertices fixed by ``g`` and
``trace_exact(g)`` its limit, the measure of the boundary fixed-point set.
Both are driven by the graph of sections at fixed letters:
``f(w) = 1/d * sum_{x fixed by w} f(section(w, x))`` with ``f = 1`` on the
identity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import AlgebraElement
from .coeffs import ZERO, Gaussian
from .errors import InconsistentSystem
from .star_algebra import phi_matrix
from .wreath_core import IDENTITY, Automaton, Vertex, Word, format_vertex, format_word


@dataclass
class SectionGraph:
    """Sections of ``root`` reachable through fixed letters, one node per group element."""

    automaton: Automaton
    root: Word
    nodes: list[Word]
    index: dict[Word, int]
    edges: list[list[tuple[int, int]]]  # node -> [(letter, target node)]
    trivial: list[bool]
    fixes_all: list[bool]

    @classmethod
    def build(cls, automaton: Automaton, g) -> "SectionGraph":
        A = automaton
        root = A.canonical(g)
        nodes = [root]
        index = {root: 0}
        edges: list[list[tuple[int, int]]] = []
        trivial: list[bool] = []
        fixes_all: list[bool] = []
        k = 0
        while k < len(nodes):
            w = nodes[k]
            is_triv = A.is_trivial(w)
            trivial.append(is_triv)
            out = []
            perm = A.root_permutation(w)
            fixed = perm.fixed_points()
            fixes_all.append(len(fixed) == A.alphabet_size)
            if not is_triv:
                for x in fixed:
                    s = A.canonical(A.section(w, (x,)))
                    if s not in index:
                        index[s] = len(nodes)
                        nodes.append(s)
                    out.append((x, index[s]))
            edges.append(out)
            k += 1
        return cls(A, root, nodes, index, edges, trivial, fixes_all)

    def __len__(self):
        return len(self.nodes)

    def reaches_trivial(self) -> list[bool]:
        """Per node: can a trivial node be reached along fixed-letter edges?"""
        back: list[list[int]] = [[] for _ in self.nodes]
        for u, out in enumerate(self.edges):
            for _, v in out:
                back[v].append(u)
        seen = [False] * len(self.nodes)
        queue = deque(i for i, t in enumerate(self.trivial) if t)
        for i in queue:
            seen[i] = True
        while queue:
            v = queue.popleft()
            for u in back[v]:
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)
        return seen

    def components(self) -> list[list[int]]:
        """Strongly connected components (Tarjan, iterative)."""
        n = len(self.nodes)
        idx = [-1] * n
        low = [0] * n
        on = [False] * n
        stack: list[int] = []
        comps: list[list[int]] = []
        counter = 0
        for s in range(n):
            if idx[s] != -1:
                continue
            work = [(s, 0)]
            while work:
                v, pos = work.pop()
                if pos == 0:
                    idx[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on[v] = True
                out = self.edges[v]
                if pos < len(out):
                    work.append((v, pos + 1))
                    w = out[pos][1]
                    if idx[w] == -1:
                        work.append((w, 0))
                    elif on[w]:
                        low[v] = min(low[v], idx[w])
                    continue
                if low[v] == idx[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(comp)
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
        return comps


def tr_level(automaton: Automaton, g, n: int) -> Fraction:
    """``|Fix_{L_n}(g)| / d**n``, exactly, by dynamic programming on the section graph."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    G = SectionGraph.build(automaton, g)
    d = automaton.alphabet_size
    f = [Fraction(1)] * len(G)
    for _ in range(n):
        f = [
            Fraction(1) if G.trivial[u] else sum((f[v] for _, v in G.edges[u]), Fraction(0)) / d
            for u in range(len(G))
        ]
    return f[0]


def _bareiss_solve(M: list[list[int]], b: list[int]) -> list[Fraction]:
    """Solve ``M x = b`` over the rationals with fraction-free elimination."""
    n = len(M)
    aug = [row[:] + [rhs] for row, rhs in zip(M, b)]
    prev = 1
    for k in range(n):
        piv = next((r for r in range(k, n) if aug[r][k] != 0), None)
        if piv is None:
            raise InconsistentSystem("singular fixed-point system")
        if piv != k:
            aug[k], aug[piv] = aug[piv], aug[k]
        pk = aug[k][k]
        for i in range(k + 1, n):
            aik = aug[i][k]
            row_i = aug[i]
            row_k = aug[k]
            for j in range(k + 1, n + 1):
                row_i[j] = (row_i[j] * pk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = pk
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(aug[i][n])
        for j in range(i + 1, n):
            acc -= aug[i][j] * x[j]
        x[i] = acc / aug[i][i]
    return x


def _check_fully_fixing(G: SectionGraph) -> None:
    # A closed component where every node fixes all letters only ever fixes
    # points, so its elements must be trivial.
    for comp in G.components():
        members = set(comp)
        closed = all(all(v in members for _, v in G.edges[u]) for u in comp)
        if len(comp) == 1 and not any(v == comp[0] for _, v in G.edges[comp[0]]):
            continue
        if closed and all(G.fixes_all[u] for u in comp):
            bad = [G.nodes[u] for u in comp if not G.trivial[u]]
            if bad:
                raise InconsistentSystem(
                    f"fully fixing recurrent component contains nontrivial {format_word(bad[0])}"
                )


def trace_graph(G: SectionGraph) -> list[Fraction]:
    """Exact boundary trace of every node of the graph."""
    d = G.automaton.alphabet_size
    _check_fully_fixing(G)
    unknown = [u for u in range(len(G)) if not G.trivial[u]]
    pos = {u: k for k, u in enumerate(unknown)}
    M = [[0] * len(unknown) for _ in unknown]
    b = [0] * len(unknown)
    for k, u in enumerate(unknown):
        M[k][k] += d
        for _, v in G.edges[u]:
            if G.trivial[v]:
                b[k] += 1
            else:
                M[k][pos[v]] -= 1
    sol = _bareiss_solve(M, b) if unknown else []
    out = [Fraction(1)] * len(G)
    for u, val in zip(unknown, sol):
        if not 0 <= val <= 1:
            raise InconsistentSystem(f"trace {val} outside [0, 1]")
        out[u] = val
    return out


def trace_exact(automaton: Automaton, g) -> Fraction:
    return trace_graph(SectionGraph.build(automaton, g))[0]


def trace_algebra(x: AlgebraElement) -> Gaussian:
    total = ZERO
    for w, c in x.items():
        t = trace_exact(x.automaton, w)
        if t:
            total = total + c * t
    return total


def _magnitude(c: Gaussian) -> Fraction:
    return max(abs(c.re), abs(c.im))


def trace_recursion_check(x: AlgebraElement, n: int) -> Fraction:
    """Discrepancy between ``Tr(x)`` and the normalized trace of ``Tr`` applied to the recursion matrix.

    Reported as the larger of the real and imaginary parts, so it is exact and 0 when consistent.
    """
    if n == 0:
        return Fraction(0)
    B = phi_matrix(x, n)
    acc = ZERO
    for i in range(B.size):
        acc = acc + trace_algebra(B[(i, i)])
    return _magnitude(trace_algebra(x) - acc / B.size)


@dataclass
class BoundaryPartition:
    T_roots: list[Vertex]
    F_roots: list[Vertex]
    explored_depth: int
    residual_mass: Fraction
    d: int = 2

    def mass(self, roots) -> Fraction:
        return sum((Fraction(1, self.d ** len(v)) for v in roots), Fraction(0))

    @property
    def T_mass(self) -> Fraction:
        return self.mass(self.T_roots)

    @property
    def F_mass(self) -> Fraction:
        return self.mass(self.F_roots)

    def to_dict(self) -> dict:
        fmt = lambda vs: [format_vertex(v, self.d) or "root" for v in vs]
        return {
            "T_roots": fmt(self.T_roots),
            "F_roots": fmt(self.F_roots),
            "explored_depth": self.explored_depth,
            "T_mass": str(self.T_mass),
            "F_mass": str(self.F_mass),
            "residual_mass": str(self.residual_mass),
        }


def boundary_partition(automaton: Automaton, g, depth: int) -> BoundaryPartition:
    """Classify subtrees down to ``depth`` as fixed pointwise (T), certified fixed-point free (F), or open."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    A = automaton
    d = A.alphabet_size
    G = SectionGraph.build(A, g)
    reach = G.reaches_trivial()
    T: list[Vertex] = []
    F: list[Vertex] = []
    residual = Fraction(0)
    queue: deque[tuple[Vertex, int]] = deque([((), 0)])
    while queue:
        v, node = queue.popleft()
        if G.trivial[node]:
            T.append(v)
            continue
        if not reach[node]:
            F.append(v)
            continue
        if len(v) >= depth:
            residual += Fraction(1, d ** len(v))
            continue
        targets = dict(G.edges[node])
        for x in range(d):
            if x in targets:
                queue.append((v + (x,), targets[x]))
            else:
                F.append(v + (x,))
    key = lambda v: (len(v), v)
    return BoundaryPartition(sorted(T, key=key), sorted(F, key=key), depth, residual, d)


@dataclass
class FreenessReport:
    max_len: int
    checked: int
    witnesses: list[tuple[Word, Fraction]] = field(default_factory=list)

    @property
    def essentially_free_so_far(self) -> bool:
        return not self.witnesses

    def to_dict(self) -> dict:
        return {
            "max_len": self.max_len,
            "elements_checked": self.checked,
            "witnesses": [{"word": format_word(w), "trace": str(t)} for w, t in self.witnesses],
            "verdict": "no witnesses up to this length (not a proof)" if not self.witnesses else "not essentially free",
        }


def essential_freeness_report(automaton: Automaton, max_len: int) -> FreenessReport:
    """Nontrivial elements up to ``max_len`` with positive boundary trace."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    elems = [w for w in automaton.distinct_elements(max_len) if w != IDENTITY]
    report = FreenessReport(max_len, len(elems))
    for w in elems:
        t = trace_exact(automaton, w)
        if t > 0:
            report.witnesses.append((w, t))
    return report
