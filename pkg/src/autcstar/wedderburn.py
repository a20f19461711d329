"""Finite-level algebras spanned by the level permutation matrices, and their block structure.

The span of ``rho_n(G)`` is a finite-dimensional C*-algebra, a direct sum of
full matrix blocks ``M_{d_i}`` each appearing ``m_i`` times in ``C^{d**n}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateSplit, DenseCapExceeded
from .level_rep import DENSE_CAP, SEED
from .wreath_core import Automaton

RANK_TOL = 1e-8
CLUSTER_GAP = 1e-6
DEFAULT_MAX_BALL = 64
SPLIT_RETRIES = 5


@dataclass
class MatrixAlgebraBasis:
    n: int
    basis: list[np.ndarray]  # Frobenius-orthonormal
    radius: int
    truncated: bool
    generators: list[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return self.basis[0].shape[0]


class _Span:
    """Incremental Frobenius-orthonormal basis (classical Gram-Schmidt, two passes)."""

    def __init__(self, length: int):
        self.q = np.zeros((0, length))

    def add(self, v: np.ndarray) -> np.ndarray | None:
        norm0 = np.linalg.norm(v)
        if norm0 == 0:
            return None
        r = v.astype(float, copy=True)
        for _ in range(2):
            if len(self.q):
                r -= self.q.T @ (self.q @ r)
        norm = np.linalg.norm(r)
        if norm <= RANK_TOL * norm0:
            return None
        r /= norm
        self.q = np.vstack([self.q, r])
        return r


def _generator_matrices(A: Automaton, n: int) -> list[np.ndarray]:
    size = A.alphabet_size**n
    mats = []
    for letter in A.letters():
        m = np.zeros((size, size))
        m[A.act_level((letter,), n).images, np.arange(size)] = 1.0
        mats.append(m)
    return mats


def algebra_closure(
    automaton: Automaton, n: int, max_ball: int = DEFAULT_MAX_BALL, dense_cap: int = DENSE_CAP
) -> MatrixAlgebraBasis:
    """Orthonormal basis of span rho_n(G), grown one word-length at a time.

    Each round multiplies the vectors added in the previous round by every
    generator and its inverse.  A round that adds nothing means the span is
    invariant under the generators and so is the whole algebra.
    """
    A = automaton
    A.check_level(n)
    size = A.alphabet_size**n
    if size > dense_cap:
        raise DenseCapExceeded(f"level {n} has {size} vertices, dense cap is {dense_cap}")
    gens = _generator_matrices(A, n)
    span = _Span(size * size)
    frontier = [span.add(np.eye(size).ravel())]
    radius = 0
    while frontier and radius < max_ball:
        radius += 1
        new = []
        for v in frontier:
            m = v.reshape(size, size)
            for g in gens:
                r = span.add((g @ m).ravel())
                if r is not None:
                    new.append(r)
        frontier = new
    truncated = bool(frontier)
    basis = [row.reshape(size, size) for row in span.q]
    return MatrixAlgebraBasis(n, basis, radius, truncated, gens)


@dataclass
class BlockReport:
    n: int
    blocks: list[tuple[int, int]]  # (d_i, m_i)
    algebra_dim: int
    center_dim: int
    truncated: bool = False
    attempts: int = 1

    @property
    def max_block(self) -> int:
        return max(d for d, _ in self.blocks)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "blocks": [{"d_i": d, "m_i": m} for d, m in self.blocks],
            "algebra_dim": self.algebra_dim,
            "center_dim": self.center_dim,
            "truncated": self.truncated,
        }


def center_basis(B: MatrixAlgebraBasis) -> list[np.ndarray]:
    """Basis of the center: combinations of basis elements commuting with every generator."""
    rows = []
    for g in B.generators:
        rows.append(np.stack([(e @ g - g @ e).ravel() for e in B.basis], axis=1))
    if not rows:
        return list(B.basis)
    C = np.vstack(rows)
    coeffs = sla.null_space(C, rcond=RANK_TOL)
    return [np.tensordot(c, np.array(B.basis), axes=1) for c in coeffs.T]


def _clusters(values: np.ndarray, gap: float) -> list[np.ndarray]:
    order = np.argsort(values)
    groups = [[order[0]]]
    for a, b in zip(order, order[1:]):
        if values[b] - values[a] > gap:
            groups.append([])
        groups[-1].append(b)
    return [np.array(g) for g in groups]


def _block_rank(B: MatrixAlgebraBasis, V: np.ndarray) -> int:
    stacked = np.stack([(V.conj().T @ e @ V).ravel() for e in B.basis], axis=1)
    s = np.linalg.svd(stacked, compute_uv=False)
    return int(np.sum(s > RANK_TOL * max(1.0, s[0])))


def block_dimensions(B: MatrixAlgebraBasis, seed: int = SEED, retries: int = SPLIT_RETRIES) -> BlockReport:
    """Wedderburn block sizes and multiplicities via a random self-adjoint central element."""
    center = center_basis(B)
    k = len(center)
    rng = np.random.default_rng(seed)
    for attempt in range(1, retries + 1):
        # complex weights: a real symmetric element cannot separate conjugate characters
        coeffs = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        z = np.tensordot(coeffs, np.array(center), axes=1)
        h = (z + z.conj().T) / 2
        vals, vecs = np.linalg.eigh(h)
        groups = _clusters(vals, CLUSTER_GAP * max(1.0, np.abs(vals).max()))
        if len(groups) != k:
            continue
        blocks = []
        ok = True
        for grp in groups:
            V = vecs[:, grp]
            rank = _block_rank(B, V)
            d_i = int(round(np.sqrt(rank)))
            if d_i * d_i != rank or len(grp) % d_i:
                ok = False
                break
            blocks.append((d_i, len(grp) // d_i))
        if ok:
            blocks.sort()
            return BlockReport(B.n, blocks, B.dim, k, B.truncated, attempt)
    raise DegenerateSplit(f"no clean split of the level-{B.n} center after {retries} attempts")


def blocks_at(automaton: Automaton, n: int, max_ball: int = DEFAULT_MAX_BALL, seed: int = SEED) -> BlockReport:
    return block_dimensions(algebra_closure(automaton, n, max_ball), seed=seed)


@dataclass
class TrendReport:
    levels: list[int]
    max_block: list[int]
    reports: list[BlockReport]

    @property
    def verdict(self) -> str:
        if len(self.max_block) >= 2 and self.max_block[-1] > self.max_block[-2]:
            return "growing (witnesses non-virtually-abelian behavior)"
        return "bounded-so-far (consistent with virtually abelian)"

    def to_dict(self) -> dict:
        return {
            "levels": self.levels,
            "max_d_i": self.max_block,
            "verdict": self.verdict,
            "heuristic": True,
        }


def dimension_trend(automaton: Automaton, max_level: int, max_ball: int = DEFAULT_MAX_BALL, seed: int = SEED) -> TrendReport:
    """Largest block per level ``1..max_level``; a finite-level heuristic, never a decision."""
    reports = [blocks_at(automaton, n, max_ball, seed) for n in range(1, max_level + 1)]
    return TrendReport(list(range(1, max_level + 1)), [r.max_block for r in reports], reports)
