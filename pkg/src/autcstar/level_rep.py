"""The permutation representation on a single tree level.

``rho_level(x, n)`` is the d**n x d**n matrix of ``x`` acting on functions on
level ``n``; a group element sends the basis vector at ``v`` to the one at
``g(v)``, so row = target and column = source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .algebra import AlgebraElement
from .coeffs import ZERO, Gaussian
from .errors import DenseCapExceeded, NonConvergence, NotNormal, NotSelfAdjoint
from .wreath_core import Automaton, Vertex

SEED = 0x5EED
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
DENSE_CAP = 4096
DEFAULT_MERGE_TOL = 1e-6


@dataclass(frozen=True)
class LevelMatrix:
    """Sparse matrix of ``rho_n(x)`` with exact entries."""

    n: int
    dim: int
    entries: dict  # (row, col) -> Gaussian
    is_permutation: bool

    def to_sparse(self) -> sp.csr_matrix:
        if not self.entries:
            return sp.csr_matrix((self.dim, self.dim), dtype=complex)
        keys = sorted(self.entries)
        rows = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        cols = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
        vals = np.array([complex(self.entries[k]) for k in keys], dtype=complex)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for (r, c), v in self.entries.items():
            out[r, c] = complex(v)
        return out

    def is_zero(self) -> bool:
        return not self.entries

    def nnz(self) -> int:
        return len(self.entries)


def _accumulate(x: AlgebraElement, n: int) -> dict:
    A = x.automaton
    A.check_level(n)
    acc: dict = {}
    cols = range(A.alphabet_size**n)
    for w, c in x.items():
        perm = A.act_level(w, n).images
        for j, i in zip(cols, perm.tolist()):
            key = (i, j)
            v = acc.get(key, ZERO) + c
            if v:
                acc[key] = v
            else:
                acc.pop(key, None)
    return acc


def rho_level(x: AlgebraElement, n: int) -> LevelMatrix:
    A = x.automaton
    entries = _accumulate(x, n)
    mono = x.monomial()
    is_perm = mono is not None and mono[1] == 1
    return LevelMatrix(n, A.alphabet_size**n, entries, is_perm)


def rho_sparse(x: AlgebraElement, n: int) -> sp.csr_matrix:
    """Floating-point ``rho_n(x)`` built straight from the permutation arrays."""
    A = x.automaton
    A.check_level(n)
    dim = A.alphabet_size**n
    rows, cols, vals = [], [], []
    src = np.arange(dim)
    for w, c in x.items():
        rows.append(A.act_level(w, n).images)
        cols.append(src)
        vals.append(np.full(dim, complex(c)))
    if not rows:
        return sp.csr_matrix((dim, dim), dtype=complex)
    m = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    m.sum_duplicates()
    m.eliminate_zeros()
    return m


# ---------------------------------------------------------------------------
# norms


@dataclass
class NormResult:
    value: float
    iterations: int
    converged: bool
    method: str = "power"


def _lanczos_top(mtm: spla.LinearOperator, v0: np.ndarray, tol: float) -> float | None:
    """Largest eigenvalue of a hermitian operator by ARPACK, started from ``v0``."""
    dim = mtm.shape[0]
    if dim <= 16:
        dense = mtm @ np.eye(dim, dtype=complex)
        return float(np.linalg.eigvalsh((dense + dense.conj().T) / 2)[-1])
    try:
        val = spla.eigsh(mtm, k=1, which="LA", v0=v0, tol=tol, return_eigenvectors=False)
    except spla.ArpackNoConvergence:
        return None
    return float(val[0])


def _power_norm(m: sp.spmatrix, tol: float, max_iter: int, seed: int, fallback: bool = True) -> NormResult:
    """Power iteration on m* m; stops once both the Rayleigh quotient and the residual settle.

    A spectral gap ratio close to 1 can exhaust the budget.  With ``fallback``
    the last iterate then seeds a Lanczos solve, reported as method "power+lanczos".
    """
    dim = m.shape[0]
    if m.nnz == 0:
        return NormResult(0.0, 0, True)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    mh = m.conj().T.tocsr()
    mu = 0.0
    for it in range(1, max_iter + 1):
        w = mh @ (m @ v)
        mu_new = float(np.vdot(v, w).real)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return NormResult(0.0, it, True)
        resid = np.linalg.norm(w - mu_new * v)
        if mu_new > 0 and abs(mu_new - mu) <= tol * mu_new and resid <= tol * mu_new:
            return NormResult(math.sqrt(mu_new), it, True)
        mu = mu_new
        v = w / nw
    if fallback:
        op = spla.LinearOperator((dim, dim), matvec=lambda u: mh @ (m @ u), dtype=complex)
        top = _lanczos_top(op, v, tol)
        if top is not None:
            return NormResult(math.sqrt(max(top, 0.0)), max_iter, True, "power+lanczos")
    return NormResult(math.sqrt(max(mu, 0.0)), max_iter, False)


def operator_norm_level(
    x: AlgebraElement,
    n: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = SEED,
    strict: bool = True,
    fallback: bool = True,
) -> float:
    """Largest singular value of ``rho_n(x)`` by power iteration on ``rho_n(x)* rho_n(x)``.

    Raises :class:`NonConvergence` (carrying the estimate) when the budget is
    spent and no fallback is allowed or it fails, unless ``strict`` is false.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    res = _power_norm(rho_sparse(x, n), tol, max_iter, seed, fallback)
    if not res.converged and strict:
        raise NonConvergence(f"power iteration did not converge in {max_iter} steps at level {n}", res.value)
    return res.value


@dataclass
class NormProfile:
    values: list[tuple[int, float]]
    warnings: list[str] = field(default_factory=list)

    def is_monotone(self, slack: float) -> bool:
        vals = [v for _, v in self.values]
        return all(b >= a - slack for a, b in zip(vals, vals[1:]))


def norm_profile(
    x: AlgebraElement,
    max_level: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = SEED,
    fallback: bool = True,
) -> NormProfile:
    values = []
    warnings = []
    for n in range(max_level + 1):
        res = _power_norm(rho_sparse(x, n), tol, max_iter, seed, fallback)
        if not res.converged:
            raise NonConvergence(f"power iteration did not converge in {max_iter} steps at level {n}", res.value)
        if res.method != "power":
            warnings.append(f"level {n}: power iteration budget spent, value refined by Lanczos")
        values.append((n, res.value))
    prof = NormProfile(values, warnings)
    if not prof.is_monotone(10 * tol * max(1.0, max(v for _, v in values))):
        prof.warnings.append("profile is not monotone within 10*tol")
    return prof


# ---------------------------------------------------------------------------
# spectra


@dataclass
class SpectrumReport:
    n: int
    eigenvalues: np.ndarray  # complex, with repetition
    method: str  # dense-schur | hermitian-dense | iterative-extremal | union

    def multiset(self, tol: float = 1e-9) -> list[tuple[complex, int]]:
        return _cluster(self.eigenvalues, tol)

    def __len__(self):
        return len(self.eigenvalues)


def _cluster(values: Sequence[complex], tol: float) -> list[tuple[complex, int]]:
    """Group values on a grid of cell size ``tol``; neighbours in adjacent cells merge."""
    cells: dict[tuple[int, int], int] = {}
    reps: list[list] = []
    for z in values:
        z = complex(z)
        key = (round(z.real / tol), round(z.imag / tol))
        hit = None
        for dr in (-1, 0, 1):
            for di in (-1, 0, 1):
                idx = cells.get((key[0] + dr, key[1] + di))
                if idx is not None and abs(reps[idx][0] - z) <= tol:
                    hit = idx
                    break
            if hit is not None:
                break
        if hit is None:
            cells[key] = len(reps)
            reps.append([z, 1])
        else:
            reps[hit][1] += 1
    out = [(complex(z), m) for z, m in reps]
    out.sort(key=lambda t: (round(t[0].real, 12), round(t[0].imag, 12)))
    return out


def spectrum_level(x: AlgebraElement, n: int, dense_cap: int = DENSE_CAP, iterative: bool = False) -> SpectrumReport:
    """All eigenvalues of ``rho_n(x)``; extremal ones only past ``dense_cap``."""
    A = x.automaton
    A.check_level(n)
    dim = A.alphabet_size**n
    hermitian = x.is_self_adjoint()
    if iterative or dim > dense_cap:
        if not hermitian:
            if iterative:
                raise NotSelfAdjoint("the iterative path needs a self-adjoint element")
            raise DenseCapExceeded(f"dimension {dim} exceeds the dense cap {dense_cap}")
        m = rho_sparse(x, n)
        if dim <= 2:
            vals = np.linalg.eigvalsh(m.toarray())
            return SpectrumReport(n, np.array([vals[0], vals[-1]], dtype=complex), "iterative-extremal")
        v0 = np.random.default_rng(SEED).standard_normal(dim)
        lo = spla.eigsh(m, k=1, which="SA", v0=v0, return_eigenvectors=False)[0]
        hi = spla.eigsh(m, k=1, which="LA", v0=v0, return_eigenvectors=False)[0]
        return SpectrumReport(n, np.array([lo, hi], dtype=complex), "iterative-extremal")
    dense = rho_sparse(x, n).toarray()
    if hermitian:
        vals = np.linalg.eigvalsh(dense).astype(complex)
        return SpectrumReport(n, vals, "hermitian-dense")
    T, _ = scipy.linalg.schur(dense, output="complex")
    return SpectrumReport(n, np.diag(T).copy(), "dense-schur")


def is_normal_at(x: AlgebraElement, n: int, tol: float = 1e-9) -> bool:
    m = rho_sparse(x, n)
    comm = (m.conj().T @ m - m @ m.conj().T).tocsr()
    return comm.nnz == 0 or float(np.max(np.abs(comm.data))) <= tol


def spectrum_union(x: AlgebraElement, max_level: int, merge_tol: float = DEFAULT_MERGE_TOL) -> SpectrumReport:
    """Union of the level spectra for n <= max_level, deduplicated at ``merge_tol``.

    Multiplicities in the result are set to 1: the union is a set.
    """
    if not is_normal_at(x, max_level):
        raise NotNormal(f"x is not normal at level {max_level}")
    collected = []
    for n in range(max_level + 1):
        collected.extend(spectrum_level(x, n).eigenvalues.tolist())
    reps = [z for z, _ in _cluster(collected, merge_tol)]
    return SpectrumReport(max_level, np.array(reps, dtype=complex), "union")


# ---------------------------------------------------------------------------
# intertwiner and tensor powers


def intertwiner_check(x: AlgebraElement, n: int) -> Fraction:
    """Frobenius norm squared of ``Q_n rho_n(x) - rho_{n+1}(x) Q_n``, computed exactly.

    ``Q_n`` sends the basis vector at ``z`` to ``d**-1/2`` times the indicator of
    the children of ``z``.  Both products carry the same ``d**-1/2`` factor, so
    the check compares them scaled by ``sqrt(d)`` in exact arithmetic.  The
    return value is 0 exactly when the intertwining relation holds.
    """
    A = x.automaton
    d = A.alphabet_size
    A.check_level(n + 1)
    low = _accumulate(x, n)
    high = _accumulate(x, n + 1)
    # (Q rho_n)[child of r, c] = rho_n[r, c]
    left: dict = {}
    for (r, c), v in low.items():
        for k in range(d):
            left[(r * d + k, c)] = left.get((r * d + k, c), ZERO) + v
    # (rho_{n+1} Q)[r, c] = sum_k rho_{n+1}[r, c*d + k]
    right: dict = {}
    for (r, cc), v in high.items():
        key = (r, cc // d)
        right[key] = right.get(key, ZERO) + v
    total = Fraction(0)
    for key in set(left) | set(right):
        diff = left.get(key, ZERO) - right.get(key, ZERO)
        total += diff.abs2()
    return total


def tensor_power_apply(x: AlgebraElement, p: int, zs: Sequence[Vertex]) -> dict:
    """Image of ``delta_{z_1} (x) ... (x) delta_{z_p}`` under the diagonal action of ``x``.

    Returns a sparse map from vertex tuples to nonzero exact coefficients.
    """
    if len(zs) != p:
        raise ValueError(f"expected {p} vertices, got {len(zs)}")
    A = x.automaton
    for z in zs:
        A.check_level(len(z))
    out: dict = {}
    for w, c in x.items():
        key = tuple(A.act(w, z) for z in zs)
        v = out.get(key, ZERO) + c
        if v:
            out[key] = v
        else:
            out.pop(key)
    return out


# ---------------------------------------------------------------------------
# non-normal counterexample


@dataclass
class JordanFixture:
    k: int
    matrix: np.ndarray
    norm: float
    inverse_norm: float
    norm_bound: float  # upper bound on ||a_k||
    inverse_bound: float  # lower bound on ||a_k^-1||
    spectrum: list[complex]


def jordan_fixture(k: int) -> JordanFixture:
    """The k x k upper bidiagonal matrix with 1 on the diagonal and -1 above it.

    Its inverse is the upper triangular all-ones matrix.  The spectrum is read
    off the diagonal (the matrix is triangular); a numerical eigensolver would
    return a circle of radius ~eps**(1/k) instead.
    """
    if k < 1:
        raise ValueError("k must be positive")
    a = np.eye(k) - np.eye(k, k=1)
    inv = np.triu(np.ones((k, k)))
    norm = float(np.linalg.norm(a, 2))
    inv_norm = float(np.linalg.norm(inv, 2))
    spectrum = sorted({complex(z) for z in np.diag(a)}, key=lambda z: (z.real, z.imag))
    return JordanFixture(k, a, norm, inv_norm, 2.0, math.sqrt(k), spectrum)
