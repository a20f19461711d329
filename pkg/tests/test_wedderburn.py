import numpy as np
import pytest

from autcstar import wedderburn as wb
from autcstar.errors import DegenerateSplit

from conftest import ALL_FIXTURES
from oracles import RawAutomaton, orbital_count, perm_span_dim


def test_closure_examples(fx):
    assert wb.algebra_closure(fx("swap"), 1).dim == 2
    assert wb.algebra_closure(fx("odo"), 2).dim == 4
    assert wb.algebra_closure(fx("trivial"), 3).dim == 1


@pytest.mark.parametrize("name", ALL_FIXTURES)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_against_permutation_group(fx, name, n):
    A = fx(name)
    if A.alphabet_size**n > 27:
        pytest.skip("oracle too slow")
    group = RawAutomaton.fixture(name).level_group(n)
    rep = wb.blocks_at(A, n)
    assert rep.algebra_dim == perm_span_dim(group)
    assert sum(d * d for d, _ in rep.blocks) == rep.algebra_dim
    assert sum(m * m for _, m in rep.blocks) == orbital_count(group)
    assert sum(d * m for d, m in rep.blocks) == A.alphabet_size**n
    assert not rep.truncated


def test_closure_is_adjoint_closed(fx):
    B = wb.algebra_closure(fx("aleshin"), 3)
    Q = np.array([e.ravel() for e in B.basis])
    for e in B.basis[:10]:
        v = e.conj().T.ravel()
        resid = v - Q.T @ (Q.conj() @ v)
        assert np.linalg.norm(resid) < 1e-8


def test_center_commutes(fx):
    B = wb.algebra_closure(fx("subfix"), 2)
    for z in wb.center_basis(B):
        for e in B.basis:
            assert np.allclose(z @ e, e @ z)


def test_level_embedding(fx):
    # a block of level n - 1 reappears inside level n: max d_i never drops
    for name in ("aleshin", "subfix", "odo"):
        tr = wb.dimension_trend(fx(name), 3)
        assert all(b >= a for a, b in zip(tr.max_block, tr.max_block[1:]))


def test_trend_verdicts(fx):
    assert wb.dimension_trend(fx("odo"), 3).verdict.startswith("bounded")
    tr = wb.dimension_trend(fx("aleshin"), 3)
    assert tr.max_block[-1] > tr.max_block[0]
    assert tr.to_dict()["heuristic"] is True


def test_truncation_flag(fx):
    B = wb.algebra_closure(fx("aleshin"), 3, max_ball=1)
    assert B.truncated


def test_degenerate_split_raises(fx):
    B = wb.algebra_closure(fx("odo"), 2)
    with pytest.raises(DegenerateSplit):
        wb.block_dimensions(B, retries=0)
