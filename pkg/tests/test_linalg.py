import io

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp

from tresca_stokes.assembly import assemble_system
from tresca_stokes.harness import test1_case
from tresca_stokes.io import write_matrix_market
from tresca_stokes.linalg import (Factorization, SingularSystemError, factorize,
                                  nested_dissection_order, solve)


def test_scalar_system():
    x = solve(factorize(sp.csr_matrix([[2.0]])), np.array([4.0]))
    assert x == pytest.approx([2.0])


def test_small_saddle():
    x = solve(factorize(sp.csr_matrix([[2.0, 1.0], [1.0, 0.0]])), np.array([3.0, 1.0]))
    assert np.allclose(x, [1.0, 1.0], rtol=0, atol=1e-15)


def test_singular_reported():
    with pytest.raises(SingularSystemError):
        factorize(sp.csr_matrix([[1.0, 1.0], [1.0, 1.0]]))


def test_dimension_mismatch():
    f = factorize(sp.identity(3, format="csr"))
    with pytest.raises(ValueError):
        f.solve(np.ones(4))


@pytest.fixture(scope="module")
def test1_system():
    case = test1_case()
    m = case.mesh(16)
    return assemble_system(m, case.dofmap(m), 0.1, 10.0, case.forcing, condense=True)


def test_residual_and_reuse(test1_system):
    s = test1_system
    f = factorize(s)
    assert not np.any(f.solve(np.zeros(s.size)))
    rng = np.random.default_rng(0)
    for rhs in (s.rhs, s.rhs + s.gamma_rhs(rng.normal(size=s.dofmap.n_multiplier))):
        x = f.solve(rhs)
        assert f.residual(x, rhs) < 1e-10


def test_quasidefinite_matches_lu(test1_system):
    s = test1_system
    a = factorize(s).solve(s.rhs)
    b = Factorization(s.matrix).solve(s.rhs)
    assert np.allclose(a, b, rtol=0, atol=1e-9 * np.abs(b).max())


def test_nested_dissection_is_permutation():
    for nx, ny in [(1, 1), (7, 3), (40, 40)]:
        p = nested_dissection_order(nx, ny)
        assert np.array_equal(np.sort(p), np.arange((nx + 1) * (ny + 1)))


def test_matrix_market_roundtrip(tmp_path, test1_system):
    path = tmp_path / "system.mtx"
    write_matrix_market(test1_system, path)
    back = scipy.io.mmread(path).tocsr()
    assert abs(back - test1_system.matrix).max() == 0.0
