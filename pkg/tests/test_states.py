import numpy as np
import pytest

from steerlab.errors import ContractError, ParameterError
from steerlab.linalg import frobenius_sq
from steerlab.states import (
    DensityMatrix,
    StateFamilySpec,
    make_asymmetric,
    make_ghz,
    make_ghz_d,
    make_max_entangled,
    make_singlet,
    maximally_mixed,
    product_state,
    purity,
    random_density_matrix,
)


def test_singlet():
    s = make_singlet()
    assert np.allclose(s.reduced([0]).matrix, np.eye(2) / 2)
    assert np.allclose(s.reduced([1]).matrix, np.eye(2) / 2)
    assert purity(s) == pytest.approx(1)
    # <01|rho|10>
    assert s.matrix[1, 2] == pytest.approx(-0.5)


def test_asymmetric_limits():
    assert np.allclose(make_asymmetric(1).matrix, make_singlet().matrix)
    assert np.trace(make_asymmetric(0).matrix).real == pytest.approx(1)
    assert np.allclose(make_asymmetric(0).reduced([0]).matrix, np.diag([5 / 6, 1 / 6]))


def test_asymmetric_affine():
    for p1, p2 in [(0.1, 0.9), (0.0, 1.0), (0.3, 0.4)]:
        mid = make_asymmetric((p1 + p2) / 2).matrix
        avg = (make_asymmetric(p1).matrix + make_asymmetric(p2).matrix) / 2
        assert np.max(np.abs(mid - avg)) < 1e-12


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_asymmetric_range(p):
    with pytest.raises(ParameterError):
        make_asymmetric(p)


def test_ghz():
    g0 = make_ghz(0).matrix
    e = np.zeros((8, 8))
    e[7, 7] = 1
    assert np.allclose(g0, e)
    g = make_ghz(np.pi / 4)
    assert purity(g.reduced([0])) == pytest.approx(0.5)
    assert purity(g.reduced([1, 2])) == pytest.approx(0.5)
    assert 2 - purity(g.reduced([0])) == pytest.approx((5 - np.cos(np.pi)) / 4)
    assert purity(make_ghz(np.pi / 6).reduced([0])) == pytest.approx(0.625)
    with pytest.raises(ParameterError):
        make_ghz(2.0)


def test_ghz_bipartition_view_shares_memory():
    g = make_ghz(0.4)
    view = g.regroup((2, 4))
    assert view.dims == (2, 4)
    assert np.shares_memory(view.matrix, g.matrix)


def test_ghz_d():
    assert np.allclose(make_ghz_d(2).matrix, make_ghz(np.pi / 4).matrix)
    assert purity(make_ghz_d(3).reduced([0])) == pytest.approx(1 / 3)
    assert purity(make_ghz_d(4).reduced([1, 2])) == pytest.approx(1 / 4)


def test_max_entangled():
    assert np.allclose(make_max_entangled(2).reduced([0]).matrix, np.eye(2) / 2)
    assert purity(make_max_entangled(5)) == pytest.approx(1)
    assert purity(make_max_entangled(4).reduced([1])) == pytest.approx(1 / 4)


def test_purity_mixed():
    for d in (2, 3, 7):
        assert purity(maximally_mixed(d)) == pytest.approx(1 / d)


def test_invariants_enforced():
    with pytest.raises(ContractError):
        DensityMatrix(np.diag([1.0, 1.0]), (2,))
    with pytest.raises(ContractError):
        DensityMatrix(np.diag([1.5, -0.5]), (2,))
    with pytest.raises(ContractError):
        DensityMatrix(np.array([[0.5, 0.5], [0, 0.5]]), (2,))


def test_factories_valid():
    builds = [make_singlet(), make_asymmetric(0.3), make_ghz(0.7), make_ghz_d(3), make_max_entangled(3)]
    for rho in builds:
        vals = np.linalg.eigvalsh(rho.matrix)
        assert vals[0] > -1e-10
        assert np.trace(rho.matrix).real == pytest.approx(1)


def test_centered_frobenius_at_most_one(rng):
    for k in range(1000):
        dims = (2, 2) if k % 2 else (2, 3)
        rho = random_density_matrix(dims, rng)
        diff = rho.matrix - np.kron(rho.reduced([0]).matrix, rho.reduced([1]).matrix)
        assert np.sqrt(frobenius_sq(diff)) <= 1


def test_json_round_trip(rng):
    rho = random_density_matrix((2, 3), rng)
    back = DensityMatrix.from_json(rho.to_json())
    assert back.dims == rho.dims
    assert np.array_equal(back.matrix, rho.matrix)


def test_product_state_dims():
    p = product_state(make_singlet(), maximally_mixed(3))
    assert p.dims == (2, 2, 3)


def test_family_spec():
    assert StateFamilySpec("asymmetric", p=0.5).family == "asymmetric_p"
    with pytest.raises(ParameterError):
        StateFamilySpec("ghz_theta")
    with pytest.raises(ParameterError):
        StateFamilySpec("nope")
    spec = StateFamilySpec("ghz_d", d=3)
    assert spec.build().dims == (3, 3, 3)
    assert spec.with_params(d=2).d == 2
