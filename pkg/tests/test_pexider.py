import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import algebras_for, make_instance
from orthostab.algebra import ScalarAlgebra
from orthostab.pexider import (
    GroundTruth,
    NonOrthogonalPair,
    PexiderInstance,
    defect,
    estimate_epsilon,
    hypothesis_pairs,
    quadratic_kernel,
    scalar_pairs,
)
from orthostab.orthogonality import OrthogonalityRelation
from orthostab.spaces import DimensionMismatch, NormedSpace


def test_eval_pythagorean_quadratic():
    inst = make_instance(dim=2, parity="even", quad=1.0)
    np.testing.assert_array_equal(inst.eval(1, np.array([3.0, 4.0])), [25.0, 0.0])


def test_eval_linear_identity():
    C = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    inst = make_instance(dim=2, linear=np.eye(2), offsets=C)
    for i in (1, 2, 3):
        np.testing.assert_array_equal(inst.eval(i, np.array([1.0, 2.0])), np.array([1.0, 2.0]) + C[i - 1])


def test_eval_deterministic(rng):
    a = make_instance(dim=3, delta=0.1, seed=4, quad=1.0, linear=np.eye(3))
    b = make_instance(dim=3, delta=0.1, seed=4, quad=1.0, linear=np.eye(3))
    x = a.X.random(rng, 50)
    for i in (1, 2, 3):
        assert np.array_equal(a.eval(i, x), a.eval(i, x))
        assert np.array_equal(a.eval(i, x), b.eval(i, x))


@pytest.mark.parametrize("parity", ["even", "odd", "general"])
def test_noise_bound(parity, rng):
    kw = dict(quad=1.0) if parity != "odd" else dict(linear=rng.normal(size=(3, 3)))
    noisy = make_instance(parity=parity, delta=0.3, seed=9, **kw)
    clean = make_instance(parity=parity, delta=0.0, seed=9, **kw)
    x = noisy.X.random(rng, 2000) * 10
    for i in (1, 2, 3):
        assert np.all(noisy.Y.norm(noisy.eval(i, x) - clean.eval(i, x)) <= 0.3 * (1 + 1e-12))


def test_parity_exact(rng):
    even = make_instance(parity="even", quad=2.0, offsets=rng.normal(size=(3, 3)), delta=0.2, seed=1)
    odd = make_instance(parity="odd", linear=rng.normal(size=(3, 3)), delta=0.2, seed=1)
    x = even.X.random(rng, 500)
    for i in (1, 2, 3):
        assert np.array_equal(even.eval(i, -x), even.eval(i, x))
        assert np.array_equal(odd.eval(i, -x), -odd.eval(i, x))
        assert np.all(even.noise(i, even.X.zeros()) == 0)
        assert np.all(odd.noise(i, odd.X.zeros()) == 0)


def test_parity_invariants_enforced():
    with pytest.raises(ValueError):
        make_instance(parity="even", linear=np.eye(3))
    with pytest.raises(ValueError):
        make_instance(parity="odd", quad=1.0)
    with pytest.raises(ValueError):
        make_instance(parity="odd", offsets=np.ones((3, 3)))


def test_quadratic_needs_kernel():
    with pytest.raises(ValueError):
        make_instance(quad=1.0, kind="birkhoff_james", norm_kind="p_norm", p=3)
    with pytest.raises(ValueError):
        make_instance(quad=1.0, kind="trivial")
    sp = NormedSpace(3, norm_kind="weighted_euclidean", weights=(1, 2, 3))
    q = quadratic_kernel(OrthogonalityRelation("inner_product", sp))
    assert q(np.array([1.0, 1.0, 1.0])) == 6.0


def test_ground_truth_validation():
    with pytest.raises(ValueError):
        GroundTruth(0.0, np.array([[np.inf]]), np.zeros((3, 1)))
    with pytest.raises(ValueError):
        GroundTruth(0.0, np.eye(2), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        GroundTruth(0.0, np.eye(2), np.zeros((3, 2)), noise_amp=-1)
    with pytest.raises(DimensionMismatch):
        make_instance(dim=3, linear=np.eye(2))


def test_defect_exact_additive_is_zero(rng):
    inst = make_instance(parity="odd", linear=rng.normal(size=(3, 3)))
    P, Q = hypothesis_pairs(inst.relation, 0, 100)
    a = np.ones((P.shape[0], 1))
    assert np.all(defect(inst, P, Q, a, a, "eq29") <= 1e-12 * (1 + inst.X.norm(P) + inst.X.norm(Q)))


def test_defect_even_eq29_is_offset_combination(rng):
    C = rng.normal(size=(3, 3))
    inst = make_instance(parity="even", quad=1.0, offsets=C)
    P, Q = hypothesis_pairs(inst.relation, 1, 100)
    one = np.ones((P.shape[0], 1))
    d = defect(inst, P, Q, one, one, "eq29")
    w = np.linalg.norm(C[0] - C[1] - C[2])
    # direct expansion oracle: |x+y|^2 - |x|^2 - |y|^2 = 2<x,y> = 0
    scale = inst.X.norm(P) ** 2 + inst.X.norm(Q) ** 2
    assert np.all(np.abs(d - w) <= 1e-12 * (1 + scale))


def test_defect_noise_triangle_bound(rng):
    L, C = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    noisy = make_instance(quad=1.0, linear=L, offsets=C, delta=0.05, seed=2)
    clean = make_instance(quad=1.0, linear=L, offsets=C)
    P, Q = hypothesis_pairs(noisy.relation, 2, 200)
    alg = ScalarAlgebra("real_signs", noisy.X)
    A, B = scalar_pairs(alg, "independent", P.shape[0], 3)
    for shape in ("eq1", "eq12", "eq22", "eq29"):
        dn = defect(noisy, P, Q, A, B, shape)
        dc = defect(clean, P, Q, A, B, shape)
        # centered shapes also subtract the noise at 0
        k = 3 if shape in ("eq22", "eq29") else 6
        assert np.all(dn <= dc + k * 0.05 + 1e-9)


def test_defect_rejects_non_orthogonal():
    inst = make_instance(dim=2)
    with pytest.raises(NonOrthogonalPair):
        defect(inst, np.array([1.0, 0]), np.array([1.0, 1.0]), np.ones(1), np.ones(1), "eq29")
    with pytest.raises(ValueError):
        defect(inst, np.array([1.0, 0]), np.array([0, 1.0]), np.ones(1), np.ones(1), "eq7")


def test_defect_scalar_forms():
    # with x _|_ 0 and f exactly quadratic the eq1 defect vanishes for a = -1
    inst = make_instance(dim=2, parity="even", quad=1.0)
    x, z = np.array([1.0, 2.0]), np.zeros(2)
    assert defect(inst, x, z, np.array([-1.0]), np.array([5.0]), "eq1") == 0.0
    lin = make_instance(dim=2, parity="odd", linear=np.eye(2))
    assert defect(lin, x, z, np.array([-1.0]), None, "eq12") == 0.0
    # eq22 uses ab: a = 1, b = -1 breaks an additive map by 2|x|
    assert defect(lin, x, z, np.array([1.0]), np.array([-1.0]), "eq22") == pytest.approx(2 * np.linalg.norm(x))
    assert defect(lin, x, z, np.array([-1.0]), np.array([1.0]), "eq22") == 0.0


def test_estimate_zero_for_exact_linear():
    inst = make_instance(parity="odd", linear=np.eye(3))
    alg = ScalarAlgebra("real_signs", inst.X)
    est = estimate_epsilon(inst, "eq12", alg, 200, 5)
    assert est.eps_hat <= 1e-12


def test_estimate_offsets_only(rng):
    C = rng.normal(size=(3, 3))
    inst = make_instance(offsets=C)
    alg = ScalarAlgebra("real_signs", inst.X)
    est = estimate_epsilon(inst, "eq29", alg, 100, 5)
    assert est.eps_hat == pytest.approx(np.linalg.norm(C[0] - C[1] - C[2]), rel=1e-14)
    x, y, a, b = est.argmax_witness
    assert defect(inst, x, y, a, b, "eq29", check=False) == est.eps_hat


@given(n=st.integers(1, 60), extra=st.integers(1, 60))
def test_estimate_monotone_in_pairs(n, extra):
    inst = make_instance(quad=1.0, linear=np.eye(3), delta=0.1, seed=5)
    alg = ScalarAlgebra("real_signs", inst.X)
    a = estimate_epsilon(inst, "eq22", alg, n, 4, seed=3)
    b = estimate_epsilon(inst, "eq22", alg, n + extra, 4, seed=3)
    assert b.eps_hat >= a.eps_hat


def test_estimate_deterministic_and_witness(rng):
    inst = make_instance(quad=1.0, offsets=rng.normal(size=(3, 3)), delta=0.1, seed=6)
    for alg in algebras_for(inst.X):
        e1 = estimate_epsilon(inst, "eq1", alg, 50, 6, seed=1)
        e2 = estimate_epsilon(inst, "eq1", alg, 50, 6, seed=1)
        assert e1.eps_hat == e2.eps_hat
        x, y, a, b = e1.argmax_witness
        assert defect(inst, x, y, a, b, "eq1", check=False) == e1.eps_hat
        assert e1.to_dict()["n_pairs"] == 3 * 50 + 1


def test_hypothesis_pairs_contain_degenerate():
    rel = OrthogonalityRelation("inner_product", NormedSpace(2))
    P, Q = hypothesis_pairs(rel, 0, 10)
    assert P.shape == (31, 2)
    assert np.all(Q[10:20] == 0) and np.all(P[20:30] == 0)
    assert np.all(P[-1] == 0) and np.all(Q[-1] == 0)


def test_scalar_pairs_modes():
    alg = ScalarAlgebra("diagonal_real", NormedSpace(3))
    for mode in ("independent", "equal", "a_only", "unit"):
        A, B = scalar_pairs(alg, mode, 10, 0)
        assert np.all(A[0] == 1) and np.all(B[0] == 1)
        if mode == "equal":
            assert np.array_equal(A, B)
        if mode == "a_only":
            assert np.all(B == 1)
    A, B = scalar_pairs(alg, "equal", 50, 0, idempotent=True)
    assert np.array_equal(A * A, A)
    with pytest.raises(ValueError):
        scalar_pairs(alg, "both", 3, 0)


def test_remark4_collapse_invariant(rng):
    C = rng.normal(size=(3, 3))
    inst = make_instance(offsets=C, delta=0.05, seed=8, alpha=2.0)
    alg = ScalarAlgebra("real_signs", inst.X)
    est = estimate_epsilon(inst, "eq22", alg, 200, 8)
    x = inst.X.random(rng, 300) * 10
    assert np.all(inst.Y.norm(inst.centered(1, x)) <= est.eps_hat / abs(1 - 2.0))
    np.testing.assert_array_equal(inst.eval(2, x), 2.0 * inst.eval(1, x))


def test_complex_instance_with_circle(rng):
    L = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    inst = make_instance(dim=2, field="complex", linear=L, delta=0.0)
    alg = ScalarAlgebra("complex_circle", inst.X)
    est = estimate_epsilon(inst, "eq22", alg, 50, 10, scalar_mode="equal")
    # f(a(x+y)) = a L(x+y) while a^2 L x appears on the right: only a = 1 is exact
    assert est.eps_hat > 0
    est1 = estimate_epsilon(inst, "eq12", alg, 50, 10)
    assert est1.eps_hat <= 1e-12
