import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schurlab.colligation import (
    UnitaryColligation,
    associate_colligation,
    char_function,
    defect_data,
    defect_functions_realized,
    embed_contraction,
    factor_colligation,
    jordan_block,
    product,
    random_colligation,
    realization_residual,
    simulate,
    subspace_analysis,
    taylor_coeffs,
    validate,
)
from schurlab.errors import DimensionMismatch, MalformedInput, NotAContraction, NotInvariant, NotSimple, NotSquare
from schurlab.schur import evaluate

from conftest import crandn, random_disk_points


def _blaschke(a):
    return embed_contraction(np.array([[a]]))


def _moebius(a, z):
    return (z - np.conj(a)) / (1 - a * z)


def _unimodular(rng, count):
    return np.exp(2j * np.pi * rng.uniform(size=count))


def _random_contraction_T(rng, h, norm=0.8):
    a = crandn(rng, h, h)
    return a * (norm / np.linalg.norm(a, 2))


# ------------------------------------------------------------ embedding

def test_embed_zero():
    d = embed_contraction(np.zeros((1, 1)))
    assert np.allclose([d.T[0, 0], d.F[0, 0], d.G[0, 0], d.S[0, 0]], [0, 1, 1, 0])
    assert char_function(d, 0.3)[0, 0] == pytest.approx(0.3)


def test_embed_blaschke(rng):
    for a in (0.5, -0.3 + 0.4j, 0.9j):
        d = _blaschke(a)
        for z in random_disk_points(rng, 5):
            assert char_function(d, z)[0, 0] == pytest.approx(_moebius(a, z))
    assert char_function(_blaschke(0.5), 0)[0, 0] == pytest.approx(-0.5)


def test_embed_jordan():
    d = embed_contraction(jordan_block(2))
    assert (d.p, d.q) == (1, 1)
    for z in (0.3, 0.5j, -0.7 + 0.1j):
        assert char_function(d, z)[0, 0] == pytest.approx(z ** 2)


def test_embed_rejects_expansive():
    with pytest.raises(NotAContraction):
        embed_contraction(np.array([[1.5]]))


def test_embed_unitary_and_realization(rng):
    for h in (1, 2, 4):
        d = embed_contraction(_random_contraction_T(rng, h))
        assert validate(d)["residual"] < 1e-10
        for z in random_disk_points(rng, 20):
            assert realization_residual(d, z) < 1e-8


def test_defect_identity(rng):
    T = _random_contraction_T(rng, 3)
    dd = defect_data(T)
    assert np.allclose(dd.D_T @ dd.D_T + T.conj().T @ T, np.eye(3))
    assert np.allclose(dd.basis_DT.conj().T @ dd.basis_DT, np.eye(dd.delta_T))
    assert (dd.delta_T, dd.delta_Tstar) == (3, 3)
    dd = defect_data(np.diag([1j, 0.5]))
    assert (dd.delta_T, dd.delta_Tstar) == (1, 1)


def test_validate_flags_perturbation(rng):
    d = random_colligation(3, 2, rng)
    assert validate(d)["residual"] < 1e-12
    bad = UnitaryColligation(d.T * 1.01, d.F, d.G, d.S)
    assert validate(bad)["residual"] > 1e-3
    ident = UnitaryColligation(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)), np.eye(2))
    assert validate(ident)["residual"] == 0


def test_inner_on_circle(rng):
    for _ in range(5):
        d = random_colligation(3, 2, rng)
        for t in _unimodular(rng, 20):
            v = char_function(d, t)
            assert np.linalg.norm(v.conj().T @ v - np.eye(2), 2) < 1e-8


# ------------------------------------------------------------ Taylor coefficients

def test_taylor_examples():
    assert np.allclose(taylor_coeffs(embed_contraction(np.zeros((1, 1))), 3).coeffs.ravel(), [0, 1, 0, 0])
    assert np.allclose(taylor_coeffs(_blaschke(0.5), 3).coeffs.ravel(), [-0.5, 0.75, 0.375, 0.1875])
    assert np.allclose(taylor_coeffs(embed_contraction(jordan_block(2)), 4).coeffs.ravel(), [0, 0, 1, 0, 0])


def test_taylor_matches_char_function(rng):
    d = random_colligation(4, 2, rng)
    seq = taylor_coeffs(d, 80)
    for z in random_disk_points(rng, 5, rmax=0.6):
        assert np.linalg.norm(evaluate(seq, z) - char_function(d, z), 2) < 1e-10


# ------------------------------------------------------------ products

def _convolve(a, b):
    n = a.shape[0]
    return np.stack([sum(a[k] @ b[m - k] for k in range(m + 1)) for m in range(n)])


def test_product_examples(rng):
    z0 = embed_contraction(np.zeros((1, 1)))
    pr = product(z0, z0)
    for z in random_disk_points(rng, 3):
        assert char_function(pr, z)[0, 0] == pytest.approx(z ** 2)
    a, b = 0.5, -0.2 + 0.3j
    pr = product(_blaschke(a), _blaschke(b))
    want = _convolve(taylor_coeffs(_blaschke(a), 8).coeffs, taylor_coeffs(_blaschke(b), 8).coeffs)
    assert np.allclose(taylor_coeffs(pr, 8).coeffs, want)
    with pytest.raises(DimensionMismatch):
        product(random_colligation(2, 2, rng), z0)


def test_product_suite(rng):
    for _ in range(5):
        d1, d2 = random_colligation(2, 2, rng), random_colligation(3, 2, rng)
        pr = product(d1, d2)
        assert validate(pr)["residual"] < 1e-10
        n = 10
        want = _convolve(taylor_coeffs(d1, n).coeffs, taylor_coeffs(d2, n).coeffs)
        assert np.max(np.abs(taylor_coeffs(pr, n).coeffs - want)) < 1e-8


# ------------------------------------------------------------ factorization

def test_factor_jordan():
    d = embed_contraction(jordan_block(2))
    d1, d2 = factor_colligation(d, np.array([[0.0], [1.0]]))
    assert (d1.dimH, d2.dimH) == (1, 1)
    for z in (0.3, 0.5j):
        v1, v2 = char_function(d1, z)[0, 0], char_function(d2, z)[0, 0]
        assert abs(v1) == pytest.approx(abs(z))
        assert abs(v2) == pytest.approx(abs(z))
        assert v1 * v2 == pytest.approx(z ** 2)


def test_factor_trivial_subspace(rng):
    d = random_colligation(3, 2, rng)
    d1, d2 = factor_colligation(d, np.zeros((3, 0)))
    assert d1.dimH == 0
    s = d1.S
    assert np.allclose(s.conj().T @ s, np.eye(2))
    assert np.allclose(taylor_coeffs(product(d1, d2), 6).coeffs, taylor_coeffs(d, 6).coeffs)


def test_factor_errors(rng):
    d = embed_contraction(jordan_block(2))
    with pytest.raises(NotInvariant):
        factor_colligation(d, np.array([[1.0], [0.0]]))
    wide = UnitaryColligation(np.zeros((1, 1)), np.zeros((1, 2)), np.ones((1, 1)), np.zeros((1, 2)))
    with pytest.raises(NotSquare):
        factor_colligation(wide, np.zeros((1, 0)))


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(1, 2), st.integers(0, 2**31 - 1))
def test_factor_product_roundtrip(h, m, seed):
    rng = np.random.default_rng(seed)
    d = random_colligation(h, m, rng)
    # eigenvectors of T span an invariant subspace
    _, z = np.linalg.eig(d.T)
    k = int(rng.integers(0, h + 1))
    basis = z[:, :k]
    d1, d2 = factor_colligation(d, basis)
    pr = product(d1, d2)
    assert validate(pr)["residual"] < 1e-8
    order = h + 2
    assert np.max(np.abs(taylor_coeffs(pr, order).coeffs - taylor_coeffs(d, order).coeffs)) < 1e-8


# ------------------------------------------------------------ simulation

def test_simulate_examples():
    d = embed_contraction(np.zeros((1, 1)))
    tr = simulate(d, [0], [[1], [0], [0]])
    assert np.allclose(tr.outputs.ravel(), [0, 1, 0])
    tr = simulate(d, [1], [[0]])
    assert tr.outputs[0, 0] == pytest.approx(1)
    assert tr.states[1, 0] == pytest.approx(0)
    with pytest.raises(DimensionMismatch):
        simulate(d, [0, 0], [[1]])


def test_simulate_zero_trace(rng):
    d = random_colligation(3, 2, rng)
    tr = simulate(d, np.zeros(3), np.zeros((5, 2)))
    assert not np.any(tr.states) and not np.any(tr.outputs)


def test_simulate_energy_and_impulse(rng):
    d = random_colligation(3, 2, rng)
    h0 = crandn(rng, 3)
    f = crandn(rng, 20, 2)
    tr = simulate(d, h0, f)
    scale = 1 + np.sum(np.abs(f) ** 2) + np.sum(np.abs(h0) ** 2)
    assert np.max(tr.energy_residuals) < 1e-8 * scale
    assert len(tr.rows()) == 20
    # impulse response from rest reproduces the Taylor coefficients
    e = np.zeros((6, 2))
    e[0, 0] = 1
    tr = simulate(d, np.zeros(3), e)
    assert np.allclose(tr.outputs, taylor_coeffs(d, 5).coeffs[:, :, 0])


# ------------------------------------------------------------ subspaces

def test_subspace_unitary_part():
    d = embed_contraction(np.diag([1j, 0.5]))
    rep = subspace_analysis(d)
    u = rep.basis_unitary_part
    assert u.shape[1] == 1
    assert abs(abs(u[0, 0]) - 1) < 1e-10
    assert not rep.is_simple and not rep.is_cnu
    with pytest.raises(NotSimple):
        defect_functions_realized(d, 0.2)


def test_subspace_jordan():
    rep = subspace_analysis(embed_contraction(jordan_block(2)))
    assert rep.is_simple and rep.is_cnu
    assert rep.shift_multiplicity == 0 and rep.coshift_multiplicity == 0
    assert rep.kernel_crosscheck < 1e-10


def test_subspace_unitary_T():
    d = embed_contraction(np.diag([1.0, 1j]))
    rep = subspace_analysis(d)
    assert rep.basis_HF.shape[1] == 0 and rep.basis_HG.shape[1] == 0
    assert rep.basis_unitary_part.shape[1] == 2


def test_subspace_random_is_simple(rng):
    for _ in range(5):
        d = random_colligation(4, 1, rng)
        rep = subspace_analysis(d)
        assert rep.is_simple == rep.is_cnu
        assert rep.kernel_crosscheck < 1e-8
        hf = rep.basis_HF
        assert np.allclose(hf.conj().T @ rep.basis_HFperp, 0)


def test_realized_defect_functions_are_empty():
    theta_r, theta_l = defect_functions_realized(embed_contraction(jordan_block(2)), 0.3)
    assert theta_r.shape == (0, 1)
    assert theta_l.shape == (1, 0)


# ------------------------------------------------------------ associate / JSON

def test_associate_colligation(rng):
    d = random_colligation(3, 2, rng)
    da = associate_colligation(d)
    for z in random_disk_points(rng, 5):
        assert np.allclose(char_function(da, z), char_function(d, np.conj(z)).conj().T)


def test_json_roundtrip(rng):
    d = random_colligation(2, 1, rng)
    back = UnitaryColligation.from_json(d.to_json())
    assert np.array_equal(back.Y, d.Y)
    bad = d.to_json()
    bad["p"] = 3
    with pytest.raises(MalformedInput):
        UnitaryColligation.from_json(bad)
    with pytest.raises(MalformedInput):
        UnitaryColligation.from_json({"dimH": 1})
