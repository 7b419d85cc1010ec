import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schurlab.errors import Degenerate, NonContractiveParameter, NotASolution, OnCircle, PoleEvaluation
from schurlab.resolvent import (
    binomial_factor,
    information_matrix,
    jform_defect,
    lft_apply,
    lft_apply_left,
    lft_invert,
    lft_series,
    product_check,
    resolvent_B,
    resolvent_Btilde,
    signature,
    swap_operator,
    vandermonde_row,
)
from schurlab.schur import SchurSequence, TruncatedSeries

from conftest import direct_B, random_contraction, random_data, random_disk_points, random_suite, scalar_seq


def _direct_Btilde(seq, z):
    p, q = seq.p, seq.q
    Q = np.zeros((q + p, p + q))
    Q[:q, p:] = np.eye(q)
    Q[q:, :p] = np.eye(p)
    j = np.diag([-1.0] * q + [1.0] * p)
    return Q.T @ j @ np.linalg.inv(direct_B(seq, z)) @ j @ Q


# ------------------------------------------------------------ basic objects

def test_signatures_and_swap():
    j = signature("j", 2, 3)
    assert np.allclose(np.diag(j), [-1, -1, -1, 1, 1])
    jt = signature("j_tilde", 2, 3)
    assert np.allclose(np.diag(jt), [-1, -1, 1, 1, 1])
    Q = swap_operator(2, 3)
    g, f = np.arange(2), 10 + np.arange(3)
    assert np.allclose(Q @ np.concatenate([g, f]), np.concatenate([f, g]))
    assert np.allclose(Q.T @ Q, np.eye(5))
    assert np.allclose(Q @ jt @ Q.T, -j)


def test_vandermonde_row():
    v = vandermonde_row(2, 2, 0.5)
    assert v.shape == (2, 6)
    assert np.allclose(v[:, 4:], 0.25 * np.eye(2))


def test_information_matrix_examples():
    h = information_matrix(SchurSequence.zeros(1, 1, 2), "H").matrix
    expected = np.zeros((6, 6))
    expected[3:, 3:] = np.eye(3)
    assert np.allclose(h, expected)
    ht = information_matrix(scalar_seq(0.5), "H_tilde").matrix
    assert np.allclose(ht, [[4 / 3, 2 / 3], [2 / 3, 1 / 3]])
    with pytest.raises(Degenerate):
        information_matrix(scalar_seq(1.0))


def test_information_matrix_psd(rng):
    for seq in random_suite(10, seed=1):
        for kind in ("H", "H_tilde"):
            h = information_matrix(seq, kind).matrix
            assert np.allclose(h, h.conj().T)
            assert np.linalg.eigvalsh(h).min() > -1e-10


# ------------------------------------------------------------ resolvents

@pytest.mark.parametrize("n", range(4))
def test_zero_data_resolvents(rng, n):
    seq = SchurSequence.zeros(2, 1, n)
    rb, rt = resolvent_B(seq), resolvent_Btilde(seq)
    for z in random_disk_points(rng, 5):
        assert np.allclose(rb(z), np.diag([1, z ** -(n + 1), z ** -(n + 1)]), atol=1e-10)
        assert np.allclose(rt(z), np.diag([z ** (n + 1), z ** (n + 1), 1]), atol=1e-10)
        assert np.linalg.det(rt(z)) == pytest.approx(z ** ((n + 1) * 2), abs=1e-12)


def test_scalar_half_at_minus_one():
    rb = resolvent_B(scalar_seq(0.5))
    assert np.allclose(rb(-1), [[5 / 3, 4 / 3], [-4 / 3, -5 / 3]])
    j = signature("j", 1, 1)
    assert np.allclose(rb(-1).conj().T @ j @ rb(-1), j)


def test_normalization_and_pole(rng):
    seq = random_data(rng, 2, 3, 3)
    assert np.allclose(resolvent_B(seq)(1), np.eye(5))
    assert np.allclose(resolvent_Btilde(seq)(1), np.eye(5))
    with pytest.raises(PoleEvaluation):
        resolvent_B(seq)(0)
    assert resolvent_Btilde(seq).degree == seq.n + 1


def test_resolvents_match_direct_formulas(rng):
    for seq in random_suite(10, seed=2):
        rb, rt = resolvent_B(seq), resolvent_Btilde(seq)
        for z in random_disk_points(rng, 3, rmin=0.3):
            assert np.linalg.norm(rb(z) - direct_B(seq, z), 2) < 1e-8 * (1 + np.linalg.norm(rb(z), 2))
            assert np.linalg.norm(rt(z) - _direct_Btilde(seq, z), 2) < 1e-8 * (1 + np.linalg.norm(rt(z), 2))


def test_scaled_polynomial_defined_at_zero(rng):
    seq = random_data(rng, 1, 2, 2)
    rb = resolvent_B(seq)
    z = 0.4 + 0.1j
    assert np.allclose(rb.scaled_polynomial(z), z ** (seq.n + 1) * rb(z))
    rb.scaled_polynomial(0)
    rt = resolvent_Btilde(seq)
    assert np.allclose(rt.inverse_scaled_polynomial(z), z ** (seq.n + 1) * np.linalg.inv(rt(z)))


def test_j_unitary_and_expansive(rng):
    for seq in random_suite(10, seed=3):
        for R in (resolvent_B(seq), resolvent_Btilde(seq)):
            J = R.signature
            for t in np.exp(2j * np.pi * rng.uniform(size=5)):
                v = R(t)
                assert np.linalg.norm(v.conj().T @ J @ v - J, 2) < 1e-8
            for z in random_disk_points(rng, 5):
                v = R(z)
                assert np.linalg.eigvalsh(v.conj().T @ J @ v - J).min() > -1e-8 * (1 + np.linalg.norm(v, 2) ** 2)


# ------------------------------------------------------------ binomial factors

def test_binomial_examples(rng):
    z = 0.3 - 0.2j
    assert np.allclose(binomial_factor(np.zeros((2, 1)), "b")(z), np.diag([1, 1 / z, 1 / z]))
    assert np.allclose(binomial_factor(np.zeros((2, 1)), "b_tilde")(z), np.diag([z, z, 1]))
    c = random_contraction(rng, 2, 2, 0.7)
    for kind in ("b", "b_tilde"):
        f = binomial_factor(c, kind)
        assert np.allclose(f(1), np.eye(4))
        assert f.degree == 1
    with pytest.raises(NonContractiveParameter):
        binomial_factor(np.eye(2))


def test_binomial_is_one_term_resolvent(rng):
    c = random_contraction(rng, 2, 3, 0.6)
    f = binomial_factor(c, "b")
    seq = SchurSequence([c])
    z = 0.5j
    assert np.allclose(f(z), direct_B(seq, z))


# ------------------------------------------------------------ products

def test_product_check_examples():
    assert product_check(SchurSequence.zeros(1, 1, 3))["residual"] < 1e-14
    assert product_check(scalar_seq(0.5, 0.25))["residual"] < 1e-8
    assert product_check(scalar_seq(0, 0.5, 0))["residual"] < 1e-8


def test_product_check_suite():
    for seq in random_suite(10, seed=4):
        assert product_check(seq)["residual"] < 1e-8


# ------------------------------------------------------------ J-forms

def test_jform_examples():
    z = SchurSequence.zeros(1, 1, 0)
    assert np.linalg.norm(jform_defect(resolvent_B(z), 0.5)) < 1e-12
    rb = resolvent_B(scalar_seq(0.5))
    rt = resolvent_Btilde(scalar_seq(0.5))
    for R in (rb, rt):
        assert np.linalg.norm(jform_defect(R, 0.3), 2) < 1e-10
        assert np.linalg.norm(jform_defect(R, 1.5), 2) < 1e-10
    with pytest.raises(OnCircle):
        jform_defect(rb, 1j)


def test_jform_tilde_random_points(rng):
    rt = resolvent_Btilde(scalar_seq(0.5))
    for z in random_disk_points(rng, 20):
        assert np.linalg.norm(jform_defect(rt, z), 2) < 1e-10


# ------------------------------------------------------------ LFT maps

def test_lft_examples(rng):
    rt = resolvent_Btilde(SchurSequence.zeros(1, 1, 0))
    for z in random_disk_points(rng, 5):
        assert lft_apply(rt, 0.3, z)[0, 0] == pytest.approx(0.3 * z)
    rt = resolvent_Btilde(scalar_seq(0.5))
    for z in random_disk_points(rng, 5):
        assert lft_apply(rt, 0.5, z)[0, 0] == pytest.approx(0.5)
    assert lft_apply(rt, 0.0, 0)[0, 0] == pytest.approx(0.5)
    ts = np.exp(2j * np.pi * np.arange(64) / 64)
    assert max(abs(lft_apply(rt, 0.0, t)[0, 0]) for t in ts) <= 1 + 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 5), st.integers(0, 2**31 - 1))
def test_solutions_reproduce_data(p, q, n, seed):
    rng = np.random.default_rng(seed)
    seq = random_data(rng, p, q, n)
    rt = resolvent_Btilde(seq)
    rb = resolvent_B(seq)
    for _ in range(3):
        w = random_contraction(rng, p, q)
        got = lft_series(rt, w, n)
        assert np.max(np.abs(got.coeffs - seq.coeffs)) < 1e-8
        z = complex(random_disk_points(rng, 1)[0])
        right = lft_apply(rt, w, z)
        left = lft_apply_left(rb, w, z)
        assert np.linalg.norm(right - left, 2) < 1e-8
        assert np.linalg.norm(right, 2) <= 1 + 1e-9


def test_lft_invert_examples(rng):
    rt = resolvent_Btilde(SchurSequence.zeros(1, 1, 0))
    theta = TruncatedSeries([[[0.0]], [[0.4]], [[0.0]]])
    w = lft_invert(rt, theta)
    assert np.allclose(w.coeffs.ravel(), [0.4, 0.0])
    with pytest.raises(NotASolution):
        lft_invert(rt, TruncatedSeries([[[0.1]], [[0.4]]]))


def test_lft_invert_roundtrip(rng):
    for _ in range(5):
        seq = random_data(rng, 2, 2, 2)
        rt = resolvent_Btilde(seq)
        w = random_contraction(rng, 2, 2)
        theta = lft_series(rt, w, seq.n + 4)
        back = lft_invert(rt, theta)
        assert np.linalg.norm(back.coeffs[0] - w, 2) < 1e-9
        assert np.max(np.abs(back.coeffs[1:])) < 1e-9
