import numpy as np
import pytest

from schurlab.boundary import BoundaryGrid, BoundarySamples, inner_check, sample
from schurlab.colligation import embed_contraction, random_colligation
from schurlab.darlington import (
    darlington_feasibility,
    internal_scattering,
    loss_metric,
    pseudocontinuation_check,
    regular_extension,
    scalar_multiple,
    series_from_samples,
)
from schurlab.errors import (
    AnalyticityViolated,
    DenominatorVanishes,
    DeterminantVanishesIdentically,
    NotContractiveOnCircle,
    NotInner,
    ShapeMismatch,
)
from schurlab.schur import TruncatedSeries

S3 = np.sqrt(3) / 2
XI_HALF = np.array([[-0.5, S3], [S3, 0.5]])


def _poly(*coeffs):
    return TruncatedSeries(np.array(coeffs, dtype=complex).reshape(-1, 1, 1))


def _blaschke_samples(a, grid):
    t = grid.points
    return (t - a) / (1 - np.conj(a) * t)


def _sup(diff):
    return float(np.max(np.linalg.norm(diff, ord=2, axis=(-2, -1))))


# ------------------------------------------------------------ internal scattering

def test_scattering_constant_half():
    sc = internal_scattering(sample(_poly(0.5)))
    assert np.allclose(sc.omega0.values, 1) and np.allclose(sc.upsilon0.values, 1)
    assert np.allclose(sc.chi.values, -0.5)
    assert np.max(np.abs(sc.xi0.values - XI_HALF[None])) < 1e-10
    assert abs(sc.xi0_norm - 1) < 1e-8


def test_scattering_inner_is_empty():
    sc = internal_scattering(sample(_poly(0, 1)))
    assert sc.chi.values.shape[1:] == (0, 0)
    assert sc.trivial


def test_scattering_zero():
    sc = internal_scattering(sample(_poly(0)))
    assert np.allclose(sc.chi.values, 0)
    assert np.max(np.abs(sc.xi0.values - np.array([[0, 1], [1, 0]])[None])) < 1e-12


def test_scattering_half_zeta():
    g = BoundaryGrid(256)
    sc = internal_scattering(sample(_poly(0, 0.5), g))
    assert np.max(np.abs(sc.chi.values[:, 0, 0] + 0.5 * np.conj(g.points))) < 1e-12


@pytest.mark.parametrize("theta", [_poly(0.5), _poly(0, 0.5), _poly(0.5, 0.5), _poly(0.2, 0.3j, -0.1)])
def test_xi0_norm_is_one(theta):
    sc = internal_scattering(sample(theta))
    assert abs(sc.xi0_norm - 1) < 1e-8
    assert sc.xi0.sup_norm() <= 1 + 1e-8


def test_scattering_matrix_case():
    d = embed_contraction(np.array([[0.3, 0.2], [0.0, 0.4j]]))
    g = BoundaryGrid(256)
    # scale a 2x2 inner function down so that both defects have full rank
    theta = BoundarySamples(0.6 * sample(d, g).values, g)
    sc = internal_scattering(theta)
    assert sc.chi.values.shape[1:] == (2, 2)
    assert abs(sc.xi0_norm - 1) < 1e-8


def test_scattering_gauge_invariance():
    theta = sample(_poly(0.2, 0.3j, -0.1))
    sc = internal_scattering(theta)
    u = np.exp(0.7j)
    phi2 = type(sc.phi)(
        rank=sc.phi.rank,
        coeffs=TruncatedSeries(u * sc.phi.coeffs.coeffs),
        samples=BoundarySamples(u * sc.phi.samples.values, theta.grid),
        method=sc.phi.method,
        residual=sc.phi.residual,
    )
    sc2 = internal_scattering(theta, phi2, sc.psi)
    assert np.max(np.abs(sc2.chi.values - u * sc.chi.values)) < 1e-10
    assert abs(sc2.xi0_norm - sc.xi0_norm) < 1e-10


def test_scattering_errors():
    with pytest.raises(NotContractiveOnCircle):
        internal_scattering(sample(_poly(1.5)))
    sc = internal_scattering(sample(_poly(0.5)))
    with pytest.raises(ShapeMismatch):
        internal_scattering(sample(TruncatedSeries(np.zeros((1, 2, 2)))), sc.phi, sc.psi)


# ------------------------------------------------------------ regular extensions

def test_extension_constant_half():
    ext = regular_extension(sample(_poly(0.5)), 0, 0)
    assert np.max(np.abs(ext.xi.values - XI_HALF[None])) < 1e-10
    assert ext.inner_residual() < 1e-10


def test_extension_half_zeta():
    g = BoundaryGrid()
    ext = regular_extension(sample(_poly(0, 0.5), g), 1, 0)
    c = ext.series("xi").coeffs
    want = np.zeros((2, 2, 2))
    want[0] = [[-0.5, 0], [S3, 0]]
    want[1] = [[0, S3], [0, 0.5]]
    assert c.shape[0] == 2
    assert np.max(np.abs(c - want)) < 1e-10
    assert ext.inner_residual() < 1e-10
    seq = ext.to_sequence()
    assert (seq.p, seq.q) == (2, 2)


def test_extension_needs_delay():
    with pytest.raises(AnalyticityViolated):
        regular_extension(sample(_poly(0, 0.5)), 0, 0)


def test_extension_rejects_non_inner_factor():
    with pytest.raises(NotInner):
        regular_extension(sample(_poly(0.5)), _poly(0.5), 0)
    with pytest.raises(NotInner):
        regular_extension(sample(_poly(0.5)), 0, _poly(0.1, 0.1))


def test_extension_accepts_series_factors():
    g = BoundaryGrid(256)
    a = 0.4
    blaschke = series_from_samples(_blaschke_samples(a, g).reshape(-1, 1, 1), g.M)
    ext = regular_extension(sample(_poly(0.5), g), blaschke, 0)
    assert ext.inner_residual() < 1e-10


# ------------------------------------------------------------ feasibility

def test_feasibility_examples():
    rep = darlington_feasibility(sample(_poly(0.5)))
    assert rep.verdict == "feasible" and rep.delays == (0, 0)
    rep = darlington_feasibility(sample(_poly(0, 0.5)))
    assert rep.verdict == "feasible" and rep.delays == (1, 0)
    assert rep.inner_residual < 1e-10
    rep = darlington_feasibility(sample(_poly(0.5, 0.5)))
    assert rep.verdict == "feasible"
    assert sum(rep.delays) <= 2
    assert rep.inner_residual < 1e-8
    assert rep.residual_right < 1e-8 and rep.residual_left < 1e-8


def test_feasibility_keeps_theta_block():
    theta = sample(_poly(0.5, 0.5))
    rep = darlington_feasibility(theta)
    xi = rep.extension.xi.values
    assert np.array_equal(xi[:, 1:, 1:], theta.values)


def test_feasibility_delay_bound_too_small():
    rep = darlington_feasibility(sample(_poly(0, 0, 0.5)), delay_bound=1)
    assert rep.verdict == "no_inner_pair_found"
    assert rep.tail > 0.1
    assert darlington_feasibility(sample(_poly(0, 0, 0.5)), delay_bound=2).verdict == "feasible"


def test_feasibility_inner_theta():
    rep = darlington_feasibility(sample(_poly(0, 1)))
    assert rep.verdict == "feasible"
    assert np.allclose(rep.extension.xi.values[:, 0, 0], BoundaryGrid().points)


def test_feasibility_json():
    js = darlington_feasibility(sample(_poly(0, 0.5))).to_json()
    assert set(js) == {"residual_right", "residual_left", "delays", "verdict", "inner_residual"}
    assert js["delays"] == [1, 0]


# ------------------------------------------------------------ loss metric

def test_loss_metric_examples():
    a, b, m = loss_metric(sample(_poly(0, 1)))
    assert max(a, b, m) < 1e-7
    assert np.allclose(loss_metric(sample(_poly(0))), (1, 1, 1))
    assert np.allclose(loss_metric(sample(_poly(0.5))), (S3, S3, S3))


# ------------------------------------------------------------ scalar multiples

def test_scalar_multiple_identity():
    g = BoundaryGrid(256)
    theta = BoundarySamples(g.points[:, None, None] * np.eye(2)[None], g)
    delta, nu = scalar_multiple(theta)
    assert np.allclose(delta.coeffs.ravel(), [0, 0, 1], atol=1e-12)
    assert np.allclose(nu.coeffs[1], np.eye(2)) and nu.coeffs.shape[0] == 2


def test_scalar_multiple_diag_blaschke():
    g = BoundaryGrid(256)
    a, c = 0.5, -0.3j
    ba, bc = _blaschke_samples(a, g), _blaschke_samples(c, g)
    vals = np.zeros((g.M, 2, 2), dtype=complex)
    vals[:, 0, 0], vals[:, 1, 1] = ba, bc
    res = scalar_multiple(BoundarySamples(vals, g))
    assert res.degree == 2
    assert res.residual < 1e-9
    assert np.max(np.abs(res.delta_samples.values[:, 0, 0] - ba * bc)) < 1e-12
    assert np.max(np.abs(res.nu_samples.values[:, 0, 0] - bc)) < 1e-12
    assert np.max(np.abs(res.nu_samples.values[:, 1, 1] - ba)) < 1e-12
    assert res.nu_inner_residual < 1e-9


def test_scalar_multiple_random_colligation(rng):
    for h in (1, 2, 3):
        d = random_colligation(h, 2, rng)
        res = scalar_multiple(d, BoundaryGrid(512))
        assert res.residual < 1e-9
        assert res.degree <= h
        assert res.nu_inner_residual < 1e-8


def test_scalar_multiple_errors():
    g = BoundaryGrid(16)
    with pytest.raises(ShapeMismatch):
        scalar_multiple(BoundarySamples(np.zeros((16, 1, 2)), g))
    with pytest.raises(DeterminantVanishesIdentically):
        scalar_multiple(BoundarySamples(np.zeros((16, 2, 2)), g))


# ------------------------------------------------------------ pseudocontinuation

def test_pseudocontinuation_rational():
    assert pseudocontinuation_check(_poly(0, 0.5)).residual < 1e-12
    rep = pseudocontinuation_check(_poly(-0.5, 1), [1, -0.5])
    assert rep.residual < 1e-10
    assert rep.verdict == "rational witness"


def test_pseudocontinuation_singular_inner_has_no_witness():
    # Taylor coefficients of exp((z+1)/(z-1)) from a Cauchy integral on |z| = 1/2
    n = 64
    z = 0.5 * np.exp(2j * np.pi * np.arange(n) / n)
    coeffs = np.fft.fft(np.exp((z + 1) / (z - 1))) / n / 0.5 ** np.arange(n)
    num = TruncatedSeries(coeffs[:21].reshape(-1, 1, 1))
    g = BoundaryGrid()
    t = g.points
    safe = np.where(np.abs(t - 1) < 1e-12, 2.0, t - 1)
    vals = np.where(np.abs(t - 1) < 1e-12, 0.0, np.exp((t + 1) / safe))
    rep = pseudocontinuation_check(num, inner=BoundarySamples(vals.reshape(-1, 1, 1), g))
    assert rep.verdict == "no rational witness"
    assert rep.residual > 0.5


def test_pseudocontinuation_denominator_errors():
    with pytest.raises(DenominatorVanishes):
        pseudocontinuation_check(_poly(1), [1, -2])
    with pytest.raises(DenominatorVanishes):
        pseudocontinuation_check(_poly(1), [0, 0])


# ------------------------------------------------------------ helpers

def test_series_from_samples_trims():
    g = BoundaryGrid(64)
    s = series_from_samples(sample(_poly(1, 2, 3), g).values, g.M)
    assert np.allclose(s.coeffs.ravel(), [1, 2, 3])


def test_inner_samples_of_extension_are_unitary():
    ext = regular_extension(sample(_poly(0, 0.5)), 1, 0)
    assert inner_check(ext.xi, "two_sided") < 1e-10
    assert _sup(ext.xi.values) == pytest.approx(1)
