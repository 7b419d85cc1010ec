"""Boundary values on a uniform grid of the unit circle, defect functions and
outer (largest-minorant) spectral factors.

Given a Hermitian ``N^2(t) >= 0`` sampled on ``t_m = exp(2 pi i m / M)``,
:func:`outer_factor` returns an outer ``phi`` with ``phi^* phi <= N^2`` on
the circle, with equality when ``log det`` of the rank-``r`` compression is
integrable. Three routes are used:

* scalar trigonometric polynomials: Fejer-Riesz root selection, which stays
  exact when ``N^2`` has zeros on the circle;
* other scalar symbols: exponential of the analytic part of ``log N``;
* matrix symbols: Wilson's Newton iteration on the grid.

The unitary freedom ``phi -> u phi`` is fixed by making ``phi(0)`` lower
triangular (aligned with its trailing columns when ``r < q``) with a
nonnegative real diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .colligation import UnitaryColligation, char_function
from .errors import FactorizationDiverged, NotContractiveOnCircle, NotPSD, RankUnstable, ShapeMismatch
from .linalg import DEFAULT_TOL, adjoint, range_basis
from .schur import SchurSequence, TruncatedSeries

__all__ = [
    "BoundaryGrid",
    "BoundarySamples",
    "OuterFactor",
    "sample",
    "defect_pointwise",
    "outer_factor",
    "star_outer_factor",
    "defect_function",
    "iterated_defect",
    "analyticity_report",
    "inner_check",
    "gauge_unitary",
    "loewner_grid_leq",
]


@dataclass(frozen=True)
class BoundaryGrid:
    M: int = 1024

    def __post_init__(self):
        if self.M < 4 or self.M & (self.M - 1):
            raise ValueError(f"grid size must be a power of two >= 4, got {self.M}")

    @property
    def points(self):
        return np.exp(2j * np.pi * np.arange(self.M) / self.M)


def _batched_adjoint(v):
    return np.conj(np.swapaxes(v, -1, -2))


@dataclass(frozen=True, eq=False)
class BoundarySamples:
    """Values ``(M, p, q)`` of a matrix function at the grid points."""

    values: np.ndarray
    grid: BoundaryGrid = field(default_factory=BoundaryGrid)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 3 or v.shape[0] != self.grid.M:
            raise ShapeMismatch(f"expected values of shape ({self.grid.M}, p, q), got {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def M(self):
        return self.grid.M

    @property
    def p(self):
        return self.values.shape[1]

    @property
    def q(self):
        return self.values.shape[2]

    def fourier(self):
        """All discrete Fourier coefficients; index ``k`` holds ``k mod M``."""
        return np.fft.fft(self.values, axis=0) / self.M

    def coefficient(self, k):
        return self.fourier()[k % self.M]

    def adjoint(self):
        return BoundarySamples(_batched_adjoint(self.values), self.grid)

    def associate(self):
        """Samples of ``t -> f(conj t)^*``."""
        idx = (-np.arange(self.M)) % self.M
        return BoundarySamples(_batched_adjoint(self.values[idx]), self.grid)

    def __matmul__(self, other):
        return BoundarySamples(self.values @ other.values, self.grid)

    def sup_norm(self):
        if self.values.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.values, ord=2, axis=(1, 2))))

    def csv_rows(self):
        """``m, t_re, t_im`` followed by the row-major entries (re, im pairs)."""
        rows = []
        for m, t in enumerate(self.grid.points):
            row = [m, float(t.real), float(t.imag)]
            for z in self.values[m].ravel():
                row.extend([float(z.real), float(z.imag)])
            rows.append(row)
        return rows


@dataclass(frozen=True, eq=False)
class OuterFactor:
    """Outer factor ``phi`` (``r x q``) with coefficients and grid samples."""

    rank: int
    coeffs: TruncatedSeries
    samples: BoundarySamples
    method: str
    residual: float
    excluded: tuple = ()
    log_integrable: bool = True

    @property
    def is_empty(self):
        return self.rank == 0

    def evaluate(self, z):
        return self.coeffs.evaluate(z)


def _poly_samples(coeffs, grid):
    """Values of ``sum_k coeffs[k] t^k`` on the grid (exact for degree < M)."""
    c = np.asarray(coeffs)
    M = grid.M
    if c.shape[0] > M:
        raise ValueError("polynomial degree must be below the grid size")
    pad = np.zeros((M,) + c.shape[1:], dtype=complex)
    pad[: c.shape[0]] = c
    return np.fft.ifft(pad, axis=0) * M


def sample(source, grid=None):
    """Sample a Schur sequence (partial sum), truncated series, colligation or
    callable on the grid."""
    grid = grid or BoundaryGrid()
    if isinstance(source, SchurSequence):
        return BoundarySamples(_poly_samples(source.coeffs, grid), grid)
    if isinstance(source, TruncatedSeries):
        return BoundarySamples(_poly_samples(source.coeffs, grid), grid)
    if isinstance(source, UnitaryColligation):
        vals = np.stack([char_function(source, t) for t in grid.points])
        return BoundarySamples(vals, grid)
    if callable(source):
        vals = []
        for t in grid.points:
            v = np.asarray(source(t), dtype=complex)
            vals.append(v.reshape(1, 1) if v.ndim == 0 else v)
        return BoundarySamples(np.stack(vals), grid)
    raise TypeError(f"cannot sample {type(source).__name__}")


def _psd_sqrt_batched(a, tol):
    a = 0.5 * (a + _batched_adjoint(a))
    w, v = np.linalg.eigh(a)
    if w.size and w.min() < -tol.psd_tol:
        raise NotPSD(f"smallest eigenvalue {w.min():.3e} is below -psd_tol")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w[:, None, :]) @ _batched_adjoint(v)


def defect_pointwise(samples, tol=DEFAULT_TOL):
    """Pointwise ``Pi = (I - theta^* theta)^{1/2}`` and ``Sigma = (I - theta theta^*)^{1/2}``."""
    v = samples.values
    if samples.sup_norm() > 1 + tol.psd_tol:
        raise NotContractiveOnCircle(f"sup norm {samples.sup_norm():.6g} exceeds 1")
    p, q = samples.p, samples.q
    vh = _batched_adjoint(v)
    try:
        pi = _psd_sqrt_batched(np.eye(q) - vh @ v, tol)
        sigma = _psd_sqrt_batched(np.eye(p) - v @ vh, tol)
    except NotPSD as exc:
        raise NotContractiveOnCircle(str(exc)) from None
    return BoundarySamples(pi, samples.grid), BoundarySamples(sigma, samples.grid)


def gauge_unitary(phi0):
    """Unitary ``u`` making ``u phi0`` lower triangular along its trailing
    ``r`` columns with a nonnegative real diagonal."""
    phi0 = np.asarray(phi0, dtype=complex)
    r, q = phi0.shape
    if r == 0:
        return np.zeros((0, 0), dtype=complex)
    qm, rm = np.linalg.qr(phi0[:, ::-1], mode="complete")
    d = np.diag(rm)
    phase = np.ones(r, dtype=complex)
    nz = np.abs(d) > 0
    phase[: d.shape[0]][nz] = d[nz] / np.abs(d[nz])
    return adjoint(qm * phase[None, :])[::-1]


def _empty_factor(q, grid, residual, excluded=(), log_integrable=True):
    zero = np.zeros((1, 0, q), dtype=complex)
    return OuterFactor(
        rank=0,
        coeffs=TruncatedSeries(zero),
        samples=BoundarySamples(np.zeros((grid.M, 0, q), dtype=complex), grid),
        method="empty",
        residual=residual,
        excluded=tuple(excluded),
        log_integrable=log_integrable,
    )


def _trig_degree(gamma, M, tol=1e-13):
    """Degree ``d`` if the Fourier coefficients vanish beyond ``d <= M/4``."""
    mags = np.abs(gamma)
    scale = max(mags.max(), 1e-300)
    ks = np.arange(M)
    signed = np.where(ks <= M // 2, ks, ks - M)
    big = np.abs(signed)[mags > tol * scale]
    d = int(big.max()) if big.size else 0
    return d if d <= M // 4 else None


def _fejer_riesz(gamma, M, d, cluster=2e-2):
    """Outer polynomial ``phi`` with ``|phi(t)|^2 = sum_k gamma_k t^k``.

    Roots of ``z^d N(z)`` come in pairs ``(r, 1/conj r)``; the pair member
    outside the disk is kept. A zero of ``N`` on the circle is a root of even
    multiplicity that splits under rounding, so near-unimodular roots are
    clustered; when ``N`` really vanishes at the cluster centroid the cluster
    is replaced by half as many copies of the centroid pushed onto the
    circle, otherwise its members are treated as ordinary reflection pairs.
    """
    if d == 0:
        return np.array([np.sqrt(max(gamma[0].real, 0.0))], dtype=complex)
    desc = np.array([gamma[k % M] for k in range(d, -d - 1, -1)])
    scale = float(np.sum(np.abs(desc)))

    def symbol(t):
        return abs(np.polyval(desc, t) / t ** d)

    roots = np.roots(desc)
    near = np.abs(np.abs(roots) - 1.0) < cluster
    keep = list(roots[(~near) & (np.abs(roots) > 1.0)])
    pending = list(roots[near])
    while pending:
        group = [pending.pop(0)]
        grew = True
        while grew:
            grew = False
            for r in list(pending):
                if min(abs(r - g) for g in group) < cluster:
                    group.append(r)
                    pending.remove(r)
                    grew = True
        centre = np.mean(group)
        centre /= abs(centre)
        if len(group) % 2 == 0 and symbol(centre) <= 1e-9 * scale:
            keep.extend([centre] * (len(group) // 2))
        else:
            keep.extend(r for r in group if abs(r) >= 1.0)
    keep = np.array(keep, dtype=complex)
    if keep.shape[0] != d:
        raise FactorizationDiverged("root pairing failed; symbol may be negative somewhere")
    asc = np.poly(keep)[::-1]
    t = np.exp(2j * np.pi * np.arange(M) / M)
    target = np.real(np.fft.ifft(gamma) * M)
    base = np.abs(np.polyval(asc[::-1], t)) ** 2
    kappa2 = float(np.dot(target, base) / np.dot(base, base))
    phi = np.sqrt(max(kappa2, 0.0)) * asc
    if abs(phi[0]) > 0:
        phi *= np.conj(phi[0]) / abs(phi[0])
    return phi


def _cepstral(nsq, M, floor):
    """Outer scalar function with modulus ``sqrt(nsq)`` on the grid."""
    half_log = 0.5 * np.log(np.maximum(nsq, floor))
    c = np.fft.fft(half_log) / M
    h = np.zeros(M, dtype=complex)
    h[0] = c[0].real
    h[1: M // 2] = 2 * c[1: M // 2]
    h[M // 2] = c[M // 2]
    return np.exp(np.fft.ifft(h) * M)


def _plus(g, M):
    """Analytic part of a matrix function on the grid, half of the zero lag."""
    coef = np.fft.fft(g, axis=0) / M
    coef[0] *= 0.5
    coef[M // 2:] = 0.0
    return np.fft.ifft(coef, axis=0) * M


def _wilson(s, M, max_iter=500, tol=1e-13):
    """Analytic ``A`` with ``A A^* = s`` on the grid (Newton iteration)."""
    r = s.shape[1]
    mean = 0.5 * (s.mean(axis=0) + adjoint(s.mean(axis=0)))
    psi = np.broadcast_to(np.linalg.cholesky(mean), s.shape).astype(complex)
    ident = np.eye(r)
    for it in range(max_iter):
        inv = np.linalg.inv(psi)
        g = inv @ s @ _batched_adjoint(inv) + ident
        new = psi @ _plus(g, M)
        if not np.all(np.isfinite(new)):
            raise FactorizationDiverged("Wilson iteration produced non-finite values")
        change = np.max(np.abs(new - psi)) / max(1.0, np.max(np.abs(new)))
        psi = new
        if change < tol:
            return psi, it + 1
    raise FactorizationDiverged(f"Wilson iteration did not converge in {max_iter} steps")


def _pointwise_ranks(a, tol):
    w = np.linalg.eigvalsh(a)
    scale = max(float(w.max()), 0.0) if w.size else 0.0
    if scale <= 0:
        return np.zeros(a.shape[0], dtype=int), scale
    return np.sum(w > tol.rank_tol * scale, axis=1), scale


def outer_factor(nsq, tol=DEFAULT_TOL, max_iter=500):
    """Largest outer minorant ``phi`` of a Hermitian ``q x q`` symbol ``N^2``.

    Parameters
    ----------
    nsq : BoundarySamples
        Hermitian PSD values ``N^2(t_m)``.

    Returns
    -------
    OuterFactor
        ``rank`` is the a.e. rank ``r`` of ``N^2``; ``residual`` is the grid
        maximum of ``||phi^* phi - N^2||`` over the points whose rank equals
        ``r``; those that differ are listed in ``excluded``.

    Notes
    -----
    If the rank drops on more than 1/16 of the grid, the drop is treated as
    a set of positive measure. For ``r = 1`` the log is then not integrable
    and the largest minorant is zero; for ``r > 1`` the split is not resolved
    and :class:`RankUnstable` is raised. A range that moves from point to
    point also raises :class:`RankUnstable`.
    """
    grid = nsq.grid
    M, q = grid.M, nsq.q
    if nsq.p != q:
        raise ShapeMismatch("N^2 must be square")
    a = 0.5 * (nsq.values + _batched_adjoint(nsq.values))
    w = np.linalg.eigvalsh(a) if q else np.zeros((M, 0))
    if w.size and w.min() < -tol.psd_tol:
        raise NotPSD(f"N^2 has eigenvalue {w.min():.3e} below -psd_tol")
    ranks, scale = _pointwise_ranks(a, tol) if q else (np.zeros(M, dtype=int), 0.0)
    if scale <= tol.rank_tol:
        return _empty_factor(q, grid, scale)
    counts = np.bincount(ranks, minlength=q + 1)
    r = int(np.argmax(counts[::-1]))
    r = q - r  # ties resolved toward the larger rank
    excluded = np.nonzero(ranks != r)[0]
    if r == 0:
        return _empty_factor(q, grid, float(np.max(w)), excluded, log_integrable=False)
    if excluded.size > M // 16:
        if r == 1 and q >= 1:
            resid = float(np.max(np.linalg.norm(a, ord=2, axis=(1, 2))))
            return _empty_factor(q, grid, resid, excluded, log_integrable=False)
        raise RankUnstable(f"rank differs from {r} on {excluded.size} of {M} grid points")
    good = np.ones(M, dtype=bool)
    good[excluded] = False
    if r == q:
        basis = np.eye(q, dtype=complex)
    else:
        basis = range_basis(a[good].sum(axis=0), tol)
        if basis.shape[1] != r:
            raise RankUnstable(f"range of N^2 moves along the circle (span dim {basis.shape[1]} > rank {r})")
    comp = adjoint(basis)[None] @ a @ basis[None]

    if r == 1:
        n = comp[:, 0, 0].real
        gamma = np.fft.fft(n) / M
        d = _trig_degree(gamma, M)
        if d is not None:
            poly = _fejer_riesz(gamma, M, d)
            coeffs_c = poly.reshape(-1, 1, 1)
            samples_c = _poly_samples(coeffs_c, grid)
            method = "fejer-riesz"
        else:
            vals = _cepstral(n, M, tol.rank_tol * scale)
            samples_c = vals.reshape(M, 1, 1)
            coeffs_c = (np.fft.fft(samples_c, axis=0) / M)[: M // 2]
            method = "cepstral"
    else:
        s = comp.copy()
        if excluded.size:
            s[excluded] += tol.rank_tol * scale * np.eye(r)
        # phi^* phi = s  <=>  A A^* = s(conj t) with A(z) = phi(conj z)^*
        idx = (-np.arange(M)) % M
        A, _ = _wilson(s[idx], M, max_iter=max_iter)
        samples_c = _batched_adjoint(A[idx])
        coeffs_c = (np.fft.fft(samples_c, axis=0) / M)[: M // 2]
        method = "wilson"

    coeffs = coeffs_c @ adjoint(basis)[None]
    samples = samples_c @ adjoint(basis)[None]
    u = gauge_unitary(coeffs[0])
    coeffs = u[None] @ coeffs
    samples = u[None] @ samples
    diff = _batched_adjoint(samples) @ samples - a
    resid = float(np.max(np.linalg.norm(diff[good], ord=2, axis=(1, 2)))) if good.any() else 0.0
    return OuterFactor(
        rank=r,
        coeffs=TruncatedSeries(coeffs),
        samples=BoundarySamples(samples, grid),
        method=method,
        residual=resid,
        excluded=tuple(int(i) for i in excluded),
    )


def star_outer_factor(nsq, tol=DEFAULT_TOL, max_iter=500):
    """Largest *-outer minorant ``psi`` (``p x r``) with ``psi psi^* <= N^2``.

    Factor the associate symbol ``t -> N^2(conj t)`` and re-associate:
    ``psi(z) = phi(conj z)^*``.
    """
    assoc = nsq.associate()
    f = outer_factor(assoc, tol, max_iter)
    return OuterFactor(
        rank=f.rank,
        coeffs=f.coeffs.adjoint_coeffs(),
        samples=f.samples.associate(),
        method=f.method,
        residual=f.residual,
        excluded=tuple(sorted((-i) % nsq.M for i in f.excluded)),
        log_integrable=f.log_integrable,
    )


def defect_function(theta, side="right", tol=DEFAULT_TOL):
    """Right defect function (outer minorant of ``I - theta^* theta``) or
    left one (*-outer minorant of ``I - theta theta^*``)."""
    v = theta.values
    if theta.sup_norm() > 1 + tol.psd_tol:
        raise NotContractiveOnCircle(f"sup norm {theta.sup_norm():.6g} exceeds 1")
    if side == "right":
        nsq = np.eye(theta.q) - _batched_adjoint(v) @ v
        return outer_factor(BoundarySamples(nsq, theta.grid), tol)
    if side == "left":
        nsq = np.eye(theta.p) - v @ _batched_adjoint(v)
        return star_outer_factor(BoundarySamples(nsq, theta.grid), tol)
    raise ValueError(f"side must be 'right' or 'left', got {side!r}")


def iterated_defect(theta, word, tol=DEFAULT_TOL):
    """Apply :func:`defect_function` along ``word`` (letters ``r`` / ``l``).

    Returns the list of factors ``[theta_x, theta_xy, ...]``.
    """
    chain = []
    current = theta
    for letter in word:
        if letter not in "rl":
            raise ValueError(f"word may only contain 'r' and 'l', got {letter!r}")
        f = defect_function(current, "right" if letter == "r" else "left", tol)
        chain.append(f)
        current = f.samples
    return chain


def analyticity_report(samples):
    """Largest negative-frequency Fourier coefficient and all coefficients.

    Returns
    -------
    (tail, coeffs)
        ``tail`` is ``max_{k<0} ||coeff_k||`` (including ``k = -M/2``);
        ``coeffs`` is indexed by ``k mod M``.
    """
    coeffs = samples.fourier()
    M = samples.M
    neg = coeffs[M // 2:]
    if neg.size == 0:
        return 0.0, coeffs
    return float(np.max(np.linalg.norm(neg, ord=2, axis=(1, 2)))), coeffs


def inner_check(samples, side="inner", tol=DEFAULT_TOL):
    """Grid residual of ``I - theta^*theta`` (inner), ``I - theta theta^*``
    (star_inner) or both (two_sided), combined with the negative tail."""
    v = samples.values
    vh = _batched_adjoint(v)
    res = []
    if side in ("inner", "two_sided"):
        d = np.eye(samples.q) - vh @ v
        res.append(float(np.max(np.linalg.norm(d, ord=2, axis=(1, 2)))) if d.size else 0.0)
    if side in ("star_inner", "two_sided"):
        d = np.eye(samples.p) - v @ vh
        res.append(float(np.max(np.linalg.norm(d, ord=2, axis=(1, 2)))) if d.size else 0.0)
    if not res:
        raise ValueError(f"unknown side {side!r}")
    tail, _ = analyticity_report(samples)
    return max(res + [tail])


def loewner_grid_leq(a, b, tol=DEFAULT_TOL):
    """Pointwise ``a(t) <= b(t)`` on the grid; returns the worst eigenvalue."""
    d = b.values - a.values
    w = np.linalg.eigvalsh(0.5 * (d + _batched_adjoint(d)))
    return float(w.min()) if w.size else 0.0

