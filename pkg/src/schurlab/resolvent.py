"""Resolvent matrices of the nondegenerate Schur problem and the linear
fractional maps that parametrize its solutions.

Spaces are ordered ``F (+) G`` (input first) for the kind ``B`` resolvent and
``G (+) F`` for the kind ``B_tilde`` one; ``q = dim F``, ``p = dim G``.

``B_n`` is a matrix polynomial in ``1/z`` of degree ``n + 1`` (pole at 0).
``B~_n`` is obtained from it through the swap-conjugation

    B~_n(z) = Q^{-1} j B_n(z)^{-1} j Q = Q^{-1} B_n(1/conj z)^* Q,

which makes it a polynomial in ``z`` of the same degree.  Both are stored
by their coefficient lists, so evaluation is exact polynomial arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NonContractiveParameter,
    NotASolution,
    OnCircle,
    PoleEvaluation,
    ShapeMismatch,
    SingularDenominator,
)
from .linalg import DEFAULT_TOL, adjoint, as_matrix, block_diag, eye, opnorm
from .schur import (
    SchurSequence,
    TruncatedSeries,
    block_toeplitz,
    contraction_margin,
    require_nondegenerate,
    schur_parameters,
)

__all__ = [
    "signature",
    "swap_operator",
    "vandermonde_row",
    "InformationMatrix",
    "information_matrix",
    "ResolventMatrix",
    "resolvent_B",
    "resolvent_Btilde",
    "binomial_factor",
    "product_check",
    "jform_defect",
    "lft_apply",
    "lft_apply_left",
    "lft_series",
    "lft_invert",
]


def signature(kind, p, q):
    """``j = diag(-I_q, I_p)`` on F(+)G or ``j~ = diag(-I_p, I_q)`` on G(+)F."""
    if kind == "j":
        return block_diag(-eye(q), eye(p))
    if kind == "j_tilde":
        return block_diag(-eye(p), eye(q))
    raise ValueError(f"unknown signature kind {kind!r}")


def swap_operator(p, q):
    """``Q : G(+)F -> F(+)G``, ``(g, f) -> (f, g)``; it is a permutation, so
    ``Q^{-1} = Q^T``."""
    Q = np.zeros((q + p, p + q), dtype=complex)
    Q[:q, p:] = eye(q)
    Q[q:, :p] = eye(p)
    return Q


def vandermonde_row(m, n, z):
    """``(I, zI, ..., z^n I)`` as an ``m x (n+1)m`` matrix."""
    powers = np.asarray([complex(z) ** k for k in range(n + 1)])
    return np.kron(powers.reshape(1, -1), eye(m))


@dataclass(frozen=True, eq=False)
class InformationMatrix:
    kind: str
    n: int
    p: int
    q: int
    matrix: np.ndarray


def _inverse_defect(seq):
    c = block_toeplitz(seq).matrix
    return c, np.linalg.inv(eye(c.shape[0]) - c @ adjoint(c))


def information_matrix(seq, kind="H", tol=DEFAULT_TOL):
    """``H_n`` (on F^{n+1}(+)G^{n+1}) or ``H~_n`` (on G^{n+1}(+)F^{n+1}).

    ``H_n = col(C^*, I) X row(C, I)`` and ``H~_n = col(I, C^*) X row(I, C)``
    with ``X = (I - C C^*)^{-1}``.
    """
    require_nondegenerate(seq, tol)
    c, x = _inverse_defect(seq)
    ident = eye(c.shape[0])
    if kind == "H":
        left = np.vstack([adjoint(c), ident])
        right = np.hstack([c, ident])
    elif kind == "H_tilde":
        left = np.vstack([ident, adjoint(c)])
        right = np.hstack([ident, c])
    else:
        raise ValueError(f"unknown information matrix kind {kind!r}")
    h = left @ x @ right
    return InformationMatrix(kind, seq.n, seq.p, seq.q, 0.5 * (h + adjoint(h)))


def _selector(p, q, n, k):
    """``E_k`` with ``diag(Lambda_F(z), Lambda_G(z)) = sum_k z^k E_k``."""
    e = np.zeros((1, n + 1))
    e[0, k] = 1.0
    return block_diag(np.kron(e, eye(q)), np.kron(e, eye(p)))


class ResolventMatrix:
    """Matrix polynomial with signature metadata.

    Kind ``B`` stores ``D_0..D_{n+1}`` with ``B(z) = sum_m D_m z^{-m}``;
    kind ``B_tilde`` stores ``D~_m`` with ``B~(z) = sum_m D~_m z^m``.
    Binomial factors are the ``n = 0`` case and carry their parameter.
    """

    def __init__(self, kind, n, p, q, coeffs, seq=None, parameter=None):
        if kind not in ("B", "B_tilde"):
            raise ValueError(f"unknown resolvent kind {kind!r}")
        self.kind = kind
        self.n = n
        self.p = p
        self.q = q
        c = np.array(coeffs, dtype=complex)
        c.flags.writeable = False
        self.coeffs = c
        self.seq = seq
        self.parameter = parameter

    def __repr__(self):
        return f"ResolventMatrix(kind={self.kind!r}, n={self.n}, p={self.p}, q={self.q})"

    @property
    def size(self):
        return self.p + self.q

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    @property
    def signature(self):
        return signature("j" if self.kind == "B" else "j_tilde", self.p, self.q)

    def __call__(self, z):
        z = complex(z)
        if self.kind == "B":
            if z == 0:
                raise PoleEvaluation("B has its pole at z = 0")
            w = 1.0 / z
        else:
            w = z
        acc = np.zeros((self.size, self.size), dtype=complex)
        for c in self.coeffs[::-1]:
            acc = acc * w + c
        return acc

    def scaled_polynomial(self, z):
        """``z^{n+1} B(z)`` for kind ``B`` (a polynomial in ``z``, defined at 0);
        plain value for kind ``B_tilde``."""
        if self.kind == "B_tilde":
            return self(z)
        z = complex(z)
        acc = np.zeros((self.size, self.size), dtype=complex)
        for c in self.coeffs:
            acc = acc * z + c
        return acc

    def split(self, m):
        """Partition a full-size matrix into the four blocks ``a, b, c, d``."""
        k = self.q if self.kind == "B" else self.p
        return m[:k, :k], m[:k, k:], m[k:, :k], m[k:, k:]

    def blocks(self, z):
        return self.split(self(z))

    def inverse_scaled_polynomial(self, z):
        """``z^{n+1} B~(z)^{-1}`` for kind ``B_tilde``; polynomial in ``z``.

        Uses ``B~(z)^{-1} = j~ B~(1/conj z)^* j~``.
        """
        if self.kind != "B_tilde":
            raise ValueError("defined for kind B_tilde only")
        z = complex(z)
        acc = np.zeros((self.size, self.size), dtype=complex)
        for c in self.coeffs:
            acc = acc * z + adjoint(c)
        jt = self.signature
        return jt @ acc @ jt


def _coeffs_B(seq):
    """Coefficients ``D_m`` of ``B_n(z) = sum_m D_m z^{-m}``.

    Writing ``B_n(z) = I + (1/z - 1) j diag(Lambda_F(1), Lambda_G(1)) H_n
    diag(Lambda_F(1/conj z), Lambda_G(1/conj z))^*`` and expanding the last
    factor in powers of ``1/z`` gives a telescoping sum.
    """
    p, q, n = seq.p, seq.q, seq.n
    h = information_matrix(seq, "H").matrix
    j = signature("j", p, q)
    row_one = sum(_selector(p, q, n, k) for k in range(n + 1))
    left = j @ row_one @ h
    g = [left @ adjoint(_selector(p, q, n, k)) for k in range(n + 1)]
    d = np.zeros((n + 2, p + q, p + q), dtype=complex)
    d[0] = eye(p + q) - g[0]
    for m in range(1, n + 1):
        d[m] = g[m - 1] - g[m]
    d[n + 1] = g[n]
    return d


def resolvent_B(seq, tol=DEFAULT_TOL):
    """Resolvent matrix ``B_n`` (pole at 0, ``B_n(1) = I``) of nondegenerate data."""
    require_nondegenerate(seq, tol)
    return ResolventMatrix("B", seq.n, seq.p, seq.q, _coeffs_B(seq), seq=seq)


def _tilde_from_B(rb):
    Q = swap_operator(rb.p, rb.q)
    coeffs = np.array([Q.T @ adjoint(c) @ Q for c in rb.coeffs])
    return ResolventMatrix("B_tilde", rb.n, rb.p, rb.q, coeffs, seq=rb.seq, parameter=rb.parameter)


def resolvent_Btilde(seq, tol=DEFAULT_TOL):
    """Resolvent matrix ``B~_n`` (polynomial in ``z``, ``B~_n(1) = I``)."""
    return _tilde_from_B(resolvent_B(seq, tol))


def binomial_factor(parameter, kind="b", tol=DEFAULT_TOL):
    """Degree-one factor built from a single strictly contractive parameter.

    Kind ``b`` is ``I + ((1-z)/z) j col(c^*, I) (I - c c^*)^{-1} row(c, I)``,
    i.e. the resolvent of the one-term data ``(c)``; kind ``b_tilde`` is its
    swap-conjugate.
    """
    c = as_matrix(parameter)
    margin = contraction_margin(c)
    if margin <= tol.psd_tol:
        raise NonContractiveParameter(f"parameter is not a strict contraction (margin {margin:.3e})")
    seq = SchurSequence([c])
    rb = ResolventMatrix("B", 0, seq.p, seq.q, _coeffs_B(seq), seq=seq, parameter=c)
    if kind == "b":
        return rb
    if kind == "b_tilde":
        return _tilde_from_B(rb)
    raise ValueError(f"unknown binomial factor kind {kind!r}")


def _random_points(rng, count):
    r = np.sqrt(rng.uniform(0.05, 0.95, count))
    return r * np.exp(2j * np.pi * rng.uniform(size=count))


def product_check(seq, tol=DEFAULT_TOL, points=20, seed=0):
    """Compare ordered products of binomial factors with the resolvents.

    Returns a dict with the sup-norm deviations ``residual_B`` (for
    ``b_n ... b_0``) and ``residual_Btilde`` (for ``b~_0 ... b~_n``) over
    random interior points, plus ``residual`` = the larger one.
    """
    params = schur_parameters(seq, tol)
    rb = resolvent_B(seq, tol)
    rt = _tilde_from_B(rb)
    left = [binomial_factor(c, "b", tol) for c in params]
    right = [binomial_factor(c, "b_tilde", tol) for c in params]
    rng = np.random.default_rng(seed)
    res_b = res_t = 0.0
    for z in _random_points(rng, points):
        prod_b = eye(rb.size)
        for f in left:
            prod_b = f(z) @ prod_b
        prod_t = eye(rt.size)
        for f in right:
            prod_t = prod_t @ f(z)
        res_b = max(res_b, opnorm(prod_b - rb(z)) / (1 + opnorm(rb(z))))
        res_t = max(res_t, opnorm(prod_t - rt(z)) / (1 + opnorm(rt(z))))
    return {"residual_B": res_b, "residual_Btilde": res_t, "residual": max(res_b, res_t)}


def _lambda_diag(first, second, n, z):
    return block_diag(vandermonde_row(first, n, z), vandermonde_row(second, n, z))


def jform_defect(R, z, tol=DEFAULT_TOL):
    """Deviation from the J-form identity at ``z`` (``|z| != 1``).

    Kind ``B``:  ``(B^* j B - j)/(1-|z|^2) - |z|^{-2} L H L^*`` with
    ``L = diag(Lambda_F, Lambda_G)(1/conj z)``.
    Kind ``B_tilde``: ``(B~ j~ B~^* - j~)/(1-|z|^2) - L~ H~ L~^*`` with
    ``L~ = diag(Lambda_G, Lambda_F)(z)``.
    """
    z = complex(z)
    if abs(abs(z) - 1.0) <= tol.residual_tol:
        raise OnCircle(f"|z| = 1 at z = {z}")
    if R.seq is None:
        raise ValueError("resolvent carries no interpolation data")
    J = R.signature
    val = R(z)
    denom = 1.0 - abs(z) ** 2
    if R.kind == "B":
        h = information_matrix(R.seq, "H", tol).matrix
        lam = _lambda_diag(R.q, R.p, R.n, 1.0 / np.conj(z))
        return (adjoint(val) @ J @ val - J) / denom - (lam @ h @ adjoint(lam)) / abs(z) ** 2
    h = information_matrix(R.seq, "H_tilde", tol).matrix
    lam = _lambda_diag(R.p, R.q, R.n, z)
    return (val @ J @ adjoint(val) - J) / denom - lam @ h @ adjoint(lam)


def _param_value(w, z):
    if isinstance(w, TruncatedSeries):
        return w.evaluate(z)
    if callable(w):
        return as_matrix(w(z))
    return as_matrix(w)


def _solve_right(num, den, tol):
    """``num @ den^{-1}``."""
    if den.shape[0] and np.linalg.cond(den) * tol.rank_tol > 1.0:
        raise SingularDenominator("denominator of the linear fractional map is singular")
    return np.linalg.solve(den.T, num.T).T


def lft_apply(R, w, z, tol=DEFAULT_TOL):
    """``theta(z) = (a~ w + b~)(c~ w + d~)^{-1}`` for a kind ``B_tilde`` resolvent.

    ``w`` may be a constant matrix, a :class:`TruncatedSeries` or a callable.
    """
    if R.kind != "B_tilde":
        raise ValueError("lft_apply expects a B_tilde resolvent")
    wz = _param_value(w, z)
    if wz.shape != (R.p, R.q):
        raise ShapeMismatch(f"parameter has shape {wz.shape}, expected {(R.p, R.q)}")
    a, b, c, d = R.blocks(z)
    return _solve_right(a @ wz + b, c @ wz + d, tol)


def lft_apply_left(R, w, z, tol=DEFAULT_TOL):
    """``theta(z) = (w b + d)^{-1}(w a + c)`` for a kind ``B`` resolvent.

    The map is unchanged when ``B`` is multiplied by ``z^{n+1}``, so the
    polynomial ``z^{n+1} B(z)`` is used and ``z = 0`` is allowed.
    """
    if R.kind != "B":
        raise ValueError("lft_apply_left expects a B resolvent")
    wz = _param_value(w, z)
    if wz.shape != (R.p, R.q):
        raise ShapeMismatch(f"parameter has shape {wz.shape}, expected {(R.p, R.q)}")
    a, b, c, d = R.split(R.scaled_polynomial(z))
    den = wz @ b + d
    if den.shape[0] and np.linalg.cond(den) * tol.rank_tol > 1.0:
        raise SingularDenominator("denominator of the linear fractional map is singular")
    return np.linalg.solve(den, wz @ a + c)


def _poly_series(coeffs, order):
    """Matrix polynomial ``sum_m coeffs[m] z^m`` as a series of given order."""
    out = np.zeros((order + 1,) + coeffs.shape[1:], dtype=complex)
    k = min(order + 1, coeffs.shape[0])
    out[:k] = coeffs[:k]
    return TruncatedSeries(out)


def lft_series(R, w, order, tol=DEFAULT_TOL):
    """Taylor coefficients of ``(a~ w + b~)(c~ w + d~)^{-1}`` through ``order``."""
    if R.kind != "B_tilde":
        raise ValueError("lft_series expects a B_tilde resolvent")
    if not isinstance(w, TruncatedSeries):
        w = TruncatedSeries.constant(w)
    w = w.pad(order)
    p = R.p
    poly = _poly_series(R.coeffs, order)
    a = TruncatedSeries(poly.coeffs[:, :p, :p])
    b = TruncatedSeries(poly.coeffs[:, :p, p:])
    c = TruncatedSeries(poly.coeffs[:, p:, :p])
    d = TruncatedSeries(poly.coeffs[:, p:, p:])
    num = a @ w + b
    den = c @ w + d
    return num @ den.inverse(tol)


def lft_invert(R, theta, tol=DEFAULT_TOL):
    """Parameter ``w`` with ``theta = (a~ w + b~)(c~ w + d~)^{-1}``.

    With ``P(z) = z^{n+1} B~(z)^{-1}`` (a polynomial) the column
    ``[u; v] = P [theta; I]`` must vanish to order ``n + 1`` exactly when
    ``theta`` matches the data; then ``w = (u / z^{n+1})(v / z^{n+1})^{-1}``.
    The returned series has order ``theta.order - n - 1``.
    """
    if R.kind != "B_tilde":
        raise ValueError("lft_invert expects a B_tilde resolvent")
    if not isinstance(theta, TruncatedSeries):
        theta = TruncatedSeries(theta)
    if theta.shape != (R.p, R.q):
        raise ShapeMismatch(f"theta has shape {theta.shape}, expected {(R.p, R.q)}")
    k = R.n + 1
    order = theta.order
    if order < k:
        raise NotASolution(f"need at least {k + 1} coefficients of theta, got {order + 1}")
    jt = R.signature
    inv_coeffs = np.array([jt @ adjoint(c) @ jt for c in R.coeffs])
    # P(z) = sum_m inv_coeffs[m] z^{n+1-m}
    poly = _poly_series(inv_coeffs[::-1], order)
    p = R.p
    p11 = TruncatedSeries(poly.coeffs[:, :p, :p])
    p12 = TruncatedSeries(poly.coeffs[:, :p, p:])
    p21 = TruncatedSeries(poly.coeffs[:, p:, :p])
    p22 = TruncatedSeries(poly.coeffs[:, p:, p:])
    u = p11 @ theta + p12
    v = p21 @ theta + p22
    scale = (1.0 + max(opnorm(c) for c in inv_coeffs)) * (1.0 + max(opnorm(c) for c in theta.coeffs))
    low = max(max(opnorm(u[i]), opnorm(v[i])) for i in range(k))
    if low > tol.residual_tol * scale:
        raise NotASolution(f"theta does not match the data (low-order residual {low:.3e})")
    return u.shift_down(k) @ v.shift_down(k).inverse(tol)
