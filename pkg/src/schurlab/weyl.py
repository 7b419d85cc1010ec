"""Weyl matrices and the matrix balls of values of all solutions.

For nondegenerate data the values ``theta(z)`` of all solutions at a fixed
interior point fill the ball ``M + rho_l^{1/2} u rho_r^{1/2}``, ``||u|| <= 1``.
The left semi-radius shrinks like ``|z|^{2n+2}``; its normalized version

    rho_hat_l = rho_l / |z|^{2n+2}
              = [|z|^{2n+2} I + (1-|z|^2) V(z) X V(z)^*]^{-1}
              = [I + (1-|z|^2) V(z) C_n C_n^* X V(z)^*]^{-1},
    V(z) = (conj z^n I, ..., conj z I, I),  X = (I - C_n C_n^*)^{-1},

is computed from the last line (the geometric sum of the powers of
``|z|^2`` adds up to ``I``). It stays well conditioned for small ``|z|``,
is valid at ``z = 0`` and is exactly ``I`` for zero data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAtLevel, OutOfDomain, ShapeMismatch
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    adjoint,
    as_matrix,
    eye,
    hermitian_part,
    numerical_rank,
    opnorm,
)
from .resolvent import (
    _inverse_defect,
    information_matrix,
    resolvent_Btilde,
    signature,
    vandermonde_row,
)
from .schur import associate, classify, require_nondegenerate

__all__ = [
    "WeylMatrix",
    "WeylBall",
    "WeylLimit",
    "weyl_matrix",
    "weyl_ball",
    "membership",
    "duality_check",
    "det_check",
    "weyl_limit",
    "ball_from_resolvent_blocks",
]


@dataclass(frozen=True, eq=False)
class WeylMatrix:
    """Weyl matrix at one point with its blocks.

    Kind ``W`` (on F(+)G) is ``[[-R, S^*], [S, -T]]``; kind ``W_tilde`` (on
    G(+)F) is ``[[-R~, S~], [S~^*, -T~]]``.
    """

    kind: str
    n: int
    zeta: complex
    matrix: np.ndarray
    R: np.ndarray
    S: np.ndarray
    T: np.ndarray


@dataclass(frozen=True, eq=False)
class WeylBall:
    zeta: complex
    n: int
    center: np.ndarray
    rho_left: np.ndarray
    rho_right: np.ndarray
    rho_left_normalized: np.ndarray


@dataclass(frozen=True, eq=False)
class WeylLimit:
    zeta: complex
    center: np.ndarray
    rho_right: np.ndarray
    rho_left_normalized: np.ndarray
    n_reached: int
    converged: bool
    defect_rank_right: int
    defect_rank_left: int
    rank_unstable: bool
    rho_left_norm: float
    history: tuple


def _check_disk(z):
    z = complex(z)
    if not abs(z) < 1:
        raise OutOfDomain(f"z = {z} is not inside the unit disk")
    return z


def _prefix(seq, n):
    if n is None or n == seq.n:
        return seq
    return seq.prefix(n)


def weyl_matrix(seq, z, kind="W", tol=DEFAULT_TOL):
    """Weyl matrix of the data at ``z``.

    Kind ``W`` uses ``W = j - (1-|z|^2) j L H_n L^* j`` with
    ``L = diag(Lambda_F(z), Lambda_G(z))``, which avoids the pole of ``B_n``
    and is valid at ``z = 0``. Kind ``W_tilde`` is ``B~^{-*} j~ B~^{-1}`` and
    needs ``0 < |z| < 1``.
    """
    z = _check_disk(z)
    p, q, n = seq.p, seq.q, seq.n
    if kind == "W":
        h = information_matrix(seq, "H", tol).matrix
        j = signature("j", p, q)
        lam = np.vstack([
            np.hstack([vandermonde_row(q, n, z), np.zeros((q, (n + 1) * p))]),
            np.hstack([np.zeros((p, (n + 1) * q)), vandermonde_row(p, n, z)]),
        ])
        w = j - (1 - abs(z) ** 2) * (j @ lam @ h @ adjoint(lam) @ j)
        w = hermitian_part(w)
        return WeylMatrix("W", n, z, w, -w[:q, :q], w[q:, :q], -w[q:, q:])
    if kind == "W_tilde":
        if z == 0:
            raise OutOfDomain("W_tilde has a pole at z = 0")
        rt = resolvent_Btilde(seq, tol)
        inv = np.linalg.inv(rt(z))
        w = hermitian_part(adjoint(inv) @ rt.signature @ inv)
        return WeylMatrix("W_tilde", n, z, w, -w[:p, :p], w[:p, p:], -w[p:, p:])
    raise ValueError(f"unknown Weyl matrix kind {kind!r}")


def _rho_hat_left(seq, z):
    n, p = seq.n, seq.p
    c, x = _inverse_defect(seq)
    powers = np.array([np.conj(z) ** (n - k) for k in range(n + 1)])
    v = np.kron(powers.reshape(1, -1), eye(p))
    k = eye(p) + (1 - abs(z) ** 2) * (v @ c @ adjoint(c) @ x @ adjoint(v))
    return hermitian_part(np.linalg.inv(hermitian_part(k)))


def weyl_ball(seq, z, n=None, tol=DEFAULT_TOL):
    """Center and semi-radii of the ball of values at ``z`` of all solutions
    of the truncated problem with ``c_0..c_n``."""
    z = _check_disk(z)
    seq = _prefix(seq, n)
    require_nondegenerate(seq, tol)
    w = weyl_matrix(seq, z, "W", tol)
    rho_r = hermitian_part(np.linalg.inv(w.R))
    center = w.S @ rho_r
    rho_hat = _rho_hat_left(seq, z)
    rho_l = abs(z) ** (2 * seq.n + 2) * rho_hat
    return WeylBall(z, seq.n, center, rho_l, rho_r, rho_hat)


def _pinv_sqrt(a, tol):
    """Pseudo-inverse of the PSD square root together with the range projector."""
    a = hermitian_part(as_matrix(a))
    if a.shape[0] == 0:
        return a.copy(), a.copy()
    w, v = np.linalg.eigh(a)
    top = max(w[-1], 0.0)
    keep = w > tol.rank_tol * max(top, 1.0)
    inv_sqrt = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    vk = v[:, keep]
    return (v * inv_sqrt) @ adjoint(v), vk @ adjoint(vk)


def membership(ball, value, tol=DEFAULT_TOL):
    """True iff ``value`` lies in the closed ball within ``psd_tol``.

    The left radius is handled in normalized form, so the test keeps its
    accuracy when ``|z|^{2n+2}`` is tiny. At ``z = 0`` the ball is a point.
    """
    value = as_matrix(value)
    if value.shape != ball.center.shape:
        raise ShapeMismatch(f"value has shape {value.shape}, expected {ball.center.shape}")
    d = value - ball.center
    scale = abs(ball.zeta) ** (ball.n + 1)
    if scale == 0:
        return bool(opnorm(d) <= tol.residual_tol)
    left, proj_l = _pinv_sqrt(ball.rho_left_normalized, tol)
    right, proj_r = _pinv_sqrt(ball.rho_right, tol)
    p, q = d.shape
    if opnorm((eye(p) - proj_l) @ d) > tol.residual_tol or opnorm(d @ (eye(q) - proj_r)) > tol.residual_tol:
        return False
    u = left @ d @ right / scale
    return bool(opnorm(u) <= 1 + tol.psd_tol)


def duality_check(seq, z, n=None, tol=DEFAULT_TOL):
    """``||rho_r(z; associate data) - rho_hat_l(conj z; data)||``."""
    seq = _prefix(seq, n)
    a = weyl_ball(associate(seq), z, tol=tol).rho_right
    b = weyl_ball(seq, np.conj(complex(z)), tol=tol).rho_left_normalized
    return opnorm(a - b)


def det_check(seq, z, n=None, tol=DEFAULT_TOL):
    """``|det rho_r(z) - det rho_hat_l(z)|`` for the same data and point."""
    ball = weyl_ball(_prefix(seq, n), z, tol=tol)
    return float(abs(np.linalg.det(ball.rho_right) - np.linalg.det(ball.rho_left_normalized)))


def _defect_rank(a, tol):
    return numerical_rank(hermitian_part(a), tol)


def weyl_limit(seq, z, tol=DEFAULT_TOL, n_max=64):
    """Follow the balls for ``n = 0, 1, ...`` until both radii settle.

    Stops once ``rho_r`` and ``rho_hat_l`` change by less than
    ``residual_tol`` on two consecutive levels, or when ``n_max`` or the
    length of the data is reached. Ranks of the limit radii are the defect
    numbers; a rank that moves when ``rank_tol`` is scaled by 10 or 1/10 is
    flagged as unstable.
    """
    z = _check_disk(z)
    last = min(n_max, seq.n)
    history = []
    prev = None
    quiet = 0
    ball = None
    converged = False
    for n in range(last + 1):
        sub = seq.prefix(n)
        verdict = classify(sub, tol)
        if not verdict.nondegenerate:
            raise DegenerateAtLevel(n, verdict.margin)
        ball = weyl_ball(sub, z, tol=tol)
        if prev is not None:
            change = max(opnorm(ball.rho_right - prev.rho_right),
                         opnorm(ball.rho_left_normalized - prev.rho_left_normalized))
            quiet = quiet + 1 if change < tol.residual_tol else 0
        history.append((n, opnorm(ball.rho_right), opnorm(ball.rho_left_normalized), opnorm(ball.rho_left)))
        prev = ball
        if quiet >= 2:
            converged = True
            break
    rank_r = _defect_rank(ball.rho_right, tol)
    rank_l = _defect_rank(ball.rho_left_normalized, tol)
    unstable = False
    for factor in (10.0, 0.1):
        t = Tolerances(tol.rank_tol * factor, tol.psd_tol, tol.residual_tol)
        if _defect_rank(ball.rho_right, t) != rank_r or _defect_rank(ball.rho_left_normalized, t) != rank_l:
            unstable = True
    return WeylLimit(
        zeta=z,
        center=ball.center,
        rho_right=ball.rho_right,
        rho_left_normalized=ball.rho_left_normalized,
        n_reached=ball.n,
        converged=converged,
        defect_rank_right=rank_r,
        defect_rank_left=rank_l,
        rank_unstable=unstable,
        rho_left_norm=opnorm(ball.rho_left),
        history=tuple(history),
    )


def ball_from_resolvent_blocks(seq, z, tol=DEFAULT_TOL):
    """Ball computed literally from ``W = B^{-1} j B^{-*}`` (needs ``z != 0``).

    Kept as an independent cross-check of :func:`weyl_ball`.
    """
    from .resolvent import resolvent_B

    z = _check_disk(z)
    if z == 0:
        raise OutOfDomain("B has its pole at z = 0")
    rb = resolvent_B(seq, tol)
    inv = np.linalg.inv(rb(z))
    w = inv @ rb.signature @ adjoint(inv)
    q = seq.q
    R, S, T = -w[:q, :q], w[q:, :q], -w[q:, q:]
    rho_r = np.linalg.inv(R)
    return WeylBall(z, seq.n, S @ rho_r, S @ rho_r @ adjoint(S) - T, rho_r,
                    (S @ rho_r @ adjoint(S) - T) / abs(z) ** (2 * seq.n + 2))

