"""Interpolation data, solvability test, truncated power series and the
Schur-parameter recursion.

A Schur sequence ``c_0, ..., c_n`` (each ``p x q``) is the list of initial
Taylor coefficients of a candidate contractive analytic function

    theta(z) = c_0 + c_1 z + ... + c_n z^n + O(z^{n+1}).

The data can be completed to such a function iff the lower block Toeplitz
matrix ``C_n`` is a contraction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CoincidentPoints,
    Degenerate,
    Infeasible,
    MalformedInput,
    NonContractiveParameter,
    SeriesNotInvertible,
    ShapeMismatch,
)
from .linalg import DEFAULT_TOL, adjoint, as_matrix, matrix_from_json, matrix_to_json

__all__ = [
    "SchurSequence",
    "ToeplitzBlock",
    "SolvabilityVerdict",
    "TruncatedSeries",
    "SchurParameters",
    "block_toeplitz",
    "classify",
    "contraction_margin",
    "schur_parameters",
    "taylor_from_parameters",
    "evaluate",
    "associate",
    "schwarz_pick_matrix",
]


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def _stack(coeffs, p=None, q=None):
    mats = [as_matrix(c) for c in coeffs]
    if not mats:
        raise ShapeMismatch("at least one coefficient is required")
    p = mats[0].shape[0] if p is None else p
    q = mats[0].shape[1] if q is None else q
    for k, m in enumerate(mats):
        if m.shape != (p, q):
            raise ShapeMismatch(f"coefficient {k} has shape {m.shape}, expected {(p, q)}")
    return np.stack(mats) if mats else np.zeros((0, p, q), dtype=complex)


class TruncatedSeries:
    """Matrix power series ``sum_k c_k z^k`` known through degree ``order``.

    Arithmetic is exact through ``order`` and drops everything above it.
    When two series of different order are combined the result has the
    smaller order.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs, p=None, q=None):
        if isinstance(coeffs, np.ndarray) and coeffs.ndim == 3:
            c = np.array(coeffs, dtype=complex)
        else:
            c = _stack(coeffs, p, q)
        c.flags.writeable = False
        self._c = c

    @classmethod
    def constant(cls, c, order=0):
        c = as_matrix(c)
        out = np.zeros((order + 1,) + c.shape, dtype=complex)
        out[0] = c
        return cls(out)

    @classmethod
    def identity(cls, m, order=0):
        return cls.constant(np.eye(m), order)

    @classmethod
    def monomial(cls, c, k, order):
        """``c z^k`` truncated at ``order``."""
        c = as_matrix(c)
        out = np.zeros((order + 1,) + c.shape, dtype=complex)
        if k <= order:
            out[k] = c
        return cls(out)

    @property
    def coeffs(self):
        return self._c

    @property
    def order(self):
        return self._c.shape[0] - 1

    @property
    def shape(self):
        return self._c.shape[1:]

    @property
    def p(self):
        return self._c.shape[1]

    @property
    def q(self):
        return self._c.shape[2]

    def __getitem__(self, k):
        return self._c[k]

    def __repr__(self):
        return f"TruncatedSeries(shape={self.shape}, order={self.order})"

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"cannot raise the order from {self.order} to {order}")
        return TruncatedSeries(self._c[: order + 1])

    def pad(self, order):
        """Extend with zero coefficients up to ``order``."""
        if order <= self.order:
            return self.truncate(order)
        out = np.zeros((order + 1,) + self.shape, dtype=complex)
        out[: self.order + 1] = self._c
        return TruncatedSeries(out)

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(other, self.order).pad(self.order)

    def __add__(self, other):
        other = self._coerce(other)
        if other.shape != self.shape:
            raise ShapeMismatch(f"cannot add {self.shape} and {other.shape}")
        n = min(self.order, other.order)
        return TruncatedSeries(self._c[: n + 1] + other._c[: n + 1])

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self._c)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, scalar):
        if isinstance(scalar, TruncatedSeries) or np.ndim(scalar) != 0:
            return NotImplemented
        return TruncatedSeries(self._c * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = as_matrix(other)
            if other.shape[0] != self.q:
                raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
            return TruncatedSeries(self._c @ other)
        if self.q != other.p:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        n = min(self.order, other.order)
        out = np.zeros((n + 1, self.p, other.q), dtype=complex)
        for k in range(n + 1):
            for j in range(k + 1):
                out[k] += self._c[j] @ other._c[k - j]
        return TruncatedSeries(out)

    def __rmatmul__(self, other):
        other = as_matrix(other)
        if other.shape[1] != self.p:
            raise ShapeMismatch(f"cannot multiply {other.shape} by {self.shape}")
        return TruncatedSeries(other @ self._c)

    def inverse(self, tol=DEFAULT_TOL):
        """Series inverse; needs a square, invertible constant term."""
        if self.p != self.q:
            raise SeriesNotInvertible(f"series of shape {self.shape} is not square")
        m = self.p
        c0 = self._c[0]
        if m and np.linalg.cond(c0) * tol.rank_tol > 1.0:
            raise SeriesNotInvertible("constant term is numerically singular")
        inv0 = np.linalg.inv(c0) if m else c0.copy()
        out = np.zeros_like(self._c)
        out[0] = inv0
        for k in range(1, self.order + 1):
            acc = np.zeros((m, m), dtype=complex)
            for j in range(1, k + 1):
                acc += self._c[j] @ out[k - j]
            out[k] = -inv0 @ acc
        return TruncatedSeries(out)

    def shift_down(self, k):
        """Divide by ``z^k``; the first ``k`` coefficients are discarded and
        the order drops by ``k``."""
        if k > self.order:
            raise ValueError(f"cannot divide a series of order {self.order} by z^{k}")
        return TruncatedSeries(self._c[k:])

    def adjoint_coeffs(self):
        """Coefficientwise adjoint: the series of ``f(conj z)^*``."""
        return TruncatedSeries(adjoint(self._c))

    def evaluate(self, z):
        """Horner evaluation of the stored partial sum."""
        acc = np.zeros(self.shape, dtype=complex)
        for c in self._c[::-1]:
            acc = acc * z + c
        return acc

    __call__ = evaluate


@dataclass(frozen=True, eq=False)
class SchurSequence:
    """Initial Taylor coefficients ``c_0..c_n`` (each ``p x q``)."""

    coeffs: np.ndarray

    def __init__(self, coeffs, p=None, q=None):
        if isinstance(coeffs, TruncatedSeries):
            coeffs = coeffs.coeffs
        c = np.array(coeffs, dtype=complex) if isinstance(coeffs, np.ndarray) and np.ndim(coeffs) == 3 else _stack(coeffs, p, q)
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def p(self):
        return self.coeffs.shape[1]

    @property
    def q(self):
        return self.coeffs.shape[2]

    @property
    def n(self):
        return self.coeffs.shape[0] - 1

    def __len__(self):
        return self.coeffs.shape[0]

    def __getitem__(self, k):
        return self.coeffs[k]

    def __eq__(self, other):
        return isinstance(other, SchurSequence) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"SchurSequence(p={self.p}, q={self.q}, n={self.n})"

    def prefix(self, n):
        """The first ``n + 1`` coefficients."""
        if not 0 <= n <= self.n:
            raise ValueError(f"prefix order {n} outside 0..{self.n}")
        return SchurSequence(self.coeffs[: n + 1])

    def series(self):
        return TruncatedSeries(self.coeffs)

    @classmethod
    def zeros(cls, p, q, n):
        return cls(np.zeros((n + 1, p, q), dtype=complex))

    @classmethod
    def scalar(cls, values):
        return cls(np.asarray(values, dtype=complex).reshape(-1, 1, 1))

    def to_json(self):
        return {"p": self.p, "q": self.q, "coeffs": [matrix_to_json(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj):
        try:
            p, q, coeffs = obj["p"], obj["q"], obj["coeffs"]
        except (TypeError, KeyError) as exc:
            raise MalformedInput(f"Schur sequence needs p, q and coeffs: {exc}") from None
        if not (isinstance(p, int) and isinstance(q, int)) or p < 0 or q < 0:
            raise MalformedInput("p and q must be non-negative integers")
        if not isinstance(coeffs, list) or not coeffs:
            raise MalformedInput("coeffs must be a non-empty list")
        mats = [matrix_from_json(c) for c in coeffs]
        for k, m in enumerate(mats):
            if m.shape != (p, q):
                raise MalformedInput(f"coefficient {k} has shape {m.shape}, expected {(p, q)}")
        return cls(np.stack(mats))


@dataclass(frozen=True, eq=False)
class ToeplitzBlock:
    n: int
    matrix: np.ndarray


@dataclass(frozen=True)
class SolvabilityVerdict:
    verdict: str
    margin: float

    @property
    def nondegenerate(self):
        return self.verdict == "nondegenerate"


@dataclass(frozen=True, eq=False)
class SchurParameters:
    params: tuple

    def __len__(self):
        return len(self.params)

    def __getitem__(self, k):
        return self.params[k]

    def as_sequence(self):
        """Pack the parameters as a sequence (handy for JSON output)."""
        return SchurSequence(np.stack(self.params))


def block_toeplitz(seq):
    """Lower-triangular block Toeplitz matrix ``C_n`` with block ``(i, j) = c_{i-j}``."""
    n, p, q = seq.n, seq.p, seq.q
    c = np.zeros(((n + 1) * p, (n + 1) * q), dtype=complex)
    for i in range(n + 1):
        for j in range(i + 1):
            c[i * p:(i + 1) * p, j * q:(j + 1) * q] = seq.coeffs[i - j]
    return ToeplitzBlock(n, _frozen(c))


def contraction_margin(c):
    """Smallest eigenvalue of ``I - c c^*``."""
    c = as_matrix(c)
    if c.shape[0] == 0:
        return 1.0
    return float(np.linalg.eigvalsh(np.eye(c.shape[0]) - c @ adjoint(c))[0])


def classify(seq, tol=DEFAULT_TOL):
    """Solvability verdict from the smallest eigenvalue of ``I - C_n C_n^*``."""
    margin = contraction_margin(block_toeplitz(seq).matrix)
    if margin > tol.psd_tol:
        verdict = "nondegenerate"
    elif margin >= -tol.psd_tol:
        verdict = "degenerate"
    else:
        verdict = "infeasible"
    return SolvabilityVerdict(verdict, margin)


def require_nondegenerate(seq, tol=DEFAULT_TOL):
    v = classify(seq, tol)
    if v.verdict == "infeasible":
        raise Infeasible(f"Toeplitz matrix is not a contraction (margin {v.margin:.3e})")
    if v.verdict == "degenerate":
        raise Degenerate(f"data is degenerate (margin {v.margin:.3e})")
    return v


def _check_parameter(c, tol, exc=NonContractiveParameter):
    m = contraction_margin(c)
    if m <= tol.psd_tol:
        raise exc(f"parameter is not a strict contraction (margin {m:.3e})")
    return m


def schur_parameters(seq, tol=DEFAULT_TOL):
    """Schur parameters of nondegenerate data.

    Each step inverts the linear fractional map of a degree-one factor
    (built from the previous parameter) in series arithmetic and loses one
    order of accuracy; the new parameter is the constant term.
    """
    from .resolvent import binomial_factor, lft_invert

    require_nondegenerate(seq, tol)
    theta = seq.series()
    params = [np.array(theta[0])]
    for _ in range(seq.n):
        factor = binomial_factor(params[-1], "b_tilde", tol)
        theta = lft_invert(factor, theta, tol)
        c = np.array(theta[0])
        _check_parameter(c, tol, Degenerate)
        params.append(c)
    return SchurParameters(tuple(_frozen(c) for c in params))


def taylor_from_parameters(params, tol=DEFAULT_TOL):
    """Initial Taylor coefficients generated by a list of Schur parameters.

    Runs the factors inside-out: ``theta_k = b~_k[theta_{k+1}]``; the
    coefficient of degree ``N`` of ``theta_k`` depends on ``theta_{k+1}`` only
    through degree ``N - 1``, so padding with zeros is harmless.
    """
    from .resolvent import binomial_factor, lft_series

    if isinstance(params, SchurParameters):
        params = params.params
    params = [as_matrix(c) for c in params]
    if not params:
        raise ValueError("empty parameter list")
    for c in params:
        _check_parameter(c, tol)
    n = len(params) - 1
    theta = TruncatedSeries.constant(params[n])
    for k in range(n - 1, -1, -1):
        order = n - k
        factor = binomial_factor(params[k], "b_tilde", tol)
        theta = lft_series(factor, theta.pad(order), order)
    return SchurSequence(theta.coeffs)


def evaluate(seq, z):
    """Partial sum ``sum_k c_k z^k``."""
    series = seq.series() if isinstance(seq, SchurSequence) else seq
    return series.evaluate(z)


def associate(seq):
    """Data of ``theta~(z) = theta(conj z)^*``: coefficientwise adjoints."""
    return SchurSequence(adjoint(seq.coeffs))


def schwarz_pick_matrix(evaluator, points, variant="direct", tol=DEFAULT_TOL):
    """Pick-type block matrix of a candidate Schur function on interior points.

    ``direct`` assembles ``[(I - theta(z_i) theta(z_j)^*) / (1 - z_i conj(z_j))]``
    with ``p x p`` blocks. ``dual`` treats the last point ``z`` specially: the
    leading blocks are the direct ones over the other points, the last block
    column holds difference quotients ``(theta(z) - theta(z_i)) / (z - z_i)``
    and the corner is ``(I - theta(z)^* theta(z)) / (1 - |z|^2)``.

    Returns
    -------
    (matrix, is_psd)
    """
    points = [complex(z) for z in points]
    if not points:
        raise ValueError("at least one point is required")
    for i, a in enumerate(points):
        if abs(a) >= 1:
            raise ValueError(f"point {a} is not inside the unit disk")
        for b in points[i + 1:]:
            if a == b:
                raise CoincidentPoints(f"point {a} is repeated")
    vals = [as_matrix(evaluator(z)) for z in points]
    p, q = vals[0].shape

    def pick(zs, vs):
        return [
            [(np.eye(p) - vi @ adjoint(vj)) / (1 - zi * np.conj(zj)) for zj, vj in zip(zs, vs)]
            for zi, vi in zip(zs, vs)
        ]

    if variant == "direct":
        mat = np.block(pick(points, vals))
    elif variant == "dual":
        if len(points) < 2:
            raise ValueError("the dual form needs at least two points")
        z, v = points[-1], vals[-1]
        zs, vs = points[:-1], vals[:-1]
        col = [[(v - vi) / (z - zi)] for zi, vi in zip(zs, vs)]
        corner = (np.eye(q) - adjoint(v) @ v) / (1 - abs(z) ** 2)
        top = np.hstack([np.block(pick(zs, vs)), np.block(col)])
        bottom = np.hstack([adjoint(np.block(col)), corner])
        mat = np.vstack([top, bottom])
    else:
        raise ValueError(f"unknown variant {variant!r}")
    is_psd = bool(np.linalg.eigvalsh(0.5 * (mat + adjoint(mat)))[0] >= -tol.psd_tol)
    return mat, is_psd
