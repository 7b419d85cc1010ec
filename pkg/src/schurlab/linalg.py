"""Dense complex linear-algebra kernels with one explicit tolerance policy.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype ``complex128``.
Zero-sized matrices (``0 x k`` or ``k x 0``) are legal and show up whenever a
defect space is trivial.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from .errors import MalformedInput, NotHermitian, NotPSD, ShapeMismatch

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "as_matrix",
    "eye",
    "zeros",
    "block_diag",
    "adjoint",
    "opnorm",
    "hermitian_part",
    "hermitian_sqrt",
    "pinv_tol",
    "loewner_leq",
    "numerical_rank",
    "range_basis",
    "null_basis",
    "matrix_to_json",
    "matrix_from_json",
]


@dataclass(frozen=True)
class Tolerances:
    """Tolerance policy used for every rank / semidefiniteness verdict.

    Parameters
    ----------
    rank_tol : float
        Relative singular-value cutoff.
    psd_tol : float
        Eigenvalue slack for semidefiniteness decisions.
    residual_tol : float
        Slack for identity verification.
    """

    rank_tol: float = 1e-9
    psd_tol: float = 1e-9
    residual_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_tol", "psd_tol", "residual_tol"):
            value = getattr(self, name)
            if not (value > 0 and np.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")

    def scaled(self, factor):
        """Return a copy with every tolerance multiplied by ``factor``."""
        return replace(
            self,
            rank_tol=self.rank_tol * factor,
            psd_tol=self.psd_tol * factor,
            residual_tol=self.residual_tol * factor,
        )


DEFAULT_TOL = Tolerances()


def as_matrix(a, rows=None, cols=None):
    """Coerce scalars, nested lists and arrays to a 2-D complex matrix."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(1, -1) if rows == 1 else m.reshape(-1, 1) if cols == 1 else m.reshape(1, -1)
    elif m.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got array of shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise ShapeMismatch(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ShapeMismatch(f"expected {cols} columns, got {m.shape[1]}")
    return m


def eye(n):
    return np.eye(n, dtype=complex)


def zeros(rows, cols):
    return np.zeros((rows, cols), dtype=complex)


def block_diag(*blocks):
    """Block diagonal matrix; unlike scipy's version it keeps zero-sized blocks."""
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def adjoint(a):
    return np.conj(np.swapaxes(a, -1, -2))


def opnorm(a):
    """Spectral norm; 0 for empty matrices."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_part(a):
    return 0.5 * (a + adjoint(a))


def _check_hermitian(a, tol):
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got {a.shape}")
    scale = 1.0 + opnorm(a)
    if a.size and np.max(np.abs(a - adjoint(a))) > tol.residual_tol * scale:
        raise NotHermitian("matrix is not Hermitian within residual_tol")
    return hermitian_part(a)


def hermitian_sqrt(a, tol=DEFAULT_TOL):
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-psd_tol, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPSD`.
    """
    a = _check_hermitian(a, tol)
    if a.shape[0] == 0:
        return a.copy()
    w, v = np.linalg.eigh(a)
    if w[0] < -tol.psd_tol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} is below -psd_tol")
    w = np.clip(w, 0.0, None)
    return hermitian_part((v * np.sqrt(w)) @ adjoint(v))


def pinv_tol(a, tol=DEFAULT_TOL):
    """Moore-Penrose pseudoinverse by SVD with relative cutoff ``rank_tol``."""
    a = as_matrix(a)
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=complex)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=complex)
    keep = s > tol.rank_tol * s[0]
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (adjoint(vh) * s_inv) @ adjoint(u)


def loewner_leq(a, b, tol=DEFAULT_TOL):
    """True iff ``a <= b`` in the Loewner order, up to ``psd_tol``."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"cannot compare shapes {a.shape} and {b.shape}")
    if a.shape[0] == 0:
        return True
    w = np.linalg.eigvalsh(hermitian_part(b - a))
    return bool(w[0] >= -tol.psd_tol)


def numerical_rank(a, tol=DEFAULT_TOL, relative=True):
    """Number of singular values above ``rank_tol`` (relative to the largest
    by default, absolute when ``relative=False``)."""
    a = as_matrix(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    cut = tol.rank_tol * (s[0] if relative else 1.0)
    return int(np.sum(s > cut))


def range_basis(a, tol=DEFAULT_TOL, relative=True):
    """Orthonormal basis (columns) for the numerical range of ``a``."""
    a = as_matrix(a)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    cut = tol.rank_tol * (s[0] if relative else 1.0)
    return u[:, s > cut]


def null_basis(a, tol=DEFAULT_TOL, relative=True):
    """Orthonormal basis (columns) for the numerical kernel of ``a``."""
    a = as_matrix(a)
    n = a.shape[1]
    if a.shape[0] == 0 or n == 0:
        return eye(n)
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return eye(n)
    cut = tol.rank_tol * (s[0] if relative else 1.0)
    return sla.null_space(a, rcond=cut / s[0]).astype(complex)


def matrix_to_json(a):
    """Encode as ``{"rows", "cols", "data": [[re, im], ...]}`` in row-major order."""
    a = as_matrix(a)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in a.ravel()],
    }


def matrix_from_json(obj):
    """Inverse of :func:`matrix_to_json`; raises :class:`MalformedInput`."""
    try:
        rows = obj["rows"]
        cols = obj["cols"]
        data = obj["data"]
    except (TypeError, KeyError) as exc:
        raise MalformedInput(f"matrix object needs rows, cols and data: {exc}") from None
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise MalformedInput("rows and cols must be non-negative integers")
    if not isinstance(data, list) or len(data) != rows * cols:
        raise MalformedInput(f"data must hold rows*cols = {rows * cols} entries")
    values = []
    for entry in data:
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
        ):
            raise MalformedInput(f"matrix entry must be [re, im], got {entry!r}")
        values.append(complex(entry[0], entry[1]))
    return np.array(values, dtype=complex).reshape(rows, cols)
