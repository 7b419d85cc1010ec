"""Unitary colligations: finite-dimensional lossless state-space systems.

A colligation is four matrices ``T, F, G, S`` whose block matrix
``Y = [[T, F], [G, S]]`` is unitary. It drives the open system

    h(n+1) = T h(n) + F f(n),    g(n) = G h(n) + S f(n)

and its transfer (characteristic) function is
``theta(z) = S + z G (I - z T)^{-1} F``, a Schur function that is inner
because the state space is finite-dimensional.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    MalformedInput,
    NotAContraction,
    NotInvariant,
    NotSimple,
    NotSquare,
    SingularResolvent,
)
from .linalg import (
    DEFAULT_TOL,
    adjoint,
    as_matrix,
    eye,
    hermitian_sqrt,
    matrix_from_json,
    matrix_to_json,
    null_basis,
    opnorm,
    range_basis,
    zeros,
)
from .schur import SchurSequence

__all__ = [
    "UnitaryColligation",
    "DefectData",
    "SubspaceReport",
    "SystemTrace",
    "defect_data",
    "embed_contraction",
    "validate",
    "char_function",
    "realization_residual",
    "taylor_coeffs",
    "product",
    "factor_colligation",
    "simulate",
    "subspace_analysis",
    "defect_functions_realized",
    "associate_colligation",
    "random_colligation",
    "jordan_block",
]


@dataclass(frozen=True, eq=False)
class UnitaryColligation:
    T: np.ndarray
    F: np.ndarray
    G: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        T, F, G, S = (as_matrix(m) for m in (self.T, self.F, self.G, self.S))
        h = T.shape[0]
        if T.shape != (h, h):
            raise DimensionMismatch(f"T must be square, got {T.shape}")
        if F.shape[0] != h or G.shape[1] != h:
            raise DimensionMismatch("F rows and G columns must match dim H")
        if S.shape != (G.shape[0], F.shape[1]):
            raise DimensionMismatch(f"S must be {G.shape[0]}x{F.shape[1]}, got {S.shape}")
        for name, m in zip("TFGS", (T, F, G, S)):
            m = np.array(m, dtype=complex)
            m.flags.writeable = False
            object.__setattr__(self, name, m)

    @property
    def dimH(self):
        return self.T.shape[0]

    @property
    def p(self):
        return self.S.shape[0]

    @property
    def q(self):
        return self.S.shape[1]

    @property
    def Y(self):
        return np.block([[self.T, self.F], [self.G, self.S]])

    def __call__(self, z):
        return char_function(self, z)

    def __repr__(self):
        return f"UnitaryColligation(dimH={self.dimH}, p={self.p}, q={self.q})"

    def to_json(self):
        return {
            "dimH": self.dimH,
            "p": self.p,
            "q": self.q,
            "T": matrix_to_json(self.T),
            "F": matrix_to_json(self.F),
            "G": matrix_to_json(self.G),
            "S": matrix_to_json(self.S),
        }

    @classmethod
    def from_json(cls, obj):
        try:
            dims = (obj["dimH"], obj["p"], obj["q"])
            mats = [matrix_from_json(obj[k]) for k in "TFGS"]
        except (TypeError, KeyError) as exc:
            raise MalformedInput(f"colligation needs dimH, p, q, T, F, G, S: {exc}") from None
        h, p, q = dims
        expected = [(h, h), (h, q), (p, h), (p, q)]
        for name, m, shape in zip("TFGS", mats, expected):
            if m.shape != shape:
                raise MalformedInput(f"{name} has shape {m.shape}, expected {shape}")
        return cls(*mats)


@dataclass(frozen=True, eq=False)
class DefectData:
    D_T: np.ndarray
    D_Tstar: np.ndarray
    basis_DT: np.ndarray
    basis_DTstar: np.ndarray

    @property
    def delta_T(self):
        return self.basis_DT.shape[1]

    @property
    def delta_Tstar(self):
        return self.basis_DTstar.shape[1]


@dataclass(frozen=True, eq=False)
class SubspaceReport:
    basis_HF: np.ndarray
    basis_HG: np.ndarray
    basis_HFperp: np.ndarray
    basis_HGperp: np.ndarray
    basis_unitary_part: np.ndarray
    basis_L0: np.ndarray
    basis_L0tilde: np.ndarray
    is_simple: bool
    is_cnu: bool
    kernel_crosscheck: float

    @property
    def shift_multiplicity(self):
        return self.basis_L0.shape[1]

    @property
    def coshift_multiplicity(self):
        return self.basis_L0tilde.shape[1]


@dataclass(frozen=True, eq=False)
class SystemTrace:
    states: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    energy_residuals: np.ndarray

    def rows(self):
        """``(step, |h|^2, |f|^2, |g|^2, energy_residual)`` per step."""
        out = []
        for n in range(self.inputs.shape[0]):
            out.append((
                n,
                float(np.vdot(self.states[n], self.states[n]).real),
                float(np.vdot(self.inputs[n], self.inputs[n]).real),
                float(np.vdot(self.outputs[n], self.outputs[n]).real),
                float(self.energy_residuals[n]),
            ))
        return out


def _phase_fix(v):
    """Make the largest entry of each column real positive (deterministic gauge)."""
    v = np.array(v, dtype=complex)
    for k in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, k])))
        if abs(v[i, k]) > 0:
            v[:, k] *= np.conj(v[i, k]) / abs(v[i, k])
    return v


def _defect_root(a, tol):
    """``(I - a)^{1/2}`` and an orthonormal basis of its range (largest first)."""
    m = eye(a.shape[0]) - a
    root = hermitian_sqrt(m, tol)
    if root.shape[0] == 0:
        return root, zeros(0, 0)
    w, v = np.linalg.eigh(root)
    keep = w > tol.rank_tol
    basis = _phase_fix(v[:, keep][:, ::-1])
    return root, basis


def defect_data(T, tol=DEFAULT_TOL):
    """Defect operators ``D_T = (I - T^*T)^{1/2}``, ``D_{T^*}`` and range bases."""
    T = as_matrix(T)
    if T.shape[0] != T.shape[1]:
        raise DimensionMismatch(f"T must be square, got {T.shape}")
    if opnorm(T) > 1 + tol.psd_tol:
        raise NotAContraction(f"||T|| = {opnorm(T):.6g} exceeds 1")
    d, bd = _defect_root(adjoint(T) @ T, tol)
    ds, bds = _defect_root(T @ adjoint(T), tol)
    return DefectData(d, ds, bd, bds)


def embed_contraction(T, tol=DEFAULT_TOL):
    """Unitary colligation with fundamental operator ``T``.

    Input space is the range of ``D_{T^*}`` and output space the range of
    ``D_T``, both in orthonormal-basis coordinates:
    ``F = D_{T^*} V_*``, ``G = V^* D_T``, ``S = -V^* T^* V_*``.
    """
    T = as_matrix(T)
    dd = defect_data(T, tol)
    F = dd.D_Tstar @ dd.basis_DTstar
    G = adjoint(dd.basis_DT) @ dd.D_T
    S = -adjoint(dd.basis_DT) @ adjoint(T) @ dd.basis_DTstar
    return UnitaryColligation(T, F, G, S)


def validate(delta):
    """``{"isometry": ||Y^*Y - I||, "coisometry": ||YY^* - I||, "residual": max}``."""
    Y = delta.Y
    r1 = opnorm(adjoint(Y) @ Y - eye(Y.shape[1]))
    r2 = opnorm(Y @ adjoint(Y) - eye(Y.shape[0]))
    return {"isometry": r1, "coisometry": r2, "residual": max(r1, r2)}


def _resolvent_apply(delta, z, rhs, tol):
    a = eye(delta.dimH) - z * delta.T
    if delta.dimH and np.linalg.cond(a) * tol.rank_tol > 1.0:
        raise SingularResolvent(f"I - zT is singular at z = {z}")
    return np.linalg.solve(a, rhs) if delta.dimH else rhs


def char_function(delta, z, tol=DEFAULT_TOL):
    """``theta(z) = S + z G (I - z T)^{-1} F``."""
    z = complex(z)
    return delta.S + z * delta.G @ _resolvent_apply(delta, z, delta.F, tol)


def realization_residual(delta, z, tol=DEFAULT_TOL):
    """Deviation from ``I - theta^*theta = (1-|z|^2) X^* X``,
    ``X = (I - zT)^{-1} F``."""
    z = complex(z)
    theta = char_function(delta, z, tol)
    x = _resolvent_apply(delta, z, delta.F, tol)
    lhs = eye(delta.q) - adjoint(theta) @ theta
    return opnorm(lhs - (1 - abs(z) ** 2) * adjoint(x) @ x)


def taylor_coeffs(delta, n):
    """``theta_0 = S``, ``theta_k = G T^{k-1} F`` for ``k = 1..n``."""
    out = [delta.S]
    v = delta.F
    for _ in range(n):
        out.append(delta.G @ v)
        v = delta.T @ v
    return SchurSequence(np.stack(out))


def product(d1, d2):
    """Colligation whose characteristic function is ``theta_1 theta_2``.

    The input space of ``d1`` must be the output space of ``d2``; the state
    space is ``H_1 (+) H_2``.
    """
    if d1.q != d2.p:
        raise DimensionMismatch(f"input dim {d1.q} of the left factor != output dim {d2.p} of the right")
    h1, h2 = d1.dimH, d2.dimH
    T = np.block([[d1.T, d1.F @ d2.G], [zeros(h2, h1), d2.T]])
    F = np.vstack([d1.F @ d2.S, d2.F])
    G = np.hstack([d1.G, d1.S @ d2.G])
    S = d1.S @ d2.S
    return UnitaryColligation(T, F, G, S)


def factor_colligation(delta, basis_H1, tol=DEFAULT_TOL):
    """Split ``delta`` along a ``T``-invariant subspace ``H_1``.

    Returns ``(d1, d2)`` with ``product(d1, d2)`` unitarily equivalent to
    ``delta``: ``d1`` lives on ``H_1`` and ``d2`` on ``H (-) H_1``. The
    intermediate space is the orthogonal complement of the range of the
    isometry ``[T|H_1 ; G|H_1]`` inside ``H_1 (+) G``; a unitary colligation in
    finite dimensions forces its dimension to be ``p = q``.
    """
    if delta.p != delta.q:
        raise NotSquare(f"external spaces have dimensions {delta.p} and {delta.q}")
    h = delta.dimH
    basis_H1 = as_matrix(basis_H1) if np.size(basis_H1) else zeros(h, 0)
    if basis_H1.shape[0] != h:
        raise DimensionMismatch(f"basis must have {h} rows, got {basis_H1.shape[0]}")
    u1 = range_basis(basis_H1, tol) if basis_H1.shape[1] else zeros(h, 0)
    if u1.shape[1]:
        leak = opnorm(delta.T @ u1 - u1 @ (adjoint(u1) @ delta.T @ u1))
        if leak > tol.residual_tol:
            raise NotInvariant(f"span is not T-invariant (leak {leak:.3e})")
    u2 = null_basis(adjoint(u1), tol) if u1.shape[1] else eye(h)
    T11 = adjoint(u1) @ delta.T @ u1
    T12 = adjoint(u1) @ delta.T @ u2
    T22 = adjoint(u2) @ delta.T @ u2
    Fa, Fb = adjoint(u1) @ delta.F, adjoint(u2) @ delta.F
    Ga, Gb = delta.G @ u1, delta.G @ u2
    k1 = u1.shape[1]
    iso = np.vstack([T11, Ga])
    comp = null_basis(adjoint(iso), tol) if k1 else eye(k1 + delta.p)
    comp = _phase_fix(comp)
    if comp.shape[1] != delta.p:
        raise NotInvariant("intermediate space has the wrong dimension; data is not a unitary colligation")
    F1, S1 = comp[:k1], comp[k1:]
    rest = np.block([[T12, Fa], [Gb, delta.S]])
    gs = adjoint(comp) @ rest
    G2, S2 = gs[:, : h - k1], gs[:, h - k1:]
    d1 = UnitaryColligation(T11, F1, Ga, S1)
    d2 = UnitaryColligation(T22, Fb, G2, S2)
    return d1, d2


def simulate(delta, h0, inputs):
    """Run the open system from state ``h0`` with the given input sequence."""
    h0 = np.asarray(h0, dtype=complex).reshape(-1)
    if h0.shape[0] != delta.dimH:
        raise DimensionMismatch(f"state has length {h0.shape[0]}, expected {delta.dimH}")
    f = np.asarray(inputs, dtype=complex)
    if f.ndim == 1:
        f = f.reshape(-1, 1) if delta.q == 1 else f.reshape(1, -1)
    if f.shape[1] != delta.q:
        raise DimensionMismatch(f"inputs have width {f.shape[1]}, expected {delta.q}")
    steps = f.shape[0]
    states = np.zeros((steps + 1, delta.dimH), dtype=complex)
    outputs = np.zeros((steps, delta.p), dtype=complex)
    res = np.zeros(steps)
    states[0] = h0
    for n in range(steps):
        h = states[n]
        states[n + 1] = delta.T @ h + delta.F @ f[n]
        outputs[n] = delta.G @ h + delta.S @ f[n]
        before = np.vdot(h, h).real + np.vdot(f[n], f[n]).real
        after = np.vdot(states[n + 1], states[n + 1]).real + np.vdot(outputs[n], outputs[n]).real
        res[n] = abs(after - before)
    return SystemTrace(states, f, outputs, res)


def _krylov(T, start, tol):
    """Orthonormal basis of ``span{T^k start}``, grown until it stops growing."""
    h = T.shape[0]
    basis = zeros(h, 0)
    new = start
    for _ in range(h + 1):
        if new.shape[1] == 0:
            break
        resid = new - basis @ (adjoint(basis) @ new)
        add = range_basis(resid, tol, relative=False)
        if add.shape[1] == 0:
            break
        # one reorthogonalization pass keeps the basis orthonormal to working precision
        add = add - basis @ (adjoint(basis) @ add)
        add, _ = np.linalg.qr(add)
        basis = np.hstack([basis, add])
        new = T @ add
    return basis


def _complement(basis, h, tol):
    if basis.shape[1] == 0:
        return eye(h)
    if basis.shape[1] == h:
        return zeros(h, 0)
    return null_basis(adjoint(basis), tol)


def _intersection(a, b, h, tol):
    """Orthonormal basis of ``span(a) & span(b)`` via the complement of the sum."""
    perp_a = _complement(a, h, tol)
    perp_b = _complement(b, h, tol)
    stacked = np.hstack([perp_a, perp_b])
    if stacked.shape[1] == 0:
        return eye(h)
    return _complement(range_basis(stacked, tol), h, tol)


def _wandering(u, T, tol):
    """``span(u) (-) T span(u)`` for a ``T``-invariant ``span(u)``."""
    if u.shape[1] == 0:
        return zeros(u.shape[0], 0)
    image = range_basis(T @ u, tol, relative=False)
    if image.shape[1] == 0:
        return u
    coeffs = null_basis(adjoint(image) @ u, tol, relative=False)
    return u @ coeffs


def _subspace_distance(a, b):
    pa = a @ adjoint(a)
    pb = b @ adjoint(b)
    return opnorm(pa - pb)


def subspace_analysis(delta, tol=DEFAULT_TOL):
    """Controllable / observable subspaces, unitary part and wandering spaces."""
    h = delta.dimH
    T = delta.T
    hf = _krylov(T, delta.F, tol)
    hg = _krylov(adjoint(T), adjoint(delta.G), tol)
    hf_perp = _complement(hf, h, tol)
    hg_perp = _complement(hg, h, tol)
    unitary = _intersection(hf_perp, hg_perp, h, tol)
    # H_G^perp directly as the common kernel of D_T T^k
    dd = defect_data(T, tol)
    rows = []
    v = eye(h)
    for _ in range(max(h, 1)):
        rows.append(dd.D_T @ v)
        v = T @ v
    direct = null_basis(np.vstack(rows), tol, relative=False) if h else zeros(0, 0)
    crosscheck = _subspace_distance(direct, hg_perp) if h else 0.0
    # largest reducing subspace on which T is unitary, computed independently
    rows = []
    v, w = eye(h), eye(h)
    for _ in range(max(h, 1)):
        rows.append(dd.D_T @ v)
        rows.append(dd.D_Tstar @ w)
        v = T @ v
        w = adjoint(T) @ w
    unitary_direct = null_basis(np.vstack(rows), tol, relative=False) if h else zeros(0, 0)
    return SubspaceReport(
        basis_HF=hf,
        basis_HG=hg,
        basis_HFperp=hf_perp,
        basis_HGperp=hg_perp,
        basis_unitary_part=unitary,
        basis_L0=_wandering(hg_perp, T, tol),
        basis_L0tilde=_wandering(hf_perp, adjoint(T), tol),
        is_simple=unitary.shape[1] == 0,
        is_cnu=unitary_direct.shape[1] == 0,
        kernel_crosscheck=crosscheck,
    )


def defect_functions_realized(delta, z, tol=DEFAULT_TOL):
    """Values at ``z`` of ``L0^*(I - zT)^{-1}F`` and ``G(I - zT)^{-1} L0~``.

    In finite dimensions both wandering subspaces are trivial, so the
    results have a zero dimension; they are still returned with the right
    shapes so downstream code can treat them uniformly.
    """
    rep = subspace_analysis(delta, tol)
    if not rep.is_simple:
        raise NotSimple("colligation has a nontrivial unitary part")
    z = complex(z)
    theta_r = adjoint(rep.basis_L0) @ _resolvent_apply(delta, z, delta.F, tol)
    theta_l = delta.G @ _resolvent_apply(delta, z, rep.basis_L0tilde, tol)
    return theta_r, theta_l


def associate_colligation(delta):
    """``(T^*, G^*, F^*, S^*)``; its characteristic function is ``theta(conj z)^*``."""
    return UnitaryColligation(adjoint(delta.T), adjoint(delta.G), adjoint(delta.F), adjoint(delta.S))


def random_colligation(dimH, m, rng):
    """Colligation from a Haar-random unitary of size ``dimH + m`` (``p = q = m``)."""
    size = dimH + m
    z = (rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))) / np.sqrt(2)
    qm, r = np.linalg.qr(z)
    d = np.diag(r)
    qm = qm * (d / np.abs(d))
    return UnitaryColligation(qm[:dimH, :dimH], qm[:dimH, dimH:], qm[dimH:, :dimH], qm[dimH:, dimH:])


def jordan_block(n):
    """Nilpotent ``n x n`` shift with ones on the subdiagonal."""
    return np.eye(n, k=-1, dtype=complex)
