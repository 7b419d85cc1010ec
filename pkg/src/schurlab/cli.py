"""``schurlab`` command-line tool.

Exit codes: 0 success, 2 infeasible data, 3 degenerate data, 4 numerical
contract violated, 5 malformed input (including bad flags).
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import io as sio
from .boundary import (
    BoundaryGrid,
    BoundarySamples,
    defect_function,
    defect_pointwise,
    inner_check,
    outer_factor,
    sample,
)
from .colligation import (
    UnitaryColligation,
    char_function,
    embed_contraction,
    factor_colligation,
    product,
    simulate,
    taylor_coeffs,
)
from .darlington import (
    darlington_feasibility,
    internal_scattering,
    regular_extension,
    scalar_multiple,
    series_from_samples,
)
from .errors import Degenerate, Infeasible, MalformedInput, SchurLabError, ShapeMismatch
from .linalg import Tolerances, matrix_from_json, matrix_to_json
from .resolvent import lft_apply, lft_series, resolvent_Btilde
from .schur import SchurSequence, TruncatedSeries, classify, schur_parameters
from .weyl import weyl_ball, weyl_limit

EXIT_OK, EXIT_INFEASIBLE, EXIT_DEGENERATE, EXIT_NUMERIC, EXIT_MALFORMED = 0, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_MALFORMED)


class NumericContract(SchurLabError):
    """A computed residual exceeded its tolerance."""


# ---------------------------------------------------------------- parsing

def _complex(text):
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise MalformedInput(f"expected 're' or 're,im', got {text!r}") from None
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise MalformedInput(f"expected 're' or 're,im', got {text!r}")


def _tol(args):
    try:
        return Tolerances(args.tol_rank, args.tol_psd, args.tol_residual)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from None


def _points(args, count=3):
    if args.zeta:
        return [_complex(z) for z in args.zeta]
    rng = np.random.default_rng(args.seed)
    r = np.sqrt(rng.uniform(0.0, 0.81, count))
    return [complex(x) for x in r * np.exp(2j * np.pi * rng.uniform(size=count))]


def _grid(args):
    try:
        return BoundaryGrid(args.grid)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from None


def _load_seq(path):
    return SchurSequence.from_json(sio.load_json(path))


def _load_collig(path):
    return UnitaryColligation.from_json(sio.load_json(path))


def _load_matrix(path):
    return matrix_from_json(sio.load_json(path))


def _load_samples(path):
    """Boundary samples from the CSV layout written by ``--emit csv``:
    ``m, t_re, t_im`` then ``v<i>_<j>_re, v<i>_<j>_im`` in row-major order."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from None
    if len(rows) < 2 or len(rows[0]) < 3:
        raise MalformedInput(f"{path}: expected a header and one row per grid point")
    header, body = rows[0], rows[1:]
    try:
        idx = [tuple(int(x) for x in name[1:].split("_")[:2]) for name in header[3::2]]
        data = np.array([[float(x) for x in row] for row in body])
    except ValueError:
        raise MalformedInput(f"{path}: non-numeric entry or bad column name") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise MalformedInput(f"{path}: ragged rows")
    p = 1 + max((i for i, _ in idx), default=-1)
    q = 1 + max((j for _, j in idx), default=-1)
    if [(i, j) for i in range(p) for j in range(q)] != idx:
        raise MalformedInput(f"{path}: value columns must be v<i>_<j>_re/_im in row-major order")
    try:
        grid = BoundaryGrid(data.shape[0])
    except ValueError as exc:
        raise MalformedInput(f"{path}: {exc}") from None
    t = data[:, 1] + 1j * data[:, 2]
    if np.any(data[:, 0] != np.arange(grid.M)) or np.max(np.abs(t - grid.points)) > 1e-9:
        raise MalformedInput(f"{path}: rows are not the uniform grid in order")
    vals = data[:, 3::2] + 1j * data[:, 4::2]
    return BoundarySamples(vals.reshape(grid.M, p, q), grid)


def _source_samples(args):
    given = [x is not None for x in (args.seq, args.collig, args.const, args.samples)]
    if sum(given) != 1:
        raise MalformedInput("give exactly one of --seq, --collig, --const, --samples")
    if args.samples is not None:
        return _load_samples(args.samples)
    grid = _grid(args)
    if args.seq is not None:
        return sample(_load_seq(args.seq), grid)
    if args.collig is not None:
        return sample(_load_collig(args.collig), grid)
    c = _complex(args.const)
    return BoundarySamples(np.full((grid.M, 1, 1), c), grid)


def _zjson(z):
    return [z.real, z.imag]


def _factor_json(f):
    return {
        "rank": f.rank,
        "method": f.method,
        "residual": f.residual,
        "excluded": len(f.excluded),
        "log_integrable": f.log_integrable,
        "coeffs": SchurSequence(series_from_samples(f.samples.values, f.samples.M).coeffs).to_json()
        if f.rank else {"p": 0, "q": f.samples.q, "coeffs": []},
    }


# ---------------------------------------------------------------- commands

def cmd_check(args):
    seq = _load_seq(args.seq_file)
    v = classify(seq, _tol(args))
    code = {"nondegenerate": EXIT_OK, "degenerate": EXIT_DEGENERATE, "infeasible": EXIT_INFEASIBLE}[v.verdict]
    if args.emit == "table":
        return sio.table_text(["verdict", "margin"], [[v.verdict, v.margin]]), code
    if args.emit == "csv":
        return sio.csv_text(["verdict", "margin"], [[v.verdict, v.margin]]), code
    return sio.dumps({"verdict": v.verdict, "margin": v.margin}), code


def cmd_params(args):
    seq = _load_seq(args.seq_file)
    params = schur_parameters(seq, _tol(args))
    if args.emit in ("table", "csv"):
        rows = []
        for k, c in enumerate(params.params):
            for (i, j), z in np.ndenumerate(c):
                rows.append([k, i, j, float(z.real), float(z.imag)])
        header = ["k", "row", "col", "re", "im"]
        text = sio.table_text(header, rows) if args.emit == "table" else sio.csv_text(header, rows)
        return text, EXIT_OK
    return sio.dumps({"params": params.as_sequence().to_json()}), EXIT_OK


def _parameter(args, p, q):
    if args.param is not None and args.param_const is not None:
        raise MalformedInput("give at most one of --param, --param-const")
    if args.param is not None:
        obj = sio.load_json(args.param)
        if isinstance(obj, dict) and "coeffs" in obj:
            w = SchurSequence.from_json(obj).series()
        else:
            w = TruncatedSeries.constant(matrix_from_json(obj))
    elif args.param_const is not None:
        c = _complex(args.param_const)
        w = TruncatedSeries.constant(c * np.eye(p, q))
    else:
        w = TruncatedSeries.constant(np.zeros((p, q)))
    if w.shape != (p, q):
        raise MalformedInput(f"parameter has shape {w.shape}, expected {(p, q)}")
    return w


def cmd_solve(args):
    tol = _tol(args)
    seq = _load_seq(args.seq_file)
    w = _parameter(args, seq.p, seq.q)
    rt = resolvent_Btilde(seq, tol)
    got = lft_series(rt, w, seq.n, tol)
    resid = float(max(np.linalg.norm(got.coeffs[k] - seq.coeffs[k], 2) for k in range(seq.n + 1)))
    values = [(z, lft_apply(rt, w, z, tol)) for z in _points(args)]
    code = EXIT_NUMERIC if resid > tol.residual_tol else EXIT_OK
    if args.emit in ("table", "csv"):
        rows = []
        for z, val in values:
            for (i, j), v in np.ndenumerate(val):
                rows.append([z.real, z.imag, i, j, float(v.real), float(v.imag)])
        header = ["zeta_re", "zeta_im", "row", "col", "re", "im"]
        text = sio.table_text(header, rows) if args.emit == "table" else sio.csv_text(header, rows)
        sys.stderr.write(f"coefficient residual {sio.fmt(resid)}\n")
        return text, code
    points = [{"zeta": _zjson(z), "value": matrix_to_json(val)} for z, val in values]
    return sio.dumps({"points": points, "residual": resid}), code


def _eigs(a):
    return [float(x) for x in np.linalg.eigvalsh(0.5 * (a + a.conj().T))]


def cmd_weyl(args):
    tol = _tol(args)
    seq = _load_seq(args.seq_file)
    n_max = min(args.n_max, seq.n)
    sweep, limits = [], []
    for z in _points(args):
        for n in range(n_max + 1):
            ball = weyl_ball(seq.prefix(n), z, tol=tol)
            sweep.append((z, n, ball))
        lim = weyl_limit(seq, z, tol, n_max=n_max)
        limits.append({
            "zeta": _zjson(z),
            "n_reached": lim.n_reached,
            "converged": lim.converged,
            "defect_rank_right": lim.defect_rank_right,
            "defect_rank_left": lim.defect_rank_left,
            "rank_unstable": lim.rank_unstable,
            "rho_right": matrix_to_json(lim.rho_right),
            "rho_left_normalized": matrix_to_json(lim.rho_left_normalized),
        })
    if args.emit in ("csv", "table"):
        p, q = seq.p, seq.q
        header = ["zeta_re", "zeta_im", "n"]
        header += [f"M{i}_{j}_{part}" for i in range(p) for j in range(q) for part in ("re", "im")]
        header += [f"rho_left_eig{k}" for k in range(p)]
        header += [f"rho_right_eig{k}" for k in range(q)]
        header += [f"rho_hat_left_eig{k}" for k in range(p)]
        rows = []
        for z, n, ball in sweep:
            row = [z.real, z.imag, n]
            for v in ball.center.ravel():
                row += [float(v.real), float(v.imag)]
            row += _eigs(ball.rho_left) + _eigs(ball.rho_right) + _eigs(ball.rho_left_normalized)
            rows.append(row)
        text = sio.table_text(header, rows) if args.emit == "table" else sio.csv_text(header, rows)
        sys.stderr.write(sio.dumps({"limits": limits}))
        return text, EXIT_OK
    out = [{
        "zeta": _zjson(z),
        "n": n,
        "center": matrix_to_json(b.center),
        "rho_left": matrix_to_json(b.rho_left),
        "rho_right": matrix_to_json(b.rho_right),
        "rho_left_normalized": matrix_to_json(b.rho_left_normalized),
    } for z, n, b in sweep]
    return sio.dumps({"sweep": out, "limits": limits}), EXIT_OK


def cmd_collig(args):
    tol = _tol(args)
    sub = args.collig_cmd
    if sub == "embed":
        return sio.dumps(embed_contraction(_load_matrix(args.file), tol).to_json()), EXIT_OK
    if sub == "char":
        d = _load_collig(args.file)
        vals = [{"zeta": _zjson(z), "value": matrix_to_json(char_function(d, z, tol))} for z in _points(args)]
        return sio.dumps({"points": vals}), EXIT_OK
    if sub == "taylor":
        return sio.dumps(taylor_coeffs(_load_collig(args.file), args.n).to_json()), EXIT_OK
    if sub == "product":
        d = product(_load_collig(args.file), _load_collig(args.other))
        return sio.dumps({"colligation": d.to_json(), "taylor": taylor_coeffs(d, args.n).to_json()}), EXIT_OK
    if sub == "factor":
        d1, d2 = factor_colligation(_load_collig(args.file), _load_matrix(args.basis), tol)
        return sio.dumps({"left": d1.to_json(), "right": d2.to_json()}), EXIT_OK
    if sub == "simulate":
        d = _load_collig(args.file)
        if args.inputs is not None:
            f = _load_matrix(args.inputs)
        else:
            f = np.zeros((args.steps, d.q), dtype=complex)
            if d.q:
                f[0, 0] = 1.0
        h0 = np.zeros(d.dimH, dtype=complex)
        trace = simulate(d, h0, f)
        header = ["step", "h_norm2", "f_norm2", "g_norm2", "energy_residual"]
        rows = trace.rows()
        if args.emit == "table":
            return sio.table_text(header, rows), EXIT_OK
        if args.emit == "json":
            return sio.dumps({"rows": [list(r) for r in rows]}), EXIT_OK
        return sio.csv_text(header, rows), EXIT_OK
    raise MalformedInput(f"unknown collig subcommand {sub!r}")


def _samples_csv(s):
    header = ["m", "t_re", "t_im"]
    header += [f"v{i}_{j}_{part}" for i in range(s.p) for j in range(s.q) for part in ("re", "im")]
    return sio.csv_text(header, s.csv_rows())


def cmd_boundary(args):
    tol = _tol(args)
    theta = _source_samples(args)
    sub = args.boundary_cmd
    if sub == "defects":
        pi, sigma = defect_pointwise(theta, tol)
        right = defect_function(theta, "right", tol)
        left = defect_function(theta, "left", tol)
        if args.emit == "csv":
            return _samples_csv(right.samples), EXIT_OK
        return sio.dumps({
            "pi_sup": pi.sup_norm(),
            "sigma_sup": sigma.sup_norm(),
            "right": _factor_json(right),
            "left": _factor_json(left),
        }), EXIT_OK
    if sub == "outer":
        v = theta.values
        nsq = BoundarySamples(np.conj(np.swapaxes(v, 1, 2)) @ v, theta.grid)
        f = outer_factor(nsq, tol)
        if args.emit == "csv":
            return _samples_csv(f.samples), EXIT_OK
        return sio.dumps(_factor_json(f)), EXIT_OK
    if sub == "innercheck":
        return sio.dumps({"side": args.side, "residual": inner_check(theta, args.side, tol)}), EXIT_OK
    raise MalformedInput(f"unknown boundary subcommand {sub!r}")


def cmd_darlington(args):
    tol = _tol(args)
    sub = args.darlington_cmd
    if sub == "scalarmultiple":
        if args.collig is not None and args.samples is None:
            source = _load_collig(args.collig)
        elif args.samples is not None and args.collig is None:
            source = _load_samples(args.samples)
        else:
            raise MalformedInput("scalarmultiple needs exactly one of --collig, --samples")
        sm = scalar_multiple(source, _grid(args), tol)
        if sm.residual > tol.residual_tol:
            raise NumericContract(f"theta nu - delta I residual {sm.residual:.3e}")
        return sio.dumps({
            "delta": SchurSequence(sm.delta.coeffs).to_json(),
            "nu": SchurSequence(sm.nu.coeffs).to_json(),
            "degree": sm.degree,
            "residual": sm.residual,
            "nu_inner_residual": sm.nu_inner_residual,
        }), EXIT_OK
    theta = _source_samples(args)
    if sub == "chi":
        sc = internal_scattering(theta, tol=tol)
        if args.emit == "csv":
            return _samples_csv(sc.chi), EXIT_OK
        coeff = sc.chi.fourier()
        return sio.dumps({
            "shape": list(sc.chi.values.shape[1:]),
            "chi_mean": matrix_to_json(coeff[0]),
            "xi0_norm": sc.xi0_norm,
            "range_residual": sc.range_residual,
            "excluded": len(sc.excluded),
        }), EXIT_OK
    if sub == "extend":
        ext = regular_extension(theta, args.omega_delay, args.upsilon_delay, tol)
        if args.emit == "csv":
            return _samples_csv(ext.xi), EXIT_OK
        return sio.dumps({
            "xi": ext.to_sequence().to_json(),
            "inner_residual": ext.inner_residual(tol),
            "tail": ext.tail,
        }), EXIT_OK
    if sub == "feasibility":
        rep = darlington_feasibility(theta, args.delay_bound, tol)
        obj = rep.to_json()
        if rep.extension is not None:
            obj["xi"] = rep.extension.to_sequence().to_json()
        return sio.dumps(obj), EXIT_OK
    raise MalformedInput(f"unknown darlington subcommand {sub!r}")


# ---------------------------------------------------------------- parser

def _common():
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--zeta", action="append", metavar="RE,IM", help="evaluation point (repeatable)")
    c.add_argument("--n", type=int, default=4, help="truncation order")
    c.add_argument("--n-max", type=int, default=64, help="largest level in Weyl sweeps")
    c.add_argument("--grid", type=int, default=1024, help="boundary grid size (power of two)")
    c.add_argument("--tol-rank", type=float, default=1e-9)
    c.add_argument("--tol-psd", type=float, default=1e-9)
    c.add_argument("--tol-residual", type=float, default=1e-8)
    c.add_argument("--seed", type=int, default=0, help="seed for default evaluation points")
    c.add_argument("--emit", choices=("json", "csv", "table"), default="json")
    c.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    return c


def _source_flags(p):
    p.add_argument("--seq", help="Schur sequence JSON (partial sum is sampled)")
    p.add_argument("--collig", help="colligation JSON")
    p.add_argument("--const", metavar="RE,IM", help="scalar constant function")
    p.add_argument("--samples", help="boundary samples CSV (the layout written by --emit csv)")


def build_parser():
    common = _common()
    # common flags go on leaf commands only: a parent attached at two levels
    # would let the inner parser's defaults overwrite values given earlier
    parser = _Parser(prog="schurlab", description="Matrix Schur problem toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="solvability verdict")
    p.add_argument("seq_file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("params", parents=[common], help="Schur parameters")
    p.add_argument("seq_file")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("solve", parents=[common], help="evaluate a solution from a parameter")
    p.add_argument("seq_file")
    p.add_argument("--param", help="parameter as matrix JSON (constant) or sequence JSON")
    p.add_argument("--param-const", metavar="RE,IM", help="constant parameter c times identity")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("weyl", parents=[common], help="Weyl ball sweep and limit")
    p.add_argument("seq_file")
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("collig", help="unitary colligations")
    csub = p.add_subparsers(dest="collig_cmd", required=True, parser_class=_Parser)
    q = csub.add_parser("embed", parents=[common])
    q.add_argument("file", help="contraction as matrix JSON")
    for name in ("char", "taylor"):
        q = csub.add_parser(name, parents=[common])
        q.add_argument("file")
    q = csub.add_parser("product", parents=[common])
    q.add_argument("file")
    q.add_argument("other")
    q = csub.add_parser("factor", parents=[common])
    q.add_argument("file")
    q.add_argument("--basis", required=True, help="basis of an invariant subspace (matrix JSON)")
    q = csub.add_parser("simulate", parents=[common])
    q.add_argument("file")
    q.add_argument("--inputs", help="input sequence as matrix JSON, one row per step")
    q.add_argument("--steps", type=int, default=5, help="length of the unit impulse when --inputs is absent")
    p.set_defaults(func=cmd_collig)

    p = sub.add_parser("boundary", help="boundary values and outer factors")
    bsub = p.add_subparsers(dest="boundary_cmd", required=True, parser_class=_Parser)
    for name in ("defects", "outer", "innercheck"):
        q = bsub.add_parser(name, parents=[common])
        _source_flags(q)
        if name == "innercheck":
            q.add_argument("--side", choices=("inner", "star_inner", "two_sided"), default="two_sided")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("darlington", help="internal scattering and lossless extensions")
    dsub = p.add_subparsers(dest="darlington_cmd", required=True, parser_class=_Parser)
    for name in ("chi", "extend", "feasibility", "scalarmultiple"):
        q = dsub.add_parser(name, parents=[common])
        _source_flags(q)
        q.add_argument("--omega-delay", type=int, default=0)
        q.add_argument("--upsilon-delay", type=int, default=0)
        q.add_argument("--delay-bound", type=int, default=4)
    p.set_defaults(func=cmd_darlington)
    return parser


def _dispatch(args):
    try:
        return args.func(args)
    except (MalformedInput, ShapeMismatch) as exc:
        return f"error: {exc}\n", EXIT_MALFORMED
    except Infeasible as exc:
        return f"error: {exc}\n", EXIT_INFEASIBLE
    except Degenerate as exc:
        return f"error: {exc}\n", EXIT_DEGENERATE
    except (SchurLabError, np.linalg.LinAlgError) as exc:
        return f"error: {exc}\n", EXIT_NUMERIC


def run(argv=None):
    """Run the CLI and return ``(text, exit_code)`` without touching stdout."""
    return _dispatch(build_parser().parse_args(argv))


def main(argv=None):
    args = build_parser().parse_args(argv)
    text, code = _dispatch(args)
    if text.startswith("error:"):
        sys.stderr.write(text)
    elif args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
