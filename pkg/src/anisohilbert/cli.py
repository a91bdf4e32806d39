"""Command-line front end.

Exit codes: 0 computed and every check passed, 2 computed but a check
failed, 1 could not compute, 64 usage error, 74 file I/O failure.
Reports go to ``--out-dir`` (default: ``$ANISOHILBERT_OUT`` or
``./anisohilbert_out``).
"""

from __future__ import annotations

import argparse
import contextlib
import os
import re
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_ERROR, EXIT_CHECK, EXIT_USAGE, EXIT_IO = 0, 1, 2, 64, 74
OUT_ENV = "ANISOHILBERT_OUT"
COMMANDS = ("rho", "curve-check", "multiplier", "ml-bounds", "lp-system", "kernel",
            "hormander", "transform", "opnorm", "rotations")
# flags whose values may start with '-' (negative numbers)
NUMERIC_FLAGS = ("--z", "--x", "--xi", "--eta", "--alpha", "--y")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _complex(text):
    v = _floats(text)
    if len(v) == 1:
        return complex(v[0], 0.0)
    if len(v) != 2:
        raise argparse.ArgumentTypeError(f"z is 're,im', got {text!r}")
    return complex(v[0], v[1])


def _log_grid(text):
    m = re.fullmatch(r"log:([^:]+):([^:]+):(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError(f"grid is 'log:lo:hi:count', got {text!r}")
    return {"lo": float(m.group(1)), "hi": float(m.group(2)), "count": int(m.group(3))}


def _join_negative(argv):
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in NUMERIC_FLAGS and i + 1 < len(argv) and re.match(r"^-[\d.]", argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="anisohilbert", description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_ENV})")
    p.add_argument("--threads", type=int, default=0, help="cap on FFT workers, 0 = auto")
    p.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("rho", help="quasi-norm of a point")
    s.add_argument("--alpha", type=_floats, required=True)
    s.add_argument("--x", type=_floats, required=True)

    s = sub.add_parser("curve-check", help="sampled convexity hypotheses for a plane curve")
    s.add_argument("--gamma", default="pow:2")
    s.add_argument("--grid", type=_log_grid, default=_log_grid("log:1e-3:1e3:2048"))

    s = sub.add_parser("multiplier", help="m_z at one frequency")
    s.add_argument("--alpha", type=_floats, help="homogeneous curve exponents")
    s.add_argument("--gamma", help="convex plane curve (pow:<a> or t_exp_inv)")
    s.add_argument("--z", type=_complex, default=complex(0.0))
    s.add_argument("--xi", type=_floats, required=True)
    s.add_argument("--eta", type=float, default=None)

    s = sub.add_parser("ml-bounds", help="derivative bound sweep for a convex curve")
    s.add_argument("--gamma", default="pow:2")
    s.add_argument("--z", type=_complex, action="append", required=True)
    s.add_argument("--grid", type=_log_grid, default=_log_grid("log:1e-2:1e2:33"))
    s.add_argument("--C0", type=float, default=None)

    s = sub.add_parser("lp-system", help="partition, support and reproducing checks")
    s.add_argument("--alpha", type=_floats, default=[1.0, 2.0])
    s.add_argument("--J", type=int, default=8)
    s.add_argument("--samples", type=int, default=20000)

    s = sub.add_parser("kernel", help="h_z and K_z fields and homogeneity checks")
    s.add_argument("--alpha", type=_floats, default=[1.0, 2.0])
    s.add_argument("--z", type=_complex, default=complex(-0.5))
    s.add_argument("--rho-c", type=float, default=12.0)
    s.add_argument("--box", type=float, default=4.0)
    s.add_argument("--grid", type=int, default=32, help="K_z samples per axis")
    s.add_argument("--points", type=int, default=32, help="interior points for the check")

    s = sub.add_parser("hormander", help="weighted Hormander ratios")
    s.add_argument("--alpha", type=_floats, default=[1.0, 2.0])
    s.add_argument("--z", type=_complex, default=complex(-0.5))
    s.add_argument("--samples", type=int, default=16)
    s.add_argument("--level", type=int, choices=(0, 1), default=0)
    s.add_argument("--C0", type=float, default=None)
    s.add_argument("--envelope", type=float, default=None)

    for name in ("transform", "opnorm"):
        s = sub.add_parser(name, help="Hilbert transform along a curve" if name == "transform"
                           else "operator-norm estimate")
        s.add_argument("--alpha", type=_floats, default=[1.0, 3.0])
        s.add_argument("--gamma", help="plane curve pow:<a> instead of --alpha")
        s.add_argument("--grid", type=int, default=128)
        s.add_argument("--value-space", default="Real")
        s.add_argument("--p", type=float, default=2.0)
        s.add_argument("--R", type=float, default=8.0)
        if name == "transform":
            s.add_argument("--route", choices=("direct", "fourier", "both"), default="both")
            s.add_argument("--input", help="CSV field written by this tool")
            s.add_argument("--stride", type=int, default=1)
            s.add_argument("--tolerance", type=float, default=1e-2)
        else:
            s.add_argument("--trials", type=int, default=8)

    s = sub.add_parser("rotations", help="method-of-rotations identity")
    s.add_argument("--alpha", type=_floats, default=[1.0, 2.0])
    s.add_argument("--omega", default="cos")
    s.add_argument("--dirs", type=int, default=64)
    s.add_argument("--grid", type=int, default=256)
    s.add_argument("--stride", type=int, default=8)
    s.add_argument("--nodes", type=int, default=256)
    s.add_argument("--R", type=float, default=6.0)
    s.add_argument("--tolerance", type=float, default=1e-2)
    return p


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUT_ENV) or "anisohilbert_out")


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out_dir", "threads")}


def _curve(args):
    from .curves import Homogeneous, convex_from_name
    from .geometry import DilationGroup

    if getattr(args, "gamma", None):
        return convex_from_name(args.gamma)
    return Homogeneous(DilationGroup(args.alpha))


def cmd_rho(args, out):
    from .geometry import DilationGroup, rho

    r = float(rho(DilationGroup(args.alpha), np.asarray(args.x)))
    print(f"{r:.15g}")
    return EXIT_OK, {"rho": r}


def cmd_curve_check(args, out):
    from .curves import convex_from_name, log_grid, validate_convex_curve

    g = args.grid
    rep = validate_convex_curve(convex_from_name(args.gamma), log_grid(g["lo"], g["hi"], g["count"]))
    d = rep.to_dict()
    print(f"{args.gamma}: all hypotheses hold = {d['all_hold']}")
    return (EXIT_OK if rep.all_hold else EXIT_CHECK), {"report": d}


def cmd_multiplier(args, out):
    from .multipliers import m_z_convex, m_z_homogeneous

    if args.gamma:
        from .curves import convex_from_name

        if args.eta is None or len(args.xi) != 1:
            raise UsageError("a plane curve needs --xi <scalar> and --eta <scalar>")
        v = m_z_convex(convex_from_name(args.gamma), args.z, args.xi[0], args.eta)
    else:
        if args.alpha is None:
            raise UsageError("give --alpha or --gamma")
        v = m_z_homogeneous(_curve(args), args.z, np.asarray(args.xi))
    print(f"{v.real:.12g} {v.imag:+.12g}i")
    return EXIT_OK, {"value": v}


def cmd_ml_bounds(args, out):
    from .curves import convex_from_name
    from .io import write_points_csv, write_report
    from .multipliers import ENVELOPE_C0, ml_bound_report, quadrant_grid

    gamma = convex_from_name(args.gamma)
    C0 = ENVELOPE_C0 if args.C0 is None else args.C0
    xi, eta = quadrant_grid(args.grid["lo"], args.grid["hi"], args.grid["count"])
    code, summary = EXIT_OK, []
    for z in args.z:
        reports, res = ml_bound_report(gamma, z, args.grid, C0=C0)
        tag = f"{z.real:g}_{z.imag:g}"
        for r in reports:
            write_report(out / f"ml_bounds_{r.quantity}_{tag}.json", r.to_dict(), _config(args))
            write_points_csv(out / f"ml_bounds_{r.quantity}_{tag}.csv", xi, eta, res.values[r.quantity],
                             {"quantity": r.quantity, "z": z}, _config(args))
            summary.append(r.to_dict())
            print(f"z={z} {r.quantity}: sup {r.sup_abs:.4g} bound {r.bound:.4g} "
                  f"{'pass' if r.passed else 'FAIL'}")
            if not r.passed:
                code = EXIT_CHECK
    return code, {"reports": summary}


def cmd_lp_system(args, out):
    from .geometry import DilationGroup
    from .lp import LPSystem, partition_defect, reproducing_check, support_violations

    g = DilationGroup(args.alpha)
    sysm = LPSystem(g, args.J)
    rng = np.random.default_rng(args.seed)
    xi = rng.normal(size=(args.samples, g.n)) * np.exp(rng.uniform(-4, 4, size=(args.samples, 1)))
    defect, covered = partition_defect(sysm, xi)
    supp = sum(support_violations(sysm, j, xi) for j in range(-3, 4))
    rep = max(reproducing_check(sysm, xi, j) for j in range(-3, 4))
    ok = defect <= 1e-10 and supp == 0 and rep <= 1e-12
    print(f"partition defect {defect:.3g} ({covered} points), support violations {supp}, "
          f"reproducing defect {rep:.3g}")
    return (EXIT_OK if ok else EXIT_CHECK), {"partition_defect": defect, "covered": covered,
                                             "support_violations": supp, "reproducing_defect": rep,
                                             "pass": ok}


def cmd_kernel(args, out):
    from .geometry import DilationGroup
    from .io import write_field_csv
    from . import kernels as K

    g = DilationGroup(args.alpha)
    curve = _curve(args)
    hf = K.h_z_field(g, args.z, a=args.box, rho_c=args.rho_c)
    hev = K.HEvaluator(hf)
    pts = K.interior_points(g, curve, args.points, seed=args.seed)
    rel, _, _ = K.kernel_homogeneity(hev, curve, args.z, pts)
    kf = K.K_z_field(hev, curve, args.z, half_width=2.0, count=args.grid)
    meta = {"kind": kf.kind, "grid": kf.grid, "taper": kf.taper, "z": args.z}
    write_field_csv(out / "K_z.csv", kf.coordinates(), kf.values, meta, _config(args))
    h_def = K.homogeneity_defect_h(hev)
    ok = float(rel.max()) <= 0.05
    print(f"h_z homogeneity defect {h_def:.3g}; K_z homogeneity max rel error {rel.max():.3g}")
    return (EXIT_OK if ok else EXIT_CHECK), {"h_homogeneity": h_def, "K_homogeneity_max": float(rel.max()),
                                             "K_homogeneity_median": float(np.median(rel)),
                                             "pass": ok, "grid": hf.grid, "taper": hf.taper}


def cmd_hormander(args, out):
    from .curves import Homogeneous
    from .geometry import DilationGroup
    from . import kernels as K

    g = DilationGroup(args.alpha)
    res = K.hormander_suite(g, Homogeneous(g), args.z, args.samples, args.seed, args.level, args.C0)
    res.pop("profile")
    env = args.envelope
    if env is None:
        env = K.HORMANDER_ENVELOPE.get(complex(args.z)) if tuple(args.alpha) == (1.0, 2.0) else None
    ok = env is None or res["max_ratio"] <= env
    print(f"max ratio {res['max_ratio']:.4g} envelope {env} coverage {res['coverage']:.4f}")
    return (EXIT_OK if ok else EXIT_CHECK), {"value": res["max_ratio"], "envelope": env,
                                             "pass": ok, "coverage": res["coverage"], **res}


def _transform_setup(args):
    from .transforms import ValueSpace, default_transform_spec

    return ValueSpace.parse(args.value_space), _curve(args), default_transform_spec(args.R)


def _load_field(path, space):
    from .io import read_field_csv
    from .transforms import GridField

    axes, vals, side = read_field_csv(path)
    hw = side["field"].get("half_widths")
    if hw is None:
        hw = [float(-a[0]) for a in axes]
    if vals.shape[-1] != space.components:
        raise UsageError(f"{path} has {vals.shape[-1]} components, {space.label()} needs "
                         f"{space.components}")
    v = vals.reshape(vals.shape[:-1] + space.shape)
    if np.all(v.imag == 0):
        v = v.real
    return GridField(hw, v, space)


def cmd_transform(args, out):
    from .io import write_field_csv
    from .transforms import GridField, band_limited_field, hilbert_direct, hilbert_fourier, lp_norm, relative_l2

    space, curve, spec = _transform_setup(args)
    if args.input:
        f = _load_field(args.input, space)
    else:
        f = band_limited_field((args.grid, args.grid), space=space, seed=args.seed)
    outs = {}
    if args.route in ("fourier", "both"):
        outs["fourier"] = hilbert_fourier(f, curve)
    if args.route in ("direct", "both"):
        outs["direct"] = hilbert_direct(f, curve, spec, stride=args.stride)
    for name, g in outs.items():
        write_field_csv(out / f"transform_{name}.csv", g.axes(), np.moveaxis(g.flat_components(), 0, -1),
                        {"half_widths": list(g.half_widths), "value_space": space.label(),
                         "route": name}, _config(args))
    main = outs["fourier"] if "fourier" in outs else outs["direct"]
    payload = {"route": args.route, "p": args.p, "value_space": space.label(),
               "norm_in": lp_norm(f, args.p), "norm_out": lp_norm(main, args.p)}
    payload["ratio"] = payload["norm_out"] / payload["norm_in"]
    code = EXIT_OK
    line = f"ratio {payload['ratio']:.6g}"
    if len(outs) == 2:
        s = args.stride
        sub = GridField(f.half_widths, outs["fourier"].values[(slice(None, None, s),) * f.ndim], space)
        payload["rel_discrepancy"] = relative_l2(outs["direct"], sub)
        line += f", route discrepancy {payload['rel_discrepancy']:.3g}"
        if payload["rel_discrepancy"] > args.tolerance:
            code = EXIT_CHECK
    print(line)
    return code, payload


def cmd_opnorm(args, out):
    from .transforms import hilbert_fourier, MultiplierCache, op_norm_estimate

    space, curve, _ = _transform_setup(args)
    shape = (args.grid, args.grid)
    cache = MultiplierCache(curve, shape, (1.0, 1.0))
    est, det = op_norm_estimate(lambda f: hilbert_fourier(f, curve, cache), args.p, space,
                                trials=args.trials, seed=args.seed, shape=shape)
    print(f"operator norm estimate {est:.6g}")
    return EXIT_OK, {"estimate": est, "value_space": space.label(), "p": args.p, **det}


def cmd_rotations(args, out):
    from .geometry import DilationGroup
    from .io import write_field_csv
    from .rotations import (SphereFunction, check_size_cancellation, identity_report,
                            t_omega_direct, t_omega_rotations)
    from .transforms import band_limited_field, default_transform_spec

    g = DilationGroup(args.alpha)
    omega = SphereFunction.parse(args.omega)
    spec = default_transform_spec(args.R)
    f = band_limited_field((args.grid, args.grid), seed=args.seed)
    d = t_omega_direct(f, omega, g, spec, nodes=args.nodes, stride=args.stride)
    r = t_omega_rotations(f, omega, g, args.dirs, spec, stride=args.stride)
    rep = identity_report(d, r, args.dirs)
    size, cancel = check_size_cancellation(omega, g)
    rep.update({"size": size, "cancel": cancel})
    for name, fld in (("direct", d), ("rotations", r)):
        write_field_csv(out / f"t_omega_{name}.csv", fld.axes(), fld.values,
                        {"half_widths": list(fld.half_widths), "route": name}, _config(args))
    ok = rep["rel_discrepancy"] <= args.tolerance
    print(f"rel discrepancy {rep['rel_discrepancy']:.3g} at {args.dirs} directions")
    return (EXIT_OK if ok else EXIT_CHECK), {**rep, "pass": ok}


HANDLERS = {"rho": cmd_rho, "curve-check": cmd_curve_check, "multiplier": cmd_multiplier,
            "ml-bounds": cmd_ml_bounds, "lp-system": cmd_lp_system, "kernel": cmd_kernel,
            "hormander": cmd_hormander, "transform": cmd_transform, "opnorm": cmd_opnorm,
            "rotations": cmd_rotations}


def run(argv=None) -> int:
    from .io import write_report

    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_negative(argv))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    out = _out_dir(args)
    workers = args.threads if args.threads > 0 else None
    try:
        from scipy import fft as sfft

        ctx = sfft.set_workers(workers) if workers else contextlib.nullcontext()
        with ctx:
            code, payload = HANDLERS[args.command](args, out)
        write_report(out / f"{args.command}.json", {"exit_code": code, **payload}, _config(args))
        return code
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - any failure to compute maps to exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run())
