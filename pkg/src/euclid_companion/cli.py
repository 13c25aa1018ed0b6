"""Command-line front end: ``euclid-companion <command> [options]``.

Exit codes: 0 success, 1 computational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis as A
from . import fields as F
from . import svg
from .companion import (
    E2_SEEDS,
    EXPORT_FORMATS,
    StructureError,
    VariantConfig,
    build_companion,
    build_mandelbrot_companion,
    check_charpoly,
    corner_sign,
    export_matrix,
    height,
    verify_charpoly,
)
from .exact_poly import (
    euclid_poly,
    eval_exact,
    mandelbrot_poly,
    poly_to_json,
    shifted_condition_B,
    shifted_euclid_poly,
    unimodality_check,
)
from .spectra import ConvergenceError, compute_spectrum, eigenvalues, root_summary

# desk-scale caps, lifted by --force
CAPS = {"poly": 12, "companion": 14, "eigs": 12, "pseudospectrum": 10, "verify": 9, "report": 12}
FIELD_BUDGET = 1_000_000


class UsageError(Exception):
    pass


class _Run:
    """Tracks output files and writes the manifest."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.t0 = time.perf_counter()

    def write(self, name: str, data) -> Path:
        path = self.out / name
        if isinstance(data, bytes):
            path.write_bytes(data)
        else:
            path.write_text(data)
        self.files.append(name)
        return path

    def write_json(self, name: str, obj) -> Path:
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")

    def manifest(self, exit_code: int) -> None:
        cfg = {k: v for k, v in vars(self.args).items() if k != "func"}
        body = {
            "command": self.args.command,
            "config": cfg,
            "versions": _versions(),
            "elapsed_s": round(time.perf_counter() - self.t0, 3),
            "outputs": sorted(self.files),
            "exit_code": exit_code,
        }
        path = self.out / f"{self.args.command}_manifest.json"
        path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _versions() -> dict:
    import gmpy2
    import mpmath
    import numba
    import scipy

    return {"package": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__, "mpmath": mpmath.__version__,
            "gmpy2": gmpy2.version()}


def _cap(args, what: str, k: int) -> None:
    if k > CAPS[what] and not args.force:
        raise UsageError(f"k={k} exceeds the desk-scale cap {CAPS[what]} for {what}; pass --force")


def _variant(args, k: int) -> VariantConfig:
    order = None
    if getattr(args, "block_order", None):
        try:
            order = tuple(int(x) for x in args.block_order.split(","))
        except ValueError:
            raise UsageError("--block-order takes comma-separated integers") from None
        if len(order) != k:
            raise UsageError(f"--block-order needs {k} entries for k={k}")
    try:
        return VariantConfig(e2_choice=getattr(args, "e2_choice", 0), block_order=order)
    except (ValueError, StructureError) as exc:
        raise UsageError(str(exc)) from None


# -- poly ---------------------------------------------------------------------

def cmd_poly(args, run: _Run) -> int:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    _cap(args, "poly", args.k)
    stem = f"poly_k{args.k}_{args.basis}"
    if args.basis == "shifted":
        p = shifted_euclid_poly(args.k)
        coeffs = [c.as_fraction() for c in p.coeffs]
        mono = euclid_poly(args.k)
        report = {
            "k": args.k, "basis": "shifted", "degree": p.degree,
            "max_coefficient": str(max(abs(c) for c in coeffs)),
            "odd_coefficients_zero": all(c == 0 for c in coeffs[1::2]) if args.k >= 2 else None,
            "unimodal": None,
            "E_k(1)": str(eval_exact(mono, 1)),
        }
    else:
        p = euclid_poly(args.k)
        uni = unimodality_check(p)
        report = {
            "k": args.k, "basis": "monomial", "degree": p.degree,
            "max_coefficient": str(p.max_coeff()),
            "unimodal": bool(uni), "peak": list(uni.peak),
            "E_k(1)": str(eval_exact(p, 1)),
        }
    run.write(f"{stem}.json", poly_to_json(p, args.k) + "\n")
    run.write_json(f"{stem}_report.json", report)
    print(json.dumps(report))
    return 0


# -- companion ------------------------------------------------------------------

def cmd_companion(args, run: _Run) -> int:
    if args.family == "mandelbrot":
        if args.k < 2:
            raise UsageError("--k must be >= 2 for the Mandelbrot family")
        _cap(args, "companion", args.k)
        m = build_mandelbrot_companion(args.k)
        poly = mandelbrot_poly(args.k)
        cs = None
    else:
        if args.k < 1:
            raise UsageError("--k must be >= 1")
        _cap(args, "companion", args.k)
        cfg = _variant(args, args.k)
        m = build_companion(args.k, cfg)
        poly = euclid_poly(args.k)
        cs = corner_sign(args.k, cfg) if args.k >= 2 else None
    fmt = args.format or "matrix-market"
    if fmt not in EXPORT_FORMATS:
        raise UsageError(f"--format must be one of {EXPORT_FORMATS}")
    ext = {"matrix-market": "mtx", "csv-triplets": "csv", "dense-json": "json"}[fmt]
    stem = f"companion_{args.family}_k{args.k}"
    run.write(f"{stem}.{ext}", export_matrix(m, fmt))
    verified = None
    do_verify = args.verify or (args.family == "euclid" and args.k <= CAPS["verify"])
    if do_verify:
        if m.n > 2 ** (CAPS["verify"] - 1) and not args.force:
            raise UsageError("exact verification is capped at dimension 256; pass --force")
        if args.family == "euclid":
            verified = bool(verify_charpoly(args.k, cfg, max_dim=m.n))
        else:
            verified = bool(check_charpoly(m, poly))
    sub = m.subdiagonal()
    report = {"family": args.family, "k": args.k, "dimension": m.n, "nnz": m.nnz,
              "height": height(m), "corner_sign": cs,
              "subdiagonal_all_minus_one": all(s == -1 for s in sub),
              "verified": verified}
    run.write_json(f"{stem}_report.json", report)
    print(json.dumps(report))
    return 0 if verified in (None, True) else 1


# -- eigs ---------------------------------------------------------------------

def _roots_svg(lam: np.ndarray, k: int) -> str:
    r = 1.1180
    fig = svg.Figure((-1.8, 0.8), (-1.3, 1.3), title=f"roots of E_{k} ({len(lam)} eigenvalues)")
    fig.layer("circle", [fig.circle(complex(-0.5, 0), r)])
    fig.layer("roots", [fig.dot(z, r=1.2 if len(lam) > 256 else 2.0) for z in lam])
    return fig.render()


def cmd_eigs(args, run: _Run) -> int:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    _cap(args, "eigs", args.k)
    cfg = _variant(args, args.k)
    stem = f"eigs_k{args.k}"
    try:
        spec = compute_spectrum(args.k, cfg, threads=args.threads, balance=args.balance)
    except ConvergenceError as exc:
        partial = np.asarray(exc.partial if exc.partial is not None else [], dtype=complex)
        run.write(f"{stem}_partial.csv",
                  "re,im\n" + "".join(f"{z.real:.17g},{z.imag:.17g}\n" for z in partial))
        run.write_json(f"{stem}_diagnostics.json", {"error": str(exc), "active": exc.active,
                                                     "n_found": len(partial)})
        print(f"error: {exc}", file=sys.stderr)
        return 1
    run.write(f"{stem}.csv", spec.to_csv())
    summ = root_summary(args.k, spec.eigenvalues).as_dict()
    summ.update({"qr_sweeps": spec.qr_sweeps, "max_cond": float(spec.cond.max()),
                 "max_residual": float(spec.residual.max()),
                 "max_newton_step": float(spec.newton_correction.max()),
                 "max_sigma_resid": float(spec.sigma_resid.max())})
    run.write_json(f"{stem}_summary.json", summ)
    if not args.no_plot:
        run.write(f"{stem}.svg", _roots_svg(spec.eigenvalues, args.k))
    print(json.dumps(summ))
    return 0


# -- fields -------------------------------------------------------------------

def _parse_eps(text: str) -> list[float]:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError("--eps takes LO:HI:N, e.g. 1e-2:1e-1:10") from None
    if not (0 < lo <= hi) or n < 1:
        raise UsageError("--eps needs 0 < LO <= HI and N >= 1")
    return F.log_levels(lo, hi, n)


def _parse_window(text: str | None) -> tuple[float, float, float, float]:
    if text is None:
        return F.DEFAULT_WINDOW
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError("--window takes RE_MIN,RE_MAX,IM_MIN,IM_MAX") from None
    if len(vals) != 4:
        raise UsageError("--window takes RE_MIN,RE_MAX,IM_MIN,IM_MAX")
    return vals


def cmd_fields(args, run: _Run) -> int:
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    nx = args.nx or args.n
    ny = args.ny or args.n
    try:
        g = F.GridSpec(*_parse_window(args.window), nx=nx, ny=ny, budget=FIELD_BUDGET)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    levels = _parse_eps(args.eps) if args.eps else None
    m = build_companion(args.k)
    if args.kind == "pseudospectrum":
        _cap(args, "pseudospectrum", args.k)
        f = F.pseudospectrum_field(m, g, threads=args.threads)
    else:
        _cap(args, "eigs", args.k)
        basis = "shifted" if args.kind == "pseudozero_shifted" else "monomial"
        try:
            f = F.pseudozero_field(args.k, basis, g, method=args.method,
                                   precision_bits=args.precision_bits)
        except OverflowError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    roots = eigenvalues(m)
    band = F.merge_band(f, roots) if len(roots) > 1 else None
    if levels is None:
        if args.kind == "pseudospectrum":
            levels = F.log_levels(1e-2, 1e-1, 10)
        elif band is not None and math.isfinite(band.log_first):
            levels = F.log_levels(10 ** band.log_first, 10 ** (band.log_first + 1), 10)
        else:
            levels = F.log_levels(1e-3, 1e-2, 10)
    contours = F.contour_extract(f, levels)
    stem = f"field_{args.kind}_k{args.k}"
    f.meta.update({"levels": levels, "merge_band": band.as_dict() if band else None})
    run.write(f"{stem}.csv", f.to_csv())
    run.write(f"{stem}_contours.csv", F.contours_csv(contours))
    run.write(f"{stem}.json", f.sidecar_json() + "\n")
    run.write(f"{stem}.svg", F.contours_svg(f, contours, roots, title=f"{args.kind}, k={args.k}"))
    print(json.dumps({"kind": args.kind, "k": args.k, "nodes": nx * ny,
                      "n_invalid": int(f.invalid.sum()),
                      "merge_band": band.as_dict() if band else None}))
    return 0


# -- verify -------------------------------------------------------------------

def cmd_verify(args, run: _Run) -> int:
    if args.kmax < 1:
        raise UsageError("--kmax must be >= 1")
    _cap(args, "verify", args.kmax)
    checks = args.check or None
    try:
        report = A.run_suite(kmax=args.kmax, checks=checks, seed=args.seed, n_egypt=args.n,
                             threads=args.threads)
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    run.write_json("verify.json", report)
    table = A.summary_table(report)
    # the text summary leaves out timings so it is reproducible byte for byte
    run.write("verify.txt", A.summary_table(report, timings=False) + "\n")
    print(table)
    return 1 if A.suite_failed(report) else 0


# -- report -------------------------------------------------------------------

def _slope_svg(fit: A.SlopeFit) -> str:
    xs = [p[0] / math.log(10) for p in fit.points]
    ys = [p[1] / math.log(10) for p in fit.points]
    pad = 0.1
    fig = svg.Figure((min(xs) - pad, max(xs) + pad), (min(ys) - pad, max(ys) + pad),
                     title=f"max eigencondition vs degree, slope {fit.slope:.3f}",
                     xlabel="log10 degree", ylabel="log10 max K_e", equal_aspect=False)
    line = [(x, (fit.intercept + fit.slope * x * math.log(10)) / math.log(10)) for x in (xs[0], xs[-1])]
    fig.layer("fit", [fig.polyline(line, "#d62728")])
    fig.layer("points", [fig.dot(complex(x, y), r=3) for x, y in zip(xs, ys)])
    return fig.render()


def _bcond(run: _Run, kmin: int = 2, kmax: int = 8, n: int = 201) -> None:
    us = np.linspace(0.0, 1.1180, n)
    rows = ["u,k,B_shifted"]
    curves = {}
    for k in range(kmin, kmax + 1):
        vals = [shifted_condition_B(k, float(u)) for u in us]
        curves[k] = vals
        rows += [f"{u:.17g},{k},{v:.17g}" for u, v in zip(us, vals)]
    run.write("bcond.csv", "\n".join(rows) + "\n")
    top = max(math.log10(max(v)) for v in curves.values())
    bot = min(math.log10(min(v)) for v in curves.values())
    fig = svg.Figure((0, 1.118), (bot - 0.2, top + 0.2), title="shifted-basis condition numbers",
                     xlabel="u", ylabel="log10 B~_k(u)", equal_aspect=False)
    for i, (k, vals) in enumerate(curves.items()):
        color = svg.ramp(i, len(curves))
        fig.layer(f"k={k}", [fig.polyline(list(zip(us, np.log10(vals))), color, 1.5)])
        fig.legend_entry(f"k = {k}", color)
    run.write("bcond.svg", fig.render())


def cmd_report(args, run: _Run) -> int:
    if not (args.slope or args.table1 or args.bcond):
        raise UsageError("choose at least one of --slope, --table1, --bcond")
    results = {}
    if args.slope:
        if args.kmax - args.kmin + 1 < 3 or args.kmin < 2:
            raise UsageError("--slope needs k_min >= 2 and at least 3 fit points")
        _cap(args, "report", args.kmax)
        try:
            fit = A.condition_slope_fit(args.kmin, args.kmax, threads=args.threads,
                                        k_limit=CAPS["report"] if not args.force else 64)
        except A.SlopeFitError as exc:
            run.write_json("slope_partial.json", {"error": str(exc), "rows": exc.partial})
            print(f"error: {exc}", file=sys.stderr)
            return 1
        lines = ["k,degree,log_degree,max_cond,log_max_cond,max_rel_cond"]
        for row in fit.info["rows"]:
            lines.append(f"{row['k']},{row['degree']},{math.log(row['degree']):.17g},"
                         f"{row['max_cond']:.17g},{math.log(row['max_cond']):.17g},"
                         f"{row['max_rel_cond']:.17g}")
        run.write("slope.csv", "\n".join(lines) + "\n")
        run.write_json("slope.json", fit.as_dict())
        run.write("slope.svg", _slope_svg(fit))
        results["slope"] = {"slope": fit.slope, "r2": fit.r2,
                            "relative_slope": fit.info["relative_slope"]}
    if args.table1:
        ks = [6, 7, 8] if args.k is None else [args.k]
        if any(k not in (6, 7, 8) for k in ks):
            raise UsageError("--table1 takes --k 6, 7 or 8")
        rows = []
        lines = ["k,representation,log_first_merge,band_lo,band_hi,reference_lo,reference_hi"]
        for k in ks:
            row = A.conditioning_comparison(k, threads=args.threads,
                                            precision_bits=args.precision_bits or 256,
                                            seed=args.seed)
            rows.append(row.as_dict() | {"ordered": row.ordered()})
            for rep in ("monomial", "shifted", "matrix"):
                b = row.bands[rep]
                ref = row.reference[rep]
                lines.append(f"{k},{rep},{b.log_first:.4f},{b.band[0]:.4f},{b.band[1]:.4f},"
                             f"{ref[0]},{ref[1]}")
        run.write("table1.csv", "\n".join(lines) + "\n")
        run.write_json("table1.json", rows)
        results["table1"] = [{"k": r["k"], "ordered": r["ordered"],
                              **{rep: round(r["bands"][rep]["log_first"], 3)
                                 for rep in ("monomial", "shifted", "matrix")}} for r in rows]
    if args.bcond:
        _bcond(run)
        results["bcond"] = "bcond.csv"
    print(json.dumps(results, default=_json_default))
    return 0


# -- parser -------------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--out", default=d("out"), help="output directory (default: out)")
    p.add_argument("--format", default=d(None), help="output format where a command offers several")
    p.add_argument("--seed", type=int, default=d(0), help="seed for randomized checks")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads")
    p.add_argument("--precision-bits", type=int, default=d(None),
                   help="software float precision for extended evaluation")
    p.add_argument("--force", action="store_true", default=d(False),
                   help="lift the desk-scale caps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="euclid-companion", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        _global_flags(sp, suppress=True)
        sp.set_defaults(func=func)
        return sp

    def variant_flags(sp):
        sp.add_argument("--e2-choice", type=int, default=0, choices=range(len(E2_SEEDS)),
                        help="which 2x2 seed to use for E_2")
        sp.add_argument("--block-order", default=None,
                        help="comma-separated permutation of the diagonal blocks")

    sp = add("poly", cmd_poly, "emit Euclid polynomial coefficients")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--basis", choices=("monomial", "shifted"), default="monomial")

    sp = add("companion", cmd_companion, "emit a height-1 companion matrix")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--family", choices=("euclid", "mandelbrot"), default="euclid")
    sp.add_argument("--verify", action="store_true", help="exact characteristic polynomial check")
    variant_flags(sp)

    sp = add("eigs", cmd_eigs, "all roots as eigenvalues, with condition numbers")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--plot", action="store_true", help="write the SVG scatter (default)")
    sp.add_argument("--no-plot", action="store_true", help="skip the SVG scatter")
    sp.add_argument("--balance", action="store_true", help="diagonal balancing before QR")
    variant_flags(sp)

    sp = add("fields", cmd_fields, "pseudospectrum / pseudozero fields and contours")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--kind", choices=F.KINDS, default="pseudospectrum")
    sp.add_argument("--eps", default=None, help="contour levels LO:HI:N, log-spaced")
    sp.add_argument("--window", default=None, help="RE_MIN,RE_MAX,IM_MIN,IM_MAX")
    sp.add_argument("--n", type=int, default=400, help="nodes per axis")
    sp.add_argument("--nx", type=int, default=None)
    sp.add_argument("--ny", type=int, default=None)
    sp.add_argument("--method", choices=("recurrence", "horner"), default="recurrence",
                    help="pseudozero evaluation path")

    sp = add("verify", cmd_verify, "run the identity and property suite")
    sp.add_argument("--kmax", type=int, default=8)
    sp.add_argument("--check", action="append", default=None,
                    help="run only this check (repeatable)")
    sp.add_argument("--n", type=int, default=10, help="largest n for the Egyptian identity")

    sp = add("report", cmd_report, "slope fit, band table, shifted condition curves")
    sp.add_argument("--slope", action="store_true", help="log-log eigencondition fit")
    sp.add_argument("--kmin", type=int, default=2)
    sp.add_argument("--kmax", type=int, default=12)
    sp.add_argument("--table1", action="store_true", help="merge bands for k = 6, 7, 8")
    sp.add_argument("--k", type=int, default=None, help="restrict --table1 to one k")
    sp.add_argument("--bcond", action="store_true",
                    help="shifted-basis condition numbers on 0 <= u <= 1.118, k = 2..8")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    run = None
    try:
        run = _Run(args)
        code = args.func(args, run)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        code = 2
    except (ConvergenceError, ArithmeticError, RuntimeError, MemoryError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = 1
    if run is not None:
        run.manifest(code)
    return code


if __name__ == "__main__":
    sys.exit(main())
