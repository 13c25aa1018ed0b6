"""Exact identity checks, probes and the conditioning experiments."""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from scipy import ndimage, stats
from scipy.spatial import cKDTree

from . import fields as F
from .companion import (
    E2_SEEDS,
    VariantConfig,
    build_companion,
    build_tilde,
    corner_sign,
    det_charpoly_at,
    height,
    verify_charpoly,
)
from .exact_poly import (
    coeff_growth_check,
    euclid_numbers,
    euclid_poly,
    euclid_poly_product,
    euclid_recurrence,
    eval_exact,
    shifted_euclid_poly,
    unimodality_check,
)
from .spectra import ConvergenceError, compute_spectrum, eigenvalues, root_summary


# -- exact identities -------------------------------------------------------

def egyptian_number_check(n: int) -> bool:
    """``1 = sum_{k<=n} 1/e_k + 1/(e_{n+1} - 1)`` in exact rationals."""
    if n < 1:
        raise ValueError("n must be >= 1")
    e = euclid_numbers(n + 1)
    total = sum(Fraction(1, x) for x in e[:n]) + Fraction(1, e[n] - 1)
    return total == 1


@dataclass
class IdentityResult:
    status: str  # "holds", "fails" or "pole"
    detail: str = ""

    def __bool__(self) -> bool:
        return self.status == "holds"


def egyptian_poly_check(n: int, lam) -> IdentityResult:
    """``1/lam = sum_{k<=n} 1/E_k(lam) + 1/(E_{n+1}(lam) - 1)`` at rational ``lam``.

    A vanishing denominator gives ``status == "pole"`` rather than a failure.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    q = Fraction(lam)
    if q == 0:
        return IdentityResult("pole", "lambda = 0")
    vals = [eval_exact(euclid_poly(j), q) for j in range(1, n + 2)]
    for j, v in enumerate(vals[:n], start=1):
        if v == 0:
            return IdentityResult("pole", f"E_{j}({q}) = 0")
    if vals[n] == 1:
        return IdentityResult("pole", f"E_{n + 1}({q}) = 1")
    rhs = sum(1 / v for v in vals[:n]) + 1 / (vals[n] - 1)
    if rhs == 1 / q:
        return IdentityResult("holds")
    return IdentityResult("fails", f"rhs = {rhs}, 1/lambda = {1 / q}")


# -- series probe -----------------------------------------------------------

@dataclass
class SeriesReport:
    lam: complex
    partial_sums: list[complex]
    term_magnitudes: list[float]
    ratio_signature: list[float]  # |t_{k+1}| / |t_k|**2
    classification: str  # converging, diverging, undetermined
    reason: str
    overflowed: bool = False


def series_probe(lam, n_terms: int = 25, budget: int = 64) -> SeriesReport:
    """Partial sums of ``sum 1/E_k(lam)`` and a convergence guess.

    With ``f_k = E_k - 1/2`` the recurrence is ``f_{k+1} = f_k**2 + 1/4``.
    Once ``|f_k| > 2``, or ``f_k`` is real and above 1/2, the orbit escapes
    and the terms decay doubly exponentially: "converging".  If the last
    five terms all stay above 1/2 in magnitude (``|E_k| < 2``) without an
    escape, the terms are not tending to zero: "diverging".  Anything else is
    "undetermined".  Overflow of ``E_k`` counts as escape and is flagged.
    """
    if n_terms < 1 or n_terms > budget:
        raise ValueError(f"n_terms must be in [1, {budget}]")
    z = complex(lam)
    e = z + 1
    sums, mags, ratios = [], [], []
    acc = 0j
    escaped_at = None
    overflowed = False
    for k in range(1, n_terms + 1):
        if k > 1:
            with np.errstate(over="ignore", invalid="ignore"):
                e = e * (e - 1) + 1
        if not (math.isfinite(e.real) and math.isfinite(e.imag)):
            overflowed = True
            if escaped_at is None:
                escaped_at = k
            t = 0j
        else:
            t = 1 / e if e != 0 else complex(math.inf)
        acc += t
        sums.append(acc)
        mags.append(abs(t))
        if len(mags) >= 2 and mags[-2] > 0 and mags[-1] > 0:
            # in logs: the square of a tiny term underflows
            lr = math.log(mags[-1]) - 2 * math.log(mags[-2])
            ratios.append(math.exp(min(lr, 700.0)))
        f = e - 0.5
        if escaped_at is None and (abs(f) > 2 or (f.imag == 0 and f.real > 0.5)):
            escaped_at = k
    if escaped_at is not None:
        cls, reason = "converging", f"orbit escaped at k={escaped_at}"
    elif len(mags) >= 5 and min(mags[-5:]) > 0.5:
        cls, reason = "diverging", "last five terms have magnitude above 1/2"
    else:
        cls, reason = "undetermined", "no escape and no persistent terms"
    return SeriesReport(z, sums, mags, ratios, cls, reason, overflowed)


# -- Euclid's constant ------------------------------------------------------

class InsufficientPrecision(ArithmeticError):
    pass


@dataclass
class EuclidConstantEstimate:
    n_terms: int
    E_estimate: object  # mpmath.mpf
    digits_stable: int
    estimates: list = field(default_factory=list)
    floor_check: list = field(default_factory=list)
    precision_bits: int = 0

    def as_dict(self) -> dict:
        return {
            "n_terms": self.n_terms,
            "E": mpmath.nstr(self.E_estimate, 60),
            "digits_stable": self.digits_stable,
            "precision_bits": self.precision_bits,
            "floor_check": self.floor_check,
        }


def euclid_constant(n_terms: int = 10, precision_bits: int = 2048) -> EuclidConstantEstimate:
    """``E = lim (e_n - 1/2)**(2**-n)`` so that ``e_n = floor(E**(2**n) + 1/2)``.

    The estimate at index ``n`` is a lower bound increasing to ``E``.  The
    returned value uses one guard index past ``n_terms``, because at the
    estimating index itself the floor argument is exactly an integer.
    """
    if n_terms < 3:
        raise ValueError("n_terms must be >= 3")
    e = euclid_numbers(n_terms + 1)
    with mpmath.workprec(precision_bits):
        est = [mpmath.exp(mpmath.log(mpmath.mpf(x) - mpmath.mpf(0.5)) / mpmath.mpf(2) ** n)
               for n, x in enumerate(e, start=1)]
        big_e = est[-1]
        diff = abs(est[-1] - est[-2])
        digits = int(-mpmath.floor(mpmath.log10(diff))) if diff > 0 else int(precision_bits * 0.30103)
        check = []
        for n, x in enumerate(e[:n_terms], start=1):
            val = int(mpmath.floor(big_e ** (mpmath.mpf(2) ** n) + mpmath.mpf(0.5)))
            check.append(val == x)
    if not all(check):
        bad = check.index(False) + 1
        raise InsufficientPrecision(
            f"floor check fails at n={bad} with {precision_bits} bits; raise precision_bits")
    return EuclidConstantEstimate(n_terms, big_e, digits, est[:-1], check, precision_bits)


# -- conditioning slope -------------------------------------------------------

@dataclass
class SlopeFit:
    points: list[tuple[float, float]]
    slope: float
    intercept: float
    r2: float
    info: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"points": [list(p) for p in self.points], "slope": self.slope,
                "intercept": self.intercept, "r2": self.r2, **self.info}


class SlopeFitError(RuntimeError):
    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


def fit_loglog(degrees, values) -> SlopeFit:
    d = np.asarray(degrees, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(d) < 3:
        raise ValueError("need at least 3 points")
    if np.any(np.diff(d) <= 0):
        raise ValueError("degrees must be strictly increasing")
    x, y = np.log(d), np.log(v)
    res = stats.linregress(x, y)
    return SlopeFit(list(zip(x.tolist(), y.tolist())), float(res.slope),
                    float(res.intercept), float(res.rvalue ** 2))


def _norm2(m) -> float:
    rows, cols, vals = zip(*m.triplets())
    sp = scipy.sparse.csr_matrix((np.array(vals, float), (np.array(rows) - 1, np.array(cols) - 1)),
                                 shape=(m.n, m.n))
    if m.n <= 2:
        return float(np.linalg.norm(sp.toarray(), 2))
    v0 = np.ones(m.n) / math.sqrt(m.n)
    return float(scipy.sparse.linalg.svds(sp, k=1, v0=v0, return_singular_vectors=False)[0])


def condition_slope_fit(k_min: int = 2, k_max: int = 12, threads: int = 1,
                        k_limit: int = 12, progress=None) -> SlopeFit:
    """Fit ``log max K_e`` against ``log degree`` over ``k_min..k_max``.

    ``K_e = 1/|y^H x|`` for unit eigenvectors.  The ``info`` dict also carries
    the same fit for the relative condition ``K_e * ||A||_2 / |lambda|``.
    """
    if not (2 <= k_min < k_max <= k_limit):
        raise ValueError(f"need 2 <= k_min < k_max <= {k_limit}")
    if k_max - k_min + 1 < 3:
        raise ValueError("need at least 3 fit points")
    degrees, kmax_abs, kmax_rel, rows = [], [], [], []
    for k in range(k_min, k_max + 1):
        try:
            spec = compute_spectrum(k, threads=threads)
        except ConvergenceError as exc:
            raise SlopeFitError(f"eigensolver failed at k={k}: {exc}", rows) from exc
        nrm = _norm2(build_companion(k))
        rel = spec.cond * nrm / np.abs(spec.eigenvalues)
        degrees.append(2 ** (k - 1))
        kmax_abs.append(float(spec.cond.max()))
        kmax_rel.append(float(rel.max()))
        rows.append({"k": k, "degree": 2 ** (k - 1), "max_cond": kmax_abs[-1],
                     "max_rel_cond": kmax_rel[-1], "norm2": nrm,
                     "max_residual": float(spec.residual.max())})
        if progress:
            progress(rows[-1])
    fit = fit_loglog(degrees, kmax_abs)
    rel_fit = fit_loglog(degrees, kmax_rel)
    fit.info = {"rows": rows, "relative_slope": rel_fit.slope, "relative_r2": rel_fit.r2}
    return fit


# -- three-way conditioning comparison -------------------------------------------

REFERENCE_BANDS = {
    6: {"monomial": (-9.5, -8.5), "shifted": (-3.0, -2.0), "matrix": (-2.0, -1.0)},
    7: {"monomial": (-19.5, -18.5), "shifted": (-6.0, -5.0), "matrix": (-2.0, -1.0)},
    8: {"monomial": (-38.5, -37.5), "shifted": (-12.0, -11.0), "matrix": (-2.0, -1.0)},
}


@dataclass
class ComparisonRow:
    k: int
    bands: dict  # representation -> MergeBand
    verification: dict
    reference: dict

    def as_dict(self) -> dict:
        return {"k": self.k, "bands": {r: b.as_dict() for r, b in self.bands.items()},
                "reference_bands": {r: list(v) for r, v in self.reference.items()},
                "verification": self.verification}

    def ordered(self) -> bool:
        b = self.bands
        return b["matrix"].log_first > b["shifted"].log_first > b["monomial"].log_first


def _verify_nodes(k: int, basis: str, f: F.ScalarField, band, n_sample: int, seed: int,
                  bits: int) -> dict:
    """Recompute sampled nodes by extended-precision Horner on the exact coefficients."""
    rng = np.random.default_rng(seed)
    nodes = f.spec.nodes()
    # nodes near the merge level plus a uniform sample
    target = 10.0 ** band.log_first
    close = np.argsort(np.abs(np.log10(np.maximum(f.values, 1e-300)) - math.log10(target)), axis=None)
    picks = list(close[: n_sample // 2])
    picks += list(rng.choice(nodes.size, size=n_sample - len(picks), replace=False))
    pts = nodes.ravel()[picks]
    ref = F.pseudozero_ratio(k, pts, basis, method="horner", precision_bits=bits)
    got = f.values.ravel()[picks]
    rel = np.abs(got - ref) / np.maximum(ref, 1e-300)
    out = {"basis": basis, "precision_bits": bits, "n_nodes": len(picks),
           "max_rel_diff": float(rel.max())}
    try:
        fl = F.pseudozero_ratio(k, pts, basis, method="horner")
        with np.errstate(all="ignore"):
            out["binary64_horner_max_rel_diff"] = float(np.nanmax(np.abs(fl - ref) / ref))
    except OverflowError:
        out["binary64_horner_max_rel_diff"] = None
    return out


def conditioning_comparison(k: int, poly_grid: F.GridSpec | None = None,
                            matrix_grid: F.GridSpec | None = None, threads: int = 1,
                            verify: bool = True, precision_bits: int = 256,
                            seed: int = 0) -> ComparisonRow:
    """Merge bands of the monomial, shifted and matrix pseudo-regions."""
    if k not in (6, 7, 8):
        raise ValueError("k must be 6, 7 or 8")
    poly_grid = poly_grid or F.GridSpec(*F.DEFAULT_WINDOW, nx=601, ny=601)
    matrix_grid = matrix_grid or F.GridSpec(*F.DEFAULT_WINDOW, nx=201, ny=201)
    m = build_companion(k)
    roots = eigenvalues(m)
    bands, verification = {}, {}
    for basis in ("monomial", "shifted"):
        f = F.pseudozero_field(k, basis, poly_grid)
        bands[basis] = F.merge_band(f, roots)
        if verify:
            verification[basis] = _verify_nodes(k, basis, f, bands[basis], 40, seed, precision_bits)
    fm = F.pseudospectrum_field(m, matrix_grid, threads=threads)
    bands["matrix"] = F.merge_band(fm, roots)
    return ComparisonRow(k, bands, verification, REFERENCE_BANDS[k])


# -- similarity of contour pictures ----------------------------------------------

@dataclass
class SimilarityReport:
    kind: str
    isolated_roots: int
    n_roots: int
    merged_regions: int
    spacing_fraction: float | None
    criteria: dict

    def all_met(self) -> bool:
        return all(self.criteria.values())

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def similarity_criteria(f: F.ScalarField, levels, roots,
                        min_isolated: float = 0.25) -> SimilarityReport:
    """Three checks on a contour picture at ``levels``.

    * individual circles: at the lowest level at least ``min_isolated`` of
      the roots sit in a region of their own, enclosed by a closed contour
      (in the monomial picture many roots have regions far below grid
      resolution, so this cannot ask for all of them);
    * merging: at the highest level fewer regions than roots remain;
    * spacing: the median gap between consecutive contour levels is 0.1% to
      10% of the window diameter (nominally about 1%).
    """
    levels = sorted(float(v) for v in levels)
    roots = np.asarray(roots, dtype=np.complex128)
    n = len(roots)
    nodes = [f.spec.nearest_index(complex(z)) for z in roots]
    contours = F.contour_extract(f, levels)

    def region_labels(eps):
        mask = (f.values <= eps) & ~f.invalid
        lab, _ = ndimage.label(mask)
        return [int(lab[iy, ix]) for iy, ix in nodes]

    lo_labels = region_labels(levels[0])
    counts: dict[int, int] = {}
    for lab in lo_labels:
        counts[lab] = counts.get(lab, 0) + 1
    enclosed = F.enclosing_contours(contours[levels[0]], roots)
    isolated = sum(1 for lab, enc in zip(lo_labels, enclosed) if lab and counts[lab] == 1 and enc)
    hi_labels = region_labels(levels[-1])
    merged_regions = len({lab for lab in hi_labels if lab}) + sum(1 for lab in hi_labels if not lab)

    gaps = []
    for a, b in zip(levels, levels[1:]):
        pa, pb = contours[a], contours[b]
        if not pa or not pb:
            continue
        tree = cKDTree(np.vstack(pa))
        d, _ = tree.query(np.vstack(pb))
        gaps.append(float(np.median(d)))
    spacing = float(np.median(gaps)) / f.spec.diameter if gaps else None
    criteria = {
        "individual_circles": n > 0 and isolated >= max(1, math.ceil(min_isolated * n)),
        "merging": n > 0 and 0 < merged_regions < n and len(contours[levels[-1]]) > 0,
        "spacing": spacing is not None and 1e-3 <= spacing <= 1e-1,
    }
    return SimilarityReport(f.kind, isolated, n, merged_regions, spacing, criteria)


# -- suite --------------------------------------------------------------------

def _timed(fn):
    t0 = time.perf_counter()
    try:
        status, data = fn()
    except Exception as exc:  # reported, not raised
        status, data = "error", {"error": f"{type(exc).__name__}: {exc}"}
    return {"status": status, "data": data,
            "elapsed_ms": round(1000 * (time.perf_counter() - t0), 3)}


def _ok(flag: bool) -> str:
    return "pass" if flag else "fail"


def suite_checks(kmax: int = 8, seed: int = 0, n_egypt: int = 10, verify_cap: int = 9) -> dict:
    """Named check callables; each returns ``(status, data)``.

    ``status`` is "pass", "fail" (hard failure) or "info" (report-only).
    """
    kv = min(kmax, verify_cap)
    checks = {}

    def numbers():
        got = euclid_numbers(max(kmax, 5))
        return _ok(got[:5] == [2, 3, 7, 43, 1807]), {"first": got[:5]}
    checks["euclid_numbers"] = numbers

    def egypt():
        res = {n: egyptian_number_check(n) for n in range(1, n_egypt + 1)}
        return _ok(all(res.values())), {"n_max": n_egypt}
    checks["egyptian"] = egypt

    def egypt_poly():
        rng = random.Random(f"{seed}:egyptian_poly")
        out = []
        for _ in range(20):
            lam = Fraction(rng.randint(1, 3000), 1000)
            out.append((str(lam), egyptian_poly_check(5, lam).status))
        bad = [x for x in out if x[1] == "fails"]
        return _ok(not bad), {"points": out}
    checks["egyptian_poly"] = egypt_poly

    def poly_props():
        bad = []
        e = euclid_numbers(kmax)
        for k in range(1, kmax + 1):
            p = euclid_poly(k)
            if p.degree != 2 ** (k - 1) or p.coeffs[0] != 1 or p.lead != 1:
                bad.append((k, "degree/ends"))
            if min(p.coeffs) < 1:
                bad.append((k, "positivity"))
            if eval_exact(p, 1) != e[k - 1]:
                bad.append((k, "E_k(1)"))
            if k <= 10 and p != euclid_poly_product(k):
                bad.append((k, "product form"))
            if 2 <= k <= 10:
                s = shifted_euclid_poly(k)
                if any(c.numerator for c in s.coeffs[1::2]):
                    bad.append((k, "odd shifted coefficient"))
            if k <= 9 and k < kmax and not coeff_growth_check(k):
                bad.append((k, "coefficient squaring"))
        return _ok(not bad), {"kmax": kmax, "failures": bad}
    checks["polynomial_properties"] = poly_props

    def charpoly():
        rng = random.Random(f"{seed}:charpoly")
        res = {k: bool(verify_charpoly(k)) for k in range(1, kv + 1)}
        variants = {}
        if kv >= 5:
            for c in range(len(E2_SEEDS)):
                variants[f"e2_choice={c}"] = bool(verify_charpoly(5, VariantConfig(e2_choice=c)))
            for t in range(10):
                order = tuple(rng.sample(range(5), 5))
                variants[f"order={order}"] = bool(verify_charpoly(5, VariantConfig(block_order=order)))
        ok = all(res.values()) and all(variants.values())
        return _ok(ok), {"k": {str(k): v for k, v in res.items()}, "variants": variants}
    checks["charpoly"] = charpoly

    def tilde():
        rng = random.Random(f"{seed}:tilde_determinant")
        bad = []
        for k in range(2, kv + 1):
            t = build_tilde(k)
            p = euclid_poly(k)
            for _ in range(5):
                x = rng.randint(-50, 50)
                if det_charpoly_at(t, x) != eval_exact(p, x) - 1:
                    bad.append((k, x))
        return _ok(not bad), {"failures": bad}
    checks["tilde_determinant"] = tilde

    def structure():
        bad = []
        for k in range(1, min(kmax, 12) + 1):
            m = build_companion(k)
            sub = m.subdiagonal()
            if m.n != 2 ** (k - 1) or height(m) != 1 or any(s != -1 for s in sub):
                bad.append(k)
            if k >= 2 and (m[1, m.n] != 1 or corner_sign(k) != 1):
                bad.append(k)
        return _ok(not bad), {"failures": bad}
    checks["structure"] = structure

    def constant():
        est = euclid_constant(10, 2048)
        ok = mpmath.nstr(est.E_estimate, 4) == "1.264" and all(est.floor_check)
        return _ok(ok), est.as_dict()
    checks["euclid_constant"] = constant

    def spectra_check():
        rows = {}
        ok = True
        for k in range(1, min(kmax, 10) + 1):
            s = compute_spectrum(k)
            lam = s.eigenvalues
            pos = np.sort_complex(lam[lam.imag > 0])
            neg = np.sort_complex(np.conj(lam[lam.imag < 0]))
            paired = len(pos) == len(neg) and bool(np.all(pos == neg))
            good = (len(lam) == 2 ** (k - 1) and paired and float(s.newton_correction.max()) < 1e-8
                    and float(s.residual.max()) <= 1e-10 and float(s.cond.min()) >= 1 - 1e-12)
            ok &= good
            rows[str(k)] = {"n": len(lam), "max_residual": float(s.residual.max()),
                            "max_newton_step": float(s.newton_correction.max()),
                            "max_cond": float(s.cond.max()), "paired": paired}
        return _ok(ok), rows
    checks["spectra"] = spectra_check

    def unimodal():
        res = {str(k): bool(unimodality_check(euclid_poly(k))) for k in range(1, min(kmax, 10) + 1)}
        return "info", res
    checks["unimodality"] = unimodal

    def series():
        expect = {1: "converging", 0.5: "converging", 2: "converging", -0.5: "diverging"}
        got = {str(l): series_probe(l, 25).classification for l in expect}
        match = all(got[str(l)] == v for l, v in expect.items())
        return "info", {"classes": got, "match": match}
    checks["series_probe"] = series

    def summary():
        vals = {str(k): root_summary(k).max_abs_shift for k in range(2, min(kmax, 10) + 1)}
        seq = list(vals.values())
        return "info", {"max_abs_shift": vals,
                        "nondecreasing": all(b >= a for a, b in zip(seq, seq[1:]))}
    checks["root_summary"] = summary
    return checks


def run_suite(kmax: int = 8, checks: list[str] | None = None, seed: int = 0,
              n_egypt: int = 10, threads: int = 1) -> dict:
    """Run named checks; results keyed and ordered by check name."""
    avail = suite_checks(kmax=kmax, seed=seed, n_egypt=n_egypt)
    names = sorted(avail) if not checks else checks
    unknown = [c for c in names if c not in avail]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}")
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            res = dict(zip(names, ex.map(lambda c: _timed(avail[c]), names)))
    else:
        res = {c: _timed(avail[c]) for c in names}
    return {c: res[c] for c in sorted(res)}


def suite_failed(report: dict) -> bool:
    return any(v["status"] in ("fail", "error") for v in report.values())


def summary_table(report: dict, timings: bool = True) -> str:
    width = max((len(c) for c in report), default=5)
    lines = [f"{'check'.ljust(width)}  status" + ("  elapsed_ms" if timings else "")]
    for c, v in report.items():
        row = f"{c.ljust(width)}  {v['status']:<6}"
        lines.append(row + f"  {v['elapsed_ms']:.1f}" if timings else row.rstrip())
    return "\n".join(lines)
