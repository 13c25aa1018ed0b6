"""Pseudospectrum and pseudozero fields on rectangular grids."""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import contourpy
import mpmath
import numpy as np
from matplotlib.path import Path
from scipy import ndimage

from . import _kernels, svg
from .companion import CompanionMatrix
from .exact_poly import (
    _float_coeffs,
    euclid_poly,
    euclid_recurrence,
    euclid_recurrence_mp,
    eval_complex,
    shifted_euclid_poly,
)

KINDS = ("pseudospectrum", "pseudozero_monomial", "pseudozero_shifted")
DEFAULT_BUDGET = 1_000_000
# contains the |lambda + 1/2| <= 1.118 disc with margin
DEFAULT_WINDOW = (-1.8, 0.8, -1.3, 1.3)


class BudgetError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("nx and ny must be positive")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("grid bounds must satisfy min < max")
        if self.nx * self.ny > self.budget:
            raise BudgetError(f"{self.nx}x{self.ny} grid exceeds budget of {self.budget} nodes")

    @classmethod
    def default(cls, n: int = 400, budget: int = DEFAULT_BUDGET) -> "GridSpec":
        return cls(*DEFAULT_WINDOW, nx=n, ny=n, budget=budget)

    @classmethod
    def point(cls, z: complex, half_width: float = 1e-3) -> "GridSpec":
        return cls(z.real - half_width, z.real + half_width,
                   z.imag - half_width, z.imag + half_width, 1, 1)

    @staticmethod
    def _axis(lo, hi, n):
        mid = 0.5 * (lo + hi)
        if n == 1:
            return np.array([mid])
        # integer numerators keep a window symmetric about 0 exactly symmetric
        t = (2.0 * np.arange(n) - (n - 1)) / (n - 1)
        return mid + 0.5 * (hi - lo) * t

    @property
    def xs(self) -> np.ndarray:
        return self._axis(self.re_min, self.re_max, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self._axis(self.im_min, self.im_max, self.ny)

    def nodes(self) -> np.ndarray:
        """Complex grid of shape (ny, nx); row index is the imaginary axis."""
        return self.xs[None, :] + 1j * self.ys[:, None]

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_max - self.re_min, self.im_max - self.im_min)

    def nearest_index(self, z: complex) -> tuple[int, int]:
        ix = int(np.argmin(np.abs(self.xs - z.real)))
        iy = int(np.argmin(np.abs(self.ys - z.imag)))
        return iy, ix

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("budget")
        return d


@dataclass
class ScalarField:
    """``values[iy, ix]`` at ``spec.xs[ix] + 1j*spec.ys[iy]``.

    ``invalid`` marks nodes whose value could not be computed (those hold inf).
    """

    spec: GridSpec
    values: np.ndarray
    kind: str
    invalid: np.ndarray = field(default=None)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS and not self.kind.startswith("synthetic"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.spec.ny, self.spec.nx):
            raise ValueError("values shape does not match the grid")
        if self.invalid is None:
            self.invalid = ~np.isfinite(self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,y,value\n")
        xs, ys = self.spec.xs, self.spec.ys
        for iy in range(self.spec.ny):
            y = ys[iy]
            for ix in range(self.spec.nx):
                buf.write(f"{xs[ix]:.17g},{y:.17g},{self.values[iy, ix]:.17g}\n")
        return buf.getvalue()

    def sidecar(self) -> dict:
        finite = self.values[~self.invalid]
        return {
            "kind": self.kind,
            "grid": self.spec.as_dict(),
            "layout": "values[iy][ix] at (xs[ix], ys[iy]); CSV rows iterate ix fastest",
            "n_invalid": int(self.invalid.sum()),
            "invalid_nodes": [[int(i), int(j)] for i, j in zip(*np.nonzero(self.invalid))][:1000],
            "min": float(finite.min()) if finite.size else None,
            "max": float(finite.max()) if finite.size else None,
            **self.meta,
        }

    def sidecar_json(self) -> str:
        return json.dumps(self.sidecar(), indent=2, sort_keys=True)


# -- pseudospectra ---------------------------------------------------------

def _dense(m) -> np.ndarray:
    if isinstance(m, CompanionMatrix):
        return m.to_dense(np.float64)
    return np.ascontiguousarray(np.asarray(m, dtype=np.float64))


def _sigma_chunk(a, zs, tol, max_steps):
    out = np.empty(len(zs))
    _kernels.sigma_min_batch(a, np.ascontiguousarray(zs, dtype=np.complex128), out, tol, max_steps)
    return out


def sigma_min_many(m, zs, threads: int = 1, tol: float = 1e-10, max_steps: int = 60) -> np.ndarray:
    """``sigma_min(z I - m)`` for every ``z`` (any shape)."""
    a = _dense(m)
    zs = np.asarray(zs, dtype=np.complex128)
    flat = zs.ravel()
    if threads > 1 and flat.size > 1:
        chunks = np.array_split(np.arange(flat.size), threads)
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda idx: _sigma_chunk(a, flat[idx], tol, max_steps), chunks))
        out = np.concatenate(parts)
    else:
        out = _sigma_chunk(a, flat, tol, max_steps)
    return out.reshape(zs.shape)


def sigma_min(m, z: complex) -> float:
    return float(sigma_min_many(m, np.array([z]))[0])


def sigma_min_dense(m, z: complex) -> float:
    """Slow reference: full SVD."""
    a = _dense(m)
    return float(np.linalg.svd(z * np.eye(a.shape[0]) - a, compute_uv=False)[-1])


def pseudospectrum_field(m, g: GridSpec, threads: int = 1) -> ScalarField:
    vals = sigma_min_many(m, g.nodes(), threads=threads)
    return ScalarField(g, vals, "pseudospectrum")


# -- pseudozeros -----------------------------------------------------------

def _ratio_recurrence(k: int, lam: np.ndarray, shifted: bool) -> np.ndarray:
    num = np.abs(euclid_recurrence(k, lam))
    if shifted:
        # B~_k(|u|) = E_k(|u| - 1/2) because every u-coefficient is >= 0
        den = euclid_recurrence(k, np.abs(lam + 0.5) - 0.5)
    else:
        den = euclid_recurrence(k, np.abs(lam))
    with np.errstate(all="ignore"):
        return num / den


def _ratio_recurrence_mp(k: int, lam: complex, shifted: bool, bits: int) -> float:
    with mpmath.workprec(bits):
        num = abs(euclid_recurrence_mp(k, lam, bits))
        if shifted:
            x = abs(mpmath.mpc(lam) + mpmath.mpf(0.5)) - mpmath.mpf(0.5)
        else:
            x = abs(mpmath.mpc(lam))
        den = euclid_recurrence_mp(k, x, bits)
        return float(num / den)


def _ratio_horner(k: int, lam: np.ndarray, shifted: bool, precision_bits: int | None) -> np.ndarray:
    p = shifted_euclid_poly(k) if shifted else euclid_poly(k)
    x = lam + 0.5 if shifted else lam
    ax = np.abs(x)
    if precision_bits is None:
        c = _float_coeffs(p)
        with np.errstate(all="ignore"):
            num = np.abs(np.polynomial.polynomial.polyval(x, c))
            den = np.polynomial.polynomial.polyval(ax, np.abs(c))
            return num / den
    out = np.empty(lam.shape)
    for idx in np.ndindex(lam.shape):
        # each value is rounded to binary64 only after the extended evaluation
        num = abs(eval_complex(p, complex(x[idx]), precision_bits))
        den = eval_complex(p, float(ax[idx]), precision_bits).real
        out[idx] = num / den
    return out


def pseudozero_ratio(k: int, lam, basis: str = "monomial", method: str = "recurrence",
                     precision_bits: int | None = None) -> np.ndarray:
    """``|E_k(lam)| / B(lam)`` at points of the lambda-plane.

    ``basis="monomial"`` uses ``B_k(|lam|)``; ``basis="shifted"`` uses the
    majorant of the expansion in ``u = lam + 1/2``, evaluated at ``|u|``.
    ``method="recurrence"`` never forms coefficients; non-finite nodes are
    recomputed in extended precision.  ``method="horner"`` evaluates the
    explicit coefficients, in binary64 or at ``precision_bits``.
    """
    if basis not in ("monomial", "shifted"):
        raise ValueError(f"unknown basis {basis!r}")
    shifted = basis == "shifted"
    lam = np.asarray(lam, dtype=np.complex128)
    if method == "horner":
        return _ratio_horner(k, lam, shifted, precision_bits)
    if method != "recurrence":
        raise ValueError(f"unknown method {method!r}")
    vals = np.asarray(_ratio_recurrence(k, lam, shifted), dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        bits = precision_bits or 256
        for idx in zip(*np.nonzero(bad)):
            vals[idx] = _ratio_recurrence_mp(k, complex(lam[idx]), shifted, bits)
    return vals


def pseudozero_field(k: int, basis: str, g: GridSpec, method: str = "recurrence",
                     precision_bits: int | None = None) -> ScalarField:
    """Pseudozero field over ``g`` (always in the lambda-plane)."""
    vals = pseudozero_ratio(k, g.nodes(), basis, method, precision_bits)
    kind = "pseudozero_shifted" if basis == "shifted" else "pseudozero_monomial"
    return ScalarField(g, vals, kind, meta={"k": k, "method": method})


# -- contours --------------------------------------------------------------

def log_levels(lo: float, hi: float, n: int) -> list[float]:
    if n == 1:
        return [lo]
    return list(np.logspace(math.log10(lo), math.log10(hi), n))


def contour_extract(f: ScalarField, levels) -> dict[float, list[np.ndarray]]:
    """Marching-squares polylines per level, as (N, 2) arrays of (re, im)."""
    levels = [float(v) for v in levels]
    if any(v <= 0 for v in levels) or levels != sorted(levels):
        raise ValueError("levels must be positive and sorted")
    out = {}
    if f.spec.nx < 2 or f.spec.ny < 2:
        return {lv: [] for lv in levels}
    z = np.where(f.invalid, np.nan, f.values)
    gen = contourpy.contour_generator(f.spec.xs, f.spec.ys, z, line_type="Separate")
    for lv in levels:
        out[lv] = [np.asarray(seg) for seg in gen.lines(lv) if len(seg) >= 2]
    return out


def _closed(seg: np.ndarray, tol: float) -> bool:
    return len(seg) >= 4 and np.hypot(*(seg[0] - seg[-1])) <= tol


def enclosing_contours(lines: list[np.ndarray], points, tol: float = 1e-9) -> np.ndarray:
    """For each point, whether some closed polyline in ``lines`` encloses it."""
    pts = np.asarray(points, dtype=np.complex128)
    xy = np.column_stack([pts.real, pts.imag])
    inside = np.zeros(len(pts), dtype=bool)
    for seg in lines:
        if _closed(seg, tol):
            inside |= Path(seg).contains_points(xy)
    return inside


def contours_csv(contours: dict[float, list[np.ndarray]]) -> str:
    buf = io.StringIO()
    buf.write("level,segment,x,y\n")
    for lv in sorted(contours):
        for s, seg in enumerate(contours[lv]):
            for x, y in seg:
                buf.write(f"{lv:.17g},{s},{x:.17g},{y:.17g}\n")
    return buf.getvalue()


def contours_svg(f: ScalarField, contours: dict[float, list[np.ndarray]], points=None,
                 title: str = "") -> str:
    g = f.spec
    fig = svg.Figure((g.re_min, g.re_max), (g.im_min, g.im_max), title=title)
    levels = sorted(contours)
    for i, lv in enumerate(levels):
        color = svg.ramp(i, len(levels))
        fig.layer(f"eps={lv:.3g}", [fig.polyline(seg, color) for seg in contours[lv]])
        fig.legend_entry(f"ε = 10^{math.log10(lv):.2f}", color)
    if points is not None:
        fig.layer("roots", [fig.dot(z) for z in np.asarray(points)])
    return fig.render()


# -- merging of pseudo-regions ----------------------------------------------

def _component_count(f: ScalarField, eps: float, root_nodes) -> tuple[int, int]:
    """(number of distinct regions holding roots, number of components overall)."""
    mask = (f.values <= eps) & ~f.invalid
    labels, n_comp = ndimage.label(mask)
    seen = set()
    alone = 0
    for iy, ix in root_nodes:
        lab = labels[iy, ix]
        if lab == 0:
            alone += 1
        else:
            seen.add(lab)
    return len(seen) + alone, n_comp


@dataclass
class MergeBand:
    """Where the sublevel regions around distinct roots first join.

    ``log_first`` is log10 of the smallest eps at which two roots share a
    region; ``log_all`` where all roots share one.  The reported band is
    ``[log_first, log_first + 1]``.
    """

    log_first: float
    log_all: float
    n_roots: int
    resolved: bool

    @property
    def band(self) -> tuple[float, float]:
        return (self.log_first, self.log_first + 1.0)

    def as_dict(self) -> dict:
        return {"log_first": self.log_first, "log_all": self.log_all, "band": list(self.band),
                "n_roots": self.n_roots, "resolved": self.resolved}


def _bisect_log(pred, lo: float, hi: float, tol: float) -> float:
    # pred(lo) False, pred(hi) True
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def merge_band(f: ScalarField, roots, tol: float = 0.01) -> MergeBand:
    roots = np.asarray(roots, dtype=np.complex128)
    nodes = [f.spec.nearest_index(complex(z)) for z in roots]
    n = len(roots)
    resolved = len(set(nodes)) == n
    finite = f.values[~f.invalid & (f.values > 0)]
    if finite.size == 0 or n < 2:
        return MergeBand(math.nan, math.nan, n, resolved)
    lo = math.log10(finite.min()) - 1.0
    hi = math.log10(finite.max()) + 1.0

    def merged(le):
        return _component_count(f, 10.0 ** le, nodes)[0] < n

    def joined(le):
        return _component_count(f, 10.0 ** le, nodes)[0] == 1

    first = _bisect_log(merged, lo, hi, tol) if not merged(lo) else lo
    full = _bisect_log(joined, lo, hi, tol) if not joined(lo) else lo
    return MergeBand(first, full, n, resolved)
