"""Eigenvalues of the companion matrices, with condition numbers and residuals."""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.linalg

from . import _kernels
from .companion import DEFAULT, CompanionMatrix, VariantConfig, build_companion
from .exact_poly import euclid_recurrence, euclid_recurrence_mp

CSV_COLUMNS = ("re", "im", "cond", "resid_recurrence", "resid_sigma")


class ConvergenceError(RuntimeError):
    """QR iteration or a refinement did not converge.

    ``partial`` holds whatever eigenvalues were found and ``active`` the last
    row of the undeflated window (QR) or the iteration count (Newton).
    """

    def __init__(self, msg, partial=None, active=None):
        super().__init__(msg)
        self.partial = partial
        self.active = active


@dataclass
class Spectrum:
    k: int
    eigenvalues: np.ndarray
    cond: np.ndarray
    residual: np.ndarray
    sigma_resid: np.ndarray
    newton_correction: np.ndarray
    qr_sweeps: int = 0

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for lam, c, r, s in zip(self.eigenvalues, self.cond, self.residual, self.sigma_resid):
            buf.write(f"{lam.real:.17g},{lam.imag:.17g},{c:.17g},{r:.17g},{s:.17g}\n")
        return buf.getvalue()


def _as_dense(m) -> np.ndarray:
    if isinstance(m, CompanionMatrix):
        return m.to_dense(np.float64)
    a = np.array(m, dtype=np.float64, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    if np.any(np.tril(a, -2)):
        raise ValueError("matrix is not upper Hessenberg")
    return a


def _sort_pairs(wr: np.ndarray, wi: np.ndarray) -> np.ndarray:
    # QR delivers complex eigenvalues as exact (x+iy, x-iy) pairs; keep them exact
    lam = wr + 1j * wi
    order = np.lexsort((lam.imag, lam.real))
    return lam[order]


def eigenvalues(m, balance: bool = False, max_iter: int | None = None, return_sweeps: bool = False):
    """All eigenvalues of an upper Hessenberg matrix via double-shift QR.

    The iteration runs directly on the Hessenberg form.  Output is sorted
    by real part, then imaginary part; conjugate pairs are bitwise exact.
    """
    a = _as_dense(m)
    n = a.shape[0]
    if balance:
        # diagonal scaling only, so the Hessenberg shape survives
        a, _ = scipy.linalg.matrix_balance(a, permute=False)
    h = np.ascontiguousarray(a.copy())
    budget = 30 * n if max_iter is None else int(max_iter)
    wr, wi, sweeps, active = _kernels.hqr(h, budget)
    if sweeps < 0:
        found = _sort_pairs(wr[active + 1:], wi[active + 1:])
        raise ConvergenceError(
            f"QR did not converge within {budget} sweeps; "
            f"rows 0..{active} undeflated, {n - active - 1} eigenvalues found",
            partial=found,
            active=active,
        )
    lam = _sort_pairs(wr, wi)
    return (lam, sweeps) if return_sweeps else lam


def _cond_chunk(a, lams, n_iter):
    cond = np.empty(len(lams))
    sig = np.empty(len(lams))
    st = np.empty(len(lams), dtype=np.int64)
    _kernels.eig_cond_batch(a, lams, cond, sig, st, n_iter)
    return cond, sig, st


def _cond_many(a: np.ndarray, lams: np.ndarray, threads: int = 1, n_iter: int = 2):
    """Condition numbers and sigma_min at ``lams``, mirrored over conjugates."""
    lams = np.asarray(lams, dtype=np.complex128)
    upper = np.flatnonzero(lams.imag >= 0)
    work = np.ascontiguousarray(lams[upper])
    if threads > 1 and len(work) > 1:
        chunks = np.array_split(np.arange(len(work)), threads)
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda idx: _cond_chunk(a, work[idx], n_iter), chunks))
        cond_u = np.concatenate([p[0] for p in parts])
        sig_u = np.concatenate([p[1] for p in parts])
        st_u = np.concatenate([p[2] for p in parts])
    else:
        cond_u, sig_u, st_u = _cond_chunk(a, work, n_iter)
    if np.any(st_u == 2):
        bad = work[st_u == 2]
        raise ConvergenceError(f"inverse iteration broke down at {bad[:3]}", partial=bad)
    cond = np.empty(len(lams))
    sig = np.empty(len(lams))
    cond[upper] = cond_u
    sig[upper] = sig_u
    # a conjugate's left/right vectors are the conjugated ones
    lookup = {complex(z): i for i, z in enumerate(work)}
    for i in np.flatnonzero(lams.imag < 0):
        j = lookup.get(complex(np.conj(lams[i])))
        if j is None:
            c, s, st = _cond_chunk(a, lams[i:i + 1], n_iter)
            if st[0] == 2:
                raise ConvergenceError(f"inverse iteration broke down at {lams[i]}")
            cond[i], sig[i] = c[0], s[0]
        else:
            cond[i], sig[i] = cond_u[j], sig_u[j]
    return cond, sig


def eig_condition(m, lam: complex) -> float:
    """``1/|y^H x|`` for unit left/right eigenvectors at ``lam``."""
    a = _as_dense(m)
    cond, _ = _cond_many(a, np.array([lam], dtype=np.complex128))
    return float(cond[0])


def _ratio_mp(k: int, lam: complex, bits: int = 256):
    with mpmath.workprec(bits):
        num = abs(euclid_recurrence_mp(k, lam, bits))
        den = euclid_recurrence_mp(k, abs(lam), bits)
        e, d = euclid_recurrence_mp(k, lam, bits, derivative=True)
        return float(num / den), float(abs(e / d))


def residuals(k: int, lams) -> tuple[np.ndarray, np.ndarray]:
    """Backward error ``|E_k(l)|/B_k(|l|)`` and Newton step ``|E_k/E_k'|``.

    Both use the coefficient-free recurrence; points where binary64
    overflows are redone in 256-bit arithmetic.
    """
    lams = np.asarray(lams, dtype=np.complex128)
    e, d = euclid_recurrence(k, lams, derivative=True)
    b = euclid_recurrence(k, np.abs(lams))
    with np.errstate(all="ignore"):
        resid = np.abs(e) / b
        step = np.abs(e / d)
    bad = ~(np.isfinite(resid) & np.isfinite(step) & np.isfinite(b) & (b > 0))
    for i in np.flatnonzero(bad):
        resid[i], step[i] = _ratio_mp(k, complex(lams[i]))
    return resid, step


def newton_refine(k: int, lam0: complex, max_iter: int = 10) -> complex:
    """Newton on ``E_k`` with value and derivative from the recurrence."""
    lam = complex(lam0)
    prev = math.inf
    growth = 0
    for _ in range(max_iter):
        e, d = euclid_recurrence(k, lam, derivative=True)
        if not (np.isfinite(e) and np.isfinite(d)) or d == 0:
            e, d = euclid_recurrence_mp(k, lam, 256, derivative=True)
            if d == 0:
                raise ConvergenceError(f"zero derivative at {lam}")
            step = complex(e / d)
        else:
            step = complex(e / d)
        lam -= step
        size = abs(step)
        if size <= 1e-14 * abs(lam):
            return lam
        growth = growth + 1 if size > prev else 0
        if growth >= 3:
            raise ConvergenceError(f"Newton diverging from {lam0}", partial=lam, active=growth)
        prev = size
    return lam


def compute_spectrum(k: int, cfg: VariantConfig = DEFAULT, threads: int = 1,
                     balance: bool = False) -> Spectrum:
    m = build_companion(k, cfg)
    a = m.to_dense(np.float64)
    lam, sweeps = eigenvalues(a, balance=balance, return_sweeps=True)
    cond, sig = _cond_many(a, lam, threads=threads)
    resid, step = residuals(k, lam)
    return Spectrum(k=k, eigenvalues=lam, cond=cond, residual=resid, sigma_resid=sig,
                    newton_correction=step, qr_sweeps=sweeps)


@dataclass
class RootSummary:
    k: int
    n_roots: int
    max_abs_shift: float  # max |lambda + 1/2|
    max_abs: float
    n_left: int
    n_right: int
    n_upper: int
    n_lower: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def root_summary(k: int, lams=None) -> RootSummary:
    if lams is None:
        lams = eigenvalues(build_companion(k))
    lams = np.asarray(lams)
    return RootSummary(
        k=k,
        n_roots=len(lams),
        max_abs_shift=float(np.max(np.abs(lams + 0.5))),
        max_abs=float(np.max(np.abs(lams))),
        n_left=int(np.sum(lams.real < 0)),
        n_right=int(np.sum(lams.real > 0)),
        n_upper=int(np.sum(lams.imag > 0)),
        n_lower=int(np.sum(lams.imag < 0)),
    )
