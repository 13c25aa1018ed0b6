import numpy as np
import pytest
import scipy.linalg

from euclid_companion.companion import VariantConfig, build_companion
from euclid_companion.exact_poly import euclid_poly
from euclid_companion.spectra import (
    CSV_COLUMNS,
    ConvergenceError,
    compute_spectrum,
    eig_condition,
    eigenvalues,
    newton_refine,
    residuals,
    root_summary,
)


def test_k1_and_k2():
    assert np.allclose(eigenvalues(build_companion(1)), [-1.0])
    lam = eigenvalues(build_companion(2))
    want = np.array([-0.5 - np.sqrt(3) / 2 * 1j, -0.5 + np.sqrt(3) / 2 * 1j])
    assert np.allclose(lam, want, atol=1e-15)
    assert np.allclose(lam ** 3, 1.0, atol=1e-14)


@pytest.mark.parametrize("k", range(1, 11))
def test_count_and_residuals(k, spectrum):
    s = spectrum(k)
    assert len(s) == 2 ** (k - 1)
    assert np.all(s.residual <= 1e-10)
    assert np.all(s.newton_correction <= 1e-10 * np.maximum(1, np.abs(s.eigenvalues)))
    assert np.all(s.cond >= 1 - 1e-12)
    assert np.all(np.isfinite(s.sigma_resid))


@pytest.mark.parametrize("k", range(2, 9))
def test_eigenvalues_match_lapack(k):
    a = build_companion(k).to_dense(float)
    ours = eigenvalues(a)
    ref = np.linalg.eigvals(a)
    # match each reference value to its nearest computed one
    d = np.abs(ours[:, None] - ref[None, :]).min(axis=0)
    assert d.max() < 1e-9


# numpy.roots works from monomial coefficients and loses the roots past k = 6
@pytest.mark.parametrize("k", range(2, 7))
def test_roots_match_numpy_roots(k):
    coeffs = [int(c) for c in euclid_poly(k).coeffs][::-1]
    ref = np.roots(np.array(coeffs, dtype=float))
    ours = eigenvalues(build_companion(k))
    assert np.abs(ours[:, None] - ref[None, :]).min(axis=0).max() < 1e-6


def test_conjugate_pairs_exact(spectrum):
    lam = spectrum(8).eigenvalues
    assert set(lam.tolist()) == set(np.conj(lam).tolist())


@pytest.mark.parametrize("k", [3, 5, 7])
def test_condition_against_scipy(k, spectrum):
    a = build_companion(k).to_dense(float)
    w, vl, vr = scipy.linalg.eig(a, left=True, right=True)
    ref = 1.0 / np.abs(np.sum(vl.conj() * vr, axis=0))
    s = spectrum(k)
    for lam, c in zip(s.eigenvalues, s.cond):
        j = np.argmin(np.abs(w - lam))
        assert c == pytest.approx(ref[j], rel=1e-6)


def test_eig_condition_single():
    a = build_companion(2)
    lam = eigenvalues(a)[1]
    # both roots of a cubic cyclotomic factor: cond is 2/sqrt(3)
    assert eig_condition(a, lam) == pytest.approx(2 / np.sqrt(3), rel=1e-12)


def test_variants_share_spectrum():
    ref = eigenvalues(build_companion(6))
    for choice in range(4):
        for order in [None, (5, 4, 3, 2, 1, 0)]:
            cfg = VariantConfig(e2_choice=choice, block_order=order)
            lam = eigenvalues(build_companion(6, cfg))
            assert np.abs(lam[:, None] - ref[None, :]).min(axis=0).max() < 1e-8


@pytest.mark.parametrize("k", range(2, 9))
def test_newton_contraction(k, spectrum):
    lam = spectrum(k).eigenvalues
    for z in lam[lam.imag >= 0][:16]:
        assert abs(newton_refine(k, z) - z) < 1e-6 * max(1, abs(z))


def test_newton_from_nearby_start():
    z = newton_refine(2, -0.5 + 0.8j)
    assert z == pytest.approx(-0.5 + np.sqrt(3) / 2 * 1j, abs=1e-15)


def test_balance_option():
    lam = eigenvalues(build_companion(5), balance=True)
    ref = eigenvalues(build_companion(5))
    assert np.abs(lam[:, None] - ref[None, :]).min(axis=0).max() < 1e-10


def test_convergence_failure_reports_partial():
    with pytest.raises(ConvergenceError) as err:
        eigenvalues(build_companion(7), max_iter=2)
    e = err.value
    assert e.partial is not None and len(e.partial) < 64
    assert e.active >= 0


def test_rejects_non_hessenberg():
    with pytest.raises(ValueError):
        eigenvalues(np.ones((3, 3)))
    with pytest.raises(ValueError):
        eigenvalues(np.ones((2, 3)))


def test_residual_at_non_root_is_large():
    r, _ = residuals(4, [0.3 + 0.2j])
    assert r[0] > 1e-3


def test_csv(spectrum):
    text = spectrum(3).to_csv().splitlines()
    assert text[0] == ",".join(CSV_COLUMNS)
    assert len(text) == 5
    assert all(len(row.split(",")) == 5 for row in text[1:])


def test_root_summary():
    s1 = root_summary(1)
    assert s1.n_roots == 1 and s1.max_abs_shift == pytest.approx(0.5)
    s2 = root_summary(2)
    assert s2.n_upper == s2.n_lower == 1 and s2.max_abs == pytest.approx(1.0)
    assert s2.max_abs_shift == pytest.approx(np.sqrt(3) / 2)


def test_sorted_output():
    lam = compute_spectrum(5).eigenvalues
    keys = list(zip(lam.real, lam.imag))
    assert keys == sorted(keys)
