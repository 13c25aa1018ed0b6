import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from euclid_companion.companion import build_companion
from euclid_companion.fields import (
    BudgetError,
    GridSpec,
    ScalarField,
    contour_extract,
    contours_csv,
    contours_svg,
    enclosing_contours,
    log_levels,
    merge_band,
    pseudospectrum_field,
    pseudozero_field,
    pseudozero_ratio,
    sigma_min,
    sigma_min_dense,
    sigma_min_many,
)
from euclid_companion.spectra import eigenvalues


@pytest.fixture(scope="module")
def e6():
    return build_companion(6)


@pytest.fixture(scope="module")
def field6(e6):
    return pseudospectrum_field(e6, GridSpec.default(61))


def test_sigma_min_far_away(e6):
    z = 10.0
    assert sigma_min(e6, z) == pytest.approx(sigma_min_dense(e6, z), rel=1e-9)
    assert sigma_min(e6, z) >= 10 - np.linalg.norm(e6.to_dense(float), 2)


def test_sigma_min_matches_svd(e6):
    rng = np.random.default_rng(1)
    zs = rng.uniform(-1.8, 0.8, 30) + 1j * rng.uniform(-1.3, 1.3, 30)
    got = sigma_min_many(e6, zs)
    ref = np.array([sigma_min_dense(e6, z) for z in zs])
    assert np.allclose(got, ref, rtol=1e-8, atol=1e-14)


def test_sigma_min_threads_agree(e6):
    zs = GridSpec.default(15).nodes()
    assert np.array_equal(sigma_min_many(e6, zs, threads=1), sigma_min_many(e6, zs, threads=3))


def test_sigma_min_vanishes_only_at_eigenvalues(e6):
    lam = eigenvalues(e6)
    assert np.all(sigma_min_many(e6, lam) < 1e-12)
    rng = np.random.default_rng(2)
    zs = rng.uniform(-1.8, 0.8, 100) + 1j * rng.uniform(-1.3, 1.3, 100)
    s = sigma_min_many(e6, zs)
    dist = np.abs(zs[:, None] - lam[None, :]).min(axis=1)
    # sigma_min <= distance to the spectrum, and it is only tiny near an eigenvalue
    assert np.all(s <= dist + 1e-12)
    assert np.all((s > 1e-8) | (dist < 1e-3))


def test_single_node_grid(e6):
    g = GridSpec.point(-0.5 + 0.5j)
    f = pseudospectrum_field(e6, g)
    assert f.values.shape == (1, 1)
    assert f.values[0, 0] == pytest.approx(sigma_min_dense(e6, -0.5 + 0.5j), rel=1e-9)


def test_lipschitz(field6):
    g = field6.spec
    v = field6.values
    hx = g.xs[1] - g.xs[0]
    hy = g.ys[1] - g.ys[0]
    assert np.all(np.abs(np.diff(v, axis=1)) <= hx * (1 + 1e-8))
    assert np.all(np.abs(np.diff(v, axis=0)) <= hy * (1 + 1e-8))


def test_conjugate_symmetry(field6):
    assert np.allclose(field6.values, field6.values[::-1, :], rtol=1e-9, atol=1e-14)


def test_symmetric_axis_is_exact():
    ys = GridSpec.default(41).ys
    assert np.array_equal(ys, -ys[::-1])


def test_budget():
    with pytest.raises(BudgetError):
        GridSpec.default(1001)
    GridSpec.default(1000)
    with pytest.raises(BudgetError):
        GridSpec(0, 1, 0, 1, 20, 20, budget=100)
    with pytest.raises(ValueError):
        GridSpec(1, 0, 0, 1, 2, 2)


def test_contours_of_constant_field():
    g = GridSpec(-1, 1, -1, 1, 20, 20)
    f = ScalarField(g, np.full((20, 20), 0.5), "synthetic")
    c = contour_extract(f, [0.1, 1.0])
    assert c[0.1] == [] and c[1.0] == []


def test_unit_circle_contour():
    g = GridSpec(-2, 2, -2, 2, 201, 201)
    f = ScalarField(g, np.abs(g.nodes()), "synthetic")
    (seg,) = contour_extract(f, [1.0])[1.0]
    r = np.hypot(seg[:, 0], seg[:, 1])
    assert np.max(np.abs(r - 1)) < 1e-3
    assert enclosing_contours([seg], [0j, 1.5 + 0j]).tolist() == [True, False]


def test_levels_validated():
    f = ScalarField(GridSpec(0, 1, 0, 1, 3, 3), np.ones((3, 3)), "synthetic")
    with pytest.raises(ValueError):
        contour_extract(f, [0.1, 0.01])
    with pytest.raises(ValueError):
        contour_extract(f, [0.0])
    assert log_levels(1e-3, 1e-1, 3) == pytest.approx([1e-3, 1e-2, 1e-1])


def test_pseudospectrum_contours_enclose_spectrum(e6):
    f = pseudospectrum_field(e6, GridSpec.default(121))
    lines = contour_extract(f, [0.1])[0.1]
    assert np.all(enclosing_contours(lines, eigenvalues(e6)))
    assert "level,segment,x,y" in contours_csv({0.1: lines})
    assert contours_svg(f, {0.1: lines}, eigenvalues(e6)).startswith("<svg")


@pytest.mark.parametrize("basis", ["monomial", "shifted"])
def test_pseudozero_zero_at_roots(basis, e6):
    lam = eigenvalues(e6)
    assert np.all(pseudozero_ratio(6, lam, basis) < 1e-12)
    assert pseudozero_ratio(6, np.array([0.5 + 0.5j]), basis)[0] > 1e-6


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
@settings(max_examples=60, deadline=None)
def test_pseudozero_ratio_in_unit_interval(z):
    for basis in ("monomial", "shifted"):
        r = pseudozero_ratio(5, np.array([z]), basis)[0]
        assert 0 <= r <= 1 + 1e-12


def test_recurrence_matches_extended_horner():
    g = GridSpec.default(9)
    for basis in ("monomial", "shifted"):
        a = pseudozero_field(6, basis, g).values
        b = pseudozero_field(6, basis, g, method="horner", precision_bits=256).values
        assert np.allclose(a, b, rtol=1e-10, atol=1e-300)


def test_shifted_ratio_not_below_monomial():
    # the shifted majorant is never larger on the window, so its ratio is bigger
    g = GridSpec.default(31)
    mono = pseudozero_field(6, "monomial", g).values
    shift = pseudozero_field(6, "shifted", g).values
    assert np.mean(shift >= mono * (1 - 1e-12)) > 0.5


def test_recurrence_overflow_fallback():
    r = pseudozero_ratio(12, np.array([50 + 50j]))
    assert np.isfinite(r[0]) and 0 < r[0] <= 1


def test_sidecar_and_csv():
    g = GridSpec(0, 1, 0, 1, 3, 2)
    vals = np.array([[1.0, 2.0, np.inf], [0.5, 0.25, 0.125]])
    f = ScalarField(g, vals, "synthetic")
    side = f.sidecar()
    assert side["n_invalid"] == 1 and side["invalid_nodes"] == [[0, 2]]
    lines = f.to_csv().splitlines()
    assert lines[0] == "x,y,value" and len(lines) == 7
    with pytest.raises(ValueError):
        ScalarField(g, np.ones((3, 2)), "synthetic")


def test_merge_band_two_wells():
    g = GridSpec(-2, 2, -1, 1, 201, 101)
    z = g.nodes()
    vals = np.abs(z - 1) * np.abs(z + 1)
    mb = merge_band(ScalarField(g, vals, "synthetic"), [-1, 1])
    # two wells |z^2 - 1| join at the saddle z = 0 where the value is 1
    assert mb.log_first == pytest.approx(0.0, abs=0.02)
    assert mb.band == (mb.log_first, mb.log_first + 1)
    assert mb.resolved
