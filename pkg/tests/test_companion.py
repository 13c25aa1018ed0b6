import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from euclid_companion.companion import (
    E2_SEEDS,
    EXPORT_FORMATS,
    CompanionMatrix,
    StructureError,
    VariantConfig,
    build_companion,
    build_mandelbrot_companion,
    build_tilde,
    check_charpoly,
    corner_sign,
    det_charpoly_at,
    export_matrix,
    height,
    import_matrix,
    verify_charpoly,
)
from euclid_companion.exact_poly import euclid_poly, eval_exact, mandelbrot_poly


def dense(m):
    return m.to_dense(int)


def test_small_displays():
    assert dense(build_companion(1)).tolist() == [[-1]]
    assert dense(build_companion(2)).tolist() == [[0, 1], [-1, -1]]
    e3 = dense(build_companion(3))
    assert e3.tolist() == [[0, 0, 0, 1],
                           [-1, -1, 0, 0],
                           [0, -1, 0, 1],
                           [0, 0, -1, -1]]


def test_e4_plus_ones():
    m = build_companion(4)
    plus = sorted((i, j) for (i, j), v in m.entries.items() if v == 1)
    assert plus == [(1, 8), (3, 4), (5, 8), (7, 8)]


def test_tilde_small():
    assert dense(build_tilde(2)).tolist() == [[0, 0], [-1, -1]]
    t3 = dense(build_tilde(3))
    assert t3.shape == (4, 4)
    assert t3[0, 0] == 0 and t3[1, 1] == -1 and t3[2:, 2:].tolist() == [[0, 1], [-1, -1]]
    with pytest.raises(ValueError):
        build_tilde(1)


@pytest.mark.parametrize("k", range(1, 10))
def test_charpoly_exact(k):
    assert verify_charpoly(k)


@pytest.mark.parametrize("k", range(2, 10))
def test_tilde_determinant(k):
    rng = random.Random(k)
    t = build_tilde(k)
    p = euclid_poly(k)
    for _ in range(20):
        x = rng.randint(-100, 100)
        assert det_charpoly_at(t, x) == eval_exact(p, x) - 1


def test_determinant_spot_values():
    assert det_charpoly_at(build_companion(2), 1) == 3
    assert det_charpoly_at(build_companion(4), 1) == 43
    assert det_charpoly_at(build_companion(3), 0) == 1


def test_determinant_matches_numpy():
    m = build_companion(5)
    for x in (-2, 0, 3):
        want = round(np.linalg.det(x * np.eye(16) - m.to_dense(float)))
        assert det_charpoly_at(m, x) == want


@pytest.mark.parametrize("choice", range(len(E2_SEEDS)))
def test_all_seeds_have_same_charpoly(choice):
    seed = np.array(E2_SEEDS[choice])
    assert round(np.trace(seed)) == -1 and round(np.linalg.det(seed)) == 1
    assert verify_charpoly(5, VariantConfig(e2_choice=choice))


def test_random_block_orders():
    rng = random.Random(7)
    for _ in range(10):
        order = tuple(rng.sample(range(5), 5))
        cfg = VariantConfig(e2_choice=rng.randrange(4), block_order=order)
        assert verify_charpoly(5, cfg)


def test_corner_compensates_seed_sign():
    # seeds with a +1 subdiagonal flip the corner when they occur an odd
    # number of times
    assert corner_sign(3, VariantConfig(e2_choice=1)) == -1
    assert corner_sign(3, VariantConfig(e2_choice=0)) == 1
    assert verify_charpoly(3, VariantConfig(e2_choice=1))


@pytest.mark.parametrize("k", range(1, 13))
def test_structure(k):
    m = build_companion(k)
    a = m.to_dense(int)
    assert m.n == 2 ** (k - 1)
    assert set(np.unique(a)) <= {-1, 0, 1}
    assert height(m) == 1 and height(a) == 1
    assert not np.any(np.tril(a, -2))
    assert all(s == -1 for s in m.subdiagonal())
    if k >= 2:
        assert m[1, m.n] == 1 == corner_sign(k)


@pytest.mark.parametrize("k", range(3, 12))
def test_nnz_recursion(k):
    assert build_companion(k).nnz == build_tilde(k - 1).nnz + build_companion(k - 1).nnz + 2


@pytest.mark.parametrize("n", range(2, 8))
def test_mandelbrot(n):
    m = build_mandelbrot_companion(n)
    assert m.n == 2 ** (n - 1) - 1
    assert height(m) == 1
    assert check_charpoly(m, mandelbrot_poly(n))


def test_mandelbrot_small():
    assert dense(build_mandelbrot_companion(2)).tolist() == [[-1]]
    assert build_mandelbrot_companion(4).n == 7
    with pytest.raises(ValueError):
        build_mandelbrot_companion(1)


def test_check_reports_failure():
    wrong = euclid_poly(3) + 1
    res = check_charpoly(build_companion(3), wrong)
    assert not res and res.failed_at == 0


def test_invalid_structures_rejected():
    with pytest.raises(StructureError):
        CompanionMatrix(3, {(3, 1): -1})
    with pytest.raises(StructureError):
        CompanionMatrix(2, {(1, 1): 2, (2, 1): -1})
    with pytest.raises(ValueError):
        VariantConfig(e2_choice=4)
    with pytest.raises(ValueError):
        VariantConfig(block_order=(0, 0, 1))
    with pytest.raises(ValueError):
        build_companion(4, VariantConfig(block_order=(1, 0)))


@pytest.mark.parametrize("fmt", EXPORT_FORMATS)
@pytest.mark.parametrize("k", [1, 2, 5])
def test_export_round_trip(fmt, k):
    m = build_companion(k)
    back = import_matrix(export_matrix(m, fmt), fmt)
    assert back.n == m.n and back.entries == m.entries


def test_matrix_market_text():
    text = export_matrix(build_companion(2)).decode()
    assert text.splitlines()[0] == "%%MatrixMarket matrix coordinate integer general"
    assert text.splitlines()[2:] == ["2 2 3", "1 2 1", "2 1 -1", "2 2 -1"]
    assert export_matrix(build_companion(2), "csv-triplets").decode().startswith("row,col,value\n")
    with pytest.raises(ValueError):
        export_matrix(build_companion(2), "xml")


@given(st.integers(min_value=-10**6, max_value=10**6))
@settings(max_examples=50)
def test_det_at_arbitrary_integer(x):
    assert det_charpoly_at(build_companion(6), x) == eval_exact(euclid_poly(6), x)
