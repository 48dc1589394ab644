#!/usr/bin/env python3
"""
Test SOP extraction, types and dependence statistics
"""
import sys
import os
from fractions import Fraction
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
from scipy import stats

from core.errors import DegenerateError, DelayError, OverlapError, ParamError
from core.lattice import RealGrid
from core.sop_core import (PERMUTATIONS, TYPE_LISTING, TYPE_TABLE, Delay, Sop, SopType, SpatialLag,
                           TypeFrequencies, acf_array, dependence_stats, sop_frequencies, sop_matrix,
                           sop_of_square, spatial_acf, square_codes, type_counts, type_frequencies,
                           type_frequency_array, type_matrix, type_of_sop)

# Wall thickness of a bottle, 5x5 cells
BOTTLE = RealGrid([
    [0.0598, 0.0591, 0.0587, 0.0582, 0.0576],
    [0.0600, 0.0597, 0.0590, 0.0583, 0.0581],
    [0.0602, 0.0596, 0.0594, 0.0581, 0.0570],
    [0.0598, 0.0596, 0.0589, 0.0585, 0.0571],
    [0.0600, 0.0593, 0.0587, 0.0584, 0.0569],
])

BOTTLE_SOPS = [
    [(3, 1, 4, 2), (3, 1, 4, 2), (3, 1, 4, 2), (3, 1, 4, 2)],
    [(3, 2, 4, 1), (4, 1, 3, 2), (3, 2, 4, 1), (4, 2, 3, 1)],
    [(4, 1, 3, 2), (3, 2, 4, 1), (4, 1, 3, 2), (3, 1, 4, 2)],
    [(3, 2, 4, 1), (4, 2, 3, 1), (4, 2, 3, 1), (4, 2, 3, 1)],
]

BOTTLE_TYPES = [
    [1, 1, 1, 1],
    [2, 2, 2, 1],
    [2, 2, 2, 1],
    [2, 1, 1, 1],
]


def test_type_listing():
    """Every permutation is classified, eight per type"""
    assert len(PERMUTATIONS) == 24
    assert sorted(np.bincount(TYPE_TABLE, minlength=4)[1:].tolist()) == [8, 8, 8]
    for k, members in TYPE_LISTING.items():
        for ranks in members:
            assert type_of_sop(Sop(ranks)) == SopType(k), f"{ranks} should be type {k}"
    print("[PASS] Type listing test")


def test_lehmer_code_matches_order():
    for index, ranks in enumerate(PERMUTATIONS):
        assert Sop(ranks).lehmer_code == index
    print("[PASS] Lehmer code test")


def test_sop_of_square():
    assert sop_of_square([0.0598, 0.0591, 0.0600, 0.0597]).ranks == (3, 1, 4, 2)
    # ties: earlier position gets the lower rank
    assert sop_of_square([5, 5, 5, 5]).ranks == (1, 2, 3, 4)
    assert sop_of_square([2, 1, 2, 1]).ranks == (3, 1, 4, 2)
    try:
        sop_of_square([1, 2, 3])
        assert False, "Three values should be rejected"
    except ParamError:
        pass
    try:
        Sop((1, 1, 2, 3))
        assert False, "Non-permutation should be rejected"
    except ParamError:
        pass
    print("[PASS] SOP of square test")


def test_bottle_patterns():
    sops = sop_matrix(BOTTLE)
    assert sops.shape == (4, 4, 4)
    for i in range(4):
        for j in range(4):
            assert tuple(sops[i, j]) == BOTTLE_SOPS[i][j], f"SOP mismatch at ({i + 1},{j + 1})"
    assert type_matrix(BOTTLE).tolist() == BOTTLE_TYPES
    print("[PASS] Bottle pattern test")


def test_vectorized_codes_match_scalar():
    rng = np.random.default_rng(7)
    grid = rng.integers(0, 4, size=(6, 7)).astype(float)
    codes = square_codes(grid)
    for i in range(5):
        for j in range(6):
            expected = sop_of_square([grid[i, j], grid[i, j + 1], grid[i + 1, j], grid[i + 1, j + 1]])
            assert codes[i, j] == expected.lehmer_code
    print("[PASS] Vectorized code test")


def test_bottle_statistics():
    p = type_frequencies(BOTTLE)
    assert p.counts == (9, 7, 0)
    assert np.allclose(p.as_array(), [0.5625, 0.4375, 0.0])
    s = dependence_stats(p)
    assert [round(v, 4) for v in s.as_floats()] == [0.2292, 0.4375, -0.3333, 0.125]
    assert s.kappa_hat + s.kappa_tilde == s.tau_hat - s.tau_tilde
    assert s.tau_tilde == Fraction(-1, 3)
    print("[PASS] Bottle statistics test")


def test_bottle_acf():
    rho = spatial_acf(BOTTLE)
    assert abs(rho - 0.301) <= 0.001, f"Unexpected ACF {rho}"
    # the lag and its mirror image give the same value
    assert abs(spatial_acf(BOTTLE, (-1, -1)) - rho) < 1e-15
    print("[PASS] Bottle ACF test")


def test_exact_identity_random():
    rng = np.random.default_rng(11)
    for _ in range(50):
        m, n = rng.integers(1, 8, size=2)
        p = type_frequencies(RealGrid(rng.normal(size=(m + 1, n + 1))))
        s = dependence_stats(p)
        assert s.kappa_hat + s.kappa_tilde == s.tau_hat - s.tau_tilde
    print("[PASS] Exact identity test")


def test_delays_and_stacks():
    rng = np.random.default_rng(3)
    stack = rng.normal(size=(5, 8, 9))
    freqs = type_frequency_array(stack, (2, 3))
    assert freqs.shape == (5, 3)
    for k in range(5):
        counts = type_counts(stack[k], Delay(2, 3))
        assert counts.sum() == (8 - 2) * (9 - 3)
        assert np.allclose(freqs[k], counts / counts.sum())
    assert abs(sop_frequencies(stack[0]).sum() - 1.0) < 1e-12
    try:
        type_counts(stack[0], (8, 1))
        assert False, "Delay beyond the frame should be rejected"
    except DelayError:
        pass
    print("[PASS] Delay and stack test")


def test_acf_errors():
    try:
        spatial_acf(RealGrid(np.ones((3, 3))))
        assert False, "Constant frame should be degenerate"
    except DegenerateError:
        pass
    try:
        spatial_acf(RealGrid(np.arange(9.0).reshape(3, 3)), (3, 0))
        assert False, "Lag without overlap should be rejected"
    except OverlapError:
        pass
    try:
        SpatialLag(0, 0)
        assert False, "Zero lag should be rejected"
    except ParamError:
        pass
    values = acf_array(np.random.default_rng(0).normal(size=(4, 6, 6)), [(1, 1), (0, 1), (1, -1)])
    assert values.shape == (4, 3)
    print("[PASS] ACF error test")


def test_monotone_invariance():
    rng = np.random.default_rng(41)
    for _ in range(20):
        values = rng.normal(size=(7, 8))
        base = RealGrid(values)
        for transform in (np.exp, lambda x: 2 * x + 7, lambda x: x ** 3):
            mapped = RealGrid(transform(values))
            assert np.array_equal(sop_matrix(mapped), sop_matrix(base))
            assert np.array_equal(type_matrix(mapped, (2, 1)), type_matrix(base, (2, 1)))
            assert dependence_stats(type_frequencies(mapped)) == dependence_stats(type_frequencies(base))
    print("[PASS] Monotone invariance test")


def test_acf_bounds():
    rng = np.random.default_rng(42)
    lags = [(1, 1), (0, 1), (1, 0), (1, -1), (2, 1)]
    for _ in range(1000):
        m, n = rng.integers(2, 9, size=2)
        values = rng.standard_t(2, size=(m + 1, n + 1))
        rho = acf_array(values, lags)
        assert (np.abs(rho) <= 1 + 1e-12).all(), f"ACF out of range: {rho}"
    print("[PASS] ACF bound test")


def test_sop_uniformity():
    """Under i.i.d. continuous data every SOP is equally likely"""
    rng = np.random.default_rng(2024)
    # independent squares: 2x2 frames
    codes = square_codes(rng.normal(size=(1000000, 2, 2))).ravel()
    observed = np.bincount(codes, minlength=24)
    _, p_value = stats.chisquare(observed)
    assert p_value > 1e-4, f"SOP frequencies not uniform (p={p_value})"
    print("[PASS] SOP uniformity test")


def test_type_frequencies_validation():
    try:
        TypeFrequencies(0.5, 0.5, 0.5)
        assert False, "Non-simplex vector should be rejected"
    except ParamError:
        pass
    print("[PASS] Type frequency validation test")


if __name__ == "__main__":
    print("Testing SOP core...")
    test_type_listing()
    test_lehmer_code_matches_order()
    test_sop_of_square()
    test_bottle_patterns()
    test_vectorized_codes_match_scalar()
    test_bottle_statistics()
    test_bottle_acf()
    test_exact_identity_random()
    test_delays_and_stacks()
    test_acf_errors()
    test_monotone_invariance()
    test_acf_bounds()
    test_sop_uniformity()
    test_type_frequencies_validation()
    print("\nAll SOP core tests passed!")
