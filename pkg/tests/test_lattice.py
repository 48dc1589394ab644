#!/usr/bin/env python3
"""
Test lattice frames and jittering
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from core.errors import DimensionError, NonFiniteError, ParamError, ScaleError, ShapeError
from core.lattice import CountGrid, FrameStream, RealGrid, jitter, jitter_values, open_uniform
from core.sop_core import sop_of_square


def test_grid_validation():
    grid = RealGrid([[1.0, 2.0], [3.0, 4.0]])
    assert (grid.m, grid.n) == (1, 1)
    assert not grid.values.flags.writeable, "Grid values should be read-only"

    for bad, error in [([[1.0, 2.0]], DimensionError),
                       ([[1.0, np.nan], [0.0, 1.0]], NonFiniteError),
                       ([[1.0, np.inf], [0.0, 1.0]], NonFiniteError),
                       ([1.0, 2.0, 3.0, 4.0], DimensionError)]:
        try:
            RealGrid(bad)
            assert False, f"{bad} should be rejected"
        except error:
            pass
    print("[PASS] Grid validation test")


def test_count_validation():
    counts = CountGrid(np.array([[0, 3], [2, 1]]))
    assert counts.values.dtype == np.int64
    assert CountGrid(np.array([[0.0, 3.0], [2.0, 1.0]])).values.tolist() == [[0, 3], [2, 1]]
    for bad in ([[0, -1], [2, 1]], [[0.5, 1.0], [2.0, 1.0]]):
        try:
            CountGrid(np.array(bad))
            assert False, f"{bad} should be rejected"
        except ParamError:
            pass
    print("[PASS] Count validation test")


def test_frame_stream_shape():
    stream = FrameStream([RealGrid(np.zeros((3, 4))), RealGrid(np.ones((3, 4)))])
    assert len(stream) == 2 and stream.shape == (3, 4)
    assert stream.as_array().shape == (2, 3, 4)
    assert not stream.is_count
    try:
        stream.append(RealGrid(np.zeros((4, 3))))
        assert False, "Shape change should be rejected"
    except ShapeError:
        pass
    print("[PASS] Frame stream test")


def test_open_uniform():
    u = open_uniform(np.random.default_rng(1), (1000,))
    assert (u > 0).all() and (u < 1).all()
    print("[PASS] Open uniform test")


def test_jitter_preserves_strict_order():
    rng = np.random.default_rng(5)
    counts = CountGrid(rng.poisson(3, size=(6, 6)))
    jittered = jitter(counts, 1.0, rng)
    x = counts.values.ravel()
    y = jittered.values.ravel()
    strictly_less = x[:, None] < x[None, :]
    assert (y[:, None] < y[None, :])[strictly_less].all(), "Jitter must keep strict orders"
    assert (y > x).all() and (y < x + 1).all()
    print("[PASS] Jitter order test")


def test_jitter_order_over_seeds():
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        counts = CountGrid(rng.poisson(3, size=(10, 10)))
        x = counts.values.ravel()
        y = jitter(counts, 1.0, rng).values.ravel()
        strictly_less = x[:, None] < x[None, :]
        assert (y[:, None] < y[None, :])[strictly_less].all(), f"Strict order broken for seed {seed}"
    print("[PASS] Jitter order over seeds test")


def test_jitter_leaves_no_ties():
    counts = CountGrid(np.random.default_rng(0).poisson(1, size=(10, 10)))
    assert len(np.unique(counts.values)) < 100
    for seed in range(1000):
        y = jitter(counts, 1.0, np.random.default_rng(seed)).values
        assert len(np.unique(y)) == y.size, f"Tied entries after jitter for seed {seed}"
    print("[PASS] Jitter tie elimination test")


def test_jitter_tie_example():
    counts = CountGrid(np.array([[0, 5], [5, 0]]))
    first_above = 0
    for seed in range(10000):
        y = jitter(counts, 1.0, np.random.default_rng(seed)).values
        assert max(y[0, 0], y[1, 1]) < min(y[0, 1], y[1, 0])
        assert y[0, 1] != y[1, 0]
        first_above += int(y[0, 1] > y[1, 0])
    assert 4500 < first_above < 5500, f"Tie between the 5-cells broken unevenly: {first_above}"
    print("[PASS] Jitter tie example test")


def test_jitter_breaks_ties():
    # all-tied square gives an identity pattern before jitter, a random one after
    counts = CountGrid(np.full((2, 2), 4))
    assert sop_of_square(counts.values.ravel()).ranks == (1, 2, 3, 4)
    rng = np.random.default_rng(9)
    patterns = {sop_of_square(jitter(counts, 1.0, rng).values.ravel()).ranks for _ in range(200)}
    assert len(patterns) > 12, "Jittered ties should produce many patterns"
    print("[PASS] Jitter tie test")


def test_jitter_scale_errors():
    counts = CountGrid(np.zeros((2, 2), dtype=int))
    for scale in (0.0, -1.0):
        try:
            jitter(counts, scale, np.random.default_rng(0))
            assert False, "Nonpositive scale should be rejected"
        except ScaleError:
            pass
    stack = jitter_values(np.zeros((3, 2, 2)), 0.5, np.random.default_rng(0))
    assert stack.shape == (3, 2, 2) and (stack < 0.5).all()
    print("[PASS] Jitter scale test")


if __name__ == "__main__":
    print("Testing lattice frames...")
    test_grid_validation()
    test_count_validation()
    test_frame_stream_shape()
    test_open_uniform()
    test_jitter_preserves_strict_order()
    test_jitter_order_over_seeds()
    test_jitter_leaves_no_ties()
    test_jitter_tie_example()
    test_jitter_breaks_ties()
    test_jitter_scale_errors()
    print("\nAll lattice tests passed!")
