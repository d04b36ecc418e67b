"""
Tests for DSC, IoU, the boundary band and IoU_NB
"""

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from synthal.data_types import BinaryMask
from synthal.dataset import write_mask
from synthal.errors import InvalidInput, InvalidParameter, ShapeError
from synthal.metrics import boundary_band, dsc, evaluate, evaluate_dirs, iou, iou_nb


def square(size, lo, hi):
    data = np.zeros((size, size), dtype=bool)
    data[lo:hi, lo:hi] = True
    return BinaryMask(data)


def test_hand_counted_overlap():
    """|S|=|G|=4 with two shared pixels: DSC 0.5, IoU 1/3"""
    s = np.zeros((4, 4), dtype=bool)
    g = np.zeros((4, 4), dtype=bool)
    s[0, :4] = True
    g[0, 2:4] = True
    g[1, 0:2] = True
    s, g = BinaryMask(s), BinaryMask(g)
    assert dsc(s, g) == 0.5
    assert iou(s, g) == pytest.approx(1 / 3)


def test_trivial_cases():
    g = square(8, 2, 5)
    empty = BinaryMask.zeros((8, 8))
    assert dsc(g, g) == 1.0
    assert iou(g, g) == 1.0
    assert dsc(square(8, 0, 2), square(8, 5, 8)) == 0.0
    assert iou(empty, g) == 0.0
    assert dsc(empty, empty) == 1.0
    assert iou(empty, empty) == 1.0
    with pytest.raises(ShapeError):
        dsc(g, BinaryMask.zeros((4, 4)))


@settings(max_examples=1000, deadline=None)
@given(pair=st.integers(1, 10).flatmap(
    lambda n: st.tuples(arrays(np.bool_, (n, n)), arrays(np.bool_, (n, n)))))
def test_dsc_iou_identity(pair):
    """DSC = 2J / (1 + J) over a thousand random mask pairs"""
    s, g = (BinaryMask(a) for a in pair)
    j = iou(s, g)
    assert dsc(s, g) == pytest.approx(2 * j / (1 + j), abs=1e-12)


def test_band_around_square():
    """Width 4 around a 10x10 square: two pixels inside plus two outside the edge"""
    g = square(100, 45, 55)
    band = boundary_band(g, 4).data

    expected = np.zeros((100, 100), dtype=bool)
    expected[43:57, 43:57] = True
    expected[47:53, 47:53] = False
    assert np.array_equal(band, expected)


def test_band_of_full_frame_follows_edge():
    band = boundary_band(BinaryMask(np.ones((30, 30), dtype=bool)), 20).data
    expected = np.ones((30, 30), dtype=bool)
    expected[10:20, 10:20] = False
    assert np.array_equal(band, expected)


def test_band_edge_cases():
    assert not boundary_band(BinaryMask.zeros((6, 6)), 4).data.any()
    with pytest.raises(InvalidParameter):
        boundary_band(square(10, 2, 6), 5)


def test_band_grows_with_width():
    g = square(64, 20, 40)
    bands = [boundary_band(g, w).data for w in (2, 4, 8, 16)]
    for narrow, wide in zip(bands, bands[1:]):
        assert np.all(wide[narrow])
        assert wide.sum() > narrow.sum()


def test_iou_nb_counts_inside_band():
    """A one-pixel dilation of a 10x10 square under a width-20 band"""
    g = square(100, 45, 55)
    s = square(100, 44, 56)
    assert iou_nb(g, g) == 1.0
    assert iou_nb(s, g, 20) == pytest.approx(100 / 144)
    assert iou_nb(BinaryMask.zeros((10, 10)), BinaryMask.zeros((10, 10))) == 1.0


def test_iou_nb_ignores_far_errors():
    """False positives outside the band do not change IoU_NB"""
    g = square(100, 45, 55)
    s = g.data.copy()
    s[0:5, 0:5] = True
    assert iou(BinaryMask(s), g) < 1.0
    assert iou_nb(BinaryMask(s), g, 4) == 1.0


def test_evaluate_means_and_id_checks():
    g = {"a": square(20, 5, 10), "b": square(20, 0, 4)}
    p = {"a": square(20, 5, 10), "b": BinaryMask.zeros((20, 20))}
    result = evaluate(p, g, band_width=4, workers=2)

    assert [e.image_id for e in result.per_image] == ["a", "b"]
    assert result.mean_dsc == pytest.approx(0.5)
    assert result.mean_iou == pytest.approx(0.5)
    assert result.to_dict()["count"] == 2

    with pytest.raises(InvalidInput):
        evaluate({"a": p["a"]}, g)


def test_evaluate_dirs(tmp_path):
    pred, gt = tmp_path / "pred", tmp_path / "gt"
    for name, mask in {"x": square(16, 2, 8), "y": square(16, 8, 14)}.items():
        write_mask(gt / f"{name}.png", mask)
        write_mask(pred / f"{name}.png", mask)
    result = evaluate_dirs(pred, gt, band_width=20)
    assert result.mean_iou_nb == 1.0
    assert json.loads(json.dumps(result.to_dict()))["mDSC"] == 1.0
