"""
Tests for entropy/BALD maps, image scores and batch selection
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthal.data_types import ImageScore, ProbabilityStack
from synthal.errors import InsufficientPool, InvalidInput, InvalidStack
from synthal.query import (
    bald_map, entropy_map, image_score, score_stacks, select_query_batch, select_random,
)
from synthal.stackfile import write_probability_stack

LN2 = math.log(2)


def pixel_stack(*members):
    """(T, C, 1, 1) stack from per-member class vectors"""
    return ProbabilityStack(np.array(members, dtype=np.float64)[:, :, None, None])


def random_stack(rng, T=4, C=3, H=5, W=6):
    return ProbabilityStack(rng.dirichlet(np.ones(C), size=(T, H, W)).transpose(0, 3, 1, 2))


def h(p):
    return -sum(x * math.log(x) for x in p if x > 0)


def test_entropy_anchors():
    assert entropy_map(pixel_stack((1.0, 0.0)))[0, 0] == 0.0
    assert entropy_map(pixel_stack((0.5, 0.5), (0.5, 0.5), (0.5, 0.5)))[0, 0] == pytest.approx(LN2)


def test_entropy_of_committee_mean():
    """Two members (0.7, 0.2, 0.1) and (0.5, 0.3, 0.2) average to (0.6, 0.25, 0.15)"""
    value = entropy_map(pixel_stack((0.7, 0.2, 0.1), (0.5, 0.3, 0.2)))[0, 0]
    assert value == pytest.approx(h((0.6, 0.25, 0.15)), abs=1e-12)


def test_bald_anchors():
    """Opposite confident members give ln 2; agreeing members give 0"""
    assert bald_map(pixel_stack((1.0, 0.0), (0.0, 1.0)))[0, 0] == pytest.approx(LN2)
    assert bald_map(pixel_stack((0.5, 0.5), (0.5, 0.5)))[0, 0] == 0.0
    assert bald_map(pixel_stack((0.3, 0.7)))[0, 0] == 0.0


def test_bald_identical_committee_is_zero(rng):
    member = random_stack(rng, T=1).data
    stack = ProbabilityStack(np.repeat(member, 5, axis=0))
    assert np.all(bald_map(stack) == 0.0)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), T=st.integers(1, 5), C=st.integers(2, 4))
def test_bald_bounded_by_entropy(seed, T, C):
    """0 <= BALD <= entropy, 200 draws of 8x8 pixel stacks each"""
    stack = random_stack(np.random.default_rng(seed), T=T, C=C, H=8, W=8)
    bald = bald_map(stack)
    assert np.all(bald >= 0.0)
    assert np.all(bald <= entropy_map(stack) + 1e-12)


def test_maps_match_scalar_loop(rng):
    stack = random_stack(rng, T=3, C=3, H=4, W=4)
    data = stack.data
    entropy = entropy_map(stack)
    bald = bald_map(stack)
    for y in range(4):
        for x in range(4):
            members = [data[t, :, y, x] for t in range(3)]
            mean = np.mean(members, axis=0)
            expected_h = h(mean)
            expected_bald = expected_h - np.mean([h(m) for m in members])
            assert entropy[y, x] == pytest.approx(expected_h, abs=1e-9)
            assert bald[y, x] == pytest.approx(max(expected_bald, 0.0), abs=1e-9)


def test_invalid_stack_is_refused():
    with pytest.raises(InvalidStack):
        pixel_stack((0.6, 0.6))
    with pytest.raises(InvalidStack):
        ProbabilityStack(np.ones((2, 1, 3, 3)))


def test_image_score_aggregators():
    flat = np.full((4, 4), 0.3)
    assert image_score(flat, "mean") == pytest.approx(0.3)

    ramp = np.array([[0.0, 0.2], [0.4, 0.6]])
    assert image_score(ramp, "top_fraction", 0.5) == pytest.approx(0.5)
    assert image_score(ramp, "sum") == pytest.approx(image_score(ramp, "mean") * 4)

    with pytest.raises(InvalidInput):
        image_score(np.zeros((0, 3)))
    with pytest.raises(InvalidInput):
        image_score(np.array([[np.nan]]))


def test_select_query_batch_ranks_and_breaks_ties():
    scores = [ImageScore("a", 0.9), ImageScore("b", 0.1), ImageScore("c", 0.5)]
    assert select_query_batch(scores, 2) == ["a", "c"]

    tied = [ImageScore(i, 0.4) for i in ("d", "b", "c", "a")]
    assert select_query_batch(tied, 2) == ["a", "b"]

    with pytest.raises(InsufficientPool):
        select_query_batch(scores, 4)


def test_select_query_batch_matches_full_sort(rng):
    values = rng.uniform(size=1000)
    scores = [ImageScore(f"img{i:04d}", float(v)) for i, v in enumerate(values)]
    expected = [f"img{i:04d}" for i in np.argsort(-values, kind="stable")[:100]]
    assert select_query_batch(scores, 100) == expected


def test_select_random_is_seeded():
    ids = [f"u{i:02d}" for i in range(30)]
    first = select_random(ids, 10, np.random.default_rng(5))
    second = select_random(reversed(ids), 10, np.random.default_rng(5))
    assert first == second
    assert len(set(first)) == 10
    assert first == sorted(first)
    with pytest.raises(InsufficientPool):
        select_random(ids, 31, np.random.default_rng(5))


def test_score_stacks_reads_files(tmp_path, rng):
    """Paths and in-memory stacks score the same; output sorted by id"""
    confident = pixel_stack((1.0, 0.0), (1.0, 0.0))
    split = pixel_stack((1.0, 0.0), (0.0, 1.0))
    write_probability_stack(tmp_path / "b.pmap", split)

    scores = score_stacks({"b": tmp_path / "b.pmap", "a": confident}, strategy="bald")

    assert [s.image_id for s in scores] == ["a", "b"]
    assert scores[0].score == 0.0
    assert scores[1].score == pytest.approx(LN2, abs=1e-6)
    assert all(s.strategy == "bald" for s in scores)
