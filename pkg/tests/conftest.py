"""
Shared fixtures: toy endoscopic-looking frames and a small dataset on disk
"""

from dataclasses import replace

import numpy as np
import pytest

from synthal.config import BudgetSection, Range, RunConfig, RunSection, TrainerSection
from synthal.data_types import BinaryMask, LabeledImage, RasterImage
from synthal.dataset import write_dataset


def tissue(size, rng):
    """Reddish textured background"""
    yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    phase = rng.uniform(0, 2 * np.pi, size=2)
    wave = 0.08 * np.sin(6 * xx + phase[0]) * np.cos(5 * yy + phase[1])
    base = np.stack([0.6 + wave, 0.28 + wave / 2, 0.22 + wave / 3], axis=-1)
    noise = rng.normal(0.0, 0.02, size=base.shape)
    return np.clip(base + noise, 0.05, 0.95)


def toy_sample(image_id, size, rng):
    """Grey bar entering from the left or top edge over tissue"""
    data = tissue(size, rng)
    mask = np.zeros((size, size), dtype=bool)
    width = int(rng.integers(3, 6))
    start = int(rng.integers(2, size - width - 2))
    length = int(rng.integers(size // 3, size // 2))
    if rng.random() < 0.5:
        mask[start:start + width, :length] = True
    else:
        mask[:length, start:start + width] = True
    grey = rng.uniform(0.7, 0.9)
    data[mask] = grey + rng.normal(0.0, 0.01, size=(mask.sum(), 3))
    return LabeledImage(image_id, RasterImage(np.clip(data, 0.0, 1.0)), BinaryMask(mask))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def sample(rng):
    return toy_sample("s000", 32, rng)


@pytest.fixture
def donor(rng):
    return toy_sample("d001", 32, rng)


@pytest.fixture
def background(rng):
    return RasterImage(tissue(32, rng))


@pytest.fixture
def make_dataset(tmp_path):
    def make(n=60, size=32, backgrounds=3, n_test=0, seed=0, name="data"):
        rng = np.random.default_rng(seed)
        samples = [toy_sample(f"img{i:03d}", size, rng) for i in range(n + n_test)]
        splits = {s.image_id: ("test" if i >= n else "train") for i, s in enumerate(samples)}
        extra = [(f"bg{i:02d}", RasterImage(tissue(size, rng))) for i in range(backgrounds)]
        return write_dataset(tmp_path / name, samples, splits, extra)
    return make


@pytest.fixture
def toy_config():
    """Small-frame run: no vignette, narrow kernels, three-member mock committee"""
    base = RunConfig()
    synthesis = replace(
        base.synthesis,
        dilation_d=Range(3, 3),
        fusion_k=Range(3, 5),
        shape="none",
        final_blur=(1, 1.0),
    )
    return replace(
        base,
        run=RunSection(seed=7, workers=1),
        budget=BudgetSection(fraction=0.5, al_iterations=3),
        synthesis=synthesis,
        trainer=TrainerSection(committee_size=3),
    )
