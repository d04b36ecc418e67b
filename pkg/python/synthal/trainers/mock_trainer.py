"""
GPU-free stand-in for a segmentation committee

Foreground probability comes from a brightness / low-saturation heuristic
(instruments are bright and grey against reddish tissue), perturbed per
committee member by smooth seeded logit noise.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import cv2
import numpy as np
from scipy.special import expit

from ..data_types import ProbabilityStack, RasterImage
from ..dataset import read_image
from ..errors import InvalidParameter
from ..rng import derive_rng, derive_seed
from ..stackfile import SUFFIX, write_probability_stack
from .base_trainer import BaseTrainer, read_training_manifest

logger = logging.getLogger(__name__)

NOISE_SIGMA_PX = 2.0


def mock_predict(image: RasterImage, T: int, seed: int, gain: float = 6.0,
                 noise: float = 0.5) -> ProbabilityStack:
    """
    (T, 2, H, W) stack: class 0 background, class 1 instrument.

    score = brightness * (1 - saturation), logit = gain * score + noise_t.
    A black frame gives p close to 0.5 everywhere.
    """
    if T < 1:
        raise InvalidParameter(f"committee size T must be >= 1, got {T}")
    data = image.data
    brightness = data.mean(axis=2)
    saturation = data.max(axis=2) - data.min(axis=2)
    logit = gain * brightness * (1.0 - saturation)

    members = []
    for t in range(T):
        field = derive_rng(seed, "member", t).normal(0.0, 1.0, size=image.frame)
        field = cv2.GaussianBlur(field, (0, 0), sigmaX=NOISE_SIGMA_PX,
                                 borderType=cv2.BORDER_REPLICATE)
        # re-normalize the smoothed field to unit spread
        spread = field.std()
        if spread > 0:
            field = field / spread
        p = expit(logit + noise * field)
        members.append(np.stack([1.0 - p, p]))
    return ProbabilityStack(np.stack(members))


class MockTrainer(BaseTrainer):
    """Ignores the training set and predicts with mock_predict"""

    def __init__(self, committee_size: int = 4, gain: float = 6.0, noise: float = 0.5,
                 workers: int = 1):
        super().__init__(committee_size)
        self.gain = gain
        self.noise = noise
        self.workers = max(1, workers)

    def train_and_predict(self, manifest_path: Path, output_dir: Path, seed: int):
        manifest = read_training_manifest(manifest_path)
        entries = sorted(manifest["predict"], key=lambda e: e["id"])
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)

        def predict(entry):
            image = read_image(entry["image_path"])
            stack = mock_predict(image, self.committee_size, derive_seed(seed, entry["id"]),
                                 self.gain, self.noise)
            write_probability_stack(output_dir / f"{entry['id']}{SUFFIX}", stack)

        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                list(executor.map(predict, entries))
        else:
            for entry in entries:
                predict(entry)
        logger.debug("mock trainer wrote %d stacks (%d train entries ignored)",
                     len(entries), len(manifest["train"]))

    def get_trainer_name(self) -> str:
        return "mock"
