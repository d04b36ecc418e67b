"""
Acquisition maps, image scores and query selection

Entropy and BALD are computed in nats over a committee stack p[t, c, y, x].
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, List, Mapping, Sequence, Union

import numpy as np
from scipy.special import entr

from .data_types import ImageScore, ProbabilityStack
from .errors import InsufficientPool, InvalidInput, InvalidParameter
from .stackfile import read_probability_stack

logger = logging.getLogger(__name__)

STRATEGIES = ("bald", "entropy", "random")
AGGREGATORS = ("mean", "sum", "top_fraction")

StackLike = Union[ProbabilityStack, np.ndarray]


def _as_stack(stack: StackLike) -> ProbabilityStack:
    return stack if isinstance(stack, ProbabilityStack) else ProbabilityStack(stack)


def entropy_map(stack: StackLike) -> np.ndarray:
    """(H, W) entropy of the committee mean; 0 * ln 0 = 0"""
    stack = _as_stack(stack)
    return entr(stack.mean_prediction()).sum(axis=0)


def bald_map(stack: StackLike) -> np.ndarray:
    """
    (H, W) mutual information between prediction and committee member:
    H(mean_t p^t) - mean_t H(p^t), clamped at 0.
    """
    stack = _as_stack(stack)
    data = stack.data
    expected = entr(data).sum(axis=1).mean(axis=0)
    out = entropy_map(stack) - expected
    # full agreement is exactly zero even when the mean rounds
    agree = np.all(data == data[:1], axis=(0, 1))
    out[agree] = 0.0
    return np.maximum(out, 0.0)


def acquisition_map(stack: StackLike, strategy: str = "bald") -> np.ndarray:
    if strategy == "bald":
        return bald_map(stack)
    if strategy == "entropy":
        return entropy_map(stack)
    raise InvalidParameter(f"no acquisition map for strategy {strategy!r}")


def image_score(score_map: np.ndarray, aggregator: str = "mean",
                top_fraction: float = 0.1) -> float:
    """Reduce a per-pixel map to one image score"""
    values = np.asarray(score_map, dtype=np.float64).ravel()
    if values.size == 0:
        raise InvalidInput("cannot score an empty map")
    if not np.all(np.isfinite(values)):
        raise InvalidInput("score map contains non-finite values")
    if aggregator == "mean":
        return float(values.mean())
    if aggregator == "sum":
        return float(values.sum())
    if aggregator == "top_fraction":
        if not 0.0 < top_fraction <= 1.0:
            raise InvalidParameter(f"top_fraction must lie in (0, 1], got {top_fraction}")
        k = max(1, math.ceil(top_fraction * values.size))
        return float(np.sort(values)[-k:].mean())
    raise InvalidParameter(f"unknown aggregator {aggregator!r}; choose from {AGGREGATORS}")


def select_query_batch(scores: Sequence[ImageScore], n: int) -> List[str]:
    """The n highest scores; ties go to the smaller image id"""
    if n < 0:
        raise InvalidInput(f"batch size must be >= 0, got {n}")
    if n > len(scores):
        raise InsufficientPool(f"asked for {n} images but only {len(scores)} are unlabeled")
    ranked = sorted(scores, key=lambda s: (-s.score, s.image_id))
    return [s.image_id for s in ranked[:n]]


def select_random(image_ids: Iterable[str], n: int, rng: np.random.Generator) -> List[str]:
    """Uniform sample without replacement, returned in id order"""
    pool = sorted(image_ids)
    if n < 0:
        raise InvalidInput(f"batch size must be >= 0, got {n}")
    if n > len(pool):
        raise InsufficientPool(f"asked for {n} images but only {len(pool)} are available")
    picked = rng.choice(len(pool), size=n, replace=False) if n else []
    return sorted(pool[i] for i in picked)


def score_stacks(stacks: Mapping[str, Union[StackLike, str, Path]], strategy: str = "bald",
                 aggregator: str = "mean", top_fraction: float = 0.1,
                 workers: int = 1) -> List[ImageScore]:
    """Score every stack (in memory or a .pmap path); result sorted by image id"""
    if strategy not in ("bald", "entropy"):
        raise InvalidParameter(f"stacks cannot be scored with strategy {strategy!r}")

    def score_one(image_id: str) -> ImageScore:
        stack = stacks[image_id]
        if isinstance(stack, (str, Path)):
            stack = read_probability_stack(stack)
        value = image_score(acquisition_map(stack, strategy), aggregator, top_fraction)
        return ImageScore(image_id=image_id, score=value, strategy=strategy)

    ids = sorted(stacks)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            scores = list(executor.map(score_one, ids))
    else:
        scores = [score_one(i) for i in ids]
    logger.debug("scored %d stacks with %s/%s", len(scores), strategy, aggregator)
    return scores
