"""
Labeled / unlabeled pool bookkeeping and the labeling budget schedule
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple

from .data_types import LabeledImage, RasterImage
from .dataset import DatasetLayout, read_image, read_mask
from .errors import DatasetError, InvalidParameter, LabelAccessError
from .inpaint import BackgroundPool
from .query import select_random
from .rng import derive_rng

logger = logging.getLogger(__name__)


def _split_earliest_heavy(total: int, parts: int) -> Tuple[int, ...]:
    if parts <= 0:
        return ()
    q, r = divmod(total, parts)
    return tuple(q + 1 if i < r else q for i in range(parts))


@dataclass(frozen=True)
class BudgetSchedule:
    """
    How many real labels are revealed and when.

    initial_random images are drawn at random before the first query;
    per_iteration[i] images are picked by the query strategy in iteration i,
    plus per_iteration_random[i] random picks when random picks are
    interleaved with the loop.
    """
    total_budget: int
    initial_random: int
    al_iterations: int
    per_iteration: Tuple[int, ...] = ()
    per_iteration_random: Tuple[int, ...] = ()

    def __post_init__(self):
        spent = self.initial_random + sum(self.per_iteration) + sum(self.per_iteration_random)
        if spent != self.total_budget:
            raise InvalidParameter(f"schedule spends {spent} labels, budget is {self.total_budget}")
        if len(self.per_iteration) != self.al_iterations:
            raise InvalidParameter("per_iteration needs one entry per AL iteration")

    @property
    def active_learning(self) -> bool:
        return self.al_iterations > 0

    @classmethod
    def build(cls, train_size: int, fraction: float, al_iterations: int = 3,
              initial_random_fraction: float = 0.5,
              random_interleave: bool = False) -> "BudgetSchedule":
        """
        Budget = fraction of the training set, rounded down. With active
        learning the budget is rounded down to an even count, so 10% of 3955
        gives 394 = 197 random + 197 queried (66/66/65).
        A 100% budget labels everything up front and disables querying.
        """
        if train_size < 0:
            raise InvalidParameter("training set size must be >= 0")
        if not 0.0 < fraction <= 1.0:
            raise InvalidParameter(f"budget fraction must lie in (0, 1], got {fraction}")
        if al_iterations < 0:
            raise InvalidParameter("al_iterations must be >= 0")

        total = min(train_size, math.floor(train_size * fraction + 1e-9))
        if fraction >= 1.0 or al_iterations == 0:
            return cls(total_budget=total, initial_random=total, al_iterations=0)

        total -= total % 2
        random_total = math.floor(total * initial_random_fraction)
        queried = _split_earliest_heavy(total - random_total, al_iterations)
        if not random_interleave:
            return cls(total, random_total, al_iterations, queried)
        spread = _split_earliest_heavy(random_total, al_iterations + 1)
        return cls(total, spread[0], al_iterations, queried, spread[1:])

    def picks(self, iteration: int) -> Tuple[int, int]:
        """(queried, random) label counts for a 1-based AL iteration"""
        queried = self.per_iteration[iteration - 1]
        randoms = self.per_iteration_random[iteration - 1] if self.per_iteration_random else 0
        return queried, randoms

    def labeled_after(self, iteration: int) -> int:
        """Labeled count once `iteration` AL iterations have run (0 = after init)"""
        count = self.initial_random
        for i in range(1, iteration + 1):
            count += sum(self.picks(i))
        return count

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total_budget": self.total_budget,
            "initial_random": self.initial_random,
            "al_iterations": self.al_iterations,
            "per_iteration": list(self.per_iteration),
            "per_iteration_random": list(self.per_iteration_random),
        }


class LabelOracle:
    """Holds ground-truth mask paths and hands them out only once revealed"""

    def __init__(self, hidden: Dict[str, Path]):
        self._hidden = dict(hidden)
        self._revealed: Set[str] = set()
        self.access_log: List[str] = []

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._hidden

    @property
    def revealed(self) -> Set[str]:
        return set(self._revealed)

    def reveal(self, image_ids: Iterable[str]):
        for image_id in image_ids:
            if image_id not in self._hidden:
                raise LabelAccessError(f"no label for {image_id}")
            self._revealed.add(image_id)

    def mask_path(self, image_id: str) -> Path:
        self.access_log.append(image_id)
        if image_id not in self._revealed:
            raise LabelAccessError(f"label of {image_id} has not been revealed")
        return self._hidden[image_id]


@dataclass
class SyntheticRecord:
    sample_id: str
    image_path: Path
    mask_path: Path
    provenance: Dict[str, Any] = field(default_factory=dict)


class PoolState:
    """
    Pools of one active-learning run. The unlabeled pool exposes images only;
    masks come through the oracle once revealed.
    """

    def __init__(self, layout: DatasetLayout, oracle: LabelOracle,
                 backgrounds: Optional[BackgroundPool] = None):
        self.layout = layout
        self.oracle = oracle
        self.unlabeled: Set[str] = set(layout.ids("train"))
        self.labeled: Set[str] = set()
        self.synthetic: List[SyntheticRecord] = []
        self.backgrounds = backgrounds if backgrounds is not None else BackgroundPool()

    @property
    def size(self) -> int:
        return len(self.labeled) + len(self.unlabeled)

    def label(self, image_ids: Iterable[str]) -> List[str]:
        """Reveal labels and move ids from the unlabeled to the labeled pool"""
        ids = sorted(image_ids)
        stray = [i for i in ids if i not in self.unlabeled]
        if stray:
            raise InvalidParameter(f"not in the unlabeled pool: {stray[:5]}")
        self.oracle.reveal(ids)
        self.unlabeled.difference_update(ids)
        self.labeled.update(ids)
        return ids

    def labeled_sample(self, image_id: str) -> LabeledImage:
        record = self.layout.record(image_id)
        mask = read_mask(self.oracle.mask_path(image_id))
        return LabeledImage(image_id, read_image(record.image_path), mask)

    def image(self, image_id: str) -> RasterImage:
        return self.layout.load_image(image_id)

    def add_synthetic(self, records: Iterable[SyntheticRecord]):
        self.synthetic.extend(records)

    def snapshot(self) -> Dict[str, Any]:
        return {
            "labeled": sorted(self.labeled),
            "unlabeled": sorted(self.unlabeled),
            "synthetic": [r.sample_id for r in self.synthetic],
            "backgrounds": self.backgrounds.ids(),
        }


def init_pools(layout: DatasetLayout, schedule: BudgetSchedule, seed: int,
               external_backgrounds: bool = True) -> PoolState:
    """Hide every training label, load backgrounds and reveal the random start set"""
    train_ids = layout.ids("train")
    missing = [i for i in train_ids if not layout.record(i).mask_path.is_file()]
    if missing:
        raise DatasetError("training images without masks", [f"missing mask for {i}" for i in missing])

    oracle = LabelOracle({i: layout.record(i).mask_path for i in train_ids})
    backgrounds = BackgroundPool()
    if external_backgrounds:
        for path in layout.backgrounds:
            backgrounds.add_external(path)
    state = PoolState(layout, oracle, backgrounds)

    start = select_random(train_ids, schedule.initial_random, derive_rng(seed, "init"))
    state.label(start)
    logger.info("pools ready: %d labeled, %d unlabeled, %d backgrounds",
                len(state.labeled), len(state.unlabeled), len(backgrounds))
    return state
