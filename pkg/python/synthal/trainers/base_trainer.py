"""
Base class for trainer adapters
"""

import json
import logging
import os
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Iterable, List

from ..dataset import write_json
from ..errors import FormatError, TrainerError
from ..stackfile import SUFFIX

logger = logging.getLogger(__name__)


def _relative(path: Path, base: Path) -> str:
    return Path(os.path.relpath(path.resolve(), base.resolve())).as_posix()


def write_training_manifest(path: Path, iteration: Any, seed: int, committee_size: int,
                            train: Iterable[Dict[str, Any]],
                            predict: Iterable[Dict[str, Any]]) -> Path:
    """
    Write the adapter's input file.

    `train` entries carry id, image_path, mask_path and kind (real or
    synthetic); `predict` entries carry id and image_path. Paths are stored
    relative to the manifest's directory.
    """
    path = Path(path)
    base = path.parent
    payload = {
        "iteration": iteration,
        "seed": int(seed),
        "committee_size": int(committee_size),
        "train": [
            {
                "id": e["id"],
                "image_path": _relative(Path(e["image_path"]), base),
                "mask_path": _relative(Path(e["mask_path"]), base),
                "kind": e.get("kind", "real"),
            }
            for e in train
        ],
        "predict": [
            {"id": e["id"], "image_path": _relative(Path(e["image_path"]), base)}
            for e in predict
        ],
    }
    write_json(path, payload)
    return path


def read_training_manifest(path: Path) -> Dict[str, Any]:
    """Load a training manifest with paths resolved against its directory"""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"cannot read training manifest {path}: {e}") from e
    for key in ("seed", "committee_size", "train", "predict"):
        if key not in payload:
            raise FormatError(f"{path}: training manifest lacks {key!r}")
    base = path.parent
    for entry in payload["train"]:
        entry["image_path"] = base / entry["image_path"]
        entry["mask_path"] = base / entry["mask_path"]
    for entry in payload["predict"]:
        entry["image_path"] = base / entry["image_path"]
    return payload


class BaseTrainer(ABC):
    """
    Abstract base class for trainer adapters.

    Subclasses implement:
    - train_and_predict() - train on the manifest's train set and write stacks
    - get_trainer_name() - short name for logs and reports
    """

    def __init__(self, committee_size: int = 4):
        if committee_size < 1:
            raise TrainerError("committee size T must be >= 1")
        self.committee_size = committee_size

    def run(self, manifest_path: Path, output_dir: Path, seed: int,
            expected_ids: Iterable[str]) -> Dict[str, Path]:
        """Invoke the adapter and check that every expected stack exists"""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        logger.info("%s trainer: %s -> %s", self.get_trainer_name(), manifest_path, output_dir)
        self.train_and_predict(Path(manifest_path), output_dir, seed)
        return self.collect_outputs(output_dir, expected_ids)

    def collect_outputs(self, output_dir: Path, expected_ids: Iterable[str]) -> Dict[str, Path]:
        outputs = {i: Path(output_dir) / f"{i}{SUFFIX}" for i in sorted(expected_ids)}
        missing: List[str] = [i for i, p in outputs.items() if not p.is_file()]
        if missing:
            shown = ", ".join(missing[:5]) + (f" (+{len(missing) - 5} more)" if len(missing) > 5 else "")
            raise TrainerError(
                f"{self.get_trainer_name()} trainer left {len(missing)} stacks missing in {output_dir}: {shown}"
            )
        return outputs

    @abstractmethod
    def train_and_predict(self, manifest_path: Path, output_dir: Path, seed: int):
        """Train on the manifest and write <id>.pmap for every predict entry"""
        pass

    @abstractmethod
    def get_trainer_name(self) -> str:
        pass
