"""
Trainer adapters

The loop never trains a network itself. An adapter receives a training
manifest and must leave one probability stack per unlabeled image in an
output directory.
"""

from .base_trainer import BaseTrainer, read_training_manifest, write_training_manifest
from .external_trainer import ExternalTrainer
from .mock_trainer import MockTrainer, mock_predict


def create_trainer(section, workers: int = 1) -> BaseTrainer:
    """Adapter for a [trainer] config section"""
    if section.mode == "external":
        return ExternalTrainer(
            command=section.command,
            committee_size=section.committee_size,
            timeout_s=section.timeout_s,
            retries=section.retries,
        )
    return MockTrainer(
        committee_size=section.committee_size,
        gain=section.mock_gain,
        noise=section.mock_noise,
        workers=workers,
    )


__all__ = [
    "BaseTrainer",
    "ExternalTrainer",
    "MockTrainer",
    "mock_predict",
    "create_trainer",
    "read_training_manifest",
    "write_training_manifest",
]
