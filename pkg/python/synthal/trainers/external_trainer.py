"""
Adapter that shells out to a user-supplied training command

The command template may use the placeholders {manifest_path}, {output_dir},
{seed} and {T}. Example::

    python train.py --manifest {manifest_path} --out {output_dir} --seed {seed} --mc {T}
"""

import logging
import shlex
import subprocess
from pathlib import Path
from typing import List

from ..errors import TrainerError
from .base_trainer import BaseTrainer

logger = logging.getLogger(__name__)

PLACEHOLDERS = ("manifest_path", "output_dir", "seed", "T")


class ExternalTrainer(BaseTrainer):
    """Runs one external command per iteration; retried on failure"""

    def __init__(self, command: str, committee_size: int = 4, timeout_s: float = 3600.0,
                 retries: int = 1):
        super().__init__(committee_size)
        if not command or not command.strip():
            raise TrainerError("external trainer needs a command")
        self.command = command
        self.timeout_s = timeout_s
        self.retries = max(0, retries)

    def build_args(self, manifest_path: Path, output_dir: Path, seed: int) -> List[str]:
        values = {
            "manifest_path": str(manifest_path),
            "output_dir": str(output_dir),
            "seed": str(seed),
            "T": str(self.committee_size),
        }
        try:
            return [token.format(**values) for token in shlex.split(self.command)]
        except (KeyError, IndexError, ValueError) as e:
            raise TrainerError(
                f"bad trainer command template {self.command!r}: {e}; "
                f"placeholders are {', '.join('{' + p + '}' for p in PLACEHOLDERS)}"
            ) from e

    def train_and_predict(self, manifest_path: Path, output_dir: Path, seed: int):
        args = self.build_args(manifest_path, output_dir, seed)
        last_error = None
        for attempt in range(1, self.retries + 2):
            try:
                self._run_once(args)
                return
            except TrainerError as e:
                last_error = e
                if attempt <= self.retries:
                    logger.warning("trainer attempt %d failed, retrying: %s", attempt,
                                   str(e).splitlines()[0])
        raise last_error

    def _run_once(self, args: List[str]):
        logger.debug("running %s", " ".join(shlex.quote(a) for a in args))
        try:
            result = subprocess.run(args, capture_output=True, text=True, timeout=self.timeout_s)
        except FileNotFoundError as e:
            raise TrainerError(f"trainer command not found: {args[0]}") from e
        except subprocess.TimeoutExpired as e:
            raise TrainerError(
                f"trainer timed out after {self.timeout_s:.0f}s",
                stdout=_text(e.stdout), stderr=_text(e.stderr),
            ) from e
        if result.returncode != 0:
            raise TrainerError("trainer command failed", returncode=result.returncode,
                               stdout=result.stdout, stderr=result.stderr)

    def get_trainer_name(self) -> str:
        return "external"


def _text(value) -> str:
    if value is None:
        return ""
    return value.decode("utf-8", "replace") if isinstance(value, bytes) else value
