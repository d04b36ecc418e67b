"""
Probability stack file (.pmap)

Binary format:
[Magic "PMAP" (4 bytes)][Version (4 bytes)][T][C][H][W] (4 bytes each,
little-endian unsigned) followed by T*C*H*W little-endian float32 values,
member-major, then class, then row-major pixels.
"""

import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .data_types import ProbabilityStack
from .dataset import atomic_write_bytes
from .errors import FormatError, InvalidStack

logger = logging.getLogger(__name__)

MAGIC = b"PMAP"
VERSION = 1
HEADER = struct.Struct("<4sIIIII")
SUFFIX = ".pmap"


def encode_stack(stack: ProbabilityStack) -> bytes:
    T, C, H, W = stack.data.shape
    payload = np.ascontiguousarray(stack.data, dtype="<f4").tobytes()
    return HEADER.pack(MAGIC, VERSION, T, C, H, W) + payload


def decode_stack(blob: bytes, source: str = "<bytes>") -> ProbabilityStack:
    if len(blob) < HEADER.size:
        raise FormatError(f"{source}: {len(blob)} bytes is shorter than the {HEADER.size}-byte header")
    magic, version, T, C, H, W = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{source}: unsupported format version {version}")

    expected = 4 * T * C * H * W
    actual = len(blob) - HEADER.size
    if actual != expected:
        kind = "truncated" if actual < expected else "oversized"
        raise FormatError(
            f"{source}: {kind} payload, {actual} bytes for T={T} C={C} H={H} W={W} ({expected} expected)"
        )

    data = np.frombuffer(blob, dtype="<f4", offset=HEADER.size).reshape(T, C, H, W)
    try:
        return ProbabilityStack(data.astype(np.float64))
    except InvalidStack as e:
        raise FormatError(f"{source}: {e}") from e


def read_probability_stack(path: Union[str, Path]) -> ProbabilityStack:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise FormatError(f"cannot read stack {path}: {e}") from e
    return decode_stack(blob, str(path))


def write_probability_stack(path: Union[str, Path], stack: ProbabilityStack):
    atomic_write_bytes(path, encode_stack(stack))
