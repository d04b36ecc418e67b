"""
Order-independent random streams

Every sample draws from a generator keyed on (master seed, image id, index),
so results do not depend on worker count or processing order.
"""

import hashlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _key_to_int(key: Key) -> int:
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"seed keys must be non-negative, got {key}")
        return int(key)
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed(seed: int, *keys: Key) -> int:
    """Stable 63-bit seed derived from a master seed and keys"""
    entropy = [_key_to_int(seed)] + [_key_to_int(k) for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def derive_rng(seed: int, *keys: Key) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))
