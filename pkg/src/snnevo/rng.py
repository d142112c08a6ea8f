"""Counter-based random streams.

Every random draw in a run comes from a stream keyed by a tuple of integers
and a purpose tag. The key is hashed into a Philox key, so the stream used by
any individual depends only on its coordinates, never on the order in which
work was scheduled.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_key(*parts: int | str) -> int:
    """128-bit integer key for a tuple of ints and strings."""
    h = hashlib.blake2b(digest_size=16, person=b"snnevo-stream")
    for part in parts:
        if isinstance(part, str):
            data = part.encode("utf-8")
            h.update(b"s" + struct.pack("<Q", len(data)) + data)
        else:
            value = int(part)
            # two's-complement width-tagged so negative seeds are distinct
            h.update(b"i" + value.to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


def stream_from_key(key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[key & _MASK64, key >> 64]))


def derive_stream(master_seed: int, generation: int, individual: int, purpose_tag: str) -> np.random.Generator:
    """Independent stream for one (seed, generation, individual, purpose) coordinate."""
    return stream_from_key(stream_key(master_seed, generation, individual, purpose_tag))


def scenario_stream(seed: int, purpose_tag: str) -> np.random.Generator:
    """Stream owned by a scenario, keyed on its seed alone."""
    return stream_from_key(stream_key("scenario", seed, purpose_tag))
