"""Deterministic derivation of per-stage random streams.

Every stochastic stage of a campaign draws from a generator derived from the
campaign seed plus a tuple of string/int tags (stage name, iteration index,
posterior-sample index, ...).  Derivation goes through ``SeedSequence`` so
streams are independent, stable across processes, and insensitive to the
order in which stages actually execute.
"""

from __future__ import annotations

import zlib

import numpy as np


def _tag_to_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag)
    return zlib.crc32(str(tag).encode("utf8"))


def subseed(seed: int, *tags) -> np.random.SeedSequence:
    """Seed sequence for the stage identified by ``tags`` under ``seed``."""
    return np.random.SeedSequence([int(seed)] + [_tag_to_int(t) for t in tags])


def rng_for(seed: int, *tags) -> np.random.Generator:
    """Fresh ``Generator`` for the stage identified by ``tags``."""
    return np.random.default_rng(subseed(seed, *tags))


def int_for(seed: int, *tags) -> int:
    """Deterministic 32-bit integer seed (for libraries that want a plain int)."""
    return int(subseed(seed, *tags).generate_state(1, dtype=np.uint32)[0])
