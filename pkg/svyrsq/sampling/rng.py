"""Reproducible random streams.

Every random draw uses its own substream, derived from a base seed, a purpose tag and
a replicate index:

    Generator(Philox(SeedSequence([base_seed, crc32(purpose), replicate])))

Philox is counter based, so substreams are independent of each other and of the
order in which replicates are executed.
"""
import zlib

import numpy as np

from svyrsq.utils import PreconditionError

DEFAULT_SEED = 20170


def purpose_tag(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def substream(seed: int, purpose: str, replicate: int = 0) -> np.random.Generator:
    if seed < 0 or replicate < 0:
        raise PreconditionError(f"seed and replicate must be non-negative, got {seed}, {replicate}.")
    sequence = np.random.SeedSequence([int(seed), purpose_tag(purpose), int(replicate)])
    return np.random.Generator(np.random.Philox(sequence))
