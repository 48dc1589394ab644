"""Random stream derivation.

Every replication (or noise run) owns one counter-based Philox stream keyed by
``(master_seed, stream_id)``. Streams do not depend on how work is split
across processes, so results are identical for any worker count.
"""
import numpy as np

from .errors import ParamError


def stream_rng(master_seed: int, stream_id: int) -> np.random.Generator:
    """Independent generator for one replication of a seeded experiment"""
    if master_seed < 0 or stream_id < 0:
        raise ParamError(f"Seeds must be nonnegative, got ({master_seed}, {stream_id})")
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(seq))
