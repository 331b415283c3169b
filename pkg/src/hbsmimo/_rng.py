"""Counter-based random substreams.

A run seed plus an integer key tuple (trial, purpose, user, ...) always maps
to the same independent generator, so results do not depend on the order in
which work units execute.
"""
import numpy as np

# purpose tags, part of the substream key
CHANNEL = 0
CODEBOOK = 1
VALIDATION = 2


def substream(seed, *key):
    """Return a ``numpy.random.Generator`` for ``(seed, *key)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def as_generator(rng):
    """Coerce ``None``, an int seed or a Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
