"""Named random streams derived from one master seed.

Every run owns independent generators: one direction stream and one delay
stream per player, derived as ``SeedSequence((master_seed, tag, player))``.
Keeping the streams separate guarantees that switching the estimator kind or
the delay scenario never perturbs the other draws, which paired-seed
comparisons rely on.
"""

from __future__ import annotations

import numpy as np

_DIRECTION_TAG = 101
_DELAY_TAG = 202

# shared stream used when all players experience the same delay; sits far
# outside any realistic player index (SeedSequence entropy must be nonnegative)
HOMOGENEOUS_DELAY_PLAYER = 2**32


def direction_stream(master_seed: int, player: int) -> np.random.Generator:
    ss = np.random.SeedSequence((int(master_seed), _DIRECTION_TAG, int(player)))
    return np.random.Generator(np.random.PCG64(ss))


def delay_stream(master_seed: int, player: int) -> np.random.Generator:
    ss = np.random.SeedSequence((int(master_seed), _DELAY_TAG, int(player)))
    return np.random.Generator(np.random.PCG64(ss))


def unit_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Draw ``count`` unit vectors from the sphere in one vectorized block.

    Consumes the generator's normal stream in the same order as sequential
    single draws, so block size is a pure optimization. Zero-norm rows (a
    measure-zero event) are redrawn from the same stream.
    """
    u = rng.standard_normal((count, dim))
    norms = np.linalg.norm(u, axis=1)
    while np.any(norms == 0.0):  # pragma: no cover - probability ~0
        bad = norms == 0.0
        u[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(u, axis=1)
    return u / norms[:, None]
