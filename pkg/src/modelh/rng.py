"""Counter-based random streams, splittable by job index.

Every random draw in the lab flows from (seed, job_index) through a Philox
counter-based generator, so parallel jobs are reproducible and independent of
scheduling order.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, job_index: int = 0) -> np.random.Generator:
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) | ((int(job_index) & 0xFFFFFFFFFFFFFFFF) << 64)
    return np.random.Generator(np.random.Philox(key=key))
