"""Seeded random streams.

Every object drawn by the generators has its own independent stream: a
``numpy.random.PCG64`` bit generator seeded through ``SeedSequence`` with
``entropy=seed`` and ``spawn_key=(stream code, index)``.  Both algorithms are
fully specified by NumPy and stable across platforms, so a ``(seed, name,
index)`` triple always yields the same numbers.

Test vector: ``named_rng(0, "A").standard_normal(2)`` equals the value frozen in
``tests/test_problems.py``.
"""
from __future__ import annotations

import numpy as np

STREAMS = {
    "A": 0,
    "B": 1,
    "C": 2,
    "r": 3,
    "s": 4,
    "g": 5,
    "x0": 6,
    "oracle": 7,
    "perturb": 8,
}


def named_rng(seed: int, name: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(STREAMS[name], int(index)))
    return np.random.Generator(np.random.PCG64(ss))
