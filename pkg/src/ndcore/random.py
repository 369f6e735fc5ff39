"""
Named random streams.

One run seed fans out into independent generators keyed by stream name, so
drawing from the instructor's streams (or sampling an unlabeled pool) never
shifts the sequence the target model sees.
"""

import zlib
from typing import Dict

import numpy as np

STREAMS = ('init/f', 'init/g', 'dropout/f', 'dropout/g', 'shuffle/f', 'shuffle/g', 'pool', 'split')


class RngStreams:
    """Lazily created numpy Generators, one per stream name"""

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be >= 0, got: {seed}")
        self.seed = seed
        self._streams: Dict[str, np.random.Generator] = {}

    def get(self, name: str) -> np.random.Generator:
        if name not in self._streams:
            self._streams[name] = self.fresh(name)
        return self._streams[name]

    def fresh(self, name: str) -> np.random.Generator:
        """A new generator at the start of the named stream"""
        key = zlib.crc32(name.encode('utf-8'))
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(key,)))

    def __getitem__(self, name: str) -> np.random.Generator:
        return self.get(name)
