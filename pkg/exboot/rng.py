"""Counter-based random streams.

Every multiplier or latent draw is addressed by ``(seed, purpose, stream, index)``
so any partition of the work over workers reproduces the serial result bit for
bit. Philox takes the 128-bit key from the seed and purpose; the counter's two
high words hold ``stream`` and ``index`` and the low words are left for the
generator to advance.
"""

import numpy as np

_PURPOSES = {"bootstrap": 0, "data": 1, "diagnostic": 2}


class CounterStreams:
    """Factory for independent Philox generators keyed by a master seed."""

    def __init__(self, seed: int, purpose: str = "bootstrap"):
        if purpose not in _PURPOSES:
            raise ValueError(f"unknown stream purpose '{purpose}'")
        self.seed = int(seed)
        self.purpose = purpose
        sequence = np.random.SeedSequence([self.seed, _PURPOSES[purpose]])
        self._key = sequence.generate_state(2, dtype=np.uint64)

    def generator(self, stream: int, index: int = 0) -> np.random.Generator:
        """Philox generator at counter ``(stream, index)``."""
        counter = np.array([0, 0, stream, index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=self._key, counter=counter))

    def normals(self, stream: int, indices: range, size: int) -> np.ndarray:
        """Standard normal rows, one generator per index."""
        out = np.empty((len(indices), size))
        for row, index in enumerate(indices):
            out[row] = self.generator(stream, index).standard_normal(size)
        return out
