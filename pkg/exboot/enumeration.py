"""Exact enumeration over finite latent supports.

A latent grid has one axis per latent variable and a trailing value axis. Tables
of generator values live on that grid, and conditional expectations are taken by
averaging out axes with their probability weights.
"""

import itertools
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from exboot.exceptions import InvalidInputError, SupportTooLargeError

DEFAULT_BUDGET = 1_000_000

Pattern = tuple[int, ...]


@dataclass(frozen=True)
class LatentLaw:
    """A finitely supported law."""

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise InvalidInputError("latent law", self.support, "support and probs must match")
        probs = np.asarray(self.probs, dtype=float)
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidInputError("latent law", self.probs, "probabilities must sum to one")

    @classmethod
    def uniform(cls, support: Sequence[float]) -> "LatentLaw":
        """Equal weights on ``support``."""
        support = tuple(float(s) for s in support)
        return cls(support, tuple(1.0 / len(support) for _ in support))

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


def nonzero_patterns(K: int) -> list[Pattern]:
    """All e in {0,1}^K except 0, ordered by size then lexicographically."""
    patterns = [e for e in itertools.product((0, 1), repeat=K) if any(e)]
    return sorted(patterns, key=lambda e: (sum(e), tuple(-x for x in e)))


def is_below(lower: Pattern, upper: Pattern) -> bool:
    """Componentwise order on patterns."""
    return all(a <= b for a, b in zip(lower, upper, strict=True))


class LatentGrid:
    """Product grid of latent laws with weighted conditional expectations."""

    def __init__(self, laws: Sequence[LatentLaw], budget: int = DEFAULT_BUDGET):
        self.laws = list(laws)
        self.shape = tuple(len(law.support) for law in self.laws)
        self.size = int(np.prod(self.shape)) if self.shape else 1
        if self.size > budget:
            raise SupportTooLargeError(self.size, budget)

    def tabulate(self, generator: Callable[[tuple[float, ...]], Sequence[float]]) -> np.ndarray:
        """Evaluate ``generator`` on every latent combination."""
        first = np.atleast_1d(np.asarray(generator(tuple(law.support[0] for law in self.laws)), dtype=float))
        table = np.empty(self.shape + first.shape)
        for index in np.ndindex(*self.shape):
            point = tuple(law.support[i] for law, i in zip(self.laws, index, strict=True))
            table[index] = generator(point)
        return table

    def expectation(self, table: np.ndarray, keep: set[int] | frozenset[int] = frozenset()) -> np.ndarray:
        """E[table | latents on axes ``keep``], broadcast back to the full grid."""
        out = table
        for axis, law in enumerate(self.laws):
            if axis in keep:
                continue
            shape = [1] * table.ndim
            shape[axis] = len(law.support)
            out = np.sum(out * law.weights.reshape(shape), axis=axis, keepdims=True)
        return np.broadcast_to(out, table.shape)

    def mean(self, table: np.ndarray) -> np.ndarray:
        """Unconditional expectation as a value vector."""
        return np.array(self.expectation(table)[(0,) * len(self.shape)])

    def axis_weights(self, axis: int) -> np.ndarray:
        return self.laws[axis].weights


def pattern_laws(patterns: Sequence[Pattern], laws: Mapping[Pattern, LatentLaw] | Mapping[int, LatentLaw]) -> list[LatentLaw]:
    """Resolve a law per pattern, either keyed by pattern or by pattern size."""
    resolved = []
    for e in patterns:
        if e in laws:
            resolved.append(laws[e])
        elif sum(e) in laws:
            resolved.append(laws[sum(e)])
        else:
            raise InvalidInputError("latent laws", e, "no law given for this pattern")
    return resolved
