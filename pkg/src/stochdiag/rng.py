"""Seeded, splittable random streams.

Every stochastic routine in the package takes an :class:`RngStream` instead of
touching global state. A stream is identified by a 64-bit seed plus a stream
id (an integer or a tuple of integers); the pair maps onto a numpy
``SeedSequence`` spawn key, so distinct ids give independent sequences and
equal ids give bit-identical ones.
"""

from __future__ import annotations

from typing import Tuple, Union

import numpy as np

StreamId = Union[int, Tuple[int, ...]]


def _as_key(stream_id: StreamId) -> Tuple[int, ...]:
    if isinstance(stream_id, (int, np.integer)):
        return (int(stream_id),)
    return tuple(int(k) for k in stream_id)


class RngStream:
    """A single-owner random stream.

    Parameters
    ----------
    seed : int
        Master seed (reduced modulo 2**64).
    stream_id : int or tuple of int
        Identifies the stream under ``seed``.

    Notes
    -----
    The underlying generator is created lazily and advances as draws are
    taken. Do not share one instance across threads; use :meth:`substream`
    to hand each worker its own stream.
    """

    def __init__(self, seed: int, stream_id: StreamId = 0):
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        self.seed = int(seed) % (1 << 64)
        self.stream_id = _as_key(stream_id)
        self._gen = None

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream_id)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def substream(self, *key: int) -> "RngStream":
        """Return a fresh, independent stream keyed by ``key`` under this one."""
        return RngStream(self.seed, self.stream_id + tuple(int(k) for k in key))

    def fresh(self) -> "RngStream":
        """Return a new stream with the same identity, rewound to the start."""
        return RngStream(self.seed, self.stream_id)

    # thin pass-throughs used across the package
    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def gamma(self, shape, scale=1.0, size=None):
        return self.generator.gamma(shape, scale, size)


def as_stream(rng) -> RngStream:
    """Coerce an int seed or an existing stream into an :class:`RngStream`."""
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise TypeError(f"expected RngStream or int seed, got {type(rng).__name__}")
