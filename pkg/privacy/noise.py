"""
Seeded random streams and calibrated noise samplers.

Streams are counter-based (Philox) and addressed by a path of (name, index)
pairs, so each stage and iteration of an algorithm draws from its own
independent stream regardless of execution order.
"""

import zlib
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

import config
from errors import InvalidArgumentError

_NOISE_DISABLED: ContextVar[bool] = ContextVar("noise_disabled", default=False)


class RngSeed(BaseModel):
    """Root seed and stream id of an experiment."""

    seed: int = Field(0, ge=0, lt=2 ** 64)
    stream_id: int = Field(0, ge=0)

    def stream(self) -> "RngStream":
        return RngStream(self.seed, self.stream_id)


class RngStream:
    """A Philox generator addressed by (seed, stream id, child path)."""

    def __init__(self, seed: int, stream_id: int = 0, key: Tuple[int, ...] = ()):
        if seed < 0 or stream_id < 0:
            raise InvalidArgumentError("seed and stream id must be non-negative.")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.key = tuple(key)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,) + self.key)
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def child(self, name: str, index: int = 0) -> "RngStream":
        """Independent stream for a named stage and iteration."""
        return RngStream(self.seed, self.stream_id, self.key + (zlib.crc32(name.encode()), int(index)))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, key={self.key})"


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidArgumentError(f"Expected an RngStream or numpy Generator, got {type(rng).__name__}.")


@contextmanager
def noise_disabled() -> Iterator[None]:
    """Test hook: samplers return zeros and selectors return their most likely index."""
    if not config.ENABLE_TEST_HOOKS:
        raise RuntimeError("Noise can only be disabled when config.ENABLE_TEST_HOOKS is set.")
    token = _NOISE_DISABLED.set(True)
    try:
        yield
    finally:
        _NOISE_DISABLED.reset(token)


def noise_is_disabled() -> bool:
    return _NOISE_DISABLED.get()


def gaussian_vector(sigma: float, dim: int, rng: RngLike) -> np.ndarray:
    """i.i.d. N(0, sigma^2) coordinates."""
    if not sigma > 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}.")
    if dim < 1:
        raise InvalidArgumentError(f"dim must be positive, got {dim}.")
    if noise_is_disabled():
        return np.zeros(dim)
    return as_generator(rng).normal(0.0, sigma, size=dim)


def laplace_from_uniform(u, scale: float):
    """Inverse CDF of Laplace(0, scale) evaluated at u in (0, 1)."""
    centered = np.asarray(u, dtype=float) - 0.5
    return -scale * np.sign(centered) * np.log1p(-2.0 * np.abs(centered))


def _open_uniform(gen: np.random.Generator, size=None):
    u = gen.random(size)
    if size is None:
        while u == 0.0:
            u = gen.random()
        return u
    zeros = u == 0.0
    while zeros.any():
        u[zeros] = gen.random(int(zeros.sum()))
        zeros = u == 0.0
    return u


def laplace_scalar(scale: float, rng: RngLike) -> float:
    """Laplace(0, scale) variate by inverse CDF."""
    if not scale > 0:
        raise InvalidArgumentError(f"scale must be positive, got {scale}.")
    if noise_is_disabled():
        return 0.0
    return float(laplace_from_uniform(_open_uniform(as_generator(rng)), scale))


def laplace_vector(scale: float, size: int, rng: RngLike) -> np.ndarray:
    if not scale > 0:
        raise InvalidArgumentError(f"scale must be positive, got {scale}.")
    if noise_is_disabled():
        return np.zeros(size)
    return laplace_from_uniform(_open_uniform(as_generator(rng), size), scale)
