"""Seeded random streams.

Every random choice of a run (mixing matrices, base points, gamma,
diagonal factors, start-system forms) comes from a PCG64 stream derived from
the run seed and a fixed name, so streams do not depend on call order.
"""

import zlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, key])))


def complex_normal(rng: np.random.Generator, size=None) -> np.ndarray:
    """Entries with independent standard normal real and imaginary parts."""
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def unit_complex(rng: np.random.Generator) -> complex:
    theta = rng.uniform(0.0, 2.0 * np.pi)
    return complex(np.cos(theta), np.sin(theta))
