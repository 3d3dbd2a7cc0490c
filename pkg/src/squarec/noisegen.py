"""Seeded boundary-noise generator and the morphological closing it relies on.

Randomness is fully self-contained so that golden outputs are portable:

* `Rng` is a SplitMix64 stream: state advances by the 64-bit golden gamma
  0x9E3779B97F4A7C15 and outputs pass the standard SplitMix64 finalizer.
* uniforms take the top 53 bits of an output divided by 2**53;
* normals use the Box-Muller transform, consuming exactly two uniforms:
  mu + sigma * sqrt(-2 ln(1 - u1)) * cos(2 pi u2);
* `derive_subseed(seed, i)` = finalizer(seed + gamma * (i + 1)) gives
  independent per-task streams for dataset generation.

One noise application draws, in order: the width (one normal), the x run
lengths (round(width) normals), the y run lengths (same count), then one
boundary anchor per draw direction.  Counts and lengths round half away
from zero and non-positive values are skipped.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi

from .grid import BinaryShape, ShapeError

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_subseed(seed: int, index: int) -> int:
    """Documented split function: independent sub-seed for task `index`."""
    return _mix((seed + _GAMMA * (index + 1)) & _MASK64)


class Rng:
    """Deterministic SplitMix64 generator; identical streams on every platform."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64

    def _next(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix(self._state)

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53-bit resolution."""
        return (self._next() >> 11) * 2.0 ** -53

    def normal(self, mu: float, sigma: float) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        z = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
        return mu + sigma * z

    def randrange(self, n: int) -> int:
        if n < 1:
            raise ShapeError("randrange needs n >= 1")
        return min(int(self.uniform() * n), n - 1)

    def split(self, index: int) -> "Rng":
        return Rng(derive_subseed(self._state, index))


def norm_rand(rng: Rng, mu: float, sigma: float, n: int = 1):
    """`n` draws from Normal(mu, sigma); sigma = 0 returns mu exactly."""
    if sigma < 0:
        raise ShapeError("sigma must be >= 0")
    return [rng.normal(mu, sigma) for _ in range(n)]


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def morphological_closing(shape: BinaryShape, square_side: int) -> BinaryShape:
    """Dilation then erosion by a square (cube) structuring element of the given side."""
    if square_side < 1:
        raise ShapeError("structuring element side must be >= 1")
    if square_side == 1:
        return shape
    pad = square_side
    m = np.pad(shape.mask, pad)
    selem = np.ones((square_side,) * shape.ndim, dtype=bool)
    closed = ndi.binary_erosion(ndi.binary_dilation(m, structure=selem), structure=selem)
    origin = tuple(o - pad for o in shape.origin)
    return BinaryShape.from_mask(closed, origin).canonical()


def boundary_cells(shape: BinaryShape) -> np.ndarray:
    """Occupied cells with an unoccupied 4-neighbour, canvas indices in row-major order."""
    m = shape.mask
    interior = m.copy()
    for ax in range(m.ndim):
        for sign in (1, -1):
            interior &= np.roll(m, sign, axis=ax)
    return np.argwhere(m & ~interior)


def add_noise(shape: BinaryShape, nf: int, rng: Rng) -> BinaryShape:
    """One noise application: extrude random pixel runs outward at a random
    boundary anchor along x and y, then close with a square of side nf."""
    if shape.ndim != 2:
        raise ShapeError("noise generation is defined for 2-D shapes")
    if nf < 1:
        raise ShapeError("noise factor must be >= 1")
    width = rng.normal(nf, nf / 3.0)
    n = max(0, _round_half_away(width))
    x_lens = [_round_half_away(v) for v in norm_rand(rng, nf, nf / 3.0, n)]
    y_lens = [_round_half_away(v) for v in norm_rand(rng, nf, nf / 3.0, n)]
    boundary = boundary_cells(shape)
    if boundary.size == 0:
        raise ShapeError("shape has no boundary")

    pad = nf + max([abs(v) for v in x_lens + y_lens], default=0) + n + 1
    m = np.pad(shape.mask, pad)
    base = shape.mask

    def outward(anchor, axis):
        r, c = anchor
        probe = [r, c]
        probe[axis] += 1
        hi = base.shape[axis]
        if probe[axis] < hi and not base[tuple(probe)]:
            return 1
        probe[axis] -= 2
        if probe[axis] >= 0 and not base[tuple(probe)]:
            return -1
        return 1

    for axis, lens in ((1, x_lens), (0, y_lens)):
        if not lens:
            continue
        anchor = boundary[rng.randrange(len(boundary))]
        sign = outward(anchor, axis)
        for i, length in enumerate(lens):
            if length <= 0:
                continue
            lateral = i - n // 2
            pos = [int(anchor[0]) + pad, int(anchor[1]) + pad]
            pos[1 - axis] += lateral
            for step in range(1, length + 1):
                cell = list(pos)
                cell[axis] += sign * step
                m[tuple(cell)] = True

    grown = BinaryShape.from_mask(m, tuple(o - pad for o in shape.origin))
    return morphological_closing(grown, nf).canonical()


def make_noisy_dataset(base: BinaryShape, counts, nfs, seed: int):
    """One shape per (count, nf) pair, each built by `count` sequential noise applications.

    Every cell of the counts x nfs grid runs on its own sub-seed, so the
    dataset is deterministic and cells may be generated in parallel.
    """
    counts = list(counts)
    nfs = list(nfs)
    if not counts or not nfs:
        raise ShapeError("counts and nfs must be nonempty")
    out = []
    index = 0
    for count in counts:
        for nf in nfs:
            rng = Rng(derive_subseed(seed, index))
            s = base
            for _ in range(count):
                s = add_noise(s, nf, rng)
            out.append((s, count, nf))
            index += 1
    return out
