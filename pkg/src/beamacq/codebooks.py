"""Training codebooks and beam patterns.

Every beam is unit norm with equal magnitude on its active antennas, so a
fixed transmit power is split evenly over whichever antennas are on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .arrays import (
    ArrayGeometry,
    ArrayKind,
    Beam,
    array_response,
    grid_phases,
    grid_transform,
    response_from_phases,
    ula_subarray_phase,
)


class CodebookKind(str, Enum):
    FULL = "full"
    SINGLE_RF = "single-rf"
    ADAPTIVE = "adaptive"
    CROSS = "cross"
    RANDOM = "random"


@dataclass
class Codebook:
    """Ordered training beams.

    ``matrix`` holds the beams as columns (antennas x size).  ``pointing``
    holds the phase pair each beam is aimed at, used to turn a beam index
    into a direction (max-power estimation).
    """

    kind: CodebookKind
    matrix: np.ndarray
    active_antennas: np.ndarray
    pointing: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[1]

    @property
    def beams(self) -> list[Beam]:
        return [Beam(self.matrix[:, i], int(self.active_antennas[i])) for i in range(self.size)]

    def __len__(self):
        return self.size


def _sweep_phases(geom: ArrayGeometry, size: int) -> np.ndarray:
    """Pointing phases for ``size`` sweep directions, increasing order."""
    if geom.kind is ArrayKind.ULA:
        t2 = 2 * np.pi * np.arange(size) / size
        return np.column_stack([ula_subarray_phase(geom, t2), t2])
    # UPA: near-square grid over (vartheta_1, vartheta_2), first `size` points
    n2 = int(np.clip(round(np.sqrt(size * geom.elements_per_subarray / geom.num_subarrays)), 1, size))
    n1 = -(-size // n2)
    t1, t2 = np.meshgrid(2 * np.pi * np.arange(n1) / n1, 2 * np.pi * np.arange(n2) / n2, indexing="ij")
    return np.column_stack([t1.ravel(), t2.ravel()])[:size]


def _masked(v: np.ndarray, active: int) -> np.ndarray:
    out = np.zeros_like(v)
    out[:active] = v[:active]
    return out / np.linalg.norm(out)


def build_codebook(kind, geom: ArrayGeometry, size: int, rng: np.random.Generator | None = None) -> Codebook:
    """Build one of the five training codebooks.

    ``full`` steers all antennas over ``size`` evenly spaced phases.
    ``single-rf`` uses only the first sub-array.  ``adaptive`` activates the
    first ``min(size, antennas)`` antennas.  ``cross`` points the two antenna
    halves at phases half a turn apart.  ``random`` draws i.i.d. uniform
    phases on every antenna and needs ``rng``.
    """
    kind = CodebookKind(kind)
    if size < 1:
        raise ValueError(f"codebook size must be >= 1, got {size}")
    n_ant = geom.size
    pts = _sweep_phases(geom, size)

    if kind is CodebookKind.RANDOM:
        if rng is None:
            raise ValueError("random codebook needs an rng")
        mat = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(n_ant, size))) / np.sqrt(n_ant)
        # nominal pointing: peak of each beam's pattern on a 4x oversampled grid
        c = 1 << int(np.ceil(np.log2(4 * max(geom.num_subarrays, geom.elements_per_subarray))))
        gp = grid_phases(geom, c)
        pointing = gp[np.argmax(np.abs(grid_transform(geom, mat, c)), axis=0)]
        return Codebook(kind, mat, np.full(size, n_ant), pointing)

    cols = []
    if kind is CodebookKind.FULL:
        active = n_ant
        cols = [response_from_phases(geom, *p) for p in pts]
    elif kind is CodebookKind.SINGLE_RF:
        active = geom.elements_per_subarray
        cols = [_masked(response_from_phases(geom, *p), active) for p in pts]
    elif kind is CodebookKind.ADAPTIVE:
        active = min(size, n_ant)
        cols = [_masked(response_from_phases(geom, *p), active) for p in pts]
    elif kind is CodebookKind.CROSS:
        active = n_ant
        half = n_ant // 2
        for i in range(size):
            first = response_from_phases(geom, *pts[i])
            second = response_from_phases(geom, *pts[(i + size // 2) % size])
            if size == 1:
                second = response_from_phases(geom, *(pts[0] + np.pi))
            w = np.concatenate([first[:half], second[half:]])
            cols.append(w / np.linalg.norm(w))
    mat = np.column_stack(cols)
    return Codebook(kind, mat, np.full(size, active), pts)


def beam_pattern(beam, geom: ArrayGeometry, grid) -> np.ndarray:
    """``|<beam, a(angle)>|`` for each angle in ``grid``."""
    w = beam.weights if isinstance(beam, Beam) else np.asarray(beam)
    return np.array([abs(np.vdot(w, array_response(geom, a))) for a in grid])


def beam_pattern_phases(beam, geom: ArrayGeometry, fft_size: int) -> np.ndarray:
    """Pattern magnitude on the ``fft_size`` phase grid, via FFT."""
    w = beam.weights if isinstance(beam, Beam) else np.asarray(beam)
    return np.abs(grid_transform(geom, w, fft_size))
