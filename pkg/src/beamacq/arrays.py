"""Uniform array geometry, DFT response vectors and beam steering.

Directions are handled in two forms.  Physical angles are what a
:class:`ArrayGeometry` maps to a response vector: a float ``theta`` for a
ULA, or an ``(azimuth, elevation)`` pair for a UPA, where elevation is
measured from the array normal and lies in ``[0, pi/2]``.  Phases are the
per-element progressions ``(vartheta_1, vartheta_2)`` that a response is
built from; all search grids live in phase ("sin") space.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

SPEED_OF_LIGHT = 299792458.0


class ArrayKind(str, Enum):
    ULA = "ULA"
    UPA = "UPA"


def dft_vector(phase: float, length: int) -> np.ndarray:
    """Unit-norm DFT vector ``sqrt(1/length) * exp(1j * phase * arange(length))``."""
    if length < 1:
        raise ValueError(f"DFT vector length must be >= 1, got {length}")
    return np.exp(1j * phase * np.arange(length)) / np.sqrt(length)


def wrap_phase(phase):
    """Wrap phases to ``[-pi, pi)``."""
    return (np.asarray(phase) + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True)
class ArrayGeometry:
    """Partially connected array of ``num_subarrays`` identical sub-arrays.

    Parameters
    ----------
    kind : ArrayKind
        ULA or UPA.
    num_subarrays : int
        Number of sub-arrays (RF chains), ``J``.
    elements_per_subarray : int
        Elements per sub-array (``N`` at an AP, ``M`` at a mobile).
    intra_spacing : float, optional
        Element spacing inside a sub-array in meters.  Defaults to half a
        wavelength.
    inter_spacing : float, optional
        Distance between first elements of adjacent sub-arrays in meters.
        Defaults to ``elements_per_subarray * intra_spacing``.
    carrier_freq : float
        Carrier frequency in Hz.
    """

    kind: ArrayKind = ArrayKind.ULA
    num_subarrays: int = 2
    elements_per_subarray: int = 16
    intra_spacing: float | None = None
    inter_spacing: float | None = None
    carrier_freq: float = 28e9
    _d: float = field(init=False, repr=False, compare=False)
    _u: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ArrayKind(self.kind))
        if self.num_subarrays < 1 or self.elements_per_subarray < 1:
            raise ValueError("array dimensions must be positive")
        if self.carrier_freq <= 0:
            raise ValueError("carrier frequency must be positive")
        wavelength = SPEED_OF_LIGHT / self.carrier_freq
        d = wavelength / 2 if self.intra_spacing is None else float(self.intra_spacing)
        u = self.elements_per_subarray * d if self.inter_spacing is None else float(self.inter_spacing)
        if d <= 0 or u <= 0:
            raise ValueError("antenna spacings must be positive")
        if d > u:
            raise ValueError(f"intra-subarray spacing {d} exceeds sub-array spacing {u}")
        object.__setattr__(self, "_d", d)
        object.__setattr__(self, "_u", u)

    @property
    def d(self) -> float:
        return self._d

    @property
    def u(self) -> float:
        return self._u

    @property
    def size(self) -> int:
        return self.num_subarrays * self.elements_per_subarray

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def wavenumber(self) -> float:
        return 2 * np.pi / self.wavelength

    def at_frequency(self, freq: float) -> "ArrayGeometry":
        """Same physical array (spacings fixed in meters) used at ``freq``."""
        return replace(self, intra_spacing=self.d, inter_spacing=self.u, carrier_freq=freq)

    def phases(self, angle) -> tuple[float, float]:
        """Map a physical angle to ``(vartheta_1, vartheta_2)``."""
        k = self.wavenumber
        if self.kind is ArrayKind.ULA:
            s = np.sin(float(angle))
            return k * self.u * s, k * self.d * s
        azimuth, elevation = angle
        se = np.sin(elevation)
        return k * self.u * se * np.sin(azimuth), k * self.d * se * np.cos(azimuth)

    def phases_to_angle(self, phases):
        """Inverse of :meth:`phases` on the visible region.

        Phases outside the visible region are clipped to it.  For a ULA only
        ``vartheta_2`` is used; the returned angle lies in ``[-pi/2, pi/2]``.
        """
        k = self.wavenumber
        t1, t2 = phases
        if self.kind is ArrayKind.ULA:
            s = np.clip(wrap_phase(t2) / (k * self.d), -1.0, 1.0)
            return float(np.arcsin(s))
        a = wrap_phase(t1) / (k * self.u)
        b = wrap_phase(t2) / (k * self.d)
        return float(np.arctan2(a, b)), float(np.arcsin(min(np.hypot(a, b), 1.0)))

    def response(self, angle) -> np.ndarray:
        return response_from_phases(self, *self.phases(angle))


def array_response(geom: ArrayGeometry, angle) -> np.ndarray:
    """Unit-norm response ``e(vartheta_1; J) kron e(vartheta_2; M)``."""
    return geom.response(angle)


def response_from_phases(geom: ArrayGeometry, t1: float, t2: float) -> np.ndarray:
    return np.kron(dft_vector(t1, geom.num_subarrays), dft_vector(t2, geom.elements_per_subarray))


def ula_subarray_phase(geom: ArrayGeometry, t2):
    """Sub-array phase tied to element phase ``t2`` on a ULA.

    ``t2`` is wrapped first so that any element phase maps to the physical
    direction with ``sin(theta)`` in ``[-1, 1)`` under half-wavelength spacing.
    """
    return (geom.u / geom.d) * wrap_phase(t2)


# --- search grids -----------------------------------------------------------

def grid_size(geom: ArrayGeometry, fft_size: int) -> int:
    return fft_size if geom.kind is ArrayKind.ULA else fft_size * fft_size


def grid_phases(geom: ArrayGeometry, fft_size: int) -> np.ndarray:
    """Phase pairs of the ``fft_size``-point grid, shape ``(G, 2)``.

    ULA grid point ``k`` has element phase ``2*pi*k/C``.  UPA grid point
    ``k1 * C + k2`` has phases ``(2*pi*k1/C, 2*pi*k2/C)``.
    """
    base = 2 * np.pi * np.arange(fft_size) / fft_size
    if geom.kind is ArrayKind.ULA:
        return np.column_stack([ula_subarray_phase(geom, base), base])
    t1, t2 = np.meshgrid(base, base, indexing="ij")
    return np.column_stack([t1.ravel(), t2.ravel()])


def dft_grid_phases(geom: ArrayGeometry) -> np.ndarray:
    """Phases of the critically sampled DFT beams: ``JM`` for a ULA, ``J x M`` for a UPA."""
    if geom.kind is ArrayKind.ULA:
        t2 = 2 * np.pi * np.arange(geom.size) / geom.size
        return np.column_stack([ula_subarray_phase(geom, t2), t2])
    t1, t2 = np.meshgrid(2 * np.pi * np.arange(geom.num_subarrays) / geom.num_subarrays,
                         2 * np.pi * np.arange(geom.elements_per_subarray) / geom.elements_per_subarray,
                         indexing="ij")
    return np.column_stack([t1.ravel(), t2.ravel()])


def grid_responses(geom: ArrayGeometry, fft_size: int) -> np.ndarray:
    """Response vectors of every grid point as columns, built one by one."""
    pts = grid_phases(geom, fft_size)
    return np.column_stack([response_from_phases(geom, t1, t2) for t1, t2 in pts])


def grid_transform(geom: ArrayGeometry, x: np.ndarray, fft_size: int) -> np.ndarray:
    """Evaluate ``u(grid)^H x`` for every grid point using FFTs.

    ``x`` has the antenna index on axis 0 (length ``geom.size``); trailing
    axes are carried through.  Returns an array of shape ``(G, ...)``.
    """
    x = np.asarray(x, dtype=complex)
    J, M = geom.num_subarrays, geom.elements_per_subarray
    if x.shape[0] != J * M:
        raise ValueError(f"expected {J * M} antennas on axis 0, got {x.shape[0]}")
    tail = x.shape[1:]
    blocks = x.reshape((J, M) + tail)
    scale = 1.0 / np.sqrt(J * M)
    if geom.kind is ArrayKind.ULA:
        spectrum = np.fft.fft(blocks, n=fft_size, axis=1)  # (J, C, ...)
        t1 = ula_subarray_phase(geom, 2 * np.pi * np.arange(fft_size) / fft_size)
        comb = np.exp(-1j * np.outer(np.arange(J), t1))  # (J, C)
        comb = comb.reshape((J, fft_size) + (1,) * len(tail))
        return scale * np.sum(comb * spectrum, axis=0)
    spectrum = np.fft.fft2(blocks, s=(fft_size, fft_size), axes=(0, 1))
    return scale * spectrum.reshape((fft_size * fft_size,) + tail)


# --- beams ------------------------------------------------------------------

@dataclass
class Beam:
    """Unit-norm weights, the number of leading active antennas and a power."""

    weights: np.ndarray
    active_antennas: int
    power: float = 1.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=complex)
        if self.power < 0:
            raise ValueError("beam power must be nonnegative")


def steering_beam(geom: ArrayGeometry, angle, power: float = 1.0) -> Beam:
    if power < 0:
        raise ValueError(f"negative beam power {power}")
    return Beam(array_response(geom, angle), geom.size, power)
