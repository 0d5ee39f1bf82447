"""Multipath channels, path loss, post-training SNR and path lifetimes."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .arrays import ArrayGeometry, ArrayKind, array_response

log = logging.getLogger(__name__)

LOS_EXPONENT = 2.0
NLOS_EXPONENT = 3.2
THERMAL_NOISE_DBM_HZ = -174.0
DEFAULT_NOISE_FIGURE_DB = 7.0


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def lin2db(x):
    return 10.0 * np.log10(x)


def dbm2watt(x):
    return 10.0 ** ((np.asarray(x, dtype=float) - 30.0) / 10.0)


def thermal_noise_w(bandwidth_hz: float, noise_figure_db: float = DEFAULT_NOISE_FIGURE_DB) -> float:
    """Noise power ``-174 dBm/Hz + 10 log10(B) + NF`` in watts."""
    return float(dbm2watt(THERMAL_NOISE_DBM_HZ + 10 * np.log10(bandwidth_hz) + noise_figure_db))


@dataclass
class PathComponent:
    gain: complex
    aoa: object
    aod: object
    is_los: bool = False

    def __post_init__(self):
        if abs(self.gain) <= 0:
            raise ValueError("path gain must be nonzero")


@dataclass
class Channel:
    """Paths between one AP and one mobile.

    ``antenna_gain`` is ``sqrt(N_total * M_total / S)`` and is refreshed
    from the array sizes whenever the path list is replaced through
    :meth:`with_paths`.
    """

    paths: list[PathComponent]
    ap_id: object = None
    mobile_id: object = None
    ap_antennas: int = 32
    mobile_antennas: int = 32
    antenna_gain: float = field(init=False)

    def __post_init__(self):
        if not self.paths:
            raise ValueError("a channel needs at least one path")
        self.antenna_gain = float(np.sqrt(self.ap_antennas * self.mobile_antennas / len(self.paths)))

    @property
    def num_paths(self) -> int:
        return len(self.paths)

    def with_paths(self, paths) -> "Channel":
        return Channel(list(paths), self.ap_id, self.mobile_id, self.ap_antennas, self.mobile_antennas)

    def scaled(self, c: complex) -> "Channel":
        return self.with_paths(PathComponent(p.gain * c, p.aoa, p.aod, p.is_los) for p in self.paths)

    @classmethod
    def for_arrays(cls, paths, ap_geom: ArrayGeometry, mob_geom: ArrayGeometry, ap_id=None, mobile_id=None):
        return cls(list(paths), ap_id, mobile_id, ap_geom.size, mob_geom.size)


def channel_matrix(ch: Channel, ap_geom: ArrayGeometry, mob_geom: ArrayGeometry) -> np.ndarray:
    """Downlink matrix ``H = sum_s nu * gain_s * u(aoa_s) a(aod_s)^H``, shape (mobile, AP)."""
    if ap_geom.size != ch.ap_antennas or mob_geom.size != ch.mobile_antennas:
        raise ValueError(
            f"geometry sizes ({ap_geom.size}, {mob_geom.size}) do not match channel "
            f"({ch.ap_antennas}, {ch.mobile_antennas})"
        )
    H = np.zeros((mob_geom.size, ap_geom.size), dtype=complex)
    for p in ch.paths:
        H += p.gain * np.outer(array_response(mob_geom, p.aoa), array_response(ap_geom, p.aod).conj())
    return ch.antenna_gain * H


def beamformed_snr(H: np.ndarray, w: np.ndarray, f: np.ndarray, tx_power: float, noise: float) -> float:
    if noise <= 0:
        raise ValueError("noise power must be positive")
    return float(tx_power * abs(np.vdot(w, H @ f)) ** 2 / noise)


def post_training_snr(ch: Channel, aoa_hat, aod_hat, tx_power: float, noise: float,
                      ap_geom: ArrayGeometry, mob_geom: ArrayGeometry) -> float:
    """Linear SNR ``rho |u(aoa_hat)^H H a(aod_hat)|^2 / noise``."""
    if noise <= 0:
        raise ValueError("noise power must be positive")
    H = channel_matrix(ch, ap_geom, mob_geom)
    return beamformed_snr(H, array_response(mob_geom, aoa_hat), array_response(ap_geom, aod_hat), tx_power, noise)


def path_loss_db(distance: float, los: bool, carrier_freq: float) -> float:
    """Close-in reference path loss with exponent 2.0 (LoS) or 3.2 (NLoS).

    This is a stand-in for the 3GPP UMi model.  Distances below 1 m are
    clamped to 1 m.
    """
    if distance < 1.0:
        log.warning("distance %.3f m below 1 m reference; clamped", distance)
        distance = 1.0
    n = LOS_EXPONENT if los else NLOS_EXPONENT
    return 32.4 + 20 * np.log10(carrier_freq / 1e9) + 10 * n * np.log10(distance)


@dataclass
class LinkGeometry:
    """What :func:`sample_channel` needs to know about one AP-mobile link.

    ``los_aoa`` / ``los_aod`` are the geometric bearings in each array's
    frame and are only used when ``los`` is true.
    """

    distance: float
    los: bool
    ap_geom: ArrayGeometry
    mob_geom: ArrayGeometry
    los_aoa: object = 0.0
    los_aod: object = 0.0
    ap_id: object = None
    mobile_id: object = None


def _uniform_angle(geom: ArrayGeometry, rng: np.random.Generator):
    if geom.kind is ArrayKind.ULA:
        return float(rng.uniform(0, 2 * np.pi))
    return float(rng.uniform(0, 2 * np.pi)), float(rng.uniform(0, np.pi / 2))


def sample_channel(link: LinkGeometry, num_nlos_paths: int, rng: np.random.Generator,
                   nlos_extra_loss_db: tuple[float, float] = (0.0, 10.0)) -> Channel:
    """Draw a channel: an optional LoS path plus ``num_nlos_paths`` NLoS paths.

    NLoS directions and phases are uniform; NLoS amplitudes follow the NLoS
    path loss plus a uniform extra attenuation in ``nlos_extra_loss_db``.
    The LoS phase follows the propagation distance.
    """
    if num_nlos_paths < 1:
        raise ValueError("need at least one NLoS path")
    fc = link.ap_geom.carrier_freq
    paths = []
    if link.los:
        amp = 10 ** (-path_loss_db(link.distance, True, fc) / 20)
        phase = -2 * np.pi * ((link.distance / link.ap_geom.wavelength) % 1.0)
        paths.append(PathComponent(amp * np.exp(1j * phase), link.los_aoa, link.los_aod, True))
    base = path_loss_db(link.distance, False, fc)
    for _ in range(num_nlos_paths):
        aoa = _uniform_angle(link.mob_geom, rng)
        aod = _uniform_angle(link.ap_geom, rng)
        extra = rng.uniform(*nlos_extra_loss_db)
        phase = rng.uniform(0, 2 * np.pi)
        amp = 10 ** (-(base + extra) / 20)
        paths.append(PathComponent(amp * np.exp(1j * phase), aoa, aod, False))
    return Channel.for_arrays(paths, link.ap_geom, link.mob_geom, link.ap_id, link.mobile_id)


def sample_path_duration(blockage_rate: float, rng: np.random.Generator, size=None):
    """Exponential path lifetime with mean ``1 / blockage_rate`` seconds."""
    if blockage_rate <= 0:
        raise ValueError(f"blockage rate must be positive, got {blockage_rate}")
    return rng.exponential(1.0 / blockage_rate, size=size)
