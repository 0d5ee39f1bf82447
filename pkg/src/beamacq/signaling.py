"""Tone-based initial access: downlink sweep, uplink sweep, handshake.

Every mobile owns one narrowband tone, so the samples a receiver collects
for mobile ``k`` never contain another mobile's signal.  The simulation
reflects that structurally: each mobile's observations are computed from
its own channels and its own noise draws only.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .arrays import ArrayGeometry, grid_phases, response_from_phases
from .channel import channel_matrix
from .codebooks import Codebook
from .estimators import estimate_lml, estimate_ml, estimate_mp, lml_statistic

HANDSHAKE_SLOTS = 2


class ProtocolError(RuntimeError):
    pass


def assign_tones(mobile_ids) -> dict:
    """Tone ``i`` for the ``i``-th mobile in the given order."""
    tones = {}
    for m in mobile_ids:
        if m in tones:
            raise ValueError(f"duplicate mobile id {m!r}")
        tones[m] = len(tones)
    return tones


def pilot_symbols(ap_id, Q: int) -> np.ndarray:
    """Unit-modulus pilot sequence ``x_{l,q}`` of AP ``ap_id``.

    APs sweep at the same time, so the sequences are what lets a mobile
    tell them apart.  They are pseudo-random, fixed per AP id and known to
    every mobile.
    """
    rng = np.random.default_rng(zlib.crc32(repr(ap_id).encode()))
    return np.exp(2j * np.pi * rng.random(Q))


@dataclass
class TrainingConfig:
    """Training plan and radio settings shared by all nodes.

    ``ap_power`` is the per-tone transmit power in watts, either one value
    or a mapping AP id -> watts.  Codebooks map node ids to
    :class:`Codebook` objects; AP codebooks have ``Q`` beams and mobile
    codebooks ``P`` beams.  The uplink combiners reuse the AP codebooks.
    """

    P: int
    Q: int
    I: int
    ap_power: float | dict
    mobile_power: float
    noise: float
    ap_codebooks: dict
    mobile_codebooks: dict
    fft_size: int = 64
    ack_threshold: float = 1.0
    max_served_per_ap: int | None = None

    def __post_init__(self):
        if min(self.P, self.Q, self.I) < 1:
            raise ValueError("P, Q and I must be positive")
        if self.noise <= 0:
            raise ValueError("noise power must be positive")

    @property
    def pilot_budget(self) -> int:
        return self.I * self.P * self.Q

    @property
    def training_slots(self) -> int:
        return self.I * self.P * self.Q + self.I * self.Q + HANDSHAKE_SLOTS

    def power_of(self, ap) -> float:
        return float(self.ap_power[ap] if isinstance(self.ap_power, dict) else self.ap_power)

    def pilot_beams(self, ap) -> np.ndarray:
        """AP training beams with the pilot symbols folded in: ``f_q x_q``."""
        return self.ap_codebooks[ap].matrix * pilot_symbols(ap, self.Q)[None, :]


@dataclass
class ObservationMatrix:
    values: np.ndarray
    mobile_id: object = None

    @property
    def shape(self):
        return self.values.shape


@dataclass
class Network:
    """The minimum a protocol run needs: geometries and channels.

    ``channels`` maps ``(ap_id, mobile_id)`` to :class:`~beamacq.channel.Channel`.
    ``matrices`` caches the corresponding channel matrices.
    """

    ap_geoms: dict
    mobile_geoms: dict
    channels: dict
    matrices: dict = field(default_factory=dict)

    def __post_init__(self):
        for (a, m), ch in self.channels.items():
            if (a, m) not in self.matrices:
                self.matrices[(a, m)] = channel_matrix(ch, self.ap_geoms[a], self.mobile_geoms[m])

    @property
    def ap_ids(self) -> list:
        return list(self.ap_geoms)

    @property
    def mobile_ids(self) -> list:
        return list(self.mobile_geoms)

    def H(self, ap, mob) -> np.ndarray:
        H = self.matrices.get((ap, mob))
        if H is None:
            return np.zeros((self.mobile_geoms[mob].size, self.ap_geoms[ap].size), dtype=complex)
        return H


def _cn(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    return np.sqrt(var / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def downlink_observations(net: Network, cfg: TrainingConfig, rng: np.random.Generator) -> dict:
    """Averaged downlink samples ``Y`` (P x Q) for every mobile.

    All APs send beam ``q`` at the same time, each with its own pilot
    symbol (see :func:`pilot_symbols`).  Each
    slot's noise is the combiner output of ``I`` averaged white noise
    vectors, i.e. ``CN(0, ||w_p||^2 sigma^2 / I)``.
    """
    out = {}
    for m in net.mobile_ids:
        W = cfg.mobile_codebooks[m].matrix
        if W.shape != (net.mobile_geoms[m].size, cfg.P):
            raise ValueError(f"mobile {m!r} codebook shape {W.shape} does not match P={cfg.P}")
        Y = np.zeros((cfg.P, cfg.Q), dtype=complex)
        for a in net.ap_ids:
            F = cfg.pilot_beams(a)
            if F.shape != (net.ap_geoms[a].size, cfg.Q):
                raise ValueError(f"AP {a!r} codebook shape {F.shape} does not match Q={cfg.Q}")
            if (a, m) in net.matrices:
                Y += np.sqrt(cfg.power_of(a)) * (W.conj().T @ net.matrices[(a, m)] @ F)
        wnorm = np.linalg.norm(W, axis=0)[:, None]
        Y += wnorm * _cn(rng, (cfg.P, cfg.Q), cfg.noise / cfg.I)
        out[m] = ObservationMatrix(Y, m)
    return out


def uplink_observations(net: Network, beamformers: dict, cfg: TrainingConfig,
                        rng: np.random.Generator) -> dict:
    """Per-AP samples ``r[k] = g_q^H H^H w_k s_k + noise`` for each mobile ``k``.

    Returns ``{ap_id: {mobile_id: vector of length Q}}``.
    """
    for m in net.mobile_ids:
        if m not in beamformers:
            raise ProtocolError(f"mobile {m!r} has no uplink beamformer")
    out = {a: {} for a in net.ap_ids}
    for m in net.mobile_ids:
        w = np.asarray(beamformers[m], dtype=complex)
        for a in net.ap_ids:
            G = cfg.ap_codebooks[a].matrix
            r = np.sqrt(cfg.mobile_power) * (G.conj().T @ (net.H(a, m).conj().T @ w))
            r = r + np.linalg.norm(G, axis=0) * _cn(rng, cfg.Q, cfg.noise / cfg.I)
            out[a][m] = r
    return out


@dataclass
class AccessOutcome:
    """Result of one initial-access round.

    ``aoa`` maps mobile -> estimated phase pair; ``aod`` maps AP -> mobile
    -> estimated phase pair; ``associations`` maps mobile -> AP id or None.
    """

    aoa: dict
    aod: dict
    uplink_score: dict
    associations: dict
    dl_ack: dict
    ul_ack: dict
    estimates: dict = field(default_factory=dict)

    @property
    def associated(self) -> list:
        return [m for m, a in self.associations.items() if a is not None]


def estimate_downlink(Y, net: Network, mob, cfg: TrainingConfig, estimator: str):
    """Downlink AoA estimate for one mobile; returns ``(phase pair, Estimate or None)``."""
    mg = net.mobile_geoms[mob]
    W = cfg.mobile_codebooks[mob]
    if estimator == "mp":
        p, _ = estimate_mp(Y)
        return np.asarray(W.pointing[p]), None
    if estimator == "lml":
        est = estimate_lml(Y, mg, W, cfg.fft_size)
        return est.aoa_phase, est
    if estimator == "ml":
        aps = net.ap_ids
        est = estimate_ml(Y, [net.ap_geoms[a] for a in aps], [cfg.pilot_beams(a) for a in aps],
                          mg, W, cfg.fft_size)
        return est.aoa_phase, est
    raise ValueError(f"unknown estimator {estimator!r}")


def estimate_uplink(r: np.ndarray, ap_geom: ArrayGeometry, codebook: Codebook, estimator: str, fft_size: int):
    """AoD estimate and a received-energy score from one mobile's uplink samples."""
    if estimator == "mp":
        q = int(np.argmax(np.abs(r)))
        return np.asarray(codebook.pointing[q]), float(abs(r[q]) ** 2)
    stat = lml_statistic(r[:, None], ap_geom, codebook, fft_size).values
    k = int(np.argmax(stat))
    return grid_phases(ap_geom, fft_size)[k], float(stat[k])


def schedule(scores: dict, capacity: dict) -> dict:
    """Greedy assignment by descending score, respecting per-AP capacity.

    ``scores`` maps ``(ap, mobile)`` to an estimated uplink quality.  Each
    AP takes its best remaining mobiles; a mobile goes to at most one AP.
    Ties break by AP then mobile order of insertion.
    """
    order = sorted(enumerate(scores.items()), key=lambda t: (-t[1][1], t[0]))
    load = {a: 0 for a in capacity}
    chosen = {}
    for _, ((a, m), s) in order:
        if s <= 0 or m in chosen or load[a] >= capacity[a]:
            continue
        chosen[m] = a
        load[a] += 1
    return chosen


def run_initial_access(net: Network, cfg: TrainingConfig, estimator: str,
                       rng: np.random.Generator) -> AccessOutcome:
    """Downlink training, uplink training, scheduling and handshake.

    The uplink uses the mobile's steering beam toward its downlink estimate.
    Each AP estimates the AoD of every mobile (max power for ``mp``,
    otherwise the local ML statistic on the ``Q`` uplink samples).  APs
    schedule mobiles greedily by the uplink score, at most
    ``max_served_per_ap`` each (default: the AP's sub-array count).  A
    mobile is associated only when both ACK slots reach ``ack_threshold``.
    """
    if estimator not in ("mp", "ml", "lml"):
        raise ValueError(f"unknown estimator {estimator!r}")
    Ys = downlink_observations(net, cfg, rng)
    aoa, ests, beams = {}, {}, {}
    for m in net.mobile_ids:
        aoa[m], ests[m] = estimate_downlink(Ys[m].values, net, m, cfg, estimator)
        beams[m] = response_from_phases(net.mobile_geoms[m], *aoa[m])

    R = uplink_observations(net, beams, cfg, rng)
    aod = {a: {} for a in net.ap_ids}
    scores = {}
    for a in net.ap_ids:
        for m in net.mobile_ids:
            aod[a][m], scores[(a, m)] = estimate_uplink(R[a][m], net.ap_geoms[a], cfg.ap_codebooks[a],
                                                        estimator, cfg.fft_size)

    capacity = {a: (cfg.max_served_per_ap or net.ap_geoms[a].num_subarrays) for a in net.ap_ids}
    chosen = schedule(scores, capacity)

    associations, dl_ack, ul_ack = {}, {}, {}
    for m in net.mobile_ids:
        a = chosen.get(m)
        dl_ack[m] = ul_ack[m] = False
        associations[m] = None
        if a is None:
            continue
        f = response_from_phases(net.ap_geoms[a], *aod[a][m])
        g = abs(np.vdot(beams[m], net.H(a, m) @ f)) ** 2 / cfg.noise
        dl_ack[m] = cfg.power_of(a) * g >= cfg.ack_threshold
        ul_ack[m] = dl_ack[m] and cfg.mobile_power * g >= cfg.ack_threshold
        if dl_ack[m] and ul_ack[m]:
            associations[m] = a
    return AccessOutcome(aoa, aod, scores, associations, dl_ack, ul_ack, ests)
