"""Network topologies, LoS geometry, FDM scheduling and data-phase SINR.

Obstacles are axis-aligned boxes standing on the ground, stored as rows
``(x_min, y_min, x_max, y_max, height)`` in meters.

Topology files are line records::

    # beamacq-topology v1
    ap id=A0 x_m=0 y_m=0 height_m=10 orientation_rad=0.5
    mobile id=M0 x_m=40 y_m=12 height_m=1.5
    obstacle x_m=20 y_m=5 width_m=1 depth_m=1 height_m=2

Blank lines and ``#`` comments are ignored.  The first non-blank line must
be the version header.  ``orientation_rad`` (array broadside azimuth) is
optional; when missing, APs face the AP centroid and mobiles get a random
orientation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .arrays import ArrayGeometry, ArrayKind, array_response
from .channel import (
    Channel,
    LinkGeometry,
    channel_matrix,
    dbm2watt,
    sample_channel,
    thermal_noise_w,
)
from .codebooks import build_codebook
from .signaling import Network, TrainingConfig, run_initial_access

log = logging.getLogger(__name__)

TOPOLOGY_HEADER = "# beamacq-topology v1"


class TopologyParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class Node:
    id: str
    position: np.ndarray
    geometry: ArrayGeometry
    orientation: float = 0.0
    speed: float = 0.0


@dataclass
class Topology:
    aps: list[Node]
    mobiles: list[Node]
    obstacles: np.ndarray = field(default_factory=lambda: np.zeros((0, 5)))

    def ap(self, ap_id) -> Node:
        return next(n for n in self.aps if n.id == ap_id)

    def mobile(self, mob_id) -> Node:
        return next(n for n in self.mobiles if n.id == mob_id)


@dataclass
class TopologyParams:
    num_aps: int = 3
    inter_ap_distance_m: float = 250.0
    num_mobiles: int = 10
    min_distance_m: float = 15.0
    ap_height_m: float = 10.0
    mobile_height_m: float = 1.5
    num_obstacles: int = 0
    obstacle_size_m: float = 1.0
    obstacle_height_m: float = 2.0
    mobile_speed_mps: float = 0.0
    ap_geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    mobile_geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    path: str | None = None


# --- topology generation ----------------------------------------------------

def _face_centroid(aps: list[Node]):
    c = np.mean([a.position[:2] for a in aps], axis=0)
    for a in aps:
        v = c - a.position[:2]
        a.orientation = float(np.arctan2(v[1], v[0])) if np.hypot(*v) > 1e-9 else 0.0


def _hex_lattice(n: int, spacing: float) -> np.ndarray:
    r = int(np.ceil(np.sqrt(n))) + 1
    pts = []
    for i in range(-r, r + 1):
        for j in range(-r, r + 1):
            pts.append((spacing * (i + 0.5 * j), spacing * (np.sqrt(3) / 2) * j))
    pts = np.array(pts)
    order = np.lexsort((np.arctan2(pts[:, 1], pts[:, 0]), np.round(np.hypot(pts[:, 0], pts[:, 1]), 9)))
    return pts[order[:n]]


def _drop_mobiles(sampler, aps_xy: np.ndarray, p: TopologyParams, rng) -> list[np.ndarray]:
    out = []
    for _ in range(10000 * max(p.num_mobiles, 1)):
        if len(out) == p.num_mobiles:
            break
        xy = sampler()
        if np.min(np.hypot(*(aps_xy - xy).T)) >= p.min_distance_m:
            out.append(xy)
    if len(out) < p.num_mobiles:
        raise ValueError("could not place mobiles at the requested minimum distance")
    return out


def _random_obstacles(lo: np.ndarray, hi: np.ndarray, p: TopologyParams, rng) -> np.ndarray:
    c = rng.uniform(lo, hi, size=(p.num_obstacles, 2))
    h = p.obstacle_size_m / 2
    return np.column_stack([c - h, c + h, np.full(p.num_obstacles, p.obstacle_height_m)])


def generate_topology(kind: str, params: TopologyParams, rng: np.random.Generator) -> Topology:
    """Build a ``triangle``, ``hex`` or ``file`` topology.

    ``triangle`` places 3 APs on an equilateral triangle and drops mobiles
    uniformly inside it.  ``hex`` places ``num_aps`` APs on a hexagonal
    lattice and drops mobiles in the lattice bounding box grown by half a
    spacing.  Mobiles closer than ``min_distance_m`` (horizontally) to any
    AP are redrawn.  ``file`` reads ``params.path``.
    """
    p = params
    if kind == "file":
        if not p.path:
            raise ValueError("file topology needs a path")
        return read_topology(p.path, p.ap_geometry, p.mobile_geometry, rng)
    if kind == "triangle":
        s = p.inter_ap_distance_m
        xy = np.array([[0.0, 0.0], [s, 0.0], [s / 2, s * np.sqrt(3) / 2]])

        def sampler():
            r1, r2 = rng.random(2)
            a = np.sqrt(r1)
            return (1 - a) * xy[0] + a * (1 - r2) * xy[1] + a * r2 * xy[2]

        lo, hi = xy.min(axis=0), xy.max(axis=0)
    elif kind == "hex":
        xy = _hex_lattice(p.num_aps, p.inter_ap_distance_m)
        lo = xy.min(axis=0) - p.inter_ap_distance_m / 2
        hi = xy.max(axis=0) + p.inter_ap_distance_m / 2

        def sampler():
            return rng.uniform(lo, hi)
    else:
        raise ValueError(f"unknown topology kind {kind!r}")

    aps = [Node(f"A{i}", np.array([x, y, p.ap_height_m]), p.ap_geometry) for i, (x, y) in enumerate(xy)]
    _face_centroid(aps)
    mobiles = [
        Node(f"M{i}", np.array([*m, p.mobile_height_m]), p.mobile_geometry,
             float(rng.uniform(0, 2 * np.pi)), p.mobile_speed_mps)
        for i, m in enumerate(_drop_mobiles(sampler, xy, p, rng))
    ]
    return Topology(aps, mobiles, _random_obstacles(lo, hi, p, rng))


def read_topology(path, ap_geometry: ArrayGeometry, mobile_geometry: ArrayGeometry,
                  rng: np.random.Generator | None = None) -> Topology:
    lines = Path(path).read_text().splitlines()
    return parse_topology(lines, ap_geometry, mobile_geometry, rng)


def parse_topology(lines, ap_geometry, mobile_geometry, rng=None) -> Topology:
    required = {
        "ap": ("id", "x_m", "y_m", "height_m"),
        "mobile": ("id", "x_m", "y_m", "height_m"),
        "obstacle": ("x_m", "y_m", "width_m", "depth_m", "height_m"),
    }
    optional = {"ap": ("orientation_rad",), "mobile": ("orientation_rad", "speed_mps"), "obstacle": ()}
    aps, mobiles, obstacles = [], [], []
    seen_header = False
    orient_given = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if not seen_header:
            if line != TOPOLOGY_HEADER:
                raise TopologyParseError(lineno, f"expected header {TOPOLOGY_HEADER!r}")
            seen_header = True
            continue
        if line.startswith("#"):
            continue
        kind, *items = line.split()
        if kind not in required:
            raise TopologyParseError(lineno, f"unknown record type {kind!r}")
        rec = {}
        for item in items:
            key, sep, val = item.partition("=")
            if not sep:
                raise TopologyParseError(lineno, f"expected key=value, got {item!r}")
            if key not in required[kind] and key not in optional[kind]:
                raise TopologyParseError(lineno, f"unknown key {key!r} for {kind}")
            if key != "id":
                try:
                    val = float(val)
                except ValueError:
                    raise TopologyParseError(lineno, f"{key} is not a number: {val!r}") from None
            rec[key] = val
        missing = [k for k in required[kind] if k not in rec]
        if missing:
            raise TopologyParseError(lineno, f"{kind} record missing {', '.join(missing)}")
        if kind == "obstacle":
            hw, hd = rec["width_m"] / 2, rec["depth_m"] / 2
            obstacles.append([rec["x_m"] - hw, rec["y_m"] - hd, rec["x_m"] + hw, rec["y_m"] + hd, rec["height_m"]])
            continue
        geom = ap_geometry if kind == "ap" else mobile_geometry
        node = Node(rec["id"], np.array([rec["x_m"], rec["y_m"], rec["height_m"]]), geom,
                    rec.get("orientation_rad", 0.0), rec.get("speed_mps", 0.0))
        if "orientation_rad" in rec:
            orient_given.add(id(node))
        (aps if kind == "ap" else mobiles).append(node)
    if not seen_header:
        raise TopologyParseError(1, "empty topology file")
    if not aps:
        raise TopologyParseError(len(lines), "no ap records")
    ids = [n.id for n in aps + mobiles]
    if len(set(ids)) != len(ids):
        raise TopologyParseError(len(lines), "duplicate node ids")
    if any(id(a) not in orient_given for a in aps):
        pending = [a for a in aps if id(a) not in orient_given]
        saved = {id(a): a.orientation for a in aps}
        _face_centroid(aps)
        for a in aps:
            if id(a) not in {id(x) for x in pending}:
                a.orientation = saved[id(a)]
    for m in mobiles:
        if id(m) not in orient_given and rng is not None:
            m.orientation = float(rng.uniform(0, 2 * np.pi))
    return Topology(aps, mobiles, np.array(obstacles, dtype=float).reshape(-1, 5))


def write_topology(topo: Topology, path):
    rows = [TOPOLOGY_HEADER]
    for a in topo.aps:
        x, y, z = map(float, a.position)
        rows.append(f"ap id={a.id} x_m={x!r} y_m={y!r} height_m={z!r} orientation_rad={float(a.orientation)!r}")
    for m in topo.mobiles:
        x, y, z = map(float, m.position)
        rows.append(f"mobile id={m.id} x_m={x!r} y_m={y!r} height_m={z!r} "
                    f"orientation_rad={float(m.orientation)!r} speed_mps={float(m.speed)!r}")
    for x0, y0, x1, y1, h in topo.obstacles.tolist():
        rows.append(f"obstacle x_m={(x0 + x1) / 2!r} y_m={(y0 + y1) / 2!r} "
                    f"width_m={x1 - x0!r} depth_m={y1 - y0!r} height_m={h!r}")
    Path(path).write_text("\n".join(rows) + "\n")


# --- geometry ---------------------------------------------------------------

def segment_hits_boxes(p0, p1, obstacles: np.ndarray) -> np.ndarray:
    """Per-obstacle flags: does the closed segment ``p0 -> p1`` touch the box?"""
    obstacles = np.asarray(obstacles, dtype=float).reshape(-1, 5)
    if not len(obstacles):
        return np.zeros(0, dtype=bool)
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
    lo = np.column_stack([obstacles[:, 0], obstacles[:, 1], np.zeros(len(obstacles))])
    hi = np.column_stack([obstacles[:, 2], obstacles[:, 3], obstacles[:, 4]])
    d = p1 - p0
    t0 = np.zeros(len(obstacles))
    t1 = np.ones(len(obstacles))
    for ax in range(3):
        if abs(d[ax]) < 1e-15:
            outside = (p0[ax] < lo[:, ax]) | (p0[ax] > hi[:, ax])
            t1 = np.where(outside, -1.0, t1)
            continue
        a = (lo[:, ax] - p0[ax]) / d[ax]
        b = (hi[:, ax] - p0[ax]) / d[ax]
        t0 = np.maximum(t0, np.minimum(a, b))
        t1 = np.minimum(t1, np.maximum(a, b))
    return t0 <= t1


def los_state(tx_pos, rx_pos, obstacles) -> bool:
    """True (LoS) unless the segment between the two points crosses an obstacle."""
    return not bool(np.any(segment_hits_boxes(tx_pos, rx_pos, obstacles)))


def local_angle(node: Node, target: np.ndarray):
    """Direction of ``target`` in the node's array frame.

    The ULA axis is horizontal and perpendicular to the broadside azimuth;
    the returned angle has ``sin(theta)`` equal to the direction cosine
    along that axis.  A UPA stands vertically facing the broadside azimuth,
    with sub-arrays stacked horizontally and elements vertically.
    """
    v = np.asarray(target, float) - node.position
    v = v / np.linalg.norm(v)
    o = node.orientation
    normal = np.array([np.cos(o), np.sin(o), 0.0])
    axis = np.array([-np.sin(o), np.cos(o), 0.0])
    if node.geometry.kind is ArrayKind.ULA:
        return float(np.arcsin(np.clip(v @ axis, -1, 1)))
    elevation = float(np.arccos(np.clip(abs(v @ normal), 0, 1)))
    azimuth = float(np.arctan2(v @ axis, v[2]))
    return azimuth, elevation


def link_geometry(topo: Topology, ap: Node, mob: Node) -> LinkGeometry:
    return LinkGeometry(
        distance=float(np.linalg.norm(ap.position - mob.position)),
        los=los_state(ap.position, mob.position, topo.obstacles),
        ap_geom=ap.geometry,
        mob_geom=mob.geometry,
        los_aoa=local_angle(mob, ap.position),
        los_aod=local_angle(ap, mob.position),
        ap_id=ap.id,
        mobile_id=mob.id,
    )


def sample_channels(topo: Topology, num_nlos_paths: int, rng: np.random.Generator) -> dict:
    return {
        (a.id, m.id): sample_channel(link_geometry(topo, a, m), num_nlos_paths, rng)
        for m in topo.mobiles
        for a in topo.aps
    }


def protocol_network(topo: Topology, channels: dict) -> Network:
    return Network({a.id: a.geometry for a in topo.aps}, {m.id: m.geometry for m in topo.mobiles}, channels)


# --- data phase -------------------------------------------------------------

def schedule_fdm(served: dict, num_subbands: int) -> dict:
    """Sort mobiles by estimated AoD and deal sub-bands round robin.

    ``served`` maps mobile id -> estimated AoD (a scalar, or a tuple that
    sorts lexicographically).  Ties are broken by mobile id.
    """
    if num_subbands < 1:
        raise ValueError("need at least one sub-band")
    order = sorted(served, key=lambda m: (tuple(np.atleast_1d(served[m]).tolist()), str(m)))
    return {m: i % num_subbands for i, m in enumerate(order)}


def subband_frequencies(carrier_freq: float, bandwidth: float, num_subbands: int) -> np.ndarray:
    step = bandwidth / num_subbands
    return carrier_freq + (np.arange(num_subbands) - (num_subbands - 1) / 2) * step


def data_sinr(channels: dict, ap_geoms: dict, mob_geoms: dict, associations: dict,
              aoa_hat: dict, aod_hat: dict, fdm: dict, subband_freqs, data_power: float,
              noise: float, cap_db: float = 30.0) -> dict:
    """Per-mobile data SINR with co-sub-band interference from every AP.

    ``aoa_hat[m]`` and ``aod_hat[(ap, m)]`` are physical angles; beams are
    rebuilt from them at each sub-band's center frequency.  Associated
    mobiles without an FDM entry, and unassociated mobiles, get 0.
    """
    cap = 10 ** (cap_db / 10)
    out = {m: 0.0 for m in mob_geoms}
    active = [(m, a) for m, a in associations.items() if a is not None and m in fdm]
    for m, a in active:
        b = fdm[m]
        f_b = subband_freqs[b]
        mg = mob_geoms[m].at_frequency(f_b)
        w = array_response(mg, aoa_hat[m])

        def rx_power(ap, target):
            ch = channels.get((ap, m))
            if ch is None:
                return 0.0
            ag = ap_geoms[ap].at_frequency(f_b)
            f = array_response(ag, aod_hat[(ap, target)])
            return data_power * abs(np.vdot(w, channel_matrix(ch, ag, mg) @ f)) ** 2

        signal = rx_power(a, m)
        interference = sum(rx_power(a2, m2) for m2, a2 in active if m2 != m and fdm[m2] == b)
        out[m] = float(min(signal / (interference + noise), cap))
    return out


# --- frame-level simulation -------------------------------------------------

@dataclass
class ScenarioConfig:
    """Everything needed to simulate a training frame in a network.

    Powers are per tone during training and per sub-band during data.
    """

    topology: str = "triangle"
    topology_file: str | None = None
    num_aps: int = 3
    inter_ap_distance_m: float = 250.0
    num_mobiles: int = 10
    min_distance_m: float = 15.0
    ap_height_m: float = 10.0
    mobile_height_m: float = 1.5
    num_obstacles: int = 8000
    obstacle_size_m: float = 1.0
    obstacle_height_m: float = 2.0
    ap_array: str = "ULA"
    ap_subarrays: int = 2
    ap_elements_per_subarray: int = 16
    mobile_array: str = "ULA"
    mobile_subarrays: int = 2
    mobile_elements_per_subarray: int = 16
    carrier_freq_hz: float = 28e9
    ap_power_dbm: float = 20.0
    mobile_power_dbm: float = 15.0
    data_power_dbm: float = 20.0
    training_bandwidth_hz: float = 250e3
    noise_figure_db: float = 7.0
    num_nlos_paths: int = 3
    data_bandwidth_hz: float = 100e6
    num_subbands: int = 10
    sinr_cap_db: float = 30.0
    codebook: str = "adaptive"
    fft_size: int = 64
    max_served_per_ap: int | None = None

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in fields(cls)}

    def with_(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)

    @property
    def ap_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.ap_array, self.ap_subarrays, self.ap_elements_per_subarray,
                             carrier_freq=self.carrier_freq_hz)

    @property
    def mobile_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.mobile_array, self.mobile_subarrays, self.mobile_elements_per_subarray,
                             carrier_freq=self.carrier_freq_hz)

    @property
    def training_noise_w(self) -> float:
        return thermal_noise_w(self.training_bandwidth_hz, self.noise_figure_db)

    @property
    def data_noise_w(self) -> float:
        return thermal_noise_w(self.data_bandwidth_hz / self.num_subbands, self.noise_figure_db)

    def topology_params(self) -> TopologyParams:
        return TopologyParams(
            num_aps=self.num_aps, inter_ap_distance_m=self.inter_ap_distance_m,
            num_mobiles=self.num_mobiles, min_distance_m=self.min_distance_m,
            ap_height_m=self.ap_height_m, mobile_height_m=self.mobile_height_m,
            num_obstacles=self.num_obstacles, obstacle_size_m=self.obstacle_size_m,
            obstacle_height_m=self.obstacle_height_m, ap_geometry=self.ap_geometry,
            mobile_geometry=self.mobile_geometry, path=self.topology_file,
        )


@dataclass
class Drop:
    """One random realisation: topology, channels and protocol view."""

    topology: Topology
    channels: dict
    network: Network


def draw_drop(cfg: ScenarioConfig, rng: np.random.Generator) -> Drop:
    topo = generate_topology(cfg.topology, cfg.topology_params(), rng)
    channels = sample_channels(topo, cfg.num_nlos_paths, rng)
    return Drop(topo, channels, protocol_network(topo, channels))


def training_config(cfg: ScenarioConfig, net: Network, P: int, Q: int, I: int = 1,
                    rng: np.random.Generator | None = None, codebook: str | None = None,
                    ap_power_dbm: float | None = None, fft_size: int | None = None) -> TrainingConfig:
    kind = codebook or cfg.codebook
    ap_cbs = {a: build_codebook(kind, g, Q, rng) for a, g in net.ap_geoms.items()}
    mob_cbs = {m: build_codebook(kind, g, P, rng) for m, g in net.mobile_geoms.items()}
    return TrainingConfig(
        P=P, Q=Q, I=I,
        ap_power=float(dbm2watt(cfg.ap_power_dbm if ap_power_dbm is None else ap_power_dbm)),
        mobile_power=float(dbm2watt(cfg.mobile_power_dbm)),
        noise=cfg.training_noise_w,
        ap_codebooks=ap_cbs,
        mobile_codebooks=mob_cbs,
        fft_size=cfg.fft_size if fft_size is None else fft_size,
        max_served_per_ap=cfg.max_served_per_ap,
    )


def frame_sinrs(cfg: ScenarioConfig, drop: Drop, tcfg: TrainingConfig, estimator: str,
                rng: np.random.Generator) -> np.ndarray:
    """Run initial access plus FDM data transmission; SINR per mobile (0 if unserved)."""
    net = drop.network
    outcome = run_initial_access(net, tcfg, estimator, rng)
    aoa = {m: net.mobile_geoms[m].phases_to_angle(outcome.aoa[m]) for m in net.mobile_ids}
    aod = {(a, m): net.ap_geoms[a].phases_to_angle(outcome.aod[a][m])
           for a in net.ap_ids for m in net.mobile_ids}
    fdm = {}
    for a in net.ap_ids:
        served = {m: outcome.aod[a][m][1] if net.ap_geoms[a].kind is ArrayKind.ULA else tuple(outcome.aod[a][m])
                  for m, s in outcome.associations.items() if s == a}
        fdm.update(schedule_fdm(served, cfg.num_subbands))
    freqs = subband_frequencies(cfg.carrier_freq_hz, cfg.data_bandwidth_hz, cfg.num_subbands)
    sinr = data_sinr(drop.channels, net.ap_geoms, net.mobile_geoms, outcome.associations, aoa, aod, fdm,
                     freqs, float(dbm2watt(cfg.data_power_dbm)), cfg.data_noise_w, cfg.sinr_cap_db)
    return np.array([sinr[m] for m in net.mobile_ids])
