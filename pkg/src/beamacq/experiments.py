"""Study drivers, config ingestion and CSV output for the command line.

Every study is a pure function of an :class:`ExperimentConfig` (which holds
the master seed) and returns ``{file name: rows}``.  Trial ``t`` of study
``name`` draws from ``SeedSequence([seed, crc32(name), t])``, so results
do not depend on how many worker threads run the trials.
"""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .arrays import ArrayKind, dft_grid_phases, response_from_phases, wrap_phase
from .channel import Channel, PathComponent, channel_matrix
from .codebooks import CodebookKind, build_codebook
from .estimators import ESTIMATORS, misalignment_probability
from .overhead import optimal_bandwidth, optimize_from_cdfs, SinrCdf, sinr_samples, training_ladder
from .scenario import ScenarioConfig, draw_drop, training_config
from .signaling import Network, TrainingConfig, run_initial_access

STUDIES = ("compare-codebooks", "compare-estimators", "fft-size", "optimize-overhead", "link-analysis")

# floor for reporting SNRs in dB, so a zero SNR never produces -inf
SNR_FLOOR_DB = -300.0


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key

    def record(self) -> str:
        return json.dumps({"error": "config", "key": self.key, "message": str(self)}, sort_keys=True)


@dataclass
class StudyConfig:
    """Study-level knobs.  ``beams`` is the per-side sweep size ``P = Q``."""

    trials: int = 20
    seed: int = 0
    estimator: str = "ml"
    estimators: list = field(default_factory=lambda: ["mp", "ml", "lml"])
    codebooks: list = field(default_factory=lambda: [k.value for k in CodebookKind])
    beams: list = field(default_factory=lambda: [4, 8, 16, 32])
    repetitions: int = 1
    fft_sizes: list = field(default_factory=lambda: [32, 64, 128, 256])
    ap_powers_dbm: list = field(default_factory=list)
    link_snrs_db: list = field(default_factory=lambda: [12.0, 14.0, 16.0, 18.0, 20.0, 22.0])
    link_path_gains_db: list = field(default_factory=lambda: [0.0, -3.0, -5.0])
    link_beams: int = 32
    overhead_estimator: str = "lml"
    ladder_beams: list = field(default_factory=lambda: list(range(2, 33, 2)))
    mobile_counts: list = field(default_factory=lambda: [10, 20, 30])
    blocking_rates_per_s: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 5.0, 10.0, 20.0])
    t_max_s: list = field(default_factory=lambda: [0.02, 0.1])
    t_switch_s: float = 4e-6
    guard_s: float = 0.0


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    study: StudyConfig = field(default_factory=StudyConfig)


# --- config parsing and validation -----------------------------------------

_OPTIONAL = {"topology_file": str, "max_served_per_ap": int}


def _check_type(section: str, key: str, value, default):
    name = f"{section}.{key}"
    want = _OPTIONAL.get(key) if default is None else type(default)
    if want is bool:
        ok = isinstance(value, bool)
    elif want is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif want is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif want is list:
        ok = isinstance(value, list)
    else:
        ok = isinstance(value, want)
    if not ok:
        raise ConfigError(f"{name} must be of type {want.__name__}, got {type(value).__name__}", name)
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"{name} must be finite", name)
    return value


def _section(cls, section: str, raw: dict):
    if not isinstance(raw, dict):
        raise ConfigError(f"[{section}] must be a table", section)
    defaults = cls()
    known = {f.name for f in fields(cls)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown key {section}.{key}", f"{section}.{key}")
    values = {k: _check_type(section, k, v, getattr(defaults, k)) for k, v in raw.items()}
    return cls(**values)


def _require(cond: bool, key: str, message: str):
    if not cond:
        raise ConfigError(f"{key}: {message}", key)


def _numbers(values, key: str, kind=float, positive=True):
    _require(len(values) > 0, key, "must not be empty")
    for v in values:
        ok = isinstance(v, (int, float)) and not isinstance(v, bool)
        if kind is int:
            ok = isinstance(v, int) and not isinstance(v, bool)
        _require(ok and math.isfinite(v), key, f"entries must be {kind.__name__}s")
        if positive:
            _require(v > 0, key, "entries must be positive")


def _pow2(c: int) -> bool:
    return c >= 1 and not c & (c - 1)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every field before any simulation starts."""
    s, st = cfg.scenario, cfg.study
    _require(s.topology in ("triangle", "hex", "file"), "scenario.topology", "must be triangle, hex or file")
    _require(s.topology != "file" or bool(s.topology_file), "scenario.topology_file", "required for file topologies")
    for key in ("ap_array", "mobile_array"):
        _require(getattr(s, key) in (k.value for k in ArrayKind), f"scenario.{key}", "must be ULA or UPA")
    for key in ("num_aps", "num_mobiles", "ap_subarrays", "ap_elements_per_subarray", "mobile_subarrays",
                "mobile_elements_per_subarray", "num_nlos_paths", "num_subbands"):
        _require(getattr(s, key) >= 1, f"scenario.{key}", "must be >= 1")
    _require(s.num_obstacles >= 0, "scenario.num_obstacles", "must be >= 0")
    for key in ("inter_ap_distance_m", "carrier_freq_hz", "training_bandwidth_hz", "data_bandwidth_hz",
                "obstacle_size_m", "obstacle_height_m", "ap_height_m", "mobile_height_m"):
        _require(getattr(s, key) > 0, f"scenario.{key}", "must be positive")
    _require(s.min_distance_m >= 0, "scenario.min_distance_m", "must be >= 0")
    _require(s.codebook in (k.value for k in CodebookKind), "scenario.codebook", "unknown codebook")
    _require(s.max_served_per_ap is None or s.max_served_per_ap >= 1, "scenario.max_served_per_ap", "must be >= 1")
    try:
        geoms = (s.ap_geometry, s.mobile_geometry)
    except ValueError as exc:
        raise ConfigError(str(exc), "scenario") from None

    def fft_ok(c):
        return _pow2(c) and all(
            c >= (g.size if g.kind is ArrayKind.ULA else max(g.num_subarrays, g.elements_per_subarray))
            for g in geoms)

    _require(fft_ok(s.fft_size), "scenario.fft_size", "must be a power of two covering both arrays")

    _require(st.trials >= 1, "study.trials", "must be >= 1")
    _require(0 <= st.seed < 2**64, "study.seed", "must fit in an unsigned 64-bit integer")
    _require(st.estimator in ESTIMATORS, "study.estimator", f"must be one of {ESTIMATORS}")
    _require(st.overhead_estimator in ESTIMATORS, "study.overhead_estimator", f"must be one of {ESTIMATORS}")
    _require(len(st.estimators) > 0 and all(e in ESTIMATORS for e in st.estimators), "study.estimators",
             f"entries must be in {ESTIMATORS}")
    _require(len(st.codebooks) > 0 and all(c in [k.value for k in CodebookKind] for c in st.codebooks),
             "study.codebooks", "unknown codebook")
    for key in ("beams", "ladder_beams", "fft_sizes", "mobile_counts"):
        _numbers(getattr(st, key), f"study.{key}", int)
    _require(all(fft_ok(c) for c in st.fft_sizes), "study.fft_sizes", "must be powers of two covering both arrays")
    _require(st.repetitions >= 1, "study.repetitions", "must be >= 1")
    _require(st.link_beams >= 1, "study.link_beams", "must be >= 1")
    if st.ap_powers_dbm:
        _numbers(st.ap_powers_dbm, "study.ap_powers_dbm", positive=False)
    _numbers(st.link_snrs_db, "study.link_snrs_db", positive=False)
    _numbers(st.link_path_gains_db, "study.link_path_gains_db", positive=False)
    _require(all(v <= 0 for v in st.link_path_gains_db), "study.link_path_gains_db", "entries must be <= 0 dB")
    _require(len(st.link_path_gains_db) <= 4, "study.link_path_gains_db", "at most 4 paths")
    _numbers(st.blocking_rates_per_s, "study.blocking_rates_per_s")
    _numbers(st.t_max_s, "study.t_max_s")
    _require(st.guard_s >= 0, "study.guard_s", "must be >= 0")
    _require(st.t_switch_s > st.guard_s, "study.t_switch_s", "must exceed guard_s")
    return cfg


def parse_config(raw: dict) -> ExperimentConfig:
    for key in raw:
        if key not in ("scenario", "study"):
            raise ConfigError(f"unknown top-level key {key!r}", key)
    cfg = ExperimentConfig(_section(ScenarioConfig, "scenario", raw.get("scenario", {})),
                           _section(StudyConfig, "study", raw.get("study", {})))
    return validate(cfg)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None) from None
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", None) from None
    return parse_config(raw)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot encode {type(v).__name__}")


def config_lines(cfg: ExperimentConfig) -> list[str]:
    """The resolved config as TOML lines; parsing them back reproduces the run."""
    out = []
    for name, part in (("scenario", cfg.scenario), ("study", cfg.study)):
        out.append(f"[{name}]")
        for k, v in asdict(part).items():
            if v is not None:
                out.append(f"{k} = {_toml_value(v)}")
    return out


def config_from_csv(text: str) -> ExperimentConfig:
    lines = [ln[len("# config: "):] for ln in text.splitlines() if ln.startswith("# config: ")]
    return parse_config(tomllib.loads("\n".join(lines)))


# --- output -----------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ValueError("refusing to write a non-finite value")
        return repr(v)
    return str(v)


def render_csv(cfg: ExperimentConfig, rows: list[dict]) -> str:
    buf = io.StringIO()
    for line in config_lines(cfg):
        buf.write(f"# config: {line}\n")
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for r in rows:
            w.writerow([_cell(v) for v in r.values()])
    return buf.getvalue()


def write_outputs(cfg: ExperimentConfig, tables: dict, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, rows in tables.items():
        p = out / f"{name}.csv"
        p.write_text(render_csv(cfg, rows))
        paths.append(p)
    return paths


# --- link-level helpers -----------------------------------------------------

def trial_seed(seed: int, name: str, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, zlib.crc32(name.encode()), trial])


def _snr_db(x: float) -> float:
    return max(10 * math.log10(x), SNR_FLOOR_DB) if x > 0 else SNR_FLOOR_DB


def link_snrs(net: Network, tcfg: TrainingConfig, estimator: str, rng: np.random.Generator) -> np.ndarray:
    """Post-training SNR per mobile with all antennas steered at the estimates.

    The AoA comes from the downlink estimator; the serving AP and its AoD
    come from the best uplink score.  Joint downlink ML cannot tell APs
    apart when an on-grid direction is seen through a single sweep beam,
    so its AP and AoD outputs are not used here.
    """
    out = run_initial_access(net, tcfg, estimator, rng)
    snrs = []
    for m in net.mobile_ids:
        a = max(net.ap_ids, key=lambda x: out.uplink_score[(x, m)])
        u = response_from_phases(net.mobile_geoms[m], *out.aoa[m])
        f = response_from_phases(net.ap_geoms[a], *out.aod[a][m])
        snrs.append(tcfg.power_of(a) * abs(np.vdot(u, net.H(a, m) @ f)) ** 2 / tcfg.noise)
    return np.array(snrs)


def optimal_dft_snrs(net: Network, tcfg: TrainingConfig) -> np.ndarray:
    """Best SNR over all APs and all pairs of critically sampled DFT beams."""
    out = []
    for m in net.mobile_ids:
        U = np.column_stack([response_from_phases(net.mobile_geoms[m], *p)
                             for p in dft_grid_phases(net.mobile_geoms[m])])
        best = 0.0
        for a in net.ap_ids:
            A = np.column_stack([response_from_phases(net.ap_geoms[a], *p)
                                 for p in dft_grid_phases(net.ap_geoms[a])])
            best = max(best, tcfg.power_of(a) * float(np.max(np.abs(U.conj().T @ net.H(a, m) @ A) ** 2)))
        out.append(best / tcfg.noise)
    return np.array(out)


def _trials(fn, n: int, threads: int) -> list:
    if threads <= 1:
        return [fn(t) for t in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def _flatten(parts) -> list:
    return [r for p in parts for r in p]


def _drop_and_streams(cfg: ExperimentConfig, name: str, t: int):
    drop_ss, noise_ss, cb_ss = trial_seed(cfg.study.seed, name, t).spawn(3)
    drop = draw_drop(cfg.scenario, np.random.default_rng(drop_ss))
    return drop, noise_ss, cb_ss


def _point_rngs(noise_ss, cb_ss, *key):
    """Fresh generators per study point: same noise draws everywhere (common random numbers)."""
    cb = np.random.SeedSequence([*cb_ss.generate_state(4).tolist(), *(zlib.crc32(str(k).encode()) for k in key)])
    return np.random.default_rng(noise_ss), np.random.default_rng(cb)


# --- studies ----------------------------------------------------------------

def compare_codebooks(cfg: ExperimentConfig, threads: int = 1) -> dict:
    st, sc = cfg.study, cfg.scenario
    name = "compare-codebooks"

    def trial(t):
        drop, noise_ss, cb_ss = _drop_and_streams(cfg, name, t)
        rows = []
        for cb in st.codebooks:
            for n in st.beams:
                noise_rng, cb_rng = _point_rngs(noise_ss, cb_ss, cb, n)
                tcfg = training_config(sc, drop.network, n, n, st.repetitions, cb_rng, codebook=cb)
                for m, x in zip(drop.network.mobile_ids, link_snrs(drop.network, tcfg, st.estimator, noise_rng)):
                    rows.append({"codebook": cb, "beams": n, "pilots": st.repetitions * n * n,
                                 "trial": t, "mobile": m, "snr_db": _snr_db(x)})
        return rows

    return {name: _flatten(_trials(trial, st.trials, threads))}


def compare_estimators(cfg: ExperimentConfig, threads: int = 1) -> dict:
    st, sc = cfg.study, cfg.scenario
    name = "compare-estimators"
    powers = st.ap_powers_dbm or [sc.ap_power_dbm]

    def trial(t):
        drop, noise_ss, cb_ss = _drop_and_streams(cfg, name, t)
        rows = []
        for pw in powers:
            for n in st.beams:
                bound = None
                for est in st.estimators:
                    noise_rng, cb_rng = _point_rngs(noise_ss, cb_ss, pw, n)
                    tcfg = training_config(sc, drop.network, n, n, st.repetitions, cb_rng, ap_power_dbm=pw)
                    snr = link_snrs(drop.network, tcfg, est, noise_rng)
                    if bound is None:
                        bound = optimal_dft_snrs(drop.network, tcfg)
                    for m, x in zip(drop.network.mobile_ids, snr):
                        rows.append({"estimator": est, "ap_power_dbm": float(pw), "beams": n,
                                     "pilots": st.repetitions * n * n, "trial": t, "mobile": m,
                                     "snr_db": _snr_db(x)})
                for m, x in zip(drop.network.mobile_ids, bound):
                    rows.append({"estimator": "optimal-dft", "ap_power_dbm": float(pw), "beams": n,
                                 "pilots": st.repetitions * n * n, "trial": t, "mobile": m, "snr_db": _snr_db(x)})
        return rows

    return {name: _flatten(_trials(trial, st.trials, threads))}


def fft_size_study(cfg: ExperimentConfig, threads: int = 1) -> dict:
    st, sc = cfg.study, cfg.scenario
    name = "fft-size"

    def trial(t):
        drop, noise_ss, cb_ss = _drop_and_streams(cfg, name, t)
        rows = []
        for n in st.beams:
            for est in st.estimators:
                for c in st.fft_sizes:
                    noise_rng, cb_rng = _point_rngs(noise_ss, cb_ss, n)
                    tcfg = training_config(sc, drop.network, n, n, st.repetitions, cb_rng, fft_size=c)
                    snr = link_snrs(drop.network, tcfg, est, noise_rng)
                    for m, x in zip(drop.network.mobile_ids, snr):
                        rows.append({"fft_size": c, "estimator": est, "beams": n, "trial": t,
                                     "mobile": m, "snr_db": _snr_db(x)})
        return rows

    return {name: _flatten(_trials(trial, st.trials, threads))}


# three-path link: path s sits on AoA index AOA_SLOTS[s] and AoD index
# AOD_SLOTS[s] of a 16-point phase grid, so the paths are mutually
# orthogonal for 16- and 32-element apertures and their main lobes are
# well separated
AOA_SLOTS = (0, 3, 6, 11)
AOD_SLOTS = (2, 9, 13, 5)


def multipath_link(ap_geom, mob_geom, snrs_db, rng: np.random.Generator | None = None):
    """Single AP-mobile network whose path ``s`` has aligned SNR ``snrs_db[s]``.

    Powers are normalised to ``rho = sigma^2 = 1``.  Returns the network
    and the path phase pairs ``(aoa, aod)`` for alignment checks.
    """
    if ap_geom.kind is not ArrayKind.ULA or mob_geom.kind is not ArrayKind.ULA:
        raise ValueError("multipath_link supports ULAs only")
    S = len(snrs_db)
    nu = math.sqrt(ap_geom.size * mob_geom.size / S)
    phases = rng.uniform(0, 2 * np.pi, S) if rng is not None else np.zeros(S)
    paths, pp = [], []
    for s in range(S):
        t_aoa, t_aod = 2 * np.pi * AOA_SLOTS[s] / 16, 2 * np.pi * AOD_SLOTS[s] / 16
        aoa = mob_geom.phases_to_angle((0.0, t_aoa))
        aod = ap_geom.phases_to_angle((0.0, t_aod))
        amp = 10 ** (snrs_db[s] / 20) / nu
        paths.append(PathComponent(amp * np.exp(1j * phases[s]), aoa, aod))
        pp.append((mob_geom.phases(aoa)[1], ap_geom.phases(aod)[1]))
    ch = Channel.for_arrays(paths, ap_geom, mob_geom, "A0", "M0")
    return Network({"A0": ap_geom}, {"M0": mob_geom}, {("A0", "M0"): ch}), np.array(pp)


def aligned_path(aoa_hat: float, aod_hat: float, path_phases: np.ndarray, width: float) -> int:
    """Index of the path whose lobe contains the estimate, or -1."""
    for s, (ta, td) in enumerate(path_phases):
        if abs(wrap_phase(aoa_hat - ta)) <= width and abs(wrap_phase(aod_hat - td)) <= width:
            return s
    return -1


def link_trial(ap_geom, mob_geom, snrs_db, codebook: str, P: int, repetitions: int, estimator: str,
               fft_size: int, rng: np.random.Generator, Q: int | None = None):
    """One training round on :func:`multipath_link`; returns (post-training SNR, aligned path).

    The mobile sweeps ``P`` beams and the AP ``Q`` (default ``P``).
    """
    Q = P if Q is None else Q
    net, pp = multipath_link(ap_geom, mob_geom, snrs_db, rng)
    tcfg = TrainingConfig(P, Q, repetitions, 1.0, 1.0, 1.0,
                          {"A0": build_codebook(codebook, ap_geom, Q, rng)},
                          {"M0": build_codebook(codebook, mob_geom, P, rng)}, fft_size=fft_size,
                          ack_threshold=0.0)
    out = run_initial_access(net, tcfg, estimator, rng)
    if estimator == "ml":
        aod = out.estimates["M0"].aod_phase
    else:
        aod = out.aod["A0"]["M0"]
    aoa = out.aoa["M0"]
    u = response_from_phases(mob_geom, *aoa)
    f = response_from_phases(ap_geom, *aod)
    snr = abs(np.vdot(u, net.H("A0", "M0") @ f)) ** 2
    width = np.pi / max(ap_geom.size, mob_geom.size) * 2
    return snr, aligned_path(aoa[1], aod[1], pp, width)


def link_analysis(cfg: ExperimentConfig, threads: int = 1) -> dict:
    st, sc = cfg.study, cfg.scenario
    name = "link-analysis"
    ag, mg = sc.ap_geometry, sc.mobile_geometry
    if ag.kind is not ArrayKind.ULA or mg.kind is not ArrayKind.ULA:
        raise ConfigError("link-analysis needs ULA arrays", "scenario.ap_array")
    omega = st.repetitions * st.link_beams ** 2
    J = ag.num_subarrays

    def trial(t):
        rng = np.random.default_rng(trial_seed(st.seed, name, t))
        rows = []
        for g in st.link_snrs_db:
            snrs_db = [g + d for d in st.link_path_gains_db]
            snr, s = link_trial(ag, mg, snrs_db, sc.codebook, st.link_beams, st.repetitions, st.estimator,
                                sc.fft_size, rng)
            rows.append({"training_snr_db": float(g), "trial": t, "snr_db": _snr_db(snr), "aligned_path": s + 1})
        return rows

    samples = _flatten(_trials(trial, st.trials, threads))
    summary = []
    for g in st.link_snrs_db:
        hits = np.array([r["aligned_path"] for r in samples if r["training_snr_db"] == float(g)])
        gmax = 10 ** (g / 10)
        # path 1 gets whatever probability the weaker paths leave over
        approx = [misalignment_probability(gmax, gmax * 10 ** (d / 10), omega, ag.elements_per_subarray,
                                           mg.elements_per_subarray, J) for d in st.link_path_gains_db[1:]]
        approx = [max(0.0, 1.0 - sum(approx))] + approx
        for s, d in enumerate(st.link_path_gains_db):
            summary.append({"training_snr_db": float(g), "path": s + 1, "relative_gain_db": float(d),
                            "p_empirical": float(np.mean(hits == s + 1)), "p_approx": approx[s]})
    return {name: samples, f"{name}-summary": summary}


def optimize_overhead_study(cfg: ExperimentConfig, threads: int = 1) -> dict:
    """Heat grid over mobile count x blocking rate, one ladder per cell and ``T_max``."""
    st, sc = cfg.study, cfg.scenario
    name = "optimize-overhead"
    B_tr = optimal_bandwidth(st.t_switch_s, st.guard_s)
    ladder = training_ladder(st.ladder_beams, st.guard_s + 1 / B_tr, sc.ap_geometry.size,
                             sc.mobile_geometry.size, max(st.t_max_s))
    if not ladder:
        raise ConfigError("infeasible: no ladder point fits in the largest t_max_s", "study.t_max_s")
    table, summary = [], []
    for k in st.mobile_counts:
        scen = sc.with_(num_mobiles=k)
        base = [st.seed, zlib.crc32(name.encode()), k]
        cdfs = []
        for pt in ladder:
            parts = _trials(lambda t: sinr_samples(scen, pt.n, st.overhead_estimator, t, base), st.trials, threads)
            cdfs.append(SinrCdf(np.concatenate(parts)))
        for delta in st.blocking_rates_per_s:
            for t_max in st.t_max_s:
                if ladder[0].T_IA > t_max:
                    raise ConfigError(f"infeasible: shortest training exceeds t_max_s = {t_max}", "study.t_max_s")
                res = optimize_from_cdfs(ladder, cdfs, delta, t_max, st.t_switch_s, st.guard_s)
                for i, (pt, fp, val) in enumerate(res.rows):
                    table.append({"num_mobiles": k, "blocking_rate_per_s": float(delta), "t_max_s": float(t_max),
                                  "beams": pt.n, "T_IA_s": fp.T_IA, "T_frame_s": fp.T_frame, "B_tr_Hz": fp.B_tr,
                                  "overhead_ratio": fp.overhead_ratio, "objective": val,
                                  "optimal": "*" if i == res.best else ""})
                pt, fp, val = res.optimum
                summary.append({"num_mobiles": k, "blocking_rate_per_s": float(delta), "t_max_s": float(t_max),
                                "beams": pt.n, "T_IA_s": fp.T_IA, "T_frame_s": fp.T_frame, "B_tr_Hz": fp.B_tr,
                                "overhead_ratio": fp.overhead_ratio, "objective": val})
    return {name: table, f"{name}-summary": summary}


RUNNERS = {
    "compare-codebooks": compare_codebooks,
    "compare-estimators": compare_estimators,
    "fft-size": fft_size_study,
    "optimize-overhead": optimize_overhead_study,
    "link-analysis": link_analysis,
}


def run_study(name: str, cfg: ExperimentConfig, threads: int = 1) -> dict:
    if name not in RUNNERS:
        raise ConfigError(f"unknown study {name!r}", "study")
    return RUNNERS[name](cfg, threads)
