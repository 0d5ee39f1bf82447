"""Blockage-aware frame design: training time, frame length and pilot bandwidth.

A path lives for an exponential time with rate ``delta``.  Data flows from
the end of initial access until the path dies or the frame ends, so the
expected useful fraction of a frame is ``E[T_data] / T_frame``.  The data
SINR distribution depends on the training budget only, which lets the SINR
CDF for each ladder point be estimated once and reused across blocking
rates and frame-length limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .scenario import ScenarioConfig, draw_drop, frame_sinrs, training_config
from .signaling import HANDSHAKE_SLOTS

_SMALL = 1e-8


@dataclass
class FrameParams:
    """Frame timing.  All times in seconds, ``B_tr`` in Hz, ``delta`` in 1/s."""

    T_frame: float
    T_IA: float
    B_tr: float
    delta: float
    tau: float = 0.0
    T_switch: float = 4e-6
    T_max: float = 0.1

    @property
    def T_slot(self) -> float:
        return self.tau + 1.0 / self.B_tr

    @property
    def overhead_ratio(self) -> float:
        return self.T_IA / self.T_frame

    def validate(self, rtol: float = 1e-12):
        if self.T_slot < self.T_switch * (1 - rtol):
            raise ValueError(f"slot {self.T_slot:g} s shorter than switching time {self.T_switch:g} s")
        if not self.T_IA <= self.T_frame * (1 + rtol):
            raise ValueError("T_IA exceeds T_frame")
        if not self.T_frame <= self.T_max * (1 + rtol):
            raise ValueError("T_frame exceeds T_max")
        if self.delta <= 0:
            raise ValueError("blockage rate must be positive")


@dataclass
class SinrCdf:
    """Empirical distribution of linear data SINRs."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ValueError("SINR samples must be finite and nonnegative")
        self.samples = s

    @property
    def count(self) -> int:
        return self.samples.size

    def __call__(self, x) -> np.ndarray:
        return np.searchsorted(self.samples, x, side="right") / max(self.count, 1)

    def mean_log_rate(self) -> float:
        """``integral log(1 + x) dF(x)`` in nats/s/Hz."""
        if not self.count:
            raise ValueError("empty SINR CDF")
        return float(np.mean(np.log1p(self.samples)))


def expected_data_time(delta: float, T_IA: float, T_frame: float) -> float:
    """``E[max(min(T_path, T_frame) - T_IA, 0)]`` with ``T_path ~ Exp(delta)``."""
    if T_IA < 0 or T_IA > T_frame:
        raise ValueError(f"need 0 <= T_IA <= T_frame, got {T_IA}, {T_frame}")
    if delta <= 0:
        raise ValueError("blockage rate must be positive")
    if delta * T_frame < _SMALL:
        # second-order series of the closed form
        return (T_frame - T_IA) - delta * (T_frame**2 - T_IA**2) / 2
    return float((np.exp(-delta * T_IA) - np.exp(-delta * T_frame)) / delta)


def overhead_factor(delta: float, T_IA: float, T_frame: float) -> float:
    return expected_data_time(delta, T_IA, T_frame) / T_frame


def rate_objective(params: FrameParams, cdf: SinrCdf) -> float:
    return overhead_factor(params.delta, params.T_IA, params.T_frame) * cdf.mean_log_rate()


def optimal_frame_length(delta: float, T_IA: float, T_max: float) -> float:
    """Maximiser of ``E[T_data] / T_frame`` over ``[T_IA, T_max]``.

    The derivative has the sign of ``g(T) = e^{-dT}(1 + dT) - e^{-d T_IA}``,
    which decreases in ``T``, so the maximiser is the root of ``g`` clipped
    to the interval.
    """
    if T_IA > T_max:
        raise ValueError("T_IA exceeds T_max")
    target = np.exp(-delta * T_IA)

    def g(T):
        x = delta * T
        return np.exp(-x) * (1 + x) - target

    if T_IA == 0 or g(T_max) >= 0:
        return float(T_max)
    return float(brentq(g, T_IA, T_max, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def optimal_bandwidth(T_switch: float, tau: float = 0.0) -> float:
    if T_switch <= tau:
        raise ValueError("switching time must exceed the guard interval")
    return 1.0 / (T_switch - tau)


def training_slots(P: int, Q: int, I: int = 1) -> int:
    """Downlink sweep, uplink sweep and the two handshake slots."""
    return I * P * Q + I * Q + HANDSHAKE_SLOTS


@dataclass
class LadderPoint:
    """One feasible training plan: adaptive sweeping with ``P = Q = n``."""

    n: int
    T_IA: float
    trained_ap: int
    trained_mobile: int

    @property
    def pilots(self) -> int:
        return self.n * self.n


def training_ladder(sizes, T_slot: float, ap_antennas: int, mobile_antennas: int,
                    T_max: float | None = None) -> list[LadderPoint]:
    """Feasible ladder points, increasing in ``T_IA``.

    A point is kept when its pilot count covers the trained antenna pairs
    (``n * n >= n_bar * m_bar``) and, if ``T_max`` is given, its training
    fits in a frame.
    """
    out = []
    for n in sorted(set(int(s) for s in sizes)):
        if n < 1:
            raise ValueError("ladder sizes must be positive")
        nb, mb = min(n, ap_antennas), min(n, mobile_antennas)
        T_IA = training_slots(n, n) * T_slot
        if n * n < nb * mb or (T_max is not None and T_IA > T_max):
            continue
        out.append(LadderPoint(n, T_IA, nb, mb))
    return out


def _trial_rngs(seed, trial: int):
    ss = np.random.SeedSequence([*np.atleast_1d(seed).tolist(), trial])
    drop_ss, train_ss = ss.spawn(2)
    return np.random.default_rng(drop_ss), np.random.default_rng(train_ss)


def sinr_samples(cfg: ScenarioConfig, n: int, estimator: str, trial: int, seed) -> np.ndarray:
    """Data SINRs for one trial with an ``n``-beam adaptive sweep.

    The drop depends only on ``(seed, trial)``, so every ladder point sees
    the same networks.  ``seed`` is an int or a sequence of ints.
    """
    drop_rng, train_rng = _trial_rngs(seed, trial)
    drop = draw_drop(cfg, drop_rng)
    tcfg = training_config(cfg, drop.network, n, n, 1, train_rng)
    return frame_sinrs(cfg, drop, tcfg, estimator, train_rng)


def ladder_size_for(T_IA: float, B_tr: float, tau: float = 0.0) -> int:
    """Largest ``n`` whose ``n x n`` sweep fits into ``T_IA``."""
    slots = int(np.floor(T_IA / (tau + 1.0 / B_tr) + 1e-9))
    n = 0
    while training_slots(n + 1, n + 1) <= slots:
        n += 1
    if n < 1:
        raise ValueError(f"T_IA = {T_IA:g} s is shorter than a one-beam sweep")
    return n


def estimate_sinr_cdf(cfg: ScenarioConfig, T_IA: float, B_tr: float, estimator: str, n_trials: int,
                      seed, tau: float = 0.0, map_fn=map) -> SinrCdf:
    """Monte Carlo SINR CDF for the sweep that fits in ``T_IA``.

    Unassociated mobiles contribute zeros.  ``map_fn`` can be a pool's
    ordered ``map``; the result does not depend on it.
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")
    n = ladder_size_for(T_IA, B_tr, tau)
    parts = list(map_fn(lambda t: sinr_samples(cfg, n, estimator, t, seed), range(n_trials)))
    return SinrCdf(np.concatenate(parts))


@dataclass
class OverheadResult:
    rows: list = field(default_factory=list)  # (LadderPoint, FrameParams, objective)
    best: int = -1

    @property
    def optimum(self):
        return self.rows[self.best]


def optimize_from_cdfs(ladder: list[LadderPoint], cdfs: list[SinrCdf], delta: float, T_max: float,
                       T_switch: float = 4e-6, tau: float = 0.0) -> OverheadResult:
    """Exhaustive search over the ladder; frame length solved per point."""
    B_tr = optimal_bandwidth(T_switch, tau)
    res = OverheadResult()
    best_val = -np.inf
    for i, (pt, cdf) in enumerate(zip(ladder, cdfs)):
        if pt.T_IA > T_max:
            continue
        T_f = optimal_frame_length(delta, pt.T_IA, T_max)
        fp = FrameParams(T_f, pt.T_IA, B_tr, delta, tau, T_switch, T_max)
        val = rate_objective(fp, cdf)
        res.rows.append((pt, fp, val))
        if val > best_val:
            best_val, res.best = val, len(res.rows) - 1
    if not res.rows:
        raise ValueError("infeasible: the shortest training exceeds T_max")
    return res


def optimize_overhead(cfg: ScenarioConfig, delta: float, T_max: float, sizes, n_trials: int, seed,
                      estimator: str = "lml", T_switch: float = 4e-6, tau: float = 0.0,
                      map_fn=map) -> OverheadResult:
    B_tr = optimal_bandwidth(T_switch, tau)
    g = cfg.ap_geometry, cfg.mobile_geometry
    ladder = training_ladder(sizes, tau + 1 / B_tr, g[0].size, g[1].size, T_max)
    if not ladder:
        raise ValueError("infeasible: no ladder point fits in T_max")
    cdfs = [estimate_sinr_cdf(cfg, p.T_IA, B_tr, estimator, n_trials, seed, tau, map_fn) for p in ladder]
    return optimize_from_cdfs(ladder, cdfs, delta, T_max, T_switch, tau)


def ladder_table(res: OverheadResult) -> list[dict]:
    """Rows for CSV output, the optimum flagged with ``optimal = '*'``."""
    out = []
    for i, (pt, fp, val) in enumerate(res.rows):
        out.append({
            "T_IA_s": fp.T_IA,
            "T_frame_s": fp.T_frame,
            "B_tr_Hz": fp.B_tr,
            "overhead_ratio": fp.overhead_ratio,
            "objective": val,
            "optimal": "*" if i == res.best else "",
        })
    return out
