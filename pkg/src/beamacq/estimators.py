"""Direction estimators: max power, maximum likelihood and local ML.

ML and LML statistics are evaluated on a C-point phase grid per array
dimension using FFTs over the antenna index (see
:func:`beamacq.arrays.grid_transform`), so they work with any training
beams.  Both normalise by the codebook-dependent denominator, which
depends only on the beams and is cached per codebook.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .arrays import ArrayGeometry, ArrayKind, grid_phases, grid_responses, grid_transform, response_from_phases

ESTIMATORS = ("mp", "ml", "lml")

# grid points whose denominator is below this fraction of the peak are
# treated as unobservable and get a zero statistic
_DEN_FLOOR = 1e-12


@dataclass
class Estimate:
    """Outcome of one estimation.

    Indices refer to the evaluation grid (or to codebook beams for MP).
    ``aod_*``, ``ap`` and ``gain`` are only set by ML (and MP for AoD).
    ``degenerate`` flags an all-zero statistic.
    """

    aoa_index: int
    aoa_phase: np.ndarray
    value: float
    aod_index: int | None = None
    aod_phase: np.ndarray | None = None
    ap: int | None = None
    gain: complex | None = None
    degenerate: bool = False


@dataclass
class StatisticGrid:
    values: np.ndarray
    fft_size: int


def _check_fft_size(fft_size: int, *geoms: ArrayGeometry):
    if fft_size < 1 or fft_size & (fft_size - 1):
        raise ValueError(f"FFT size must be a power of two, got {fft_size}")
    for g in geoms:
        need = g.size if g.kind is ArrayKind.ULA else max(g.num_subarrays, g.elements_per_subarray)
        if fft_size < need:
            raise ValueError(f"FFT size {fft_size} too small for the array (need >= {need})")


def _matrix(codebook) -> np.ndarray:
    return codebook.matrix if hasattr(codebook, "matrix") else np.asarray(codebook)


def _observations(Y) -> np.ndarray:
    return np.asarray(Y.values if hasattr(Y, "values") else Y, dtype=complex)


_den_cache: dict = {}


def codebook_gain_profile(geom: ArrayGeometry, codebook, fft_size: int) -> np.ndarray:
    """``sum_p |u(grid)^H w_p|^2`` for every grid point (cached)."""
    mat = _matrix(codebook)
    key = (geom, fft_size, mat.shape, mat.tobytes())
    hit = _den_cache.get(key)
    if hit is None:
        hit = np.sum(np.abs(grid_transform(geom, mat, fft_size)) ** 2, axis=1)
        if len(_den_cache) > 256:
            _den_cache.clear()
        _den_cache[key] = hit
    return hit


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(num, den).shape)
    ok = den > _DEN_FLOOR * den.max()
    np.divide(num, den, out=out, where=np.broadcast_to(ok, out.shape))
    return out


def estimate_mp(Y) -> tuple[int, int]:
    """Beam pair ``(p, q)`` with the largest ``|y_pq|^2``; ties go to the first."""
    power = np.abs(_observations(Y)) ** 2
    p, q = np.unravel_index(int(np.argmax(power)), power.shape)
    return int(p), int(q)


def lml_statistic(Y, mob_geom: ArrayGeometry, mobile_codebook, fft_size: int = 64) -> StatisticGrid:
    """``sum_q |u(theta)^H lambda_q|^2 / ||b(theta)||^2`` over the AoA grid."""
    _check_fft_size(fft_size, mob_geom)
    W = _matrix(mobile_codebook)
    lam = W @ _observations(Y)  # (antennas, Q)
    num = np.sum(np.abs(grid_transform(mob_geom, lam, fft_size)) ** 2, axis=1)
    den = codebook_gain_profile(mob_geom, W, fft_size)
    return StatisticGrid(_safe_ratio(num, den), fft_size)


def ml_statistic(Y, ap_geom: ArrayGeometry, ap_codebook, mob_geom: ArrayGeometry,
                 mobile_codebook, fft_size: int = 64) -> StatisticGrid:
    """``|Tr(Z^H Y)|^2 / ||Z||_F^2`` over the (AoA grid) x (AoD grid).

    The numerator is ``|u(theta)^H A a(phi)|^2`` with
    ``A = sum_pq w_p f_q^H y_pq``; the denominator factorises into the
    receive and transmit codebook gain profiles.
    """
    _check_fft_size(fft_size, ap_geom, mob_geom)
    W, F = _matrix(mobile_codebook), _matrix(ap_codebook)
    A = W @ _observations(Y) @ F.conj().T  # (mob antennas, AP antennas)
    left = grid_transform(mob_geom, A, fft_size)  # rows: u(theta)^H A
    # u^H A a(phi) = conj(a(phi)^H (u^H A)^H)
    num = np.abs(grid_transform(ap_geom, left.conj().T, fft_size)).T ** 2
    den = np.outer(codebook_gain_profile(mob_geom, W, fft_size), codebook_gain_profile(ap_geom, F, fft_size))
    return StatisticGrid(_safe_ratio(num, den), fft_size)


def _unobservable_to_zero(num, den):
    # same convention as the FFT path: hypotheses no beam can see score zero
    out = np.zeros_like(num)
    ok = den > _DEN_FLOOR * den.max()
    out[ok] = num[ok] / den[ok]
    return out


def ml_statistic_direct(Y, ap_geom, ap_codebook, mob_geom, mobile_codebook, fft_size=64) -> np.ndarray:
    """Grid-by-grid evaluation of the ML statistic from explicit ``Z`` matrices."""
    Y = _observations(Y)
    W, F = _matrix(mobile_codebook), _matrix(ap_codebook)
    U, Av = grid_responses(mob_geom, fft_size), grid_responses(ap_geom, fft_size)
    B = W.conj().T @ U  # (P, G_mob): w_p^H u(theta)
    C = F.conj().T @ Av  # (Q, G_ap): f_q^H a(phi)
    num = np.empty((U.shape[1], Av.shape[1]))
    den = np.empty_like(num)
    for i in range(U.shape[1]):
        for j in range(Av.shape[1]):
            Z = np.outer(B[:, i], C[:, j].conj())
            den[i, j] = np.vdot(Z, Z).real
            num[i, j] = abs(np.vdot(Z, Y)) ** 2
    return _unobservable_to_zero(num, den)


def lml_statistic_direct(Y, mob_geom, mobile_codebook, fft_size=64) -> np.ndarray:
    Y = _observations(Y)
    W = _matrix(mobile_codebook)
    U = grid_responses(mob_geom, fft_size)
    num, den = np.empty(U.shape[1]), np.empty(U.shape[1])
    for i in range(U.shape[1]):
        b = W.conj().T @ U[:, i]
        den[i] = np.vdot(b, b).real
        num[i] = np.sum(np.abs(b.conj() @ Y) ** 2)
    return _unobservable_to_zero(num, den)


def estimate_lml(Y, mob_geom: ArrayGeometry, mobile_codebook, fft_size: int = 64) -> Estimate:
    stat = lml_statistic(Y, mob_geom, mobile_codebook, fft_size).values
    k = int(np.argmax(stat))
    return Estimate(k, grid_phases(mob_geom, fft_size)[k], float(stat[k]), degenerate=not stat[k] > 0)


def estimate_ml(Y, ap_geoms, ap_codebooks, mob_geom: ArrayGeometry, mobile_codebook,
                fft_size: int = 64) -> Estimate:
    """Joint (AP, AoA, AoD) maximisation of the ML statistic.

    ``ap_geoms`` / ``ap_codebooks`` are sequences indexed by AP; a single
    geometry or codebook is treated as a one-AP network.  Ties go to the
    smallest AP index, then the smallest grid index.
    """
    if isinstance(ap_geoms, ArrayGeometry):
        ap_geoms, ap_codebooks = [ap_geoms], [ap_codebooks]
    best = None
    for l, (g, cb) in enumerate(zip(ap_geoms, ap_codebooks)):
        stat = ml_statistic(Y, g, cb, mob_geom, mobile_codebook, fft_size).values
        k = int(np.argmax(stat))
        if best is None or stat.flat[k] > best[0]:
            best = (stat.flat[k], l, k, stat.shape)
    value, l, k, shape = best
    i, j = np.unravel_index(k, shape)
    aoa_phase = grid_phases(mob_geom, fft_size)[i]
    aod_phase = grid_phases(ap_geoms[l], fft_size)[j]
    gain = ml_gain(Y, ap_geoms[l], ap_codebooks[l], mob_geom, mobile_codebook, aoa_phase, aod_phase)
    return Estimate(int(i), aoa_phase, float(value), int(j), aod_phase, l, gain, degenerate=not value > 0)


def ml_gain(Y, ap_geom, ap_codebook, mob_geom, mobile_codebook, aoa_phase, aod_phase) -> complex:
    """Least-squares gain ``Tr(Z^H Y) / ||Z||_F^2`` at one hypothesis."""
    W, F = _matrix(mobile_codebook), _matrix(ap_codebook)
    Z = np.outer(W.conj().T @ response_from_phases(mob_geom, *aoa_phase),
                 (F.conj().T @ response_from_phases(ap_geom, *aod_phase)).conj())
    den = np.vdot(Z, Z).real
    return complex(np.vdot(Z, _observations(Y)) / den) if den > 0 else 0j


# --- analysis ---------------------------------------------------------------

def statistic_normalizer(noise: float, repetitions: int, P: int, Q: int, n_bar: int, m_bar: int) -> float:
    """Scale that gives the ML correlation ``Tr(Z^H Y)`` unit noise variance under sweeping."""
    return float(np.sqrt(repetitions * n_bar * m_bar / (P * Q)) / np.sqrt(noise))


def decision_statistic_mean(gammas, gains, omega: float, n_bar: int, m_bar: int,
                            P: int | None = None, Q: int | None = None, phases=None) -> complex:
    """Mean of the normalised ML decision statistic under beam sweeping.

    ``sqrt(omega / (n_bar m_bar)) * sum_s sqrt(gamma_s) e^{j phase_s} G_s``;
    the statistic has unit variance.  ``P`` / ``Q`` are checked against
    ``m_bar`` / ``n_bar`` when given.
    """
    if P is not None and P < m_bar:
        raise ValueError(f"need P >= trained mobile antennas ({P} < {m_bar})")
    if Q is not None and Q < n_bar:
        raise ValueError(f"need Q >= trained AP antennas ({Q} < {n_bar})")
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    amp = np.sqrt(gammas) * (np.exp(1j * np.asarray(phases)) if phases is not None else 1.0)
    return complex(np.sqrt(omega / (n_bar * m_bar)) * np.sum(amp * np.atleast_1d(gains)))


def misalignment_probability(gamma_max: float, gamma_s: float, omega: float, N: int, M: int, J: int) -> float:
    """Normal approximation of the chance of locking onto a weaker path."""
    if gamma_s > gamma_max:
        raise ValueError("gamma_s must not exceed gamma_max")
    return float(norm.sf((np.sqrt(gamma_max) - np.sqrt(gamma_s)) / np.sqrt(N * M * J * J / omega)))
