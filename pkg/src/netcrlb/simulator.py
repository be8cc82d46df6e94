"""Monte Carlo ground truth for the analytic distributions.

Two levels of simulation:

* :func:`run_conditional_mc` / :func:`run_d_mc` draw ``L`` i.i.d. uniform
  bearings and evaluate the exact bound (and the candidate single-angle
  approximations) on each draw.
* :func:`run_network_mc` simulates whole positioning scenarios: a Poisson
  number of anchors uniform in a disk around the target, explicit log-normal
  shadowing per link, random activity and band assignment, full-sum SIR
  thresholding and top-``N`` selection.

Random streams are derived per fixed-size chunk from ``SeedSequence([seed,
chunk])`` so results do not depend on how many workers process the chunks.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .analytic import CdfCurve
from .errors import ConfigError
from .localizability import NetworkParams

log = logging.getLogger(__name__)

CHUNK = 500
EDGE_FRACTION = 0.02
EDGE_ABORT_RATE = 0.005


@dataclass(frozen=True)
class SimConfig:
    np: NetworkParams
    sigma_r: float
    N: int
    M: float
    n_realizations: int = 100_000
    mean_anchors_per_realization: float = 1000.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if self.N < 3:
            raise ConfigError("N must be >= 3")
        if not (self.M > 0 and self.sigma_r > 0):
            raise ConfigError("M and sigma_r must be positive")
        if self.mean_anchors_per_realization < 10 * max(self.N, 3):
            raise ConfigError("mean_anchors_per_realization too small for the requested N")

    @property
    def disk_radius(self) -> float:
        # sized with the raw density: shadowing is applied explicitly per link
        return float(np.sqrt(self.mean_anchors_per_realization / (self.np.lam * np.pi)))


@dataclass(frozen=True)
class RealizationOutcome:
    l_heard: int
    s_value: float
    selected_angles: np.ndarray


@dataclass
class McEstimate:
    """Samples from one Monte Carlo run.

    ``sorted_samples`` holds the primary statistic (``S`` or ``D``) in ascending
    order; degenerate geometries show up as ``inf`` and are counted in
    ``n_singular``.  ``columns`` keeps per-draw arrays in draw order.
    """

    sorted_samples: np.ndarray
    l_histogram: np.ndarray
    seed: int
    n: int
    n_singular: int = 0
    n_edge: int = 0
    columns: dict = field(default_factory=dict)

    def cdf(self, s):
        return np.searchsorted(self.sorted_samples, np.asarray(s, dtype=float), side="right") / self.n

    @property
    def l_pmf(self) -> np.ndarray:
        return self.l_histogram / self.n

    def outcome(self, i: int) -> RealizationOutcome:
        ang = self.columns["selected_angles"][i]
        return RealizationOutcome(int(self.columns["l_heard"][i]), float(self.columns["s"][i]),
                                  ang[np.isfinite(ang)])


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def _chunks(n: int, size: int = CHUNK):
    return [(c, min(size, n - c * size)) for c in range((n + size - 1) // size)]


def _map_chunks(fn, chunks, n_jobs):
    if n_jobs == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, chunks))


def _network_chunk(cfg: SimConfig, chunk: int, size: int):
    p = cfg.np
    rng = _chunk_rng(cfg.rng_seed, chunk)
    R = cfg.disk_radius
    counts = rng.poisson(cfg.mean_anchors_per_realization, size)
    width = int(counts.max()) if size else 0
    present = np.arange(width)[None, :] < counts[:, None]
    r = R * np.sqrt(rng.random((size, width)))
    theta = rng.uniform(0.0, geometry.TWO_PI, (size, width))
    shadow_db = p.shadow_sigma_db * rng.standard_normal((size, width))
    active = rng.random((size, width)) < p.q
    band = rng.integers(0, p.K, (size, width))

    power = np.where(present, r ** (-p.alpha) * 10.0 ** (shadow_db / 10.0), 0.0)
    interfering = np.where(active & present, power, 0.0)
    band_total = np.zeros((size, p.K))
    for k in range(p.K):
        band_total[:, k] = np.sum(np.where(band == k, interfering, 0.0), axis=1)
    interference = np.take_along_axis(band_total, band, axis=1) - interfering
    interference = np.maximum(interference, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sir = np.where(interference > 0, power / interference, np.inf)
    heard = present & (sir >= p.threshold)
    l_heard = heard.sum(axis=1)

    # top-N by SIR, ties broken by distance
    key_sir = np.where(heard, sir, -np.inf)
    order = np.lexsort((r, -key_sir), axis=1)[:, :cfg.N]
    sel_heard = np.take_along_axis(heard, order, axis=1)
    # a hearable rim anchor only matters if it takes part in the fix
    rim = np.take_along_axis(r, order, axis=1) > (1.0 - EDGE_FRACTION) * R
    edge = np.any(sel_heard & rim, axis=1)
    sel_theta = np.where(sel_heard, np.take_along_axis(theta, order, axis=1), np.nan)
    n_part = sel_heard.sum(axis=1)
    det = geometry.fim_determinant_batch(np.nan_to_num(sel_theta), sel_heard.astype(float))
    localizable = l_heard >= 3
    singular = localizable & (det <= geometry.SINGULAR_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = cfg.sigma_r * np.sqrt(n_part / det)
    s = np.where(localizable, np.where(singular, np.inf, s), cfg.M)
    return l_heard, s, sel_theta, int(singular.sum()), int(edge.sum())


def run_network_mc(cfg: SimConfig, n_jobs: int = 1) -> McEstimate:
    """Simulate ``cfg.n_realizations`` positioning scenarios.

    Raises
    ------
    ConfigError
        If hearable anchors sit near the disk edge too often (disk too small).
    """
    chunks = _chunks(cfg.n_realizations)
    parts = _map_chunks(lambda c: _network_chunk(cfg, *c), chunks, n_jobs)
    l_heard = np.concatenate([pt[0] for pt in parts])
    s = np.concatenate([pt[1] for pt in parts])
    sel = np.concatenate([pt[2] for pt in parts])
    n_sing = sum(pt[3] for pt in parts)
    n_edge = sum(pt[4] for pt in parts)
    if n_edge > EDGE_ABORT_RATE * cfg.n_realizations:
        raise ConfigError(f"{n_edge} realizations had a hearable anchor near the disk edge; "
                          "increase mean_anchors_per_realization")
    if n_sing:
        log.warning("%d singular geometries (reported as s = inf)", n_sing)
    hist = np.bincount(l_heard)
    return McEstimate(np.sort(s), hist, cfg.rng_seed, cfg.n_realizations, n_sing, n_edge,
                      columns={"l_heard": l_heard, "s": s, "selected_angles": sel})


def _angle_chunk(L, seed, chunk, size):
    rng = _chunk_rng(seed, chunk)
    theta = rng.uniform(0.0, geometry.TWO_PI, (size, L))
    return geometry.sorted_gaps_batch(theta)


def _conditional_chunk(L, sigma_r, seed, chunk, size):
    gaps = _angle_chunk(L, seed, chunk, size)
    d = geometry.d_internodal_batch(gaps)
    singular = d <= geometry.SINGULAR_TOL
    with np.errstate(divide="ignore"):
        s = np.where(singular, np.inf, sigma_r * np.sqrt(L / np.where(singular, 1.0, d)))
    second = np.sort(gaps, axis=1)[:, -2]
    with np.errstate(divide="ignore"):
        s_approx = sigma_r * np.sqrt(4.0 / L) / np.sin(second)
    return s, s_approx, int(singular.sum())


def run_conditional_mc(L: int, sigma_r: float, n: int, seed: int = 0, n_jobs: int = 1) -> McEstimate:
    """Exact ``S`` for ``n`` uniform ``L``-anchor geometries.

    ``columns["s_approx"]`` holds the single-angle approximation on the same draws.
    """
    if L < 3:
        raise ValueError("L must be >= 3")
    if n < 1:
        raise ValueError("n must be >= 1")
    parts = _map_chunks(lambda c: _conditional_chunk(L, sigma_r, seed, c[0], c[1]),
                        _chunks(n, 20_000), n_jobs)
    s = np.concatenate([pt[0] for pt in parts])
    s_approx = np.concatenate([pt[1] for pt in parts])
    hist = np.zeros(L + 1, dtype=int)
    hist[L] = n
    return McEstimate(np.sort(s), hist, seed, n, sum(pt[2] for pt in parts),
                      columns={"s": s, "s_approx": s_approx})


def _d_chunk(L, seed, chunk, size):
    gaps = _angle_chunk(L, seed, chunk, size)
    d = geometry.d_internodal_batch(gaps)
    ordered = np.sort(gaps, axis=1)
    return d, ordered[:, -1], ordered[:, -2], ordered[:, -3]


def run_d_mc(L: int, n: int, seed: int = 0, n_jobs: int = 1) -> McEstimate:
    """Joint draws of ``D`` and the three largest internodal angles.

    Columns: ``d``, ``angle_L``, ``angle_Lm1``, ``angle_Lm2`` and the matching
    ``w_L``, ``w_Lm1``, ``w_Lm2`` (``sin**2`` of each angle).
    """
    if L < 3:
        raise ValueError("L must be >= 3")
    parts = _map_chunks(lambda c: _d_chunk(L, seed, c[0], c[1]), _chunks(n, 20_000), n_jobs)
    cols = {}
    for j, name in enumerate(["d", "angle_L", "angle_Lm1", "angle_Lm2"]):
        cols[name] = np.concatenate([pt[j] for pt in parts])
    for name in ("L", "Lm1", "Lm2"):
        cols["w_" + name] = np.sin(cols["angle_" + name]) ** 2
    hist = np.zeros(L + 1, dtype=int)
    hist[L] = n
    return McEstimate(np.sort(cols["d"]), hist, seed, n, columns=cols)


def empirical_cdf(est, s_grid) -> CdfCurve:
    """Right-continuous empirical CDF of ``est.sorted_samples`` on ``s_grid``."""
    samples = est.sorted_samples if isinstance(est, McEstimate) else np.sort(np.asarray(est, float))
    grid = np.asarray(s_grid, dtype=float)
    probs = np.searchsorted(samples, grid, side="right") / samples.size
    return CdfCurve(values=grid, probs=probs, support_low=float(samples[0]) if samples.size else 0.0,
                    support_note="empirical")


def ks_distance(samples, cdf) -> float:
    """Exact sup-norm between the empirical CDF of ``samples`` and a continuous ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    finite = np.isfinite(x)
    F = np.ones(n)
    F[finite] = cdf(x[finite])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def sup_norm(a: CdfCurve, b: CdfCurve) -> float:
    if a.values.shape != b.values.shape or np.any(a.values != b.values):
        raise ValueError("curves must share a grid")
    return float(np.max(np.abs(a.probs - b.probs)))
