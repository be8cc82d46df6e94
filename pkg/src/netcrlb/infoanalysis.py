"""Histogram plug-in estimates of differential entropy and mutual information.

Used to rank single-angle surrogates for ``D``: ``W = sin(A)**2`` with ``A``
the largest, second largest or third largest internodal angle.  ``D`` lives on
``[0, L**2/4]`` and ``W`` on ``[0, 1]``; the D-axis bin width is scaled with the
support so both axes get the same number of bins.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .geometry import d_max

log = logging.getLogger(__name__)

MIN_SAMPLES = 100_000


@dataclass(frozen=True)
class Hist2D:
    counts: np.ndarray
    d_edges: np.ndarray
    w_edges: np.ndarray

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())

    @property
    def d_width(self) -> float:
        return float(self.d_edges[1] - self.d_edges[0])

    @property
    def w_width(self) -> float:
        return float(self.w_edges[1] - self.w_edges[0])


def _edges(lo, hi, width):
    nbins = max(int(round((hi - lo) / width)), 1)
    return np.linspace(lo, hi, nbins + 1)


def d_edges(L: int, bin_width: float = 0.01, support=None) -> np.ndarray:
    lo, hi = (0.0, d_max(L)) if support is None else support
    return _edges(lo, hi, bin_width * (hi - lo))


def _warn_small(n):
    if n < MIN_SAMPLES:
        log.warning("only %d samples; histogram entropy estimates will be biased", n)


def histogram_2d(d, w, L: int, bin_width: float = 0.01, d_support=None, w_support=(0.0, 1.0)) -> Hist2D:
    de = d_edges(L, bin_width, d_support)
    we = _edges(w_support[0], w_support[1], bin_width * (w_support[1] - w_support[0]))
    # clip so that values on the closed upper edge land in the last bin
    d = np.clip(np.asarray(d, float), de[0], de[-1])
    w = np.clip(np.asarray(w, float), we[0], we[-1])
    counts, _, _ = np.histogram2d(d, w, bins=[de, we])
    return Hist2D(counts, de, we)


def _plugin_entropy(counts, width):
    p = counts[counts > 0] / counts.sum()
    return float(np.sum(p * np.log2(width / p)))


def entropy_d(samples, L: int, bin_width: float = 0.01, support=None) -> float:
    """Plug-in differential entropy (bits): ``sum_k p_k log2(width / p_k)``.

    Empty bins contribute nothing (``0 log 0 = 0``).
    """
    x = np.asarray(samples, dtype=float)
    _warn_small(x.size)
    edges = d_edges(L, bin_width, support)
    counts, _ = np.histogram(np.clip(x, edges[0], edges[-1]), bins=edges)
    return _plugin_entropy(counts, edges[1] - edges[0])


def conditional_entropy_d_given_w(d, w, L: int, bin_width: float = 0.01, d_support=None,
                                  w_support=(0.0, 1.0)) -> float:
    """Plug-in ``h(D | W)`` in bits from the joint histogram."""
    h = histogram_2d(d, w, L, bin_width, d_support, w_support)
    _warn_small(h.n_samples)
    return _conditional_from_hist(h)


def _conditional_from_hist(h: Hist2D) -> float:
    p = h.counts / h.counts.sum()
    pw = p.sum(axis=0)
    nz = p > 0
    ratio = np.broadcast_to(pw[None, :], p.shape)[nz] * h.d_width / p[nz]
    return float(np.sum(p[nz] * np.log2(ratio)))


def mutual_information(d, w, L: int, bin_width: float = 0.01, d_support=None,
                       w_support=(0.0, 1.0)) -> float:
    """``I(D; W) = h(D) - h(D | W)`` in bits, on a shared D binning."""
    h = histogram_2d(d, w, L, bin_width, d_support, w_support)
    _warn_small(h.n_samples)
    hd = _plugin_entropy(h.counts.sum(axis=1), h.d_width)
    mi = hd - _conditional_from_hist(h)
    if mi < 0:
        if mi < -0.01:
            raise ArithmeticError(f"mutual information estimate {mi:.4f} bits is negative")
        log.warning("clamping mutual information %.2e to 0", mi)
        mi = 0.0
    return mi


SURROGATES = (("L", "w_L"), ("L-1", "w_Lm1"), ("L-2", "w_Lm2"))


def mi_study(L_values, n_samples: int = 1_000_000, seed: int = 0, bin_width: float = 0.01):
    """MI between ``D`` and each surrogate for every ``L``.

    Returns a list of ``(L, label, mi_bits, n_samples, bin_width)`` rows with
    ``label`` in ``{"L", "L-1", "L-2"}``.
    """
    from .simulator import run_d_mc

    rows = []
    for L in sorted(set(int(v) for v in L_values)):
        est = run_d_mc(L, n_samples, seed=seed + L)
        for label, col in SURROGATES:
            mi = mutual_information(est.columns["d"], est.columns[col], L, bin_width)
            rows.append((L, label, mi, n_samples, bin_width))
    return rows


def best_surrogate(rows):
    """Map each ``L`` to the label with the largest MI."""
    best = {}
    for L, label, mi, *_ in rows:
        if L not in best or mi > best[L][1]:
            best[L] = (label, mi)
    return {L: v[0] for L, v in best.items()}
