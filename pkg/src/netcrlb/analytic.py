"""Closed-form distributions of the position error bound.

The conditional law of ``S`` given ``L`` participating anchors follows from
approximating ``D`` by ``(L**2/4) * sin(A)**2`` where ``A`` is the second
largest internodal angle, i.e. ``S ~ a / sin(A)`` with ``a = sigma_r*sqrt(4/L)``.
The marginal law mixes the conditional CDFs over the distribution of ``L``.

Alternating binomial sums lose precision quickly as ``L`` grows; evaluation is
restricted to ``L <= MAX_L`` and the CDF falls back to exact integer sums where
double rounding would matter.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np

from .localizability import NetworkParams, Pmf

MAX_L = 30

# relative guard so that phi = 2*pi/n counts n in the sum
_FLOOR_GUARD = 1e-12


def _check_L(L):
    if int(L) != L or L < 2:
        raise ValueError(f"L must be an integer >= 2, got {L!r}")
    if L > MAX_L:
        raise ValueError(f"L = {L} exceeds the supported range (<= {MAX_L})")
    return int(L)


def _angle2_cdf_exact(x: float, L: int) -> float:
    """Same sum as :func:`angle2_cdf` at ``x = phi / (2 pi)``, in integers."""
    num, den = float(x).as_integer_ratio()
    total = den ** (L - 1)
    for n in range(2, L + 1):
        base = den - n * num
        if base <= 0:
            break
        total += (-1) ** (n - 1) * comb(L, n) * (n - 1) * base ** (L - 1)
    return total / den ** (L - 1)


def angle2_cdf(phi, L: int):
    """CDF of the second largest internodal angle among ``L`` uniform anchors.

    ``phi`` may be a scalar or an array and must lie in ``[0, pi]``.

    Notes
    -----
    The alternating sum is summed in double precision.  Points whose rounding
    bound exceeds ``1e-13`` (small ``phi`` at large ``L``) are re-evaluated
    exactly with integer arithmetic on the binary value of ``phi / (2 pi)``.
    """
    L = _check_L(L)
    phi_arr = np.asarray(phi, dtype=float)
    if np.any(phi_arr < 0) or np.any(phi_arr > np.pi) or np.any(np.isnan(phi_arr)):
        raise ValueError("phi must lie in [0, pi]")
    x = phi_arr / (2.0 * np.pi)
    # n = 0 contributes +1, n = 1 contributes 0
    out = np.ones_like(phi_arr)
    magnitude = np.ones_like(phi_arr)
    for n in range(2, L + 1):
        active = n * x <= 1.0 + _FLOOR_GUARD
        term = comb(L, n) * (n - 1) * np.where(active, np.maximum(1.0 - n * x, 0.0), 0.0) ** (L - 1)
        out = out + (-1.0) ** (n - 1) * term
        magnitude = magnitude + term
    loose = magnitude * (4 * L * np.finfo(float).eps) > 1e-13
    if np.any(loose):
        flat_x, flat_out = x.reshape(-1), out.reshape(-1)
        for i in np.flatnonzero(loose.reshape(-1)):
            flat_out[i] = _angle2_cdf_exact(flat_x[i], L)
        out = flat_out.reshape(phi_arr.shape)
    out = np.clip(out, 0.0, 1.0)
    if np.ndim(phi) == 0:
        return float(out)
    return out


def _c_const(L: int) -> float:
    return sum((-1) ** (m + 1) * comb(L, m) * (m - 1) / m for m in range(2, L + 1))


def angle2_mean(L: int) -> float:
    """Expected value of the second largest internodal angle."""
    L = _check_L(L)
    return sum((-1) ** n * comb(L, n) * 2.0 * np.pi * (n - 1) / (n * L) for n in range(2, L + 1))


def angle2_second_moment(L: int) -> float:
    L = _check_L(L)
    return (4.0 * np.pi ** 2 / L) * sum(
        (-1) ** n * comb(L, n) * (n - 1) / n * 2.0 / (n * (L + 1)) for n in range(2, L + 1)
    )


def angle2_var(L: int) -> float:
    """Variance of the second largest internodal angle.

    Uses ``E[A^2] = (4 pi^2 / L) sum_n (-1)^n C(L,n) (n-1)/n * 2/(n (L+1))``
    obtained by integrating ``phi^2`` against the order-statistic density, minus
    the squared mean written through ``c = sum_m (-1)^(m+1) C(L,m) (m-1)/m``.
    """
    L = _check_L(L)
    c = _c_const(L)
    return (4.0 * np.pi ** 2 / L) * sum(
        (-1) ** n * comb(L, n) * (n - 1) / n * (2.0 / (n * (L + 1)) + c / L)
        for n in range(2, L + 1)
    )


@dataclass(frozen=True)
class CondCdfParams:
    L: int
    sigma_r: float

    def __post_init__(self):
        _check_L(self.L)
        if not self.sigma_r > 0:
            raise ValueError("sigma_r must be positive")

    @property
    def a(self) -> float:
        """Lower edge of the support of ``S``: ``sigma_r * sqrt(4/L)``."""
        return self.sigma_r * np.sqrt(4.0 / self.L)


@dataclass(frozen=True)
class MarginalParams:
    network: NetworkParams | None
    sigma_r: float
    M: float
    N: int = 10

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if int(self.N) != self.N or self.N < 3:
            raise ValueError("N must be an integer >= 3")
        if not self.sigma_r > 0:
            raise ValueError("sigma_r must be positive")
        _check_L(self.N)


@dataclass(frozen=True)
class CdfCurve:
    """Tabulated CDF."""

    values: np.ndarray
    probs: np.ndarray
    support_low: float = 0.0
    support_note: str = ""

    @property
    def points(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def __len__(self):
        return self.values.size


def cond_cdf_s(s, p: CondCdfParams):
    """CDF of ``S`` given ``L`` anchors; zero below ``a``."""
    s_arr = np.asarray(s, dtype=float)
    a = p.a
    ratio = np.divide(a, s_arr, out=np.full_like(s_arr, np.inf), where=s_arr > 0)
    inside = ratio <= 1.0
    phi1 = np.arcsin(np.where(inside, ratio, 1.0))
    phi2 = np.pi - phi1
    out = np.where(inside, angle2_cdf(phi2, p.L) - angle2_cdf(phi1, p.L), 0.0)
    out = np.clip(out, 0.0, 1.0)
    if np.ndim(s) == 0:
        return float(out)
    return out


def unit_step(x):
    """``u(x)``: 0 for x < 0, 1 for x >= 0."""
    return np.where(np.asarray(x) >= 0, 1.0, 0.0)


def cond_cdf_s_modified(s, L: int, mp: MarginalParams):
    """Conditional CDF with the ``N``-anchor cap and the placeholder error ``M``.

    ``L >= N`` uses the ``N``-anchor law, ``3 <= L < N`` the ``L``-anchor law and
    ``L <= 2`` a unit step at ``M``.
    """
    if int(L) != L or L < 0:
        raise ValueError("L must be a nonnegative integer")
    if L <= 2:
        out = unit_step(np.asarray(s, dtype=float) - mp.M)
        return float(out) if np.ndim(s) == 0 else out
    return cond_cdf_s(s, CondCdfParams(min(int(L), mp.N), mp.sigma_r))


def marginal_cdf_s(s, mp: MarginalParams, pmf: Pmf):
    """Network-wide CDF of ``S``.

    ``P[L >= N]`` (including the pmf tail mass) weights the ``N``-anchor law,
    ``f_L(l)`` for ``3 <= l < N`` weights each ``l``-anchor law and
    ``P[L <= 2]`` puts an atom at ``M``.
    """
    pmf.check_normalized(1e-6)
    s_arr = np.asarray(s, dtype=float)
    out = pmf.p_at_least(mp.N) * cond_cdf_s(s_arr, CondCdfParams(mp.N, mp.sigma_r))
    for ell in range(3, mp.N):
        w = pmf.prob(ell)
        if w > 0:
            out = out + w * cond_cdf_s(s_arr, CondCdfParams(ell, mp.sigma_r))
    out = out + pmf.p_at_most(2) * unit_step(s_arr - mp.M)
    if np.ndim(s) == 0:
        return float(out)
    return out


def default_s_grid(a: float, M: float, n: int = 2000) -> np.ndarray:
    """Geometric grid from just above ``a`` to ``max(10 M, 1000 a)``.

    The upper tail of ``S`` given ``L`` decays like ``(a / s)**(L - 1)``; at
    ``1000 a`` even ``L = 3`` is within 1e-6 of 1.
    """
    lo = a * (1.0 + 1e-6)
    hi = max(10.0 * M, 1000.0 * a)
    return np.geomspace(lo, hi, n)


def tabulate_cdf(evaluator: Callable, s_grid, support_low: float = 0.0, support_note: str = "") -> CdfCurve:
    """Evaluate a CDF on a sorted grid; fails loudly if the result is not monotone."""
    grid = np.asarray(s_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("s_grid must be a nonempty 1-D sequence")
    if np.any(np.diff(grid) < 0):
        raise ValueError("s_grid must be sorted ascending")
    probs = np.asarray(evaluator(grid), dtype=float).reshape(grid.shape)
    if np.any(np.diff(probs) < -1e-12):
        raise AssertionError("tabulated CDF is not monotone")
    if np.any(probs < 0) or np.any(probs > 1):
        raise AssertionError("tabulated CDF leaves [0, 1]")
    return CdfCurve(values=grid, probs=probs, support_low=support_low, support_note=support_note)


def quantile(cdf: Callable, prob: float, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Smallest ``s`` in ``[lo, hi]`` with ``cdf(s) >= prob`` (bisection)."""
    if cdf(hi) < prob:
        return float("inf")
    if cdf(lo) >= prob:
        return lo
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if cdf(mid) >= prob:
            hi = mid
        else:
            lo = mid
    return hi
