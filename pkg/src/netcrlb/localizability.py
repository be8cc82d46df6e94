"""Distribution of the number of hearable anchors in a PPP network.

``P[L >= l]`` is the probability that the l-th strongest anchor clears the
pre-processing SIR threshold ``beta/gamma`` under a dominant-interferer model:
the nearest active anchor closer than the l-th is treated exactly, the other
``omega - 1`` closer active anchors by their mean power over the annulus, and
everything beyond the l-th by the mean far-field interference.

Numerics
--------
Substituting ``t = lam_tilde*pi*r_l**2`` and ``u = (r_1/r_l)**2`` turns the
double integral into::

    int_0^inf Gamma(l,1)-pdf(t) int_0^1 1[SIR(u, t) >= beta/gamma] omega (1-u)**(omega-1) du dt

with ``1/SIR(u,t) = u**(-alpha/2) + 2(omega-1)/(2-alpha) (1-u**(1-alpha/2))/(1-u)
+ 2 q t/(alpha-2)``.  The density drops out entirely (an interference-limited
network is scale free).  ``1/SIR`` decreases in ``u``, so the indicator keeps
``u >= u*(t)``; ``u*`` is found by bisection and the inner integral is then
``(1 - u*)**omega`` exactly.  The feasible ``t`` range ends at
``(gamma/beta - omega)(alpha-2)/(2q)`` and is integrated with composite
Gauss-Legendre.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from math import comb, lgamma, sqrt

import numpy as np
from scipy import special

from .errors import QuadratureError

log_ = logging.getLogger(__name__)

N_PANELS = 16
MAX_PANELS = 512
NODES_PER_PANEL = 8
QUAD_TOL = 1e-7
NEG_CLAMP = 1e-6


@dataclass(frozen=True)
class NetworkParams:
    """Physical and network parameters (linear units).

    Attributes
    ----------
    alpha : path-loss exponent, > 2
    lam : anchor density per m^2
    shadow_sigma_db : log-normal shadowing standard deviation in dB
    q : probability an anchor is active (network load)
    gamma : processing gain
    beta : post-processing SIR threshold
    K : frequency reuse factor
    """

    alpha: float = 4.0
    lam: float = 2.0 / (np.sqrt(3.0) * 500.0 ** 2)
    shadow_sigma_db: float = 8.0
    q: float = 1.0
    gamma: float = 100.0
    beta: float = 10.0
    K: int = 1

    def __post_init__(self):
        if not self.alpha > 2:
            raise ValueError("alpha must exceed 2")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be >= 0")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        if not (self.gamma > 0 and self.beta > 0):
            raise ValueError("gamma and beta must be positive")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K must be an integer >= 1")

    @classmethod
    def from_db(cls, *, gamma_db, beta_db, **kw):
        return cls(gamma=10 ** (gamma_db / 10), beta=10 ** (beta_db / 10), **kw)

    @property
    def threshold(self) -> float:
        """Pre-processing SIR threshold ``beta / gamma``."""
        return self.beta / self.gamma

    @property
    def lam_tilde(self) -> float:
        return shadow_transform(self.lam, self.alpha, self.shadow_sigma_db)


@dataclass(frozen=True)
class Pmf:
    """Distribution of ``L`` on ``0..ell_max`` plus the mass above ``ell_max``."""

    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a nonempty 1-D array")
        if np.any(p < 0) or self.tail_mass < 0:
            raise ValueError("probabilities must be nonnegative")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))

    @classmethod
    def point_mass(cls, ell: int, ell_max: int | None = None):
        ell_max = max(ell, 3) if ell_max is None else ell_max
        p = np.zeros(ell_max + 1)
        p[ell] = 1.0
        return cls(p, 0.0)

    @property
    def ell_max(self) -> int:
        return self.probs.size - 1

    def total(self) -> float:
        return float(self.probs.sum() + self.tail_mass)

    def check_normalized(self, tol: float = 1e-6):
        if abs(self.total() - 1.0) > tol:
            raise ValueError(f"pmf not normalized: total mass {self.total():.9f}")

    def prob(self, ell: int) -> float:
        return float(self.probs[ell]) if 0 <= ell <= self.ell_max else 0.0

    def p_at_least(self, ell: int) -> float:
        if ell <= 0:
            return self.total()
        return float(self.probs[ell:].sum() + self.tail_mass)

    def p_at_most(self, ell: int) -> float:
        return float(self.probs[:max(ell + 1, 0)].sum())

    @property
    def localizable_fraction(self) -> float:
        return self.p_at_least(3)


def shadow_transform(lam: float, alpha: float, shadow_sigma_db: float) -> float:
    """Density of the equivalent unshadowed PPP, ``lam * E[S**(2/alpha)]``.

    Shadowing is log-normal with zero median: ``10 log10 S ~ N(0, sigma_db^2)``.
    """
    if shadow_sigma_db < 0:
        raise ValueError("shadow_sigma_db must be >= 0")
    sigma_ln = shadow_sigma_db * np.log(10.0) / 10.0
    return lam * float(np.exp(0.5 * (2.0 / alpha) ** 2 * sigma_ln ** 2))


def _inverse_sir(u, t, omega, alpha, q):
    out = u ** (-alpha / 2.0) + 2.0 * q * t / (alpha - 2.0)
    if omega > 1:
        c = 1.0 - alpha / 2.0
        one_m_u = 1.0 - u
        small = one_m_u < 1e-8
        safe = np.where(small, 0.5, one_m_u)
        mean_annulus = np.where(small, 1.0 + 0.5 * (alpha / 2.0) * one_m_u,
                                (1.0 - u ** c) / (c * safe))
        # mean_annulus -> 1 as u -> 1; the prefactor 2/(2-alpha) = 1/c
        out = out + (omega - 1) * mean_annulus
    return out


def _u_star(t, omega, alpha, q, target, iters=80):
    """Smallest u in (0, 1) with 1/SIR(u, t) <= target, vectorized over t."""
    lo = np.zeros_like(t)
    hi = np.ones_like(t)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = _inverse_sir(np.maximum(mid, 1e-300), t, omega, alpha, q) <= target
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return hi


def _check_monotone(t, omega, alpha, q):
    u = np.linspace(1e-3, 1 - 1e-9, 257)
    vals = _inverse_sir(u[None, :], np.atleast_1d(t)[:, None], omega, alpha, q)
    return bool(np.all(np.diff(vals, axis=1) <= 1e-9 * np.abs(vals[:, 1:])))


def _gl_composite(f, a, b, n_panels, n_nodes):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mids[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return float(np.sum(weights * f(nodes)))


def _gamma_pdf(t, shape):
    return np.exp((shape - 1) * np.log(np.maximum(t, 1e-300)) - t - lgamma(shape))


def _feasible_measure_fallback(t, omega, alpha, q, target):
    # used only if 1/SIR is not monotone in u: integrate the indicator on a fine grid
    u = np.linspace(0.0, 1.0, 20001)[1:]
    du = u[1] - u[0]
    mid = u - 0.5 * du
    ind = _inverse_sir(mid[None, :], t[:, None], omega, alpha, q) <= target
    dens = omega * (1.0 - mid) ** (omega - 1)
    return np.sum(ind * dens[None, :], axis=1) * du


def t_truncation(ell: int) -> float:
    """Upper limit for the Gamma(ell, 1) outer variable (tail mass < 1e-17)."""
    return 40.0 + ell + 10.0 * sqrt(ell)


def _interference_term(ell, omega, alpha, q, target):
    t_hi = (target - omega) * (alpha - 2.0) / (2.0 * q)
    if t_hi <= 0:
        return 0.0
    t_hi = min(t_hi, t_truncation(ell))

    def integrand(t):
        if _check_monotone(t[:: max(1, t.size // 8)], omega, alpha, q):
            mass = (1.0 - _u_star(t, omega, alpha, q, target)) ** omega
        else:
            log_.warning("1/SIR not monotone in u at omega=%d; using grid fallback", omega)
            mass = _feasible_measure_fallback(t, omega, alpha, q, target)
        return mass * _gamma_pdf(t, ell)

    panels = N_PANELS
    coarse = _gl_composite(integrand, 0.0, t_hi, panels // 2, NODES_PER_PANEL)
    while True:
        fine = _gl_composite(integrand, 0.0, t_hi, panels, NODES_PER_PANEL)
        err = abs(fine - coarse)
        if err <= QUAD_TOL:
            return fine
        if panels >= MAX_PANELS:
            raise QuadratureError(
                f"P[L>={ell}] interference term (omega={omega}) did not converge", achieved=err)
        coarse = fine
        panels *= 2


def p_l_geq(ell: int, np_: NetworkParams) -> float:
    """Probability that at least ``ell`` anchors are hearable (single band).

    ``np_.K`` is ignored; use :func:`pmf_with_reuse` for frequency reuse.
    """
    if int(ell) != ell or ell < 0:
        raise ValueError("ell must be a nonnegative integer")
    ell = int(ell)
    if ell == 0:
        return 1.0
    alpha, q = np_.alpha, np_.q
    target = 1.0 / np_.threshold  # bound on 1/SIR
    f_omega = [comb(ell - 1, w) * q ** w * (1.0 - q) ** (ell - 1 - w) for w in range(ell)]

    # no active closer anchor: SIR_l >= thr  <=>  t <= (alpha-2)/(2 q thr)
    if q == 0:
        first = 1.0
    else:
        A = (alpha - 2.0) / (2.0 * q * np_.threshold)
        # 1 - sum_{n<ell} e^-A A^n/n!  is the regularized lower incomplete gamma
        first = float(special.gammainc(ell, A))
    total = first * f_omega[0]
    for omega in range(1, ell):
        if f_omega[omega] == 0.0:
            continue
        total += f_omega[omega] * _interference_term(ell, omega, alpha, q, target)
    return float(min(max(total, 0.0), 1.0))


def pmf_of_l(np_: NetworkParams, ell_max: int = 35) -> Pmf:
    """``f_L(l) = P[L >= l] - P[L >= l+1]`` for ``l = 0..ell_max`` (single band)."""
    if ell_max < 3:
        raise ValueError("ell_max must be >= 3")
    tail = np.array([p_l_geq(ell, np_) for ell in range(ell_max + 2)])
    probs = tail[:-1] - tail[1:]
    if np.any(probs < -NEG_CLAMP):
        raise QuadratureError("negative pmf entries: P[L >= l] not monotone",
                              achieved=float(-probs.min()))
    if np.any(probs < 0):
        log_.warning("clamping pmf entries down to %.2e to zero", probs.min())
        probs = np.maximum(probs, 0.0)
        # renormalize the body so body + tail stays 1
        body = 1.0 - tail[-1]
        if probs.sum() > 0:
            probs = probs * (body / probs.sum())
    return Pmf(probs, tail_mass=float(tail[-1]))


def convolve_pmfs(a: Pmf, b: Pmf, ell_max: int) -> Pmf:
    """Distribution of the sum of two independent counts, truncated at ``ell_max``.

    Whatever falls above ``ell_max`` (including any product with a tail) goes to
    the tail mass.
    """
    full = np.convolve(a.probs, b.probs)
    body = np.zeros(ell_max + 1)
    m = min(full.size, ell_max + 1)
    body[:m] = full[:m]
    tail = max(a.total() * b.total() - body.sum(), 0.0)
    return Pmf(body, tail_mass=tail)


def pmf_with_reuse(np_: NetworkParams, ell_max: int = 35) -> Pmf:
    """Distribution of ``L`` summed over ``K`` independent bands of density ``lam~/K``.

    Bands are identically distributed, so the composition sum over per-band
    counts is a ``K``-fold convolution.
    """
    band = replace(np_, lam=np_.lam / np_.K, K=1)
    per_band = pmf_of_l(band, ell_max)
    out = per_band
    for _ in range(np_.K - 1):
        out = convolve_pmfs(out, per_band, ell_max)
    return out
