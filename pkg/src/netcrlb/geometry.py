"""Anchor angles, internodal gaps and the TOA position error bound.

With the target at the origin and a common range-error standard deviation
``sigma_r``, the square root of the CRLB depends only on the bearing angles of
the participating anchors::

    S = sigma_r * sqrt(L / D),   D = sum_c2 * sum_s2 - sum_cs**2

``D`` can equivalently be written through the gaps between consecutive sorted
angles (internodal angles).  Both routes are implemented here so each can be
checked against the other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularGeometry

TWO_PI = 2.0 * np.pi

#: Below this value of D the Fisher information matrix is treated as singular.
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class AnchorAngles:
    """Bearing angles (radians) of the participating anchors as seen from the target."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.angles, dtype=float))
        if a.ndim != 1 or a.size == 0:
            raise ValueError("need at least one anchor angle")
        if not np.all(np.isfinite(a)):
            raise ValueError("anchor angles must be finite")
        object.__setattr__(self, "angles", np.mod(a, TWO_PI))

    @property
    def L(self) -> int:
        return self.angles.size

    def __len__(self):
        return self.angles.size


@dataclass(frozen=True)
class InternodalAngles:
    """Gaps between angularly consecutive anchors, in counter-clockwise order.

    ``gaps[k]`` is the angle from the k-th to the (k+1)-th anchor after sorting
    by bearing; the last entry closes the circle.
    """

    gaps: np.ndarray
    ordered: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gaps, dtype=float))
        if g.ndim != 1 or g.size == 0:
            raise ValueError("need at least one internodal angle")
        if np.any(g < 0):
            raise ValueError("internodal angles must be nonnegative")
        if abs(g.sum() - TWO_PI) > 1e-9:
            raise ValueError(f"internodal angles must sum to 2*pi, got {g.sum()!r}")
        object.__setattr__(self, "gaps", g)
        object.__setattr__(self, "ordered", np.sort(g))

    @property
    def L(self) -> int:
        return self.gaps.size


@dataclass(frozen=True)
class BenchmarkValue:
    s: float
    d: float
    sigma_r: float


def internodal_from_angles(angles) -> InternodalAngles:
    """Sort the anchor angles and difference them, closing the wrap-around gap."""
    if not isinstance(angles, AnchorAngles):
        angles = AnchorAngles(angles)
    # stable sort: ties keep input order
    theta = np.sort(angles.angles, kind="stable")
    gaps = np.empty_like(theta)
    gaps[:-1] = np.diff(theta)
    gaps[-1] = TWO_PI - (theta[-1] - theta[0])
    return InternodalAngles(gaps)


def _fim_determinant(theta: np.ndarray, axis: int = -1) -> np.ndarray:
    c = np.cos(theta)
    s = np.sin(theta)
    # np.sum is pairwise for contiguous float arrays
    scc = np.sum(c * c, axis=axis)
    sss = np.sum(s * s, axis=axis)
    scs = np.sum(c * s, axis=axis)
    return scc * sss - scs * scs


def compute_s_from_angles(angles, sigma_r: float) -> BenchmarkValue:
    """Position error bound from the closed-form trigonometric sums.

    Raises
    ------
    SingularGeometry
        If the FIM determinant term is at or below ``SINGULAR_TOL``.
    """
    if not isinstance(angles, AnchorAngles):
        angles = AnchorAngles(angles)
    if angles.L < 3:
        raise ValueError("the position error bound needs at least 3 anchors")
    if sigma_r <= 0:
        raise ValueError("sigma_r must be positive")
    d = float(_fim_determinant(angles.angles))
    if d <= SINGULAR_TOL:
        raise SingularGeometry(f"degenerate anchor geometry (D = {d:.3e})")
    return BenchmarkValue(s=sigma_r * np.sqrt(angles.L / d), d=d, sigma_r=sigma_r)


def _as_gaps(gaps) -> np.ndarray:
    if isinstance(gaps, InternodalAngles):
        return gaps.gaps
    return InternodalAngles(gaps).gaps


def compute_d_internodal(gaps) -> float:
    """Row-by-row double sum of sin^2 over runs of consecutive gaps.

    ``D = sum_{i<j} sin^2(gaps[i] + ... + gaps[j-1])`` with anchors indexed
    1..L in angular order.
    """
    g = _as_gaps(gaps)
    L = g.size
    if L < 2:
        raise ValueError("D needs at least 2 anchors")
    total = 0.0
    for i in range(L - 1):
        run = 0.0
        for j in range(i + 1, L):
            run += g[j - 1]
            total += np.sin(run) ** 2
    return total


def compute_d_proposition1(gaps) -> float:
    """Diagonal re-summation of ``D``.

    Splits off the single-gap terms (written over the sorted gaps, including the
    wrap-around gap) and sums runs of 2..L-2 consecutive gaps.
    """
    g = _as_gaps(gaps)
    L = g.size
    if L < 2:
        raise ValueError("D needs at least 2 anchors")
    ordered = np.sort(g)
    total = float(np.sum(np.sin(ordered) ** 2))
    if L == 2:
        # both single-gap terms are sin^2 of the same chord; the pair counts once
        return total / 2.0
    for length in range(2, L - 1):
        for start in range(L - length):
            total += np.sin(np.sum(g[start:start + length])) ** 2
    return total


def d_max(L: int) -> float:
    """Largest attainable ``D`` for ``L`` anchors (equally spaced bearings)."""
    if L < 2:
        raise ValueError("d_max needs L >= 2")
    return L * L / 4.0


def sample_uniform_angles(L: int, rng_seed=None) -> AnchorAngles:
    """Draw ``L`` i.i.d. bearings uniform on [0, 2*pi)."""
    if L < 1:
        raise ValueError("L must be >= 1")
    rng = np.random.default_rng(rng_seed)
    return AnchorAngles(rng.uniform(0.0, TWO_PI, size=L))


# -- batched helpers used by the Monte Carlo code ----------------------------

def fim_determinant_batch(theta: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Row-wise ``sum_c2*sum_s2 - sum_cs**2`` for an ``(n, L)`` angle array.

    ``weights`` (0/1) masks out padding entries.
    """
    c = np.cos(theta)
    s = np.sin(theta)
    if weights is not None:
        c = c * weights
        s = s * weights
    scc = np.sum(c * c, axis=1)
    sss = np.sum(s * s, axis=1)
    scs = np.sum(c * s, axis=1)
    return scc * sss - scs * scs


def sorted_gaps_batch(theta: np.ndarray) -> np.ndarray:
    """Internodal angles for each row of an ``(n, L)`` array of bearings."""
    t = np.sort(np.mod(theta, TWO_PI), axis=1)
    gaps = np.empty_like(t)
    gaps[:, :-1] = np.diff(t, axis=1)
    gaps[:, -1] = TWO_PI - (t[:, -1] - t[:, 0])
    return gaps


def d_internodal_batch(gaps: np.ndarray) -> np.ndarray:
    """Row-wise double-sum ``D`` from an ``(n, L)`` array of gaps."""
    n, L = gaps.shape
    cum = np.concatenate([np.zeros((n, 1)), np.cumsum(gaps[:, :-1], axis=1)], axis=1)
    total = np.zeros(n)
    for i in range(L - 1):
        total += np.sum(np.sin(cum[:, i + 1:] - cum[:, i:i + 1]) ** 2, axis=1)
    return total


def d_diagonal_batch(gaps: np.ndarray) -> np.ndarray:
    """Row-wise diagonal re-summation of ``D`` (see :func:`compute_d_proposition1`)."""
    n, L = gaps.shape
    if L < 2:
        raise ValueError("D needs at least 2 anchors")
    total = np.sum(np.sin(gaps) ** 2, axis=1)
    if L == 2:
        return total / 2.0
    cum = np.concatenate([np.zeros((n, 1)), np.cumsum(gaps, axis=1)], axis=1)
    for length in range(2, L - 1):
        total += np.sum(np.sin(cum[:, length:L] - cum[:, :L - length]) ** 2, axis=1)
    return total
