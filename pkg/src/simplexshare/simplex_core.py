"""Primitives on the probability simplex and the nonnegative orthant.

Distances, divergences, entropies, and exact KL projection onto the
clipped simplex (the set of probability vectors with every coordinate
bounded below by ``alpha / d``).  All functions are pure and safe to
call concurrently.
"""

from __future__ import annotations

import numpy as np

# Tolerance used by normalization invariants throughout the package.
SUM_TOL = 1e-12


def as_nonneg_vector(x) -> np.ndarray:
    """Validate a 1-d vector of finite nonnegative reals."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a 1-d vector with at least one entry")
    if not np.all(np.isfinite(v)):
        raise ValueError("entries must be finite")
    if np.any(v < 0.0):
        raise ValueError("entries must be nonnegative")
    return v


def as_distribution(x, *, tol: float = 1e-9) -> np.ndarray:
    """Validate a probability vector and renormalize by its exact sum.

    Renormalizing after every construction keeps long runs (T ~ 1e5
    rounds) free of normalization drift.
    """
    v = as_nonneg_vector(x)
    s = float(v.sum())
    if abs(s - 1.0) > tol:
        raise ValueError(f"entries sum to {s!r}, expected 1 within {tol!r}")
    return v / s


def uniform(d: int) -> np.ndarray:
    """The uniform distribution on d points."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return np.full(d, 1.0 / d)


def total_variation(x, y) -> float:
    """One-sided mass increase sum((x_i - y_i) over i with x_i >= y_i).

    Asymmetric in general for nonnegative vectors; equals half the L1
    distance when both arguments are probability vectors, and is always
    bounded by the L1 distance.
    """
    xv = as_nonneg_vector(x)
    yv = as_nonneg_vector(y)
    if xv.shape != yv.shape:
        raise ValueError("dimension mismatch")
    return float(np.maximum(xv - yv, 0.0).sum())


def kl_divergence(x, y) -> float:
    """Kullback-Leibler divergence sum(x_i * ln(x_i / y_i)).

    Uses the 0 * ln 0 = 0 convention.  Raises if x puts mass where y
    has none.
    """
    xv = as_distribution(x)
    yv = as_distribution(y)
    if xv.shape != yv.shape:
        raise ValueError("dimension mismatch")
    support = xv > 0.0
    if np.any(yv[support] <= 0.0):
        raise ValueError("support violation: x_i > 0 where y_i = 0")
    xs = xv[support]
    return float(np.sum(xs * np.log(xs / yv[support])))


def binary_entropy(x: float) -> float:
    """Binary entropy -x ln x - (1-x) ln(1-x), with h(0) = h(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("binary entropy is defined on [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * np.log(x) - (1.0 - x) * np.log(1.0 - x))


def kl_project_clipped(v, alpha: float) -> np.ndarray:
    """KL projection of a positive distribution onto the clipped simplex.

    The clipped simplex is {x in Delta_d : x_i >= alpha/d for all i}.
    The minimizer floors the k smallest entries at alpha/d and rescales
    the remaining entries by the leftover mass, where k is the smallest
    count for which every unfloored rescaled entry stays at or above the
    floor.  This is the exact KKT solution, computed in O(d log d).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    p = as_distribution(v)
    if alpha == 0.0:
        return p
    if np.any(p <= 0.0):
        raise ValueError("projection requires strictly positive entries")
    d = p.size
    floor = alpha / d
    if p.min() >= floor:
        return p
    order = np.argsort(p)
    ps = p[order]
    # suffix[k] = mass of the d-k largest entries (the unfloored ones).
    suffix = np.concatenate([np.cumsum(ps[::-1])[::-1], [0.0]])
    out = np.empty(d)
    for k in range(1, d):
        scale = (1.0 - k * floor) / suffix[k]
        if scale * ps[k] >= floor * (1.0 - 1e-13):
            out[order[:k]] = floor
            out[order[k:]] = np.maximum(scale * ps[k:], floor)
            return out / out.sum()
    # k = d - 1 always satisfies the check when alpha <= 1, so we only
    # reach here for alpha == 1 with everything floored at 1/d.
    return np.full(d, floor) / (d * floor)
