"""Regret notions and comparator-regularity statistics.

The central quantity is the generalized shifting regret against an
arbitrary sequence of nonnegative comparator vectors u_1..u_T:

    sum_t ||u_t||_1 (p_t . l_t) - sum_t u_t . l_t

Adaptive (best window) and discounted regret are special cases obtained
by specific comparator constructions; they get direct evaluators here.
"""

from __future__ import annotations

import numpy as np

from .simplex_core import as_nonneg_vector, total_variation

# Prefix sums switch to compensated summation at this length: window
# differences of large prefix sums would otherwise lose precision.
KAHAN_MIN_LENGTH = 10_000


def as_comparator(u) -> np.ndarray:
    """Validate a (T, d) matrix of nonnegative comparator vectors."""
    m = np.asarray(u, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1:
        raise ValueError("comparator must be a (T, d) matrix with T >= 1")
    if not np.all(np.isfinite(m)) or np.any(m < 0.0):
        raise ValueError("comparator entries must be finite and nonnegative")
    return m


def _played(p_traj) -> np.ndarray:
    if hasattr(p_traj, "played"):
        return np.asarray(p_traj.played, dtype=float)
    return np.asarray(p_traj, dtype=float)


def regularity_m(u) -> float:
    """Summed one-sided total-variation increments of the comparator.

    Counts exactly the number of hard switches when the sequence moves
    between probability vectors.
    """
    m = as_comparator(u)
    if m.shape[0] == 1:
        return 0.0
    return float(np.maximum(m[1:] - m[:-1], 0.0).sum())


def sparsity_n(u) -> float:
    """Sum over coordinates of the comparator's maximum weight over time."""
    m = as_comparator(u)
    return float(m.max(axis=0).sum())


def generalized_shifting_regret(p_traj, losses, u) -> float:
    """Weighted regret sum_t ||u_t||_1 p_t.l_t - sum_t u_t.l_t."""
    p = _played(p_traj)
    l = np.asarray(losses, dtype=float)
    m = as_comparator(u)
    if not (p.shape == l.shape == m.shape):
        raise ValueError("trajectory, losses, and comparator shapes differ")
    norms = m.sum(axis=1)
    realized = np.einsum("td,td->t", p, l)
    return float(norms @ realized - np.einsum("td,td->", m, l))


def _kahan_cumsum(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    total = np.zeros(a.shape[1:], dtype=float)
    carry = np.zeros_like(total)
    for i in range(a.shape[0]):
        y = a[i] - carry
        t = total + y
        carry = (t - total) - y
        total = t
        out[i] = total
    return out


def _prefix(a: np.ndarray) -> np.ndarray:
    """Prefix sums with a leading zero row; compensated for long inputs."""
    body = _kahan_cumsum(a) if a.shape[0] >= KAHAN_MIN_LENGTH else np.cumsum(a, axis=0)
    zero = np.zeros((1,) + a.shape[1:])
    return np.concatenate([zero, body], axis=0)


def adaptive_regret(p_traj, losses, tau0: int) -> float:
    """Worst regret against the best action over windows of length <= tau0."""
    value, _, _, _ = adaptive_regret_details(p_traj, losses, tau0)
    return value


def adaptive_regret_details(p_traj, losses, tau0: int
                            ) -> tuple[float, int, int, int]:
    """Adaptive regret together with its maximizing (r, s, action).

    Scans all O(T * tau0) windows using prefix sums; the inner minimum
    over comparison distributions is attained at a corner because the
    objective is linear.  Returns (value, r, s, j) with 1-based round
    indices; the degenerate answer (0, 1, 1, 0) is never exceeded for
    d = 1.
    """
    p = _played(p_traj)
    l = np.asarray(losses, dtype=float)
    if p.shape != l.shape:
        raise ValueError("trajectory and losses shapes differ")
    T = p.shape[0]
    if not 1 <= tau0 <= T:
        raise ValueError("tau0 must satisfy 1 <= tau0 <= T")
    realized = np.einsum("td,td->t", p, l)
    pref_r = _prefix(realized)
    pref_l = _prefix(l)
    best = 0.0
    best_window = (1, 1, 0)
    for width in range(1, tau0 + 1):
        fore = pref_r[width:] - pref_r[:-width]
        arms = pref_l[width:] - pref_l[:-width]
        arm_idx = np.argmin(arms, axis=1)
        reg = fore - arms[np.arange(arms.shape[0]), arm_idx]
        k = int(np.argmax(reg))
        if reg[k] > best:
            best = float(reg[k])
            best_window = (k + 1, k + width, int(arm_idx[k]))
    return best, best_window[0], best_window[1], best_window[2]


def as_discounts(betas, T: int | None = None) -> np.ndarray:
    """Validate a vector of per-round discount factors in [0, 1]."""
    b = as_nonneg_vector(betas)
    if np.any(b > 1.0):
        raise ValueError("discounts must lie in [0, 1]")
    if T is not None and b.size != T:
        raise ValueError(f"discount schedule has length {b.size}, expected {T}")
    return b


def discounted_regret(p_traj, losses, betas) -> float:
    """Discounted regret max_q sum_t beta_t (p_t.l_t - q.l_t)."""
    value, _ = discounted_regret_details(p_traj, losses, betas)
    return value


def discounted_regret_details(p_traj, losses, betas) -> tuple[float, int]:
    """Discounted regret and the maximizing corner (linear objective)."""
    p = _played(p_traj)
    l = np.asarray(losses, dtype=float)
    if p.shape != l.shape:
        raise ValueError("trajectory and losses shapes differ")
    b = as_discounts(betas, p.shape[0])
    realized = np.einsum("td,td->t", p, l)
    arm_totals = b @ l
    j = int(np.argmin(arm_totals))
    return float(b @ realized - arm_totals[j]), j


def discount_regularity(betas, q) -> float:
    """Regularity mass ||beta_1 q||_1 + m((beta_t q)_t) of a discounted
    comparator.

    For monotone discounts this equals max(beta_1, beta_T) for any
    probability vector q.
    """
    b = as_discounts(betas)
    qv = np.asarray(q, dtype=float)
    u = b[:, None] * qv[None, :]
    return float(u[0].sum() + regularity_m(u))
