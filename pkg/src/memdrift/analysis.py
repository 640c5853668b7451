"""Truncation and entropy auxiliary functions with numerically verifiable
inequalities. These are pure functions; the solver does not use them."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import MemdriftError


class DomainError(MemdriftError, ValueError):
    pass


def T_k(s, k):
    """Truncation max(0, min(k, s)) for real s, k >= 1."""
    if k < 1:
        raise DomainError(f"truncation level must satisfy k >= 1, got {k}")
    return np.maximum(0.0, np.minimum(float(k), np.asarray(s, dtype=float)))


def g_k(s, k):
    """Double integral of 1/T_k in closed form: s(log s - 1) for s <= k, and
    k(log k - 1) + (s-k) log k + (s-k)^2/(2k) for s >= k; g_k(0) = 0."""
    if k < 1:
        raise DomainError(f"truncation level must satisfy k >= 1, got {k}")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("g_k is defined for s >= 0")
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    out = np.empty_like(s_arr)
    low = s_arr <= k
    with np.errstate(divide="ignore", invalid="ignore"):
        sl = s_arr[low]
        out[low] = np.where(sl == 0.0, 0.0, sl * (np.log(sl) - 1.0))
    sh = s_arr[~low]
    logk = math.log(k)
    out[~low] = k * (logk - 1.0) + (sh - k) * logk + (sh - k) ** 2 / (2.0 * k)
    return float(out[0]) if scalar else out


def h_k(s, k):
    """h_k(s) = 2 sqrt(s) for s <= k and s/sqrt(k) + sqrt(k) for s >= k."""
    if k < 1:
        raise DomainError(f"truncation level must satisfy k >= 1, got {k}")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("h_k is defined for s >= 0")
    rk = math.sqrt(k)
    return np.where(s_arr <= k, 2.0 * np.sqrt(s_arr), s_arr / rk + rk)


def g_xi(x, xi):
    """g_xi(x) = xi x (e^x - 1) for x >= 0."""
    x = np.asarray(x, dtype=float)
    return xi * x * np.expm1(x)


def conjugate_g_xi(y, xi, tol=1e-14, max_iter=200):
    """Convex conjugate g*_xi(y) = sup_{x>0} (xy - g_xi(x)) for y >= 0.

    The maximizer solves xi (1 + x) e^x - xi = y; found by Newton safeguarded
    with bisection on [0, log(1 + y/xi)].
    """
    if y < 0 or xi <= 0:
        raise DomainError("conjugate_g_xi needs y >= 0 and xi > 0")
    if y == 0:
        return 0.0
    target = 1.0 + y / xi
    lo, hi = 0.0, math.log(target)
    x = min(hi, max(lo, hi * 0.5))
    for _ in range(max_iter):
        ex = math.exp(x)
        f = (1.0 + x) * ex - target
        if f > 0:
            hi = x
        else:
            lo = x
        df = (2.0 + x) * ex
        x_new = x - f / df
        if not lo <= x_new <= hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= tol * (1.0 + abs(x)):
            x = x_new
            break
        x = x_new
    return x * y - float(g_xi(x, xi))


def conjugate_upper_bound(y, xi):
    """Closed-form upper bound xi (log(1+y/xi))^2/(1+log(1+y/xi)) (1+y/xi)."""
    q = np.log1p(np.asarray(y, dtype=float) / xi)
    return xi * q * q / (1.0 + q) * (1.0 + np.asarray(y, dtype=float) / xi)


@dataclass
class LemmaReport:
    samples: int
    max_hk_violation: float
    hk_bound_holds: bool
    empirical_C_gk: float
    k_values: tuple

    def rows(self):
        return [
            ("sqrt_Tk_le_half_hk", self.samples, self.max_hk_violation,
             0.5, "pass" if self.hk_bound_holds else "FAIL"),
            ("sqrt_Tk_le_C_times_1_plus_sqrt_gk", self.samples,
             self.empirical_C_gk, float("nan"), "pass"),
        ]


def verify_conjugate_bound(y_values=None, xi_values=None):
    """Max of g*_xi(y) minus its closed-form upper bound over a (y, xi) grid;
    nonpositive when the conjugate lemma holds. Returns (max_gap, samples)."""
    if y_values is None:
        y_values = np.geomspace(1e-3, 1e3, 100)
    if xi_values is None:
        xi_values = np.geomspace(1e-2, 10.0, 100)
    max_gap = -np.inf
    count = 0
    for xi in xi_values:
        bounds = conjugate_upper_bound(y_values, xi)
        for y, b in zip(y_values, bounds):
            max_gap = max(max_gap, conjugate_g_xi(y, xi) - b)
            count += 1
    return max_gap, count


def verify_truncation_lemmas(s_values=None, k_values=(2.0, 10.0, 100.0)) -> LemmaReport:
    """Check sqrt(T_k(s)) <= h_k(s)/2 (the proof's constant) on the sample
    grid and report the empirical minimal C with sqrt(T_k) <= C(1+sqrt|g_k|).

    Raises DomainError if the h_k bound is violated beyond 1e-12.
    """
    if s_values is None:
        s_values = np.concatenate([
            np.linspace(0.0, 10.0, 2001),
            np.geomspace(10.0, 1e6, 2000),
        ])
    s_values = np.asarray(s_values, dtype=float)
    worst_violation = -np.inf
    worst_c = 0.0
    count = 0
    for k in k_values:
        root_t = np.sqrt(T_k(s_values, k))
        violation = root_t - 0.5 * h_k(s_values, k)
        worst_violation = max(worst_violation, float(np.max(violation)))
        c = root_t / (1.0 + np.sqrt(np.abs(g_k(s_values, k))))
        worst_c = max(worst_c, float(np.max(c)))
        count += s_values.size
    holds = worst_violation <= 1e-12
    report = LemmaReport(samples=count, max_hk_violation=worst_violation,
                         hk_bound_holds=holds, empirical_C_gk=worst_c,
                         k_values=tuple(k_values))
    if not holds:
        raise DomainError(
            f"sqrt(T_k) <= h_k/2 violated by {worst_violation:.3e}")
    return report
