"""Regulated functions on an interval: continuous base plus a finite jump list.

A regulated function has one-sided limits at every point.  Here it is stored
as a continuous base evaluator together with finitely many jumps
``(s, d_minus, d_plus)`` and evaluated with the conventions

    u(s)  = u(s-) + d_minus(s),        u(s+) = u(s) + d_plus(s),
    u(0-) = u(0),                      u(T+) = u(T).

On top of the representation this module provides the variation functionals:
partition p-variation sums, the quadratic jump functional

    sigma2(u) = sum_{s in (0,T]} d_minus(s)^2 + sum_{s in [0,T)} d_plus(s)^2,

and a refinement driver that checks whether the quadratic sums along refining
partitions settle at sigma2(u), i.e. whether the continuous part of the
quadratic variation vanishes to a tolerance.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "Jump",
    "Partition",
    "RegulatedFunction",
    "W2StarResult",
    "one_sided_limits",
    "p_variation",
    "sigma2",
    "w2star_criterion",
]

_WIDTH_FLOOR = 64.0 * np.finfo(float).eps


class DomainError(ValueError):
    """Evaluation outside the function's interval."""


@dataclass(frozen=True)
class Jump:
    """One discontinuity: u(s) - u(s-) = delta_minus, u(s+) - u(s) = delta_plus."""

    time: float
    delta_minus: float = 0.0
    delta_plus: float = 0.0

    @property
    def delta(self) -> float:
        return self.delta_minus + self.delta_plus


@dataclass(frozen=True)
class Partition:
    """Strictly increasing grid of times; refinement = superset of points."""

    points: tuple[float, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("partition needs at least 2 points")
        arr = np.asarray(self.points, dtype=float)
        if not np.all(np.diff(arr) > 0.0):
            raise ValueError("partition points must be strictly increasing")

    @classmethod
    def uniform(cls, a: float, b: float, n: int) -> "Partition":
        if n < 1:
            raise ValueError("need at least one subinterval")
        return cls(tuple(np.linspace(a, b, n + 1)))

    @property
    def a(self) -> float:
        return self.points[0]

    @property
    def b(self) -> float:
        return self.points[-1]

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(np.asarray(self.points))))

    def refined_with(self, extra: Iterable[float]) -> "Partition":
        pts = sorted(set(self.points) | {float(t) for t in extra})
        return Partition(tuple(pts))

    def bisected(self) -> "Partition":
        arr = np.asarray(self.points)
        mids = 0.5 * (arr[1:] + arr[:-1])
        return self.refined_with(mids)

    def is_refinement_of(self, other: "Partition") -> bool:
        return set(other.points) <= set(self.points)


def _as_float_array(ts) -> tuple[np.ndarray, bool]:
    arr = np.asarray(ts, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


class RegulatedFunction:
    """Continuous base + finite jump list on a closed interval.

    ``base`` must accept numpy arrays (constants returning scalars are fine).
    ``breakpoints`` marks kink locations of the base so integration engines
    can pin them; it carries no semantics for evaluation.
    ``bounded_variation`` declares whether the base is of bounded variation
    (piecewise monotone / piecewise C^1); measure-style integration refuses
    integrators without it.
    """

    def __init__(
        self,
        base: Callable,
        jumps: Sequence[Jump] = (),
        domain: tuple[float, float] = (0.0, 1.0),
        breakpoints: Sequence[float] = (),
        bounded_variation: bool = True,
    ):
        t0, t1 = float(domain[0]), float(domain[1])
        if not t0 < t1:
            raise ValueError("empty domain")
        jumps = tuple(sorted((j for j in jumps if j.delta_minus or j.delta_plus), key=lambda j: j.time))
        times = [j.time for j in jumps]
        if any(t < t0 or t > t1 for t in times):
            raise ValueError("jump time outside domain")
        if len(set(times)) != len(times):
            raise ValueError("jump times must be distinct")
        for j in jumps:
            if j.time == t0 and j.delta_minus != 0.0:
                raise ValueError("delta_minus at the left endpoint must be 0 (u(0-) = u(0))")
            if j.time == t1 and j.delta_plus != 0.0:
                raise ValueError("delta_plus at the right endpoint must be 0 (u(T+) = u(T))")
        self.base = base
        self.jumps = jumps
        self.domain = (t0, t1)
        self.bounded_variation = bool(bounded_variation)
        self.breakpoints = tuple(sorted({float(b) for b in breakpoints if t0 < b < t1}))
        self._jt = np.array(times, dtype=float)
        self._dm = np.array([j.delta_minus for j in jumps], dtype=float)
        self._dp = np.array([j.delta_plus for j in jumps], dtype=float)
        # cumulative full-jump offset: csum[k] = sum of (dm+dp) over the first k jumps
        self._csum = np.concatenate([[0.0], np.cumsum(self._dm + self._dp)])

    @classmethod
    def from_exact(
        cls,
        exact: Callable,
        jumps: Sequence[Jump] = (),
        domain: tuple[float, float] = (0.0, 1.0),
        breakpoints: Sequence[float] = (),
        bounded_variation: bool = True,
    ) -> "RegulatedFunction":
        """Build from a pointwise-exact evaluator whose jumps are known.

        The continuous base is reconstructed as exact(t) minus the cumulated
        jump offsets, so ``values`` reproduces ``exact`` bit-for-bit.
        """
        probe = cls(lambda ts: np.zeros_like(np.asarray(ts, dtype=float)), jumps, domain, breakpoints)

        def base(ts):
            arr, _ = _as_float_array(ts)
            return np.asarray(exact(arr), dtype=float) - probe._offsets_value(arr)

        return cls(base, jumps, domain, breakpoints, bounded_variation)

    # -- evaluation ---------------------------------------------------------

    def _base_at(self, arr: np.ndarray) -> np.ndarray:
        out = np.asarray(self.base(arr), dtype=float)
        if out.shape != arr.shape:
            out = np.broadcast_to(out, arr.shape).copy()
        return out

    def _offsets_value(self, arr: np.ndarray) -> np.ndarray:
        if len(self._jt) == 0:
            return np.zeros(arr.shape)
        idx = np.searchsorted(self._jt, arr, side="left")
        off = self._csum[idx]
        hit = (idx < len(self._jt)) & (self._jt[np.minimum(idx, len(self._jt) - 1)] == arr)
        if np.any(hit):
            off = off + np.where(hit, self._dm[np.minimum(idx, len(self._jt) - 1)], 0.0)
        return off

    def values(self, ts) -> np.ndarray:
        arr, scalar = _as_float_array(ts)
        out = self._base_at(arr) + self._offsets_value(arr)
        return out[0] if scalar else out

    def left_values(self, ts) -> np.ndarray:
        arr, scalar = _as_float_array(ts)
        idx = np.searchsorted(self._jt, arr, side="left") if len(self._jt) else np.zeros(arr.shape, dtype=int)
        out = self._base_at(arr) + self._csum[idx]
        return out[0] if scalar else out

    def right_values(self, ts) -> np.ndarray:
        arr, scalar = _as_float_array(ts)
        idx = np.searchsorted(self._jt, arr, side="right") if len(self._jt) else np.zeros(arr.shape, dtype=int)
        out = self._base_at(arr) + self._csum[idx]
        return out[0] if scalar else out

    def base_values(self, ts) -> np.ndarray:
        """Continuous part of u (the base), sharing u's evaluator conventions."""
        arr, scalar = _as_float_array(ts)
        out = self._base_at(arr)
        return out[0] if scalar else out

    def __call__(self, ts):
        return self.values(ts)

    def one_sided(self, t: float) -> tuple[float, float, float]:
        """(u(t-), u(t), u(t+)) with the endpoint conventions; t must lie in the domain."""
        t = float(t)
        t0, t1 = self.domain
        if t < t0 or t > t1:
            raise DomainError(f"t={t} outside [{t0}, {t1}]")
        return float(self.left_values(t)), float(self.values(t)), float(self.right_values(t))

    # -- jump bookkeeping ---------------------------------------------------

    @property
    def jump_times(self) -> tuple[float, ...]:
        return tuple(self._jt)

    def delta_minus_at(self, t: float) -> float:
        k = np.searchsorted(self._jt, t)
        if k < len(self._jt) and self._jt[k] == t:
            return float(self._dm[k])
        return 0.0

    def delta_plus_at(self, t: float) -> float:
        k = np.searchsorted(self._jt, t)
        if k < len(self._jt) and self._jt[k] == t:
            return float(self._dp[k])
        return 0.0

    def without_jumps(self) -> "RegulatedFunction":
        return RegulatedFunction(self.base, (), self.domain, self.breakpoints, self.bounded_variation)

    def pinned_points(self) -> tuple[float, ...]:
        """Jump times and base kinks, for partition pinning."""
        return tuple(sorted(set(self.jump_times) | set(self.breakpoints)))


def one_sided_limits(u: RegulatedFunction, t: float) -> tuple[float, float, float]:
    """One-sided limits (u(t-), u(t), u(t+)) honoring the jump list."""
    return u.one_sided(t)


def p_variation(u: RegulatedFunction, p: float, pi: Partition) -> float:
    """sum |u(t_j) - u(t_{j-1})|^p along the partition (no supremum taken)."""
    if p < 1.0:
        raise ValueError("p must be >= 1")
    vals = u.values(np.asarray(pi.points))
    return math.fsum(abs(d) ** p for d in np.diff(vals))


def sigma2(u: RegulatedFunction) -> float:
    """Exact quadratic jump functional over the finite jump list."""
    t0, t1 = u.domain
    left = math.fsum(j.delta_minus**2 for j in u.jumps if j.time > t0)
    right = math.fsum(j.delta_plus**2 for j in u.jumps if j.time < t1)
    return left + right


@dataclass(frozen=True)
class W2StarResult:
    estimate: float
    converged: bool
    n_points: int


def w2star_criterion(
    u: RegulatedFunction,
    initial: Partition,
    tol: float,
    max_refine: int,
) -> W2StarResult:
    """Refine partitions and test whether quadratic sums settle at sigma2(u).

    Jump times are always pinned as partition points.  Each step bisects the
    cell whose quadratic contribution is farthest from its refinement limit
    (the limit of a cell [a, b] is d_plus(a)^2 + d_minus(b)^2).  Returns the
    final quadratic-sum estimate and whether |estimate - sigma2(u)| < tol.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    target = sigma2(u)
    pts = sorted(set(initial.points) | set(u.jump_times))
    vals = [float(u.values(t)) for t in pts]

    def cell(a, b, ua, ub):
        contrib = (ub - ua) ** 2
        share = u.delta_plus_at(a) ** 2 + u.delta_minus_at(b) ** 2
        return (-abs(contrib - share), a, b, ua, ub, contrib)

    heap = [cell(pts[i], pts[i + 1], vals[i], vals[i + 1]) for i in range(len(pts) - 1)]
    heapq.heapify(heap)
    total = math.fsum(c[5] for c in heap)

    splits = 0
    while abs(total - target) >= tol and splits < max_refine:
        excess, a, b, ua, ub, contrib = heapq.heappop(heap)
        if b - a <= _WIDTH_FLOOR * max(1.0, abs(b)):
            heapq.heappush(heap, (0.0, a, b, ua, ub, contrib))
            if excess == 0.0:
                break  # nothing refinable is left
            continue
        m = 0.5 * (a + b)
        um = float(u.values(m))
        c1 = cell(a, m, ua, um)
        c2 = cell(m, b, um, ub)
        total += c1[5] + c2[5] - contrib
        heapq.heappush(heap, c1)
        heapq.heappush(heap, c2)
        splits += 1

    return W2StarResult(estimate=total, converged=abs(total - target) < tol, n_points=len(heap) + 1)
