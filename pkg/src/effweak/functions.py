"""Effective presentations of bounded continuous functions on the reals.

Three presentations appear, ordered by how much they reveal:

* ``RationalPolygonal`` -- piecewise linear with rational vertices, constant
  beyond the first/last breakpoint.  Everything about these is exactly
  computable, which makes them the workhorse of the whole package.
* ``BCFunction`` -- an evaluation descriptor: rational-point approximation
  ``approx(q, k)``, an integer bound on |f|, and a modulus of uniform
  continuity on compact windows.  A polygonal function induces one with
  zero approximation error.
* ``COName`` -- a compact-open name: an enumeration of pairs (I, J) of a
  compact rational interval and an open rational interval with f[I] in J.

The special shapes used by the convergence machinery (the outside-window
ramp ``w_function``, the plateau tent ``tent_function``, trapezoid stacks
approximating indicators of open sets, and the (0,1) normalization ``h``)
are built here as exact polygonal functions.
"""

from __future__ import annotations

import threading
from bisect import bisect_left, bisect_right
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .enumeration import rational_interval_at, unpair
from .reals import (
    Answered,
    Budget,
    BudgetExhausted,
    CauchyReal,
    Pending,
    QueryResult,
    as_budget,
    ceil_log2,
    fmt_rat,
    pow2,
    rat,
    rat_ceil,
    rat_floor,
)

Interval = Tuple[Optional["object"], Optional["object"]]  # None = unbounded end


class RationalPolygonal:
    """Piecewise linear function with rational vertices, constant outside.

    ``xs`` strictly increasing; the function is linear between consecutive
    breakpoints, equal to ``ys[0]`` left of ``xs[0]`` and to ``ys[-1]``
    right of ``xs[-1]``.  All queries are exact.
    """

    __slots__ = ("xs", "ys")

    def __init__(self, xs: Sequence, ys: Sequence):
        if len(xs) != len(ys) or not xs:
            raise ValueError("need equally many breakpoints and values, at least one")
        self.xs = [rat(x) for x in xs]
        self.ys = [rat(y) for y in ys]
        for a, b in zip(self.xs, self.xs[1:]):
            if not a < b:
                raise ValueError("breakpoints must be strictly increasing")

    # -- evaluation and basic queries ------------------------------------

    def __call__(self, x):
        x = rat(x)
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return ys[0]
        if x >= xs[-1]:
            return ys[-1]
        i = bisect_right(xs, x) - 1
        x0, x1 = xs[i], xs[i + 1]
        y0, y1 = ys[i], ys[i + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def vertices(self):
        return list(zip(self.xs, self.ys))

    def max_abs_slope(self):
        s = rat(0)
        for i in range(len(self.xs) - 1):
            cand = abs(self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
            if cand > s:
                s = cand
        return s

    def bounds(self):
        """Exact (min, max) over all of R."""
        return min(self.ys), max(self.ys)

    def range_on(self, lo, hi):
        """Exact (min, max) over the closed interval [lo, hi]."""
        lo, hi = rat(lo), rat(hi)
        if hi < lo:
            raise ValueError("empty interval")
        vals = [self(lo), self(hi)]
        i = bisect_right(self.xs, lo)
        j = bisect_left(self.xs, hi)
        vals.extend(self.ys[i:j])
        return min(vals), max(vals)

    # -- algebra ----------------------------------------------------------

    def affine(self, a, b) -> "RationalPolygonal":
        """Pointwise a*f + b."""
        a, b = rat(a), rat(b)
        return RationalPolygonal(self.xs, [a * y + b for y in self.ys])

    def negate(self) -> "RationalPolygonal":
        return self.affine(-1, 0)

    def _merged_breaks(self, other: "RationalPolygonal"):
        xs = sorted(set(self.xs) | set(other.xs))
        # add exact crossing points of f - g inside each cell
        pts = []
        for u, v in zip(xs, xs[1:]):
            fu, fv = self(u) - other(u), self(v) - other(v)
            if (fu > 0 and fv < 0) or (fu < 0 and fv > 0):
                pts.append(u + (v - u) * fu / (fu - fv))
        return sorted(set(xs) | set(pts))

    def pointwise_max(self, other: "RationalPolygonal") -> "RationalPolygonal":
        xs = self._merged_breaks(other)
        ys = [max(self(x), other(x)) for x in xs]
        return RationalPolygonal(xs, ys).compact()

    def pointwise_min(self, other: "RationalPolygonal") -> "RationalPolygonal":
        return self.negate().pointwise_max(other.negate()).negate()

    def clamp(self, lo, hi) -> "RationalPolygonal":
        return self.pointwise_max(constant(lo)).pointwise_min(constant(hi))

    def compact(self) -> "RationalPolygonal":
        """Drop breakpoints that do not change the function."""
        xs, ys = self.xs, self.ys
        keep_idx = []
        n = len(xs)
        for i in range(n):
            if i == 0:
                if n > 1 and ys[0] == ys[1]:
                    continue  # leading vertex equal to its successor: extension unchanged
                keep_idx.append(i)
                continue
            if i == n - 1:
                if keep_idx and ys[i] == ys[keep_idx[-1]] and keep_idx[-1] == i - 1 and i >= 1 and (
                    len(keep_idx) >= 2 or True
                ):
                    # trailing vertex collinear-flat with predecessor
                    prev = keep_idx[-1]
                    if ys[prev] == ys[i]:
                        continue
                keep_idx.append(i)
                continue
            # interior: drop if collinear with neighbors actually kept
            x0 = xs[keep_idx[-1]] if keep_idx else xs[i - 1]
            y0 = ys[keep_idx[-1]] if keep_idx else ys[i - 1]
            x1, y1 = xs[i], ys[i]
            x2, y2 = xs[i + 1], ys[i + 1]
            if (y1 - y0) * (x2 - x1) == (y2 - y1) * (x1 - x0):
                continue
            keep_idx.append(i)
        if not keep_idx:
            return RationalPolygonal([xs[0]], [ys[0]])
        return RationalPolygonal([xs[i] for i in keep_idx], [ys[i] for i in keep_idx])

    def sup_dist(self, other: "RationalPolygonal", lo=None, hi=None):
        """Exact sup of |f - g|, over R or over a closed interval [lo, hi]."""
        xs = self._merged_breaks(other)
        if lo is not None:
            lo = rat(lo)
            xs = [x for x in xs if x > lo]
            xs.insert(0, lo)
        if hi is not None:
            hi = rat(hi)
            xs = [x for x in xs if x < hi]
            xs.append(hi)
        return max(abs(self(x) - other(x)) for x in xs)

    # -- level sets --------------------------------------------------------

    def superlevel_intervals(self, t) -> List[Interval]:
        """Maximal open intervals of {f > t}; None marks an unbounded end."""
        t = rat(t)
        xs, ys = self.xs, self.ys
        # markers: all x with f(x) = t, plus edges of plateaus at level t
        markers = []
        for i in range(len(xs) - 1):
            y0, y1 = ys[i], ys[i + 1]
            if y0 == t and y1 == t:
                markers.extend([xs[i], xs[i + 1]])
            elif (y0 - t) * (y1 - t) < 0 or y0 == t or y1 == t:
                if y0 == t:
                    markers.append(xs[i])
                elif y1 == t:
                    markers.append(xs[i + 1])
                else:
                    markers.append(xs[i] + (xs[i + 1] - xs[i]) * (t - y0) / (y1 - y0))
        markers = sorted(set(markers))
        out: List[Interval] = []
        # elementary regions: (-inf, m0), (m0, m1), ..., (m_last, inf)
        bounds = [None] + markers + [None]
        for i in range(len(bounds) - 1):
            a, b = bounds[i], bounds[i + 1]
            if a is not None and b is not None and not a < b:
                continue
            # sample point strictly inside the region
            if a is None and b is None:
                probe = xs[0]
            elif a is None:
                probe = min(xs[0], b) - 1
            elif b is None:
                probe = max(xs[-1], a) + 1
            else:
                probe = (a + b) / 2
            if self(probe) > t:
                out.append((a, b))
        return out

    def sublevel_intervals(self, t) -> List[Interval]:
        """Maximal open intervals of {f < t}."""
        return self.negate().superlevel_intervals(-rat(t))

    # -- variation reach (used by corpus moduli) ---------------------------

    def reach(self, x0, eps, direction: int = 1):
        """Largest x in the given direction with sup_{[x0,x]} |f - f(x0)| <= eps.

        Returns None when the variation never exceeds eps all the way to
        infinity.  eps must be positive.
        """
        x0, eps = rat(x0), rat(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        v0 = self(x0)
        lo_lim, hi_lim = v0 - eps, v0 + eps
        if direction > 0:
            idx = bisect_right(self.xs, x0)
            points = self.xs[idx:]
        else:
            idx = bisect_left(self.xs, x0)
            points = list(reversed(self.xs[:idx]))
        cur = x0
        for xp in points:
            yp = self(xp)
            if lo_lim <= yp <= hi_lim:
                cur = xp
                continue
            # exact boundary crossing inside (cur, xp)
            ycur = self(cur)
            lim = hi_lim if yp > hi_lim else lo_lim
            cross = cur + (xp - cur) * (lim - ycur) / (yp - ycur)
            return cross
        return None  # constant extension stays within the band


def constant(c) -> RationalPolygonal:
    return RationalPolygonal([rat(0)], [rat(c)])


def polygonal_from_vertices(vertices: Sequence[Tuple]) -> RationalPolygonal:
    xs = [v[0] for v in vertices]
    ys = [v[1] for v in vertices]
    return RationalPolygonal(xs, ys)


def w_function(a: int, k: int) -> RationalPolygonal:
    """Outside-window indicator smoothing: 0 on [-a, a], ramps up to 1 over
    a width-2**-k margin, identically 1 beyond.

    Satisfies 1_{R \\ [-(a+1), a+1]} <= w_{a,0} <= 1_{R \\ [-a, a]}, the
    sandwich the tail-bound search relies on.
    """
    if a < 1:
        raise ValueError("window radius must be at least 1")
    a_r, d = rat(a), pow2(-k)
    return RationalPolygonal(
        [-a_r - d, -a_r, a_r, a_r + d], [rat(1), rat(0), rat(0), rat(1)]
    )


def tent_function(a: int) -> RationalPolygonal:
    """Plateau tent: 1 on [-a, a], linear to 0 at distance 1, 0 beyond.

    Satisfies 1_{[-a,a]} <= T_a <= 1_{[-(a+1), a+1]}.
    """
    if a < 1:
        raise ValueError("plateau radius must be at least 1")
    a_r = rat(a)
    return RationalPolygonal(
        [-a_r - 1, -a_r, a_r, a_r + 1], [rat(0), rat(1), rat(1), rat(0)]
    )


# ---------------------------------------------------------------------------
# evaluation descriptors
# ---------------------------------------------------------------------------


class BCFunction:
    """Bounded continuous function as an evaluation descriptor.

    * ``approx(q, k)`` -- rational within 2**-k of f(q) at rational q,
    * ``bound`` -- integer B with |f| <= B,
    * ``cont_mod(a, k)`` -- m such that |x - y| <= 2**-m forces
      |f(x) - f(y)| <= 2**-k for x, y in [-a, a].

    ``poly`` is an optional exact polygonal backing; operations use it for
    exact fast paths and fall back to the descriptor interface otherwise.
    ``value_range`` optionally certifies lo <= f <= hi.
    """

    __slots__ = ("_approx", "bound", "_cont_mod", "poly", "value_range", "name", "_memo", "_lock")

    def __init__(
        self,
        approx: Callable,
        bound: int,
        cont_mod: Callable[[int, int], int],
        poly: Optional[RationalPolygonal] = None,
        value_range: Optional[Tuple] = None,
        name: str = "",
    ):
        self._approx = approx
        self.bound = int(bound)
        self._cont_mod = cont_mod
        self.poly = poly
        self.value_range = value_range
        self.name = name
        self._memo = {}
        self._lock = threading.Lock()

    def approx(self, q, k: int):
        q = rat(q)
        key = (q, k)
        with self._lock:
            if key not in self._memo:
                self._memo[key] = rat(self._approx(q, k))
            return self._memo[key]

    def cont_mod(self, a: int, k: int) -> int:
        return int(self._cont_mod(a, k))

    def __repr__(self):
        return "BCFunction(%s)" % (self.name or "...")


def polygonal_as_bcf(p: RationalPolygonal, name: str = "") -> BCFunction:
    """Wrap an exact polygonal function as an evaluation descriptor.

    approx is exact (error 0), the bound is the ceiling of max |values|,
    and the continuity modulus comes from the maximum absolute slope.
    """
    lo, hi = p.bounds()
    bound = max(1, rat_ceil(max(abs(lo), abs(hi))))
    slope = p.max_abs_slope()
    shift = 0 if slope <= 1 else ceil_log2(slope)

    def cont_mod(a: int, k: int) -> int:
        if slope == 0:
            return 0
        return k + shift

    return BCFunction(
        lambda q, k: p(q),
        bound,
        cont_mod,
        poly=p,
        value_range=(lo, hi),
        name=name or "polygonal",
    )


def normalize_h(f: BCFunction, B: int) -> BCFunction:
    """Squash |f| <= B into (0, 1) by the affine map (f + B + 1) / (2B + 2).

    The map is exact on rationals and order-preserving, so evaluation
    error and continuity moduli carry over unchanged (the affine factor
    only shrinks distances).
    """
    B = int(B)
    if B < 0:
        raise ValueError("bound must be a natural number")
    den = 2 * (B + 1)
    poly = f.poly.affine(rat(1, den), rat(B + 1, den)) if f.poly is not None else None
    vr = None
    if f.value_range is not None:
        lo, hi = f.value_range
        vr = ((lo + B + 1) / den, (hi + B + 1) / den)

    def approx(q, k):
        return (f.approx(q, k) + B + 1) / den

    return BCFunction(
        approx, 1, f.cont_mod, poly=poly, value_range=vr, name="h(%s)" % (f.name or "f")
    )


def denormalize_h(h: BCFunction, B: int) -> BCFunction:
    """Exact inverse of :func:`normalize_h`."""
    B = int(B)
    den = 2 * (B + 1)
    poly = h.poly.affine(rat(den), rat(-(B + 1))) if h.poly is not None else None
    vr = None
    if h.value_range is not None:
        lo, hi = h.value_range
        vr = (den * lo - (B + 1), den * hi - (B + 1))

    def approx(q, k):
        # den * (value within 2**-(k + bits)) stays within 2**-k
        bits = ceil_log2(rat(den))
        return den * h.approx(q, k + bits) - (B + 1)

    def cont_mod(a, k):
        bits = ceil_log2(rat(den))
        return h.cont_mod(a, k + bits)

    return BCFunction(approx, B, cont_mod, poly=poly, value_range=vr, name="unh")


def indicator_approx(U, k: int) -> RationalPolygonal:
    """Trapezoid stack below the indicator of an effectively open set.

    Takes the first k enumerated intervals (c, d) of U and, for each, a
    trapezoid rising over margin delta = min(2**-k, (d-c)/4); the pointwise
    maximum is 0 outside U, at most 1, nondecreasing in k, and increases
    to the indicator of U pointwise.
    """
    t = constant(0)
    d_k = pow2(-k)
    for i in range(k):
        c, d = U.interval(i)
        delta = min(d_k, (d - c) / 4)
        trap = RationalPolygonal(
            [c, c + delta, d - delta, d], [rat(0), rat(1), rat(1), rat(0)]
        )
        t = t.pointwise_max(trap)
    return t


# ---------------------------------------------------------------------------
# compact-open names
# ---------------------------------------------------------------------------

_MEMO_STAGE_CAP = 12  # stages up to this are stored; later ones are regenerated


class COName:
    """Compact-open name: a deterministic enumeration of pairs (I, J).

    Every emitted pair satisfies f[I] subset of J by a finite certificate,
    and every valid pair is eventually emitted: the enumeration interleaves
    a *cover stream* (certified cells tiling growing windows at shrinking
    value tolerance -- the pairs consumers actually want early) with an
    exhaustive *candidate stream* re-checking every (I, J) from a fixed
    pairing enumeration at growing precision.
    """

    def __init__(self, stage_fn: Callable[[int], list], name: str = ""):
        self._stage_fn = stage_fn
        self._stages = {}
        self._lock = threading.Lock()
        self.name = name

    def _stage(self, s: int) -> list:
        with self._lock:
            if s in self._stages:
                return self._stages[s]
        out = self._stage_fn(s)
        if s <= _MEMO_STAGE_CAP:
            with self._lock:
                self._stages.setdefault(s, out)
        return out

    def scan(self):
        """Iterate pairs ((u, v), (c, d)) in enumeration order, forever."""
        s = 1
        while True:
            for item in self._stage(s):
                yield item
            s += 1

    def stages(self):
        """Iterate (stage, pairs) so consumers can track enumeration depth."""
        s = 1
        while True:
            yield s, self._stage(s)
            s += 1

    def __repr__(self):
        return "COName(%s)" % (self.name or "...")


def _candidate_pair(t: int):
    i1, i2 = unpair(t)
    a, b = rational_interval_at(i1)
    c, d = rational_interval_at(i2)
    return (a, b), (c, d)


def co_name_of(f: BCFunction, name: str = "") -> COName:
    """Compute a compact-open name of a bounded continuous function.

    Stage s certifies cells tiling [-s, s] with images enclosed at width
    about 2**-s (exact ranges for polygonal backings, modulus-plus-
    approximation enclosures otherwise), then re-checks candidate pairs
    0..s from the fixed pairing enumeration at precision s, emitting each
    the first time its certificate succeeds.
    """
    poly = f.poly

    def enclosure(u, v, s: int):
        """Certified (lo, hi) with f[[u, v]] inside [lo, hi]."""
        if poly is not None:
            return poly.range_on(u, v)
        radius = max(abs(u), abs(v))
        window = max(1, rat_ceil(radius))
        m = f.cont_mod(window, s)
        step = pow2(-m)
        lo = hi = None
        x = rat(u)
        while True:
            xq = min(x, rat(v))
            val = f.approx(xq, s)
            err = pow2(-s) + pow2(-s)  # approximation + within-step variation
            cand_lo, cand_hi = val - err, val + err
            lo = cand_lo if lo is None else min(lo, cand_lo)
            hi = cand_hi if hi is None else max(hi, cand_hi)
            if xq == rat(v):
                return lo, hi
            x = x + step

    def certify(t: int, s: int) -> bool:
        (u, v), (c, d) = _candidate_pair(t)
        if poly is not None:
            lo, hi = poly.range_on(u, v)
            return c < lo and hi < d
        lo, hi = enclosure(u, v, s)
        return c < lo and hi < d

    def first_emission_stage(t: int, s: int):
        for s1 in range(max(1, t), s + 1):
            if certify(t, s1):
                return s1
        return None

    def cover_cells(s: int) -> list:
        out = []
        margin = pow2(-(s + 2))
        if poly is not None:
            tol = pow2(-s)
            slope = poly.max_abs_slope()
            depth_cap = 2 * s + 4 + (0 if slope <= 1 else ceil_log2(slope))

            def rec(u, v, depth):
                mn, mx = poly.range_on(u, v)
                if mx - mn <= tol or depth >= depth_cap:
                    out.append(((u, v), (mn - margin, mx + margin)))
                else:
                    mid = (u + v) / 2
                    rec(u, mid, depth + 1)
                    rec(mid, v, depth + 1)

            rec(rat(-s), rat(s), 0)
        else:
            m = f.cont_mod(s, s)
            step = pow2(-m)
            n_steps = 2 * s * (1 << m)
            x = rat(-s)
            for j in range(max(1, n_steps - 1)):
                u = x + j * step
                v = min(u + 2 * step, rat(s))
                center = (u + v) / 2
                val = f.approx(center, s)
                err = pow2(-s) + pow2(-s)
                out.append(((u, v), (val - err - margin, val + err + margin)))
                if v == rat(s):
                    break
        return out

    def stage(s: int) -> list:
        out = cover_cells(s)
        for t in range(s + 1):
            if first_emission_stage(t, s) == s:
                out.append(_candidate_pair(t))
        return out

    return COName(stage, name=name or (f.name or "f"))


def eval_from_co_name(rho: COName, x: CauchyReal, k: int, budget=None) -> Union["object", Pending]:
    """Evaluate a function from its compact-open name near a point.

    Scans the enumeration for a pair (I, J) with x certified interior to I
    and |J| < 2**-k, and returns the midpoint of J.  One budget unit per
    pair examined; Pending on exhaustion.
    """
    b = as_budget(budget)
    tol = pow2(-k)
    for (u, v), (c, d) in rho.scan():
        try:
            b.spend()
        except BudgetExhausted as stop:
            return Pending(stop.reason)
        if d - c >= tol:
            continue
        # certify x interior to [u, v] at a precision matched to the cell
        for p in range(0, 64):
            ax = x.approx(p)
            e = pow2(-p)
            if ax - e > u and ax + e < v:
                return (c + d) / 2
            if ax + e < u or ax - e > v or (v - u) > 4 * e:
                break
    return Pending("enumeration exhausted")  # pragma: no cover - scan is infinite


def polygonal_approx(rho: COName, a: int, eps, budget=None):
    """Uniform polygonal approximation on [-a, a] from a compact-open name.

    Collects enumerated certificates with |J| < eps/2 until they chain
    across [-a, a], evaluates the midpoint of each J at the chain points,
    and linearly interpolates; the result is within eps of f on [-a, a].
    Pending on budget exhaustion.
    """
    eps = rat(eps)
    if eps <= 0:
        raise ValueError("tolerance must be positive")
    b = as_budget(budget)
    a_r = rat(a)
    half = eps / 2
    chain: List[Tuple] = []  # selected (u, v, mid(J)) cells, ordered, chaining
    for s, pairs in rho.stages():
        small = []
        for (u, v), (c, d) in pairs:
            try:
                b.spend()
            except BudgetExhausted as stop:
                return Pending(stop.reason)
            if d - c < half and v > -a_r and u < a_r:
                small.append((u, v, (c + d) / 2))
        if not small:
            continue
        chain = _greedy_chain(chain + small, a_r)
        if chain is not None and chain and chain[0][0] <= -a_r and chain[-1][1] >= a_r:
            return _chain_to_polygonal(chain, a_r)
        if chain is None:
            chain = []
    return Pending("enumeration exhausted")  # pragma: no cover


def _greedy_chain(cells, a_r):
    """Pick a minimal chain of cells covering [-a, a] left to right, if possible."""
    cells = sorted(set(cells), key=lambda t: (t[0], t[1]))
    chain = []
    frontier = -a_r
    while frontier < a_r:
        best = None
        for (u, v, y) in cells:
            if u <= frontier and v > frontier:
                if best is None or v > best[1]:
                    best = (u, v, y)
        if best is None:
            return cells  # not yet coverable; keep the pool for the next stage
        chain.append(best)
        frontier = best[1]
    return chain


def _chain_to_polygonal(chain, a_r):
    # vertex at each chain transition, value = midpoint of the covering cell's J
    xs = [-a_r]
    ys = [chain[0][2]]
    for i in range(1, len(chain)):
        x_t = max(chain[i][0], xs[-1])  # transition inside the overlap
        x_t = min(x_t, a_r)
        if x_t > xs[-1]:
            xs.append(x_t)
            ys.append(chain[i][2])
    if xs[-1] < a_r:
        xs.append(a_r)
        ys.append(chain[-1][2])
    return RationalPolygonal(xs, ys).compact()
