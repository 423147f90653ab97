"""Exact rational arithmetic and effective real numbers.

Reals are handled as *descriptors*: objects answering finite queries with
exact rationals.  Three presentations are used throughout the package:

* ``CauchyReal`` -- a precision query ``approx(k)`` returning a rational
  within ``2**-k`` of the represented real,
* ``LeftCEReal`` -- a memoized nondecreasing rational stream whose supremum
  is the represented real (the left Dedekind cut is enumerable from it),
* ``RightCEReal`` -- the dual nonincreasing stream.

Convergence of a real sequence ``a_n -> a`` is certified by a ``Modulus``
``g`` with the convention ``n >= g(k)  =>  |a_n - a| < 2**-k``, and one-sided
convergence by ``LiminfWitness``/``LimsupWitness`` objects: partial maps on
the rationals that answer an index threshold exactly for the rationals in
the corresponding Dedekind cut of the bound.

Semi-decidable searches never diverge silently: every such query takes a
budget and returns ``Pending`` (or raises ``BudgetExhausted`` from deeper
layers) when the budget runs out.  All descriptors memoize, so re-querying
never recomputes and never changes an answer.
"""

from __future__ import annotations

import threading
from typing import Callable, Optional, Union

try:
    from gmpy2 import mpq as _mpq

    def rat(p, q=1):
        """Exact rational p/q in canonical form (gcd 1, positive denominator)."""
        return _mpq(p, q)

    RAT_BACKEND = "gmpy2"
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as _mpq

    def rat(p, q=1):
        """Exact rational p/q in canonical form (gcd 1, positive denominator)."""
        return _mpq(p, q)

    RAT_BACKEND = "fractions"

#: Type of exact rationals used everywhere in the package.
Rational = type(rat(0))

RatLike = Union[int, "Rational"]

ZERO = rat(0)
ONE = rat(1)


def pow2(k: int):
    """2**k as an exact rational; k may be negative."""
    if k >= 0:
        return rat(1 << k)
    return rat(1, 1 << (-k))


def rat_floor(x) -> int:
    """Largest integer <= x."""
    return x.numerator // x.denominator


def rat_ceil(x) -> int:
    """Smallest integer >= x."""
    return -((-x.numerator) // x.denominator)


def ceil_log2(x) -> int:
    """Smallest integer m with 2**m >= x, for rational x > 0."""
    if x <= 0:
        raise ValueError("ceil_log2 needs x > 0")
    m = x.numerator.bit_length() - x.denominator.bit_length()
    # 2**m is within a factor 2 of x; adjust exactly.
    while pow2(m) < x:
        m += 1
    while m > 0 and pow2(m - 1) >= x:
        m -= 1
    return m


def fmt_rat(x) -> str:
    """Render a rational as ``p/q`` (or ``p`` when the denominator is 1)."""
    if x.denominator == 1:
        return str(x.numerator)
    return "%s/%s" % (x.numerator, x.denominator)


def parse_rat(text: str):
    """Parse ``p/q`` or ``p`` into an exact rational."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return rat(int(num.strip()), int(den.strip()))
    return rat(int(text))


# ---------------------------------------------------------------------------
# errors and partiality
# ---------------------------------------------------------------------------


class EffweakError(Exception):
    """Base error for the package."""


class MalformedNameError(EffweakError):
    """A rational sequence violates the Cauchy-name contract |q_n - q_{n+1}| < 2**-n."""


class InvalidDensityError(EffweakError):
    """A density constructor received a function that is negative somewhere."""


class NotContinuitySetError(EffweakError):
    """A requested boundary point carries positive measure (certified atom)."""


class NoAtomCertificateError(EffweakError):
    """An operation requiring an atom certificate got a black-box measure."""


class BudgetExhausted(EffweakError):
    """A semi-decidable search ran out of budget before producing a certificate."""

    def __init__(self, reason: str = "budget exhausted"):
        super().__init__(reason)
        self.reason = reason


class Answered:
    """Positive result of a semi-decidable query."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return "Answered(%r)" % (self.value,)

    def __eq__(self, other):
        return isinstance(other, Answered) and other.value == self.value

    def __hash__(self):
        return hash(("Answered", self.value))


class Pending:
    """A query that has not produced a certificate within its budget.

    Not a negative answer: a later query with a larger budget may answer.
    """

    __slots__ = ("reason",)

    def __init__(self, reason: str = "budget exhausted"):
        self.reason = reason

    def __repr__(self):
        return "Pending(%r)" % (self.reason,)

    def __eq__(self, other):
        return isinstance(other, Pending)

    def __hash__(self):
        return hash("Pending")


QueryResult = Union[Answered, Pending]


class Budget:
    """A mutable step counter shared along one query.

    ``limit=None`` means unbounded.  ``spend`` raises ``BudgetExhausted`` so
    deep loops unwind to the query boundary, where the caller reports
    ``Pending``.
    """

    __slots__ = ("limit", "used")

    def __init__(self, limit: Optional[int] = None):
        self.limit = limit
        self.used = 0

    def spend(self, n: int = 1):
        self.used += n
        if self.limit is not None and self.used > self.limit:
            raise BudgetExhausted()

    def exhausted(self) -> bool:
        return self.limit is not None and self.used >= self.limit


def as_budget(budget: Union[None, int, Budget]) -> Budget:
    if isinstance(budget, Budget):
        return budget
    return Budget(budget)


# ---------------------------------------------------------------------------
# real-number descriptors
# ---------------------------------------------------------------------------


class CauchyReal:
    """A real x presented by a query ``approx(k)`` with |approx(k) - x| <= 2**-k.

    Queries are deterministic and memoized.  ``exact`` is an optional
    certificate that the real *is* the given rational; constructors that
    know it set it, and equality/separation tests may then be decided
    instead of semi-decided.
    """

    __slots__ = ("_fn", "_memo", "_lock", "exact", "name")

    def __init__(self, fn: Callable[[int], "Rational"], exact=None, name: str = ""):
        self._fn = fn
        self._memo = {}
        self._lock = threading.Lock()
        self.exact = exact
        self.name = name

    def approx(self, k: int):
        if k < 0:
            raise ValueError("precision level must be a natural number")
        with self._lock:
            if k not in self._memo:
                self._memo[k] = rat(self._fn(k))
            return self._memo[k]

    def __repr__(self):
        if self.exact is not None:
            return "CauchyReal(exact=%s)" % fmt_rat(self.exact)
        return "CauchyReal(%s)" % (self.name or "...")


def cauchy_from_rational(q) -> CauchyReal:
    """Constant Cauchy name of a rational: approx(k) = q for all k."""
    q = rat(q)
    return CauchyReal(lambda k: q, exact=q, name=fmt_rat(q))


def cauchy_from_paper_name(q: Callable[[int], "Rational"]) -> CauchyReal:
    """Adapt a fast-converging rational sequence into a CauchyReal.

    Input contract: |q_n - q_{n+1}| < 2**-n for all n, hence
    |q_m - lim| <= sum_{j>=m} 2**-j = 2**-(m-1).  Returning q_{k+2} at
    precision k absorbs that tail bound.  The consecutive-difference
    contract is checked on every materialized prefix and a violation
    raises ``MalformedNameError``.
    """

    memo = {}
    checked = [0]  # diffs verified for indices < checked[0]
    lock = threading.Lock()

    def term(n: int):
        if n not in memo:
            memo[n] = rat(q(n))
        return memo[n]

    def approx(k: int):
        with lock:
            m = k + 2
            while checked[0] < m:
                n = checked[0]
                if abs(term(n) - term(n + 1)) >= pow2(-n):
                    raise MalformedNameError(
                        "|q_%d - q_%d| = %s >= 2^-%d"
                        % (n, n + 1, fmt_rat(abs(term(n) - term(n + 1))), n)
                    )
                checked[0] += 1
            return term(m)

    return CauchyReal(approx, name="paper-name")


class LeftCEReal:
    """A real presented as a nondecreasing memoized rational stream (sup = x)."""

    __slots__ = ("_fn", "_memo", "_lock", "name")

    def __init__(self, fn: Callable[[int], "Rational"], name: str = ""):
        self._fn = fn
        self._memo = []
        self._lock = threading.Lock()
        self.name = name

    def at(self, i: int):
        if i < 0:
            raise ValueError("stream index must be a natural number")
        with self._lock:
            while len(self._memo) <= i:
                self._memo.append(rat(self._fn(len(self._memo))))
            return self._memo[i]

    def __repr__(self):
        return "LeftCEReal(%s)" % (self.name or "...")


class RightCEReal:
    """Dual of ``LeftCEReal``: nonincreasing stream, infimum = x."""

    __slots__ = ("_fn", "_memo", "_lock", "name")

    def __init__(self, fn: Callable[[int], "Rational"], name: str = ""):
        self._fn = fn
        self._memo = []
        self._lock = threading.Lock()
        self.name = name

    def at(self, i: int):
        if i < 0:
            raise ValueError("stream index must be a natural number")
        with self._lock:
            while len(self._memo) <= i:
                self._memo.append(rat(self._fn(len(self._memo))))
            return self._memo[i]

    def __repr__(self):
        return "RightCEReal(%s)" % (self.name or "...")


def left_ce_from_stream(values: Callable[[int], "Rational"], name: str = "") -> LeftCEReal:
    return LeftCEReal(values, name=name)


def cauchy_from_bounds(lower: LeftCEReal, upper: RightCEReal, name: str = "") -> CauchyReal:
    """Squeeze a CauchyReal out of converging lower/upper streams.

    approx(k) advances both streams in lockstep until their gap is at most
    2**-k and returns the midpoint.  Diverging inputs loop forever, so this
    is only used where convergence is guaranteed by construction.
    """

    def approx(k: int):
        i = 0
        tol = pow2(-k + 1)  # midpoint of a gap <= 2**-(k-1) is within 2**-k
        while True:
            lo = lower.at(i)
            hi = upper.at(i)
            if hi - lo <= tol:
                return (lo + hi) / 2
            i += 1

    return CauchyReal(approx, name=name)


# ---------------------------------------------------------------------------
# convergence certificates
# ---------------------------------------------------------------------------


class Modulus:
    """Certificate g for a_n -> a:  n >= g(k)  =>  |a_n - a| < 2**-k."""

    __slots__ = ("_fn", "_memo", "_lock", "name")

    def __init__(self, fn: Callable[[int], int], name: str = ""):
        self._fn = fn
        self._memo = {}
        self._lock = threading.Lock()
        self.name = name

    def __call__(self, k: int) -> int:
        if k < 0:
            raise ValueError("precision level must be a natural number")
        with self._lock:
            if k not in self._memo:
                self._memo[k] = int(self._fn(k))
            return self._memo[k]

    def __repr__(self):
        return "Modulus(%s)" % (self.name or "...")


class _Witness:
    """Shared machinery of liminf/limsup witnesses.

    ``attempt(r, budget)`` is supplied by the constructing operation and
    must be sound by construction; it returns an index threshold or raises
    ``BudgetExhausted``.  Answers are memoized so that a query, once
    answered, never changes.
    """

    __slots__ = ("_attempt", "_answers", "_lock", "target", "name")

    def __init__(self, attempt, target=None, name: str = ""):
        self._attempt = attempt
        self._answers = {}
        self._lock = threading.Lock()
        self.target = target
        self.name = name

    def query(self, r, budget: Union[None, int, Budget] = None) -> QueryResult:
        r = rat(r)
        with self._lock:
            if r in self._answers:
                return Answered(self._answers[r])
        try:
            n0 = self._attempt(r, as_budget(budget))
        except BudgetExhausted as stop:
            return Pending(stop.reason)
        with self._lock:
            self._answers.setdefault(r, int(n0))
            return Answered(self._answers[r])

    def __repr__(self):
        return "%s(%s)" % (type(self).__name__, self.name or "...")


class LiminfWitness(_Witness):
    """Witness that liminf a_n is not smaller than a.

    The answerable rationals are exactly the left Dedekind cut of a, and an
    answer n0 for r certifies r < a_n for all n >= n0.
    """


class LimsupWitness(_Witness):
    """Witness that limsup a_n is not larger than a (dual of LiminfWitness)."""


def cut_member(x: LeftCEReal, r, budget: Union[None, int, Budget] = None) -> QueryResult:
    """Semi-decide r < x from the lower stream of x.

    Answers True once some stream element exceeds r within the budget;
    Pending otherwise (never a negative answer).  One budget unit per
    stream element examined.
    """
    r = rat(r)
    b = as_budget(budget)
    i = 0
    while True:
        try:
            b.spend()
        except BudgetExhausted as stop:
            return Pending(stop.reason)
        if x.at(i) > r:
            return Answered(True)
        i += 1


def straddle(a: CauchyReal, k: int):
    """Rationals r1 < a < r2 with r2 - r1 < 2**-k, from the Cauchy name alone."""
    m = a.approx(k + 3)
    eps = pow2(-(k + 3))
    return m - 3 * eps, m + 3 * eps


def wit_to_mod(
    g1: LiminfWitness,
    g2: LimsupWitness,
    a: CauchyReal,
    budget_cap: Optional[int] = None,
) -> Modulus:
    """Combine two-sided witnesses into a modulus of convergence.

    For each k, compute r1 < a < r2 with r2 - r1 < 2**-k and return
    max(g1(r1), g2(r2)); then n beyond that puts a_n and a in the same
    interval (r1, r2) of width below 2**-k.  Witness queries run under an
    escalating budget; a configured ``budget_cap`` turns a never-answering
    query into ``BudgetExhausted``.
    """

    def g(k: int) -> int:
        r1, r2 = straddle(a, k)
        budget = 256
        while True:
            res1 = g1.query(r1, budget)
            res2 = g2.query(r2, budget)
            if isinstance(res1, Answered) and isinstance(res2, Answered):
                return max(res1.value, res2.value)
            if budget_cap is not None and budget >= budget_cap:
                raise BudgetExhausted(
                    "witness queries still pending at budget cap %d" % budget_cap
                )
            budget *= 2

    return Modulus(g, name="wit_to_mod")
