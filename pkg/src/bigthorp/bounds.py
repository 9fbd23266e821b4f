"""Advantage-bound calculators and binary-entropy numerics.

Everything here is evaluated with mpmath at 240-bit working precision,
because the interesting bound values live around 2^-100 where float64
arithmetic on the intermediate terms would shed exactly the digits the
caller cares about.  Functions return ``mpf`` values; convert with
``float()`` at the edge if needed.

The distinguishing-advantage bound for the cipher is a four-term sum in
the query count q, message width m, probe count k, pass count s (with
T = s * (2m - 1) rounds), key size N, leaked bits L, and direct oracle
calls p::

    q/(s+1) * (4*m*q / 2^m)^s
  + (q*T/2) * hinv(1 - (alpha + k)/N)^(k/2)      alpha = L + m*(q+1) + T
  + q*p / 2^(m-1)
  + q*T / 2^m

where ``hinv`` is the inverse of the binary entropy function on the
branch [1/2, 1].  The "closed-form" variant replaces hinv(z) with the
algebraic upper bound 1/2 + 1/2 * sqrt(1 - z^(ln 4)), which never
decreases the result.  The curve helpers evaluate the two leading terms
(the parts that survive when p is not counted and qT/2^m is negligible)
in the log2 domain so points far below underflow range still plot.

The naive-adversary calculator is exact: it returns ``Fraction`` values
for the guaranteed-advantage lower bounds of an adversary that leaks
floor(L/m) full codebook entries, along with a flag for whether the
regime hypothesis q * floor(L/m) <= 2^m holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import IO, Iterable, List, Optional, Union

import mpmath
from mpmath import mpf

PRECISION_BITS = 240

Number = Union[int, float, Fraction]

_CSV_HEADER = "log2_q,neg_log2_gamma,valid"


def _to_mpf(x) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / mpf(x.denominator)
    return mpf(x)


def _check_unit(name: str, x) -> None:
    if not 0 <= x <= 1:
        raise ValueError(f"{name} must be in [0, 1], got {x}")


def entropy_h(p: Number) -> mpf:
    """Binary entropy h(p) in bits; h(0) = h(1) = 0."""
    _check_unit("p", p)
    with mpmath.workprec(PRECISION_BITS):
        pm = _to_mpf(p)
        if pm == 0 or pm == 1:
            return mpf(0)
        return -pm * mpmath.log(pm, 2) - (1 - pm) * mpmath.log(1 - pm, 2)


def entropy_h_inv(z: Number, tol: float = 1e-12) -> mpf:
    """Inverse of h on the branch [1/2, 1], by bisection.

    Bisection rather than Newton because h has a vanishing derivative at
    1/2, right where z near 1 lands.  ``tol`` is an absolute tolerance on
    the returned argument.
    """
    _check_unit("z", z)
    if tol <= 0:
        raise ValueError("tol must be positive")
    with mpmath.workprec(PRECISION_BITS):
        zm = _to_mpf(z)
        if zm == 0:
            return mpf(1)
        if zm == 1:
            return mpf(0.5)
        lo, hi = mpf(0.5), mpf(1)
        tolm = mpf(tol)
        # h is strictly decreasing on [1/2, 1]
        while hi - lo > tolm:
            mid = (lo + hi) / 2
            if entropy_h(mid) > zm:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


def h_inv_upper(z: Number) -> mpf:
    """Algebraic upper bound on entropy_h_inv: 1/2 + sqrt(1 - z^ln4) / 2."""
    _check_unit("z", z)
    with mpmath.workprec(PRECISION_BITS):
        zm = _to_mpf(z)
        if zm == 0:
            return mpf(1)
        return mpf(0.5) + mpmath.sqrt(1 - zm ** mpmath.log(4)) / 2


@dataclass(frozen=True)
class BoundInputs:
    """Parameter bundle for the advantage-bound calculators.

    ``queries`` and ``oracle_calls`` may be floats so that the curve
    helpers can sweep q between powers of two; everything else is an
    integer count of bits, probes, passes or rounds.
    """

    n_bits: int
    leak_bits: int
    msg_bits: int
    num_probes: int
    passes: int
    rounds: int
    queries: Number
    oracle_calls: Number = 0

    def __post_init__(self):
        if self.n_bits < 1:
            raise ValueError("n_bits must be at least 1")
        if self.msg_bits < 1:
            raise ValueError("msg_bits must be at least 1")
        for name in ("leak_bits", "num_probes", "passes", "rounds",
                     "queries", "oracle_calls"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def from_passes(
        cls,
        *,
        n_bits: int,
        leak_bits: int,
        msg_bits: int,
        num_probes: int,
        passes: int,
        queries: Number,
        oracle_calls: Number = 0,
    ) -> "BoundInputs":
        """Derive the round count from passes: T = passes * (2m - 1)."""
        return cls(
            n_bits=n_bits,
            leak_bits=leak_bits,
            msg_bits=msg_bits,
            num_probes=num_probes,
            passes=passes,
            rounds=passes * (2 * msg_bits - 1),
            queries=queries,
            oracle_calls=oracle_calls,
        )

    @property
    def alpha(self) -> Number:
        """Total bits the analysis concedes: leak + m*(q+1) + rounds."""
        return self.leak_bits + self.msg_bits * (self.queries + 1) + self.rounds


def _alpha_mp(b: BoundInputs, q: mpf) -> mpf:
    return _to_mpf(b.leak_bits) + b.msg_bits * (q + 1) + b.rounds


def _hinv_arg(b: BoundInputs, q: mpf) -> mpf:
    return 1 - (_alpha_mp(b, q) + b.num_probes) / b.n_bits


def theorem1_bound(b: BoundInputs, variant: str = "exact") -> mpf:
    """Full four-term advantage upper bound.

    ``variant`` selects how the inverse entropy factor is computed:
    "exact" uses bisection, "closed-form" uses the algebraic upper bound
    (slightly larger, much cheaper).
    """
    if variant not in ("exact", "closed-form"):
        raise ValueError(f"unknown variant {variant!r}")
    if b.passes < 1:
        raise ValueError("passes must be at least 1 for the advantage bound")
    with mpmath.workprec(PRECISION_BITS):
        q = _to_mpf(b.queries)
        if q == 0:
            return mpf(0)
        z = _hinv_arg(b, q)
        if z < 0:
            raise ValueError(
                f"invalid inputs: 1 - (alpha + num_probes)/n_bits = "
                f"{mpmath.nstr(z, 6)} is negative (key too small for these "
                f"parameters)"
            )
        base = entropy_h_inv(z) if variant == "exact" else h_inv_upper(z)
        m, k, s, T = b.msg_bits, b.num_probes, b.passes, b.rounds
        p = _to_mpf(b.oracle_calls)
        two_m = mpf(2) ** m
        t1 = q / (s + 1) * (4 * m * q / two_m) ** s
        t2 = q * T / 2 * base ** (mpf(k) / 2)
        t3 = q * p / (two_m / 2)
        t4 = q * T / two_m
        return t1 + t2 + t3 + t4


def gamma_bound(b: BoundInputs, q: Number, variant: str = "exact") -> mpf:
    """The two leading bound terms at query count ``q`` (linear domain)."""
    if variant not in ("exact", "closed-form"):
        raise ValueError(f"unknown variant {variant!r}")
    if b.passes < 1:
        raise ValueError("passes must be at least 1 for the advantage bound")
    with mpmath.workprec(PRECISION_BITS):
        qm = _to_mpf(q)
        if qm < 0:
            raise ValueError("q must be nonnegative")
        if qm == 0:
            return mpf(0)
        z = _hinv_arg(b, qm)
        if z < 0:
            raise ValueError(
                "invalid inputs: 1 - (alpha + num_probes)/n_bits is negative"
            )
        base = entropy_h_inv(z) if variant == "exact" else h_inv_upper(z)
        m, k, s, T = b.msg_bits, b.num_probes, b.passes, b.rounds
        two_m = mpf(2) ** m
        t1 = qm / (s + 1) * (4 * m * qm / two_m) ** s
        t2 = qm * T / 2 * base ** (mpf(k) / 2)
        return t1 + t2


def log2_gamma(b: BoundInputs, q: Number, variant: str = "exact") -> mpf:
    """log2 of the two leading terms, computed without leaving log space.

    This is the underflow-proof route used by the curve generator; tests
    hold it to the linear-domain ``gamma_bound`` evaluation.
    """
    if variant not in ("exact", "closed-form"):
        raise ValueError(f"unknown variant {variant!r}")
    if b.passes < 1:
        raise ValueError("passes must be at least 1 for the advantage bound")
    with mpmath.workprec(PRECISION_BITS):
        qm = _to_mpf(q)
        if qm < 0:
            raise ValueError("q must be nonnegative")
        if qm == 0:
            return mpf("-inf")
        z = _hinv_arg(b, qm)
        if z < 0:
            raise ValueError(
                "invalid inputs: 1 - (alpha + num_probes)/n_bits is negative"
            )
        base = entropy_h_inv(z) if variant == "exact" else h_inv_upper(z)
        m, k, s, T = b.msg_bits, b.num_probes, b.passes, b.rounds
        lg_q = mpmath.log(qm, 2)
        lg_t1 = lg_q - mpmath.log(s + 1, 2) + s * (mpmath.log(4 * m * qm, 2) - m)
        if T == 0:
            return lg_t1
        lg_t2 = lg_q + mpmath.log(T, 2) - 1 + mpf(k) / 2 * mpmath.log(base, 2)
        hi, lo = max(lg_t1, lg_t2), min(lg_t1, lg_t2)
        return hi + mpmath.log(1 + mpf(2) ** (lo - hi), 2)


@dataclass(frozen=True)
class GammaPoint:
    """One curve row: query count, bound value, and validity."""

    q: float
    log2_q: float
    neg_log2_gamma: Optional[float]
    valid: bool
    reason: str = ""


def gamma_curve(b: BoundInputs, q_values: Iterable[Number]) -> List[GammaPoint]:
    """Evaluate the leading-terms bound across query counts.

    Each point is flagged invalid (with a reason, and no bound value)
    when the parameters leave the regime the bound statement covers:
    negative q, the naive-adversary hypothesis q * floor(leak/m) <= 2^m
    failing, a negative inverse-entropy argument, or a bound above 1.
    """
    c = b.leak_bits // b.msg_bits
    points = []
    with mpmath.workprec(PRECISION_BITS):
        for q in q_values:
            qm = _to_mpf(q)
            lg_q = float(mpmath.log(qm, 2)) if qm > 0 else float("-inf")
            if qm < 0:
                points.append(GammaPoint(float(q), lg_q, None, False, "q < 0"))
                continue
            if qm * c > mpf(2) ** b.msg_bits:
                points.append(GammaPoint(
                    float(q), lg_q, None, False,
                    "q * floor(leak_bits/msg_bits) > 2^msg_bits",
                ))
                continue
            if _hinv_arg(b, qm) < 0:
                points.append(GammaPoint(
                    float(q), lg_q, None, False,
                    "1 - (alpha + num_probes)/n_bits < 0",
                ))
                continue
            lg = log2_gamma(b, q)
            if lg > 0:
                points.append(GammaPoint(
                    float(q), lg_q, None, False, "bound exceeds 1",
                ))
                continue
            points.append(GammaPoint(float(q), lg_q, float(-lg), True))
    return points


def write_curve_csv(points: Iterable[GammaPoint], out: IO[str]) -> None:
    """Emit curve points as CSV with 10-significant-digit values."""
    out.write(_CSV_HEADER + "\n")
    for pt in points:
        val = "" if pt.neg_log2_gamma is None else f"{pt.neg_log2_gamma:.10g}"
        out.write(f"{pt.log2_q:.10g},{val},{int(pt.valid)}\n")


@dataclass(frozen=True)
class NaiveAdvBound:
    """Exact guaranteed-advantage lower bounds for the naive adversary."""

    simple: Fraction
    hypergeometric: Fraction
    hypothesis_ok: bool


def naive_adv_lower(b: BoundInputs) -> NaiveAdvBound:
    """Advantage guaranteed by leaking floor(leak_bits/m) codebook entries.

    ``simple`` is the q*c/2^m / 4 form valid under the hypothesis
    q*c <= 2^m; ``hypergeometric`` is the sharper x/(1+x) * (1 - 2^-m)
    form with x = q*c/2^m, valid for all q.  Both are exact rationals.
    """
    q = Fraction(b.queries)
    c = math.floor(Fraction(b.leak_bits) / b.msg_bits)
    two_m = 2 ** b.msg_bits
    x = q * c / two_m
    simple = q * c / (4 * two_m)
    hyper = x / (1 + x) * (1 - Fraction(1, two_m))
    return NaiveAdvBound(
        simple=simple,
        hypergeometric=hyper,
        hypothesis_ok=(q * c <= two_m),
    )


def replace_queries(b: BoundInputs, q: Number) -> BoundInputs:
    """Convenience: the same inputs at a different query count."""
    return replace(b, queries=q)
