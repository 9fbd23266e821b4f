"""Brute-force checks of the identities and inequalities behind the bound.

Each check function enumerates a small state space exactly and returns the
two sides of an (in)equality that is a theorem for honest inputs, so any
violation is an implementation bug, not bad luck.  Sampling appears only in
``bias_estimate``, where the oracle stream itself is the random object; its
thresholds are 4-sigma binomial bounds.

The checks, stated over explicit tables:

* ``parseval_check``: over a distribution P on {0,1}^n, the mean over all
  2^n index subsets S of E(S)^2, where E(S) is the expected parity
  (-1)^(xor of the S-bits), equals sum_y P(y)^2.
* ``leakage_entropy_check``: for a map from {0,1}^n0 onto l0-bit labels,
  the mean log-size of the fiber containing a uniform point is at least
  n0 - l0, and the probability the fiber log-size falls below
  n0 - l0 - tail_m is at most 2^-tail_m.
* ``decomposition_check``: for a uniform point of a nonempty set S of
  n0-bit strings, the sum of per-bit binary entropies is at least log2|S|.
* ``main_lemma_check``: for a uniform point of a fiber, the expected
  collision mass of the k probed bits (expectation over all n0^k probe
  tuples, collision mass = sum of squared pattern probabilities) is at
  most hinv(1 - (alpha + k)/n0)^k with alpha = n0 - log2|fiber|, whenever
  that argument is nonnegative.
* ``bias_estimate``: Monte Carlo bias of the round-function bit over
  distinct (round input, round) queries, next to the exactly computed
  half-root-collision-mass bound averaged over the sampled draws.

Suites bundle these with fixed seeds and aggregate the worst case per
group into ``CheckResult`` rows (name, lhs, rhs, pass) for the CLI.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .bigkey import BigKey, seed_randomness
from .bitstring import BitString
from .bounds import entropy_h, entropy_h_inv
from .oracle import Oracle, ScriptedOracle, Shake256Oracle
from .prf import CipherParams, derive_probes, draw_bit

_MAX_TABLE_BITS = 20
_MAX_PARSEVAL_BITS = 16
_MAX_FIBER_BITS = 14
_MAX_SUBSET_PROBES = 20
_ENUM_OP_CAP = 1 << 31
_DENSE_BITS = 10


@dataclass(frozen=True)
class CheckResult:
    """One report row: computed value, bound value, verdict."""

    name: str
    lhs: float
    rhs: float
    passed: bool
    note: str = ""


class DistributionTable:
    """Explicit probability table over n-bit outcomes.

    Outcome x carries bit i (1-based) in position 2^(i-1), matching the
    package packing convention.
    """

    def __init__(self, n: int, mass):
        if not 1 <= n <= _MAX_TABLE_BITS:
            raise ValueError(f"n must be in 1..{_MAX_TABLE_BITS}, got {n}")
        arr = np.asarray(mass, dtype=np.float64)
        if arr.shape != (1 << n,):
            raise ValueError(f"mass must have 2^{n} entries, got shape {arr.shape}")
        if (arr < 0).any():
            raise ValueError("masses must be nonnegative")
        if abs(float(arr.sum()) - 1.0) > 1e-12:
            raise ValueError(f"masses sum to {arr.sum()}, not 1")
        self.n = n
        self.mass = arr

    @classmethod
    def uniform(cls, n: int) -> "DistributionTable":
        return cls(n, np.full(1 << n, 1.0 / (1 << n)))

    @classmethod
    def point_mass(cls, n: int, y: int) -> "DistributionTable":
        arr = np.zeros(1 << n)
        arr[y] = 1.0
        return cls(n, arr)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "DistributionTable":
        arr = rng.random(1 << n)
        return cls(n, arr / arr.sum())


class LeakageTable:
    """Explicit total map {0,1}^n0 -> {0,1}^l0, as an integer array."""

    def __init__(self, n0: int, l0: int, table):
        if not 1 <= n0 <= _MAX_TABLE_BITS:
            raise ValueError(f"n0 must be in 1..{_MAX_TABLE_BITS}, got {n0}")
        if not 0 <= l0 <= _MAX_TABLE_BITS:
            raise ValueError(f"l0 must be in 0..{_MAX_TABLE_BITS}, got {l0}")
        arr = np.asarray(table, dtype=np.int64)
        if arr.shape != (1 << n0,):
            raise ValueError(f"table must have 2^{n0} entries")
        if arr.size and (arr.min() < 0 or arr.max() >= (1 << l0)):
            raise ValueError(f"table values must lie in 0..2^{l0}-1")
        self.n0 = n0
        self.l0 = l0
        self.table = arr

    @classmethod
    def random(cls, n0: int, l0: int, rng: np.random.Generator) -> "LeakageTable":
        return cls(n0, l0, rng.integers(0, 1 << l0, size=1 << n0))

    @classmethod
    def projection(cls, n0: int, l0: int) -> "LeakageTable":
        """Leak the first l0 bits (the low bits, under the packing order)."""
        return cls(n0, l0, np.arange(1 << n0) & ((1 << l0) - 1))

    @classmethod
    def constant(cls, n0: int, l0: int, value: int = 0) -> "LeakageTable":
        return cls(n0, l0, np.full(1 << n0, value))

    def fiber(self, leak_value: int) -> np.ndarray:
        return np.flatnonzero(self.table == leak_value)

    def fibers(self) -> Dict[int, np.ndarray]:
        return {int(v): self.fiber(int(v)) for v in np.unique(self.table)}


@lru_cache(maxsize=None)
def _character_matrix(n: int) -> np.ndarray:
    """Dense (+1/-1) parity-character table, subsets by outcomes."""
    ys = np.arange(1 << n, dtype=np.uint64)
    parity = (np.bitwise_count(ys[:, None] & ys[None, :]) & 1).astype(np.float64)
    return 1.0 - 2.0 * parity


def parseval_check(d: DistributionTable) -> Tuple[float, float]:
    """Both sides of the power-sum identity, by exhaustive enumeration.

    lhs is the mean of E(S)^2 over all 2^n subsets S (the empty subset
    contributes E = 1); rhs is the collision mass sum_y P(y)^2.
    """
    n = d.n
    if n > _MAX_PARSEVAL_BITS:
        raise ValueError(
            f"n = {n} too large to enumerate all subsets (max {_MAX_PARSEVAL_BITS})"
        )
    size = 1 << n
    if n <= _DENSE_BITS:
        e = _character_matrix(n) @ d.mass
        sum_sq = float((e * e).sum())
    else:
        # chunk the subset rows so the sign matrix never exceeds ~32 MB
        ys = np.arange(size, dtype=np.uint64)
        chunk = max(1, (1 << 22) // size)
        sum_sq = 0.0
        for start in range(0, size, chunk):
            subs = np.arange(start, min(start + chunk, size), dtype=np.uint64)
            parity = (np.bitwise_count(subs[:, None] & ys[None, :]) & 1)
            signs = 1.0 - 2.0 * parity.astype(np.float64)
            e = signs @ d.mass
            sum_sq += float((e * e).sum())
    lhs = sum_sq / size
    rhs = float((d.mass**2).sum())
    return lhs, rhs


class LeakageEntropyResult(NamedTuple):
    mean_fiber_entropy: float
    bound: float
    tail_prob: float
    tail_bound: float


def leakage_entropy_check(lt: LeakageTable, tail_m: float) -> LeakageEntropyResult:
    """Exact mean fiber log-size and tail probability for a uniform point."""
    counts = np.bincount(lt.table, minlength=1 << lt.l0)
    sizes = counts[counts > 0].astype(np.float64)
    probs = sizes / (1 << lt.n0)
    log_sizes = np.log2(sizes)
    mean = float((probs * log_sizes).sum())
    bound = float(lt.n0 - lt.l0)
    tail_prob = float(probs[log_sizes < bound - tail_m].sum())
    return LeakageEntropyResult(mean, bound, tail_prob, 2.0 ** (-tail_m))


def decomposition_check(
    subset: Iterable[int], n0: Optional[int] = None
) -> Tuple[float, float]:
    """Per-bit entropy sum vs. log2|S| for a uniform point of S.

    ``n0`` defaults to the smallest width containing every element; wider
    widths only add h(0) = 0 terms and cannot change the sum.
    """
    elems = sorted(set(int(x) for x in subset))
    if not elems:
        raise ValueError("subset must be nonempty")
    if elems[0] < 0:
        raise ValueError("subset elements must be nonnegative")
    if n0 is None:
        n0 = max(1, elems[-1].bit_length())
    if n0 > _MAX_TABLE_BITS:
        raise ValueError(f"n0 = {n0} too large (max {_MAX_TABLE_BITS})")
    if elems[-1] >> n0:
        raise ValueError(f"subset element {elems[-1]} does not fit in {n0} bits")
    arr = np.array(elems, dtype=np.int64)
    size = len(elems)
    bit_entropy_sum = 0.0
    for i in range(n0):
        ones = int(((arr >> i) & 1).sum())
        bit_entropy_sum += float(entropy_h(ones / size))
    return bit_entropy_sum, math.log2(size)


@dataclass(frozen=True)
class MainLemmaResult:
    """Expected probed-pattern collision mass next to its entropy bound."""

    expected_g: float
    bound: float
    bound_valid: bool
    alpha: float


def main_lemma_check(lt: LeakageTable, leak_value: int, k: int) -> MainLemmaResult:
    """Exact expected collision mass of k probed bits on one fiber.

    Enumerates all n0^k probe tuples (probes uniform with replacement over
    bit positions) and, per tuple, the exact pattern distribution of the
    probed bits for a uniform fiber element.  The bound uses the fiber's
    own alpha = n0 - log2|fiber|; when (alpha + k)/n0 > 1 the bound's
    domain is empty and the result is flagged instead of asserted.
    """
    n0 = lt.n0
    if k < 1:
        raise ValueError("k must be at least 1")
    if n0 > _MAX_FIBER_BITS:
        raise ValueError(f"n0 = {n0} too large to enumerate (max {_MAX_FIBER_BITS})")
    if k > _MAX_SUBSET_PROBES:
        raise ValueError(f"k = {k} too large to enumerate (max {_MAX_SUBSET_PROBES})")
    if (n0**k) * (1 << n0) > _ENUM_OP_CAP:
        raise ValueError(
            f"n0^k * 2^n0 = {(n0 ** k) * (1 << n0)} exceeds the enumeration budget"
        )
    fiber = lt.fiber(leak_value)
    if fiber.size == 0:
        raise ValueError(f"no domain point maps to leak value {leak_value}")
    size = int(fiber.size)
    alpha = n0 - math.log2(size)
    z = 1.0 - (alpha + k) / n0
    bound_valid = z >= -1e-15
    if bound_valid:
        bound = float(entropy_h_inv(max(z, 0.0)) ** k)
    else:
        bound = math.nan
    bits = ((fiber[None, :] >> np.arange(n0)[:, None]) & 1).astype(np.int64)
    total = 0.0
    for tup in itertools.product(range(n0), repeat=k):
        idx = np.zeros(size, dtype=np.int64)
        for j, pos in enumerate(tup):
            idx |= bits[pos] << j
        counts = np.bincount(idx, minlength=1 << k)
        total += float(((counts / size) ** 2).sum())
    expected_g = total / n0**k
    return MainLemmaResult(expected_g, bound, bound_valid, alpha)


def distinct_probe_collision_mass(n0: int, k: int) -> float:
    """Combinatorial oracle for the full-space expected collision mass.

    With the key uniform on all of {0,1}^n0, a probe tuple hitting d
    distinct positions has collision mass exactly 2^-d, so the expectation
    over tuples is sum_d P(d distinct among k draws) * 2^-d.  Used as an
    independent cross-check of ``main_lemma_check``'s enumeration.
    """

    @lru_cache(maxsize=None)
    def stirling2(n: int, j: int) -> int:
        if n == j:
            return 1
        if j == 0 or j > n:
            return 0
        return j * stirling2(n - 1, j) + stirling2(n - 1, j - 1)

    total = 0.0
    for d in range(1, k + 1):
        ways = math.comb(n0, d) * stirling2(k, d) * math.factorial(d)
        total += ways / n0**k * 2.0**-d
    return total


class BiasEstimate(NamedTuple):
    empirical_tv: float
    corollary_bound: float


def bias_estimate(
    key: BigKey,
    oracle: Oracle,
    lt: Optional[LeakageTable],
    trials: int,
    params: CipherParams,
    seed: int = 0,
) -> BiasEstimate:
    """Monte Carlo bias of the round-function bit over distinct queries.

    Draws ``trials`` distinct (round input, round) pairs, evaluates the
    round-function bit for each, and reports |freq(1) - 1/2| next to the
    half-root-collision-mass bound averaged over the same draws.  With
    ``lt`` given, the bound conditions on the fiber of the actual key
    (which must then be small enough to enumerate); without it, the bound
    uses the exact unconditioned value 2^-(distinct probe count).
    """
    if trials < 10**4:
        raise ValueError("trials must be at least 10^4 for a meaningful estimate")
    if key.n_bits != params.n_bits:
        raise ValueError(
            f"key has {key.n_bits} bits but params expect {params.n_bits}"
        )
    m = params.msg_bits
    if lt is not None:
        if lt.n0 != key.n_bits:
            raise ValueError("leakage table domain must match the key size")
        if key.n_bits > _MAX_FIBER_BITS:
            raise ValueError(
                f"conditioning needs key size <= {_MAX_FIBER_BITS} bits"
            )
        if params.num_probes > 63:
            raise ValueError("conditioning supports at most 63 probes")
        x0 = sum(key.get_bit(i) << (i - 1) for i in range(1, key.n_bits + 1))
        fiber = lt.fiber(int(lt.table[x0]))
        bits = ((fiber[None, :] >> np.arange(lt.n0)[:, None]) & 1).astype(np.int64)
        fiber_size = int(fiber.size)
    max_round = 1 << 16
    if (1 << (m - 1)) * (max_round - 1) < 2 * trials:
        raise ValueError("message width too small for this many distinct queries")
    rng = random.Random(seed)
    seen = set()
    ones = 0
    bound_acc = 0.0
    while len(seen) < trials:
        r_value = rng.getrandbits(m - 1)
        round_index = rng.randrange(1, max_round)
        if (r_value, round_index) in seen:
            continue
        seen.add((r_value, round_index))
        r_bits = BitString.from_bytes(
            r_value.to_bytes((m - 1 + 7) // 8, "little"), m - 1
        )
        draw = derive_probes(oracle, r_bits, round_index, params)
        ones += draw_bit(key, draw)
        if lt is None:
            d = len(set(draw.probes))
            bound_acc += 0.5 * 2.0 ** (-d / 2.0)
        else:
            idx = np.zeros(fiber_size, dtype=np.int64)
            for j, p in enumerate(draw.probes):
                idx |= bits[p - 1] << j
            _, counts = np.unique(idx, return_counts=True)
            g = float(((counts / fiber_size) ** 2).sum())
            bound_acc += 0.5 * math.sqrt(g)
    return BiasEstimate(abs(ones / trials - 0.5), bound_acc / trials)


# ---------------------------------------------------------------------------
# suites


def run_parseval_suite(max_n: int = 10, per_n: int = 500, seed: int = 101,
                       **_ignored) -> List[CheckResult]:
    results = []
    for name, d, note in (
        ("parseval/point-mass", DistributionTable.point_mass(4, 5),
         "deterministic outcome, both sides 1"),
        ("parseval/uniform", DistributionTable.uniform(4),
         "uniform outcome, both sides 2^-n"),
    ):
        lhs, rhs = parseval_check(d)
        diff = abs(lhs - rhs)
        results.append(CheckResult(name, diff, 1e-12, diff <= 1e-12, note))
    rng = np.random.default_rng(seed)
    for n in range(1, max_n + 1):
        worst = 0.0
        for _ in range(per_n):
            lhs, rhs = parseval_check(DistributionTable.random(n, rng))
            worst = max(worst, abs(lhs - rhs))
        results.append(CheckResult(
            f"parseval/random-n{n}", worst, 1e-12, worst <= 1e-12,
            f"worst |lhs-rhs| over {per_n} random distributions",
        ))
    return results


def run_fiber_entropy_suite(count: int = 100, n0: int = 10, l0: int = 3,
                            tail_m: float = 2.0, seed: int = 202,
                            **_ignored) -> List[CheckResult]:
    results = []
    r = leakage_entropy_check(LeakageTable.projection(4, 2), tail_m)
    diff = abs(r.mean_fiber_entropy - r.bound)
    results.append(CheckResult(
        "fiber-entropy/projection", diff, 1e-12, diff <= 1e-12,
        "balanced fibers: mean equals n0 - l0 exactly",
    ))
    r = leakage_entropy_check(LeakageTable.constant(4, 2), tail_m)
    results.append(CheckResult(
        "fiber-entropy/constant", r.mean_fiber_entropy, r.bound,
        r.mean_fiber_entropy >= r.bound and r.tail_prob == 0.0,
        "single full fiber",
    ))
    rng = np.random.default_rng(seed)
    min_mean = math.inf
    max_tail = 0.0
    for _ in range(count):
        r = leakage_entropy_check(LeakageTable.random(n0, l0, rng), tail_m)
        min_mean = min(min_mean, r.mean_fiber_entropy)
        max_tail = max(max_tail, r.tail_prob)
    results.append(CheckResult(
        "fiber-entropy/random-mean", min_mean, float(n0 - l0),
        min_mean >= n0 - l0,
        f"worst mean fiber entropy over {count} random maps",
    ))
    results.append(CheckResult(
        "fiber-entropy/random-tail", max_tail, 2.0 ** (-tail_m),
        max_tail <= 2.0 ** (-tail_m),
        f"worst tail probability at offset {tail_m}",
    ))
    return results


def run_decomposition_suite(count: int = 100, n0: int = 8, seed: int = 303,
                            **_ignored) -> List[CheckResult]:
    results = []
    s, e = decomposition_check(range(1 << n0), n0)
    diff = abs(s - e)
    results.append(CheckResult(
        "decomposition/full-space", diff, 1e-12, diff <= 1e-12,
        "independent uniform bits: equality",
    ))
    s, e = decomposition_check([37], n0)
    results.append(CheckResult(
        "decomposition/singleton", abs(s - e), 1e-12, abs(s - e) <= 1e-12,
        "deterministic bits: both sides 0",
    ))
    rng = np.random.default_rng(seed)
    worst_margin = math.inf
    for _ in range(count):
        size = int(rng.integers(1, (1 << n0) + 1))
        elems = rng.choice(1 << n0, size=size, replace=False)
        s, e = decomposition_check(elems, n0)
        worst_margin = min(worst_margin, s - e)
    results.append(CheckResult(
        "decomposition/random", worst_margin, -1e-12, worst_margin >= -1e-12,
        f"worst (bit entropy sum - log2|S|) over {count} random subsets",
    ))
    return results


def run_collision_suite(n0: int = 8, ks: Sequence[int] = (1, 2, 3),
                        num_tables: int = 20, l0_values: Sequence[int] = (1, 2),
                        seed: int = 404, **_ignored) -> List[CheckResult]:
    results = []
    constant = LeakageTable.constant(n0, 1)
    for k in ks:
        res = main_lemma_check(constant, 0, k)
        oracle_value = distinct_probe_collision_mass(n0, k)
        diff = abs(res.expected_g - oracle_value)
        results.append(CheckResult(
            f"collision/full-space-k{k}", diff, 1e-12, diff <= 1e-12,
            "enumeration vs combinatorial oracle",
        ))
    singleton = LeakageTable(2, 2, np.arange(4))
    res = main_lemma_check(singleton, 0, 1)
    results.append(CheckResult(
        "collision/singleton-flagged", res.expected_g, 1.0,
        (not res.bound_valid) and res.expected_g == 1.0,
        "deterministic key: bound domain empty, flagged not asserted",
    ))
    rng = np.random.default_rng(seed)
    tables = [
        LeakageTable.random(n0, l0_values[i % len(l0_values)], rng)
        for i in range(num_tables)
    ]
    for k in ks:
        worst_excess = -math.inf
        checked = 0
        skipped = 0
        for lt in tables:
            for leak_value in lt.fibers():
                res = main_lemma_check(lt, leak_value, k)
                if not res.bound_valid:
                    skipped += 1
                    continue
                checked += 1
                worst_excess = max(worst_excess, res.expected_g - res.bound)
        results.append(CheckResult(
            f"collision/random-k{k}", worst_excess, 1e-12,
            worst_excess <= 1e-12,
            f"worst (expected_g - bound) over {checked} fibers"
            + (f", {skipped} invalid-domain skipped" if skipped else ""),
        ))
    return results


def run_bias_suite(seed: int = 505, trials: int = 10**4,
                   **_ignored) -> List[CheckResult]:
    results = []
    zero_key = BigKey.generate(16, b"\x00\x00")
    params16 = CipherParams(n_bits=16, msg_bits=9, num_probes=8, rounds=17)
    est = bias_estimate(zero_key, Shake256Oracle(), None, trials, params16,
                        seed=seed)
    results.append(CheckResult(
        "bias/zero-key", est.empirical_tv, 0.5, est.empirical_tv == 0.5,
        "all-zero key: bit is constant 0",
    ))
    key16 = BigKey.generate(16, seed_randomness(2, seed))
    est = bias_estimate(key16, ScriptedOracle(default_script=b""), None,
                        trials, params16, seed=seed + 1)
    results.append(CheckResult(
        "bias/empty-subset", est.empirical_tv, 0.5, est.empirical_tv == 0.5,
        "scripted all-zero stream selects the empty subset",
    ))
    n = 1 << 14
    key = BigKey.generate(n, seed_randomness(n // 8, seed + 2))
    params = CipherParams(n_bits=n, msg_bits=16, num_probes=64, rounds=31)
    threshold = 4.0 * math.sqrt(0.25 / trials)
    est = bias_estimate(key, Shake256Oracle(), None, trials, params,
                        seed=seed + 3)
    results.append(CheckResult(
        "bias/uniform-key", est.empirical_tv, threshold,
        est.empirical_tv <= threshold,
        f"4-sigma binomial threshold at {trials} trials",
    ))
    key12 = BigKey.generate(12, seed_randomness(2, seed + 4))
    lt = LeakageTable.random(12, 3, np.random.default_rng(seed + 5))
    params12 = CipherParams(n_bits=12, msg_bits=10, num_probes=8, rounds=19)
    est = bias_estimate(key12, Shake256Oracle(), lt, trials, params12,
                        seed=seed + 6)
    floor_bound = 0.5 * 2.0 ** (-params12.num_probes / 2.0)
    ok = floor_bound - 1e-12 <= est.corollary_bound <= 0.5 + 1e-12
    results.append(CheckResult(
        "bias/conditioned-bound-range", est.corollary_bound, 0.5, ok,
        "half root collision mass lies in [2^(-k/2)/2, 1/2]",
    ))
    return results


SUITES = {
    "parseval": run_parseval_suite,
    "fiber-entropy": run_fiber_entropy_suite,
    "decomposition": run_decomposition_suite,
    "collision": run_collision_suite,
    "bias": run_bias_suite,
}


def render_report(results: Iterable[CheckResult]) -> str:
    lines = []
    failed = 0
    total = 0
    for r in results:
        total += 1
        if not r.passed:
            failed += 1
        line = (f"{'PASS' if r.passed else 'FAIL'}  {r.name}  "
                f"lhs={r.lhs:.6g}  rhs={r.rhs:.6g}")
        if r.note:
            line += f"  ({r.note})"
        lines.append(line)
    lines.append(
        f"{total - failed}/{total} checks passed"
        if not failed else f"{failed}/{total} checks FAILED"
    )
    return "\n".join(lines)


def report_rows(results: Iterable[CheckResult]) -> List[dict]:
    """Machine-readable summary rows."""
    return [
        {"name": r.name, "lhs": r.lhs, "rhs": r.rhs, "pass": r.passed,
         "note": r.note}
        for r in results
    ]
