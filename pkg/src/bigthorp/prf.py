"""Round function: oracle-derived probes into the key, XOR of a subset.

One round-function evaluation on round input R at round r proceeds as:

1. Stream bytes from the oracle under the probe domain tag for (r, R).
2. Decode k probe positions in 1..N from consecutive 8-byte big-endian
   words by rejection sampling (reject u >= N * floor(2^64 / N), else
   take (u mod N) + 1), so every position is exactly equally likely.
   Rejected words are skipped; probes are drawn with replacement.
3. Decode a k-bit subset mask from the next ceil(k / 8) stream bytes
   under the packing convention (mask bit j selects probe j).
4. The output bit is the XOR of the key bits at the selected probes; an
   empty selection gives 0.

The stream is fetched in one initial request sized for the no-rejection
case and extended in 512-byte steps when rejections run past it; because
oracle streams are prefix-consistent this re-request changes nothing that
was already decoded.  A run of 1000 consecutive rejections aborts, since
for any N >= 1 the accept probability per word exceeds 1/2 and such a run
indicates a broken oracle backend rather than bad luck.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .bigkey import BigKey
from .bitstring import BitString
from .oracle import PROBE_TAG, Oracle, OracleQuery

REJECTION_CAP = 1000
_WORD = 8
_B = 1 << 64
_EXTEND = 512


@dataclass(frozen=True)
class CipherParams:
    """Cipher shape: key size, message width, probes per round, rounds.

    ``rounds`` may be given directly, or derived from a pass count via
    ``from_passes`` (one pass is 2 * msg_bits - 1 rounds).  ``rounds = 0``
    is legal and makes the cipher the identity map.
    """

    n_bits: int
    msg_bits: int
    num_probes: int
    rounds: int
    passes: Optional[int] = None

    def __post_init__(self):
        if not 1 <= self.n_bits <= _B:
            raise ValueError(f"n_bits {self.n_bits} out of range 1..2^64")
        if not 2 <= self.msg_bits <= 2**16 - 1:
            raise ValueError(f"msg_bits {self.msg_bits} out of range 2..65535")
        if self.num_probes < 1:
            raise ValueError("num_probes must be at least 1")
        if self.rounds < 0:
            raise ValueError("rounds must be nonnegative")
        if self.passes is not None:
            if self.passes < 1:
                raise ValueError("passes must be at least 1 when given")
            derived = self.passes * (2 * self.msg_bits - 1)
            if self.rounds != derived:
                raise ValueError(
                    f"rounds {self.rounds} inconsistent with passes "
                    f"{self.passes} (expected {derived})"
                )

    @classmethod
    def from_passes(
        cls, n_bits: int, msg_bits: int, num_probes: int, passes: int
    ) -> "CipherParams":
        if passes < 1:
            raise ValueError("passes must be at least 1")
        return cls(
            n_bits=n_bits,
            msg_bits=msg_bits,
            num_probes=num_probes,
            rounds=passes * (2 * msg_bits - 1),
            passes=passes,
        )


@dataclass(frozen=True)
class ProbeDraw:
    """Decoded oracle output for one round-function call."""

    probes: Tuple[int, ...]
    subset_mask: BitString

    def __post_init__(self):
        if len(self.subset_mask) != len(self.probes):
            raise ValueError(
                f"subset mask has {len(self.subset_mask)} bits for "
                f"{len(self.probes)} probes"
            )

    def subset_indices(self) -> Tuple[int, ...]:
        """1-based indices of the selected probes."""
        return tuple(
            i for i in range(1, len(self.probes) + 1)
            if self.subset_mask.get_bit(i)
        )


def derive_probes(
    oracle: Oracle, r_bits: BitString, round_index: int, params: CipherParams
) -> ProbeDraw:
    """Decode the probe positions and subset mask for (round, input)."""
    if round_index < 1:
        raise ValueError("round_index must be at least 1")
    if len(r_bits) != params.msg_bits - 1:
        raise ValueError(
            f"round input has {len(r_bits)} bits, expected {params.msg_bits - 1}"
        )
    query = OracleQuery(PROBE_TAG, round_index, params.msg_bits, r_bits)
    k = params.num_probes
    n = params.n_bits
    mask_bytes = (k + 7) // 8
    threshold = n * (_B // n)

    need = _WORD * k + mask_bytes
    buf = oracle.stream(query, need)
    probes = []
    pos = 0
    consecutive = 0
    while len(probes) < k:
        if pos + _WORD > len(buf):
            need += _EXTEND
            buf = oracle.stream(query, need)
        word = int.from_bytes(buf[pos : pos + _WORD], "big")
        pos += _WORD
        if word >= threshold:
            consecutive += 1
            if consecutive >= REJECTION_CAP:
                raise RuntimeError(
                    f"{REJECTION_CAP} consecutive rejections while sampling "
                    f"probes; oracle backend is not producing uniform bytes"
                )
            continue
        consecutive = 0
        probes.append(word % n + 1)
    if pos + mask_bytes > len(buf):
        buf = oracle.stream(query, pos + mask_bytes)
    masked = int.from_bytes(buf[pos : pos + mask_bytes], "little")
    masked &= (1 << k) - 1
    mask = BitString.from_bytes(masked.to_bytes(mask_bytes, "little"), k)
    return ProbeDraw(tuple(probes), mask)


def draw_bit(key: BigKey, draw: ProbeDraw) -> int:
    """XOR of the key bits selected by an already-decoded draw."""
    sub = key.subkey(draw.probes)
    out = 0
    for i in draw.subset_indices():
        out ^= sub.get_bit(i)
    return out


def prf_bit(
    key: BigKey,
    oracle: Oracle,
    r_bits: BitString,
    round_index: int,
    params: CipherParams,
) -> int:
    """Full round-function bit for round input ``r_bits`` at ``round_index``."""
    if key.n_bits != params.n_bits:
        raise ValueError(
            f"key has {key.n_bits} bits but params expect {params.n_bits}"
        )
    return draw_bit(key, derive_probes(oracle, r_bits, round_index, params))
