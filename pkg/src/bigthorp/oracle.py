"""Deterministic byte-stream oracles addressed by structured queries.

Every randomized choice in the cipher is driven by an extendable output
stream keyed on a query.  A query names a domain tag, a round number, the
message width, and the round input, and serializes to a fixed, injective
byte layout::

    tag (1 byte) || round (8 bytes, big-endian) || msg_bits (2 bytes,
    big-endian) || round input as a big-endian integer in
    ceil((msg_bits - 1) / 8) bytes

Widths are fixed by the msg_bits field, so distinct queries can never
serialize to the same bytes.  Streams must be prefix-consistent: asking
for n bytes and then n + j bytes returns the same first n bytes.

Two backends are provided.  ``Shake256Oracle`` is the production backend
(SHAKE-256 over the serialized query).  ``ScriptedOracle`` is for tests:
individual queries can be pinned to exact byte scripts, a default script
can blanket everything else, and any query with no script at all falls
back to a seeded pseudorandom stream that is stable across processes.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .bitstring import BitString

PROBE_TAG = 0x01
KEYGEN_TAG = 0x02

_MAX_ROUND = 2**64 - 1
_MAX_MSG_BITS = 2**16 - 1


@dataclass(frozen=True)
class OracleQuery:
    """One oracle invocation: (tag, round, msg_bits, round input)."""

    tag: int
    round: int
    msg_bits: int
    r_bits: BitString

    def __post_init__(self):
        if not 0 <= self.tag <= 0xFF:
            raise ValueError(f"tag {self.tag} out of range 0..255")
        if not 0 <= self.round <= _MAX_ROUND:
            raise ValueError(f"round {self.round} does not fit in 8 bytes")
        if not 1 <= self.msg_bits <= _MAX_MSG_BITS:
            raise ValueError(f"msg_bits {self.msg_bits} out of range 1..65535")
        if len(self.r_bits) != self.msg_bits - 1:
            raise ValueError(
                f"round input has {len(self.r_bits)} bits, expected "
                f"{self.msg_bits - 1}"
            )

    def to_bytes(self) -> bytes:
        nbytes = (self.msg_bits - 1 + 7) // 8
        return (
            bytes([self.tag])
            + self.round.to_bytes(8, "big")
            + self.msg_bits.to_bytes(2, "big")
            + self.r_bits.to_int().to_bytes(nbytes, "big")
        )


class Oracle:
    """Base class: stream dispatch plus a thread-safe distinct-query counter."""

    identifier = "abstract"

    def __init__(self):
        self._seen = set()
        self._lock = threading.Lock()

    @property
    def query_count(self) -> int:
        """Number of distinct queries streamed so far."""
        with self._lock:
            return len(self._seen)

    def stream(self, query: OracleQuery, n: int) -> bytes:
        if n < 0:
            raise ValueError("stream length must be nonnegative")
        qbytes = query.to_bytes()
        with self._lock:
            self._seen.add(qbytes)
        return self._stream(qbytes, n)

    def _stream(self, query_bytes: bytes, n: int) -> bytes:
        raise NotImplementedError


class Shake256Oracle(Oracle):
    """Production backend: SHAKE-256 XOF over the serialized query."""

    identifier = "shake256"

    def _stream(self, query_bytes: bytes, n: int) -> bytes:
        return hashlib.shake_256(query_bytes).digest(n)


ScriptKey = Union[OracleQuery, bytes]


class ScriptedOracle(Oracle):
    """Test backend with pinned responses.

    ``scripts`` maps individual queries (or their serialized bytes) to
    response bodies; a body shorter than the requested stream is
    zero-extended, so ``b""`` means an all-zero stream.  ``default_script``
    plays the same role for every query without an entry.  Queries with no
    script anywhere get a seeded pseudorandom stream, making a bare
    ``ScriptedOracle(seed=s)`` a deterministic stand-in for a random
    function that is reproducible across processes (unlike ``hash()``).
    """

    identifier = "scripted"

    def __init__(
        self,
        scripts: Optional[Mapping[ScriptKey, bytes]] = None,
        default_script: Optional[bytes] = None,
        seed: int = 0,
    ):
        super().__init__()
        if not 0 <= seed <= _MAX_ROUND:
            raise ValueError("seed must fit in 8 bytes")
        self._scripts = {}
        for key, body in (scripts or {}).items():
            kb = key.to_bytes() if isinstance(key, OracleQuery) else bytes(key)
            self._scripts[kb] = bytes(body)
        self._default = None if default_script is None else bytes(default_script)
        self._seed = seed

    def _stream(self, query_bytes: bytes, n: int) -> bytes:
        body = self._scripts.get(query_bytes, self._default)
        if body is None:
            material = (
                b"bigthorp.scripted\x00"
                + self._seed.to_bytes(8, "big")
                + query_bytes
            )
            return hashlib.shake_256(material).digest(n)
        if n <= len(body):
            return body[:n]
        return body + b"\x00" * (n - len(body))
