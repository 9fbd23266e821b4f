"""Huge bit-addressable keys with a versioned on-disk format.

A key is N random bits that may be far too large to hold in memory, so
reads go through a byte-granular store: ``MemoryStore`` for small keys and
tests, ``FileStore`` for keys used in place on disk (one seek-and-read per
probed byte, never a full-file load), and ``CountingStore`` to wrap either
and count how many byte reads an operation performs.

Key file layout, all integers big-endian::

    magic b"BIGK" | version (1 byte) | id length (1 byte) |
    oracle identifier (ASCII) | N (8 bytes) | ceil(N / 8) key bytes

Key bits follow the package packing convention (bit i at position
(i - 1) % 8 of byte (i - 1) // 8); when N is not a multiple of 8 the
spare positions of the last byte must be zero.  The embedded oracle
identifier pins which stream backend the key was meant for, and loading
fails closed on a bad magic, an unknown version, a mismatched identifier,
a wrong byte count, or dirty padding.
"""

from __future__ import annotations

import os
from typing import Optional

from .bitstring import BitString
from .oracle import KEYGEN_TAG, Oracle, OracleQuery, Shake256Oracle

MAGIC = b"BIGK"
VERSION = 1

_MIN_BITS = 8
_MAX_BITS = 2**64 - 1
_COPY_CHUNK = 1 << 20


class KeyFileError(Exception):
    """Malformed, truncated or otherwise unusable key file."""


class KeyFileVersionError(KeyFileError):
    """Key file declares a format version this code does not speak."""


class OracleMismatchError(KeyFileError):
    """Key file pins a different oracle backend than the caller expects."""


class MemoryStore:
    """Key bytes held in memory."""

    def __init__(self, data: bytes):
        self._data = bytes(data)

    @property
    def n_bytes(self) -> int:
        return len(self._data)

    def read_byte(self, index: int) -> int:
        return self._data[index]

    def read_block(self, start: int, n: int) -> bytes:
        return self._data[start : start + n]

    def close(self):
        pass


class FileStore:
    """Key bytes read from an open file, one probe at a time."""

    def __init__(self, fileobj, offset: int, n_bytes: int):
        self._f = fileobj
        self._offset = offset
        self._n_bytes = n_bytes

    @property
    def n_bytes(self) -> int:
        return self._n_bytes

    def read_byte(self, index: int) -> int:
        if not 0 <= index < self._n_bytes:
            raise IndexError(f"byte index {index} out of range")
        self._f.seek(self._offset + index)
        b = self._f.read(1)
        if len(b) != 1:
            raise KeyFileError("short read from key file")
        return b[0]

    def read_block(self, start: int, n: int) -> bytes:
        self._f.seek(self._offset + start)
        out = self._f.read(n)
        if len(out) != n:
            raise KeyFileError("short read from key file")
        return out

    def close(self):
        self._f.close()


class CountingStore:
    """Wraps a store and counts byte reads, for access-locality tests."""

    def __init__(self, inner):
        self._inner = inner
        self.reads = 0

    @property
    def n_bytes(self) -> int:
        return self._inner.n_bytes

    def read_byte(self, index: int) -> int:
        self.reads += 1
        return self._inner.read_byte(index)

    def read_block(self, start: int, n: int) -> bytes:
        return self._inner.read_block(start, n)

    def close(self):
        self._inner.close()


def seed_randomness(n_bytes: int, seed: int, oracle: Optional[Oracle] = None) -> bytes:
    """Expand a small seed into key material via the key-generation domain.

    This exists so deterministic keys (tests, reproducible CLI runs) come
    from the same oracle family as everything else, under a domain tag that
    the cipher's probe queries never use.
    """
    if oracle is None:
        oracle = Shake256Oracle()
    query = OracleQuery(KEYGEN_TAG, seed, 1, BitString())
    return oracle.stream(query, n_bytes)


def _encode_header(n_bits: int, oracle_id: str) -> bytes:
    ident = oracle_id.encode("ascii")
    if not 1 <= len(ident) <= 255:
        raise ValueError("oracle identifier must be 1..255 ASCII bytes")
    return MAGIC + bytes([VERSION, len(ident)]) + ident + n_bits.to_bytes(8, "big")


class BigKey:
    """An N-bit key behind a byte store, with probe-local access."""

    def __init__(self, n_bits: int, store, oracle_id: str = "shake256"):
        if not _MIN_BITS <= n_bits <= _MAX_BITS:
            raise ValueError(f"key size {n_bits} out of range {_MIN_BITS}..2^64-1")
        needed = (n_bits + 7) // 8
        if store.n_bytes != needed:
            raise ValueError(
                f"store holds {store.n_bytes} bytes, key of {n_bits} bits "
                f"needs {needed}"
            )
        self.n_bits = n_bits
        self.oracle_id = oracle_id
        self.version = VERSION
        self._store = store

    # -- construction ---------------------------------------------------

    @classmethod
    def generate(cls, n_bits: int, randomness, oracle_id: str = "shake256") -> "BigKey":
        """Fill a key from caller-supplied randomness.

        ``randomness`` is either a bytes-like object of at least
        ceil(n_bits / 8) bytes or a reader with a ``read(n)`` method.  The
        key bits are exactly the supplied bytes under the packing
        convention, except that spare padding positions are zeroed.
        """
        if not _MIN_BITS <= n_bits <= _MAX_BITS:
            raise ValueError(f"key size {n_bits} out of range {_MIN_BITS}..2^64-1")
        needed = (n_bits + 7) // 8
        if hasattr(randomness, "read"):
            data = randomness.read(needed)
        else:
            data = bytes(randomness)[:needed]
        if len(data) < needed:
            raise ValueError(
                f"insufficient randomness: need {needed} bytes, got {len(data)}"
            )
        data = bytearray(data)
        if n_bits % 8:
            data[-1] &= (1 << (n_bits % 8)) - 1
        return cls(n_bits, MemoryStore(bytes(data)), oracle_id)

    @classmethod
    def load(
        cls,
        path,
        expected_oracle: Optional[str] = "shake256",
        in_memory: bool = False,
    ) -> "BigKey":
        """Open a key file, validating every header field before use."""
        f = open(path, "rb")
        try:
            magic = f.read(4)
            if magic != MAGIC:
                raise KeyFileError(f"{path}: not a key file (bad magic)")
            vb = f.read(1)
            if len(vb) != 1:
                raise KeyFileError(f"{path}: truncated header")
            if vb[0] != VERSION:
                raise KeyFileVersionError(
                    f"{path}: unsupported key file version {vb[0]}"
                )
            lb = f.read(1)
            if len(lb) != 1:
                raise KeyFileError(f"{path}: truncated header")
            ident_raw = f.read(lb[0])
            if len(ident_raw) != lb[0]:
                raise KeyFileError(f"{path}: truncated header")
            try:
                ident = ident_raw.decode("ascii")
            except UnicodeDecodeError:
                raise KeyFileError(f"{path}: non-ASCII oracle identifier") from None
            nb = f.read(8)
            if len(nb) != 8:
                raise KeyFileError(f"{path}: truncated header")
            n_bits = int.from_bytes(nb, "big")
            if n_bits < _MIN_BITS:
                raise KeyFileError(f"{path}: implausible key size {n_bits}")
            offset = 4 + 1 + 1 + lb[0] + 8
            needed = (n_bits + 7) // 8
            size = os.fstat(f.fileno()).st_size
            if size != offset + needed:
                raise KeyFileError(
                    f"{path}: expected {offset + needed} bytes, file has {size}"
                )
            if n_bits % 8:
                f.seek(offset + needed - 1)
                last = f.read(1)[0]
                if last & ~((1 << (n_bits % 8)) - 1):
                    raise KeyFileError(f"{path}: nonzero padding bits")
            if expected_oracle is not None and ident != expected_oracle:
                raise OracleMismatchError(
                    f"{path}: key pins oracle {ident!r}, expected "
                    f"{expected_oracle!r}"
                )
            if in_memory:
                f.seek(offset)
                data = f.read(needed)
                if len(data) != needed:
                    raise KeyFileError(f"{path}: short read")
                store = MemoryStore(data)
            else:
                store = FileStore(f, offset, needed)
        except Exception:
            f.close()
            raise
        if in_memory:
            f.close()
        return cls(n_bits, store, ident)

    def save(self, path):
        with open(path, "wb") as f:
            f.write(_encode_header(self.n_bits, self.oracle_id))
            total = (self.n_bits + 7) // 8
            pos = 0
            while pos < total:
                n = min(_COPY_CHUNK, total - pos)
                f.write(self._store.read_block(pos, n))
                pos += n

    # -- access ----------------------------------------------------------

    def get_bit(self, i: int) -> int:
        if not 1 <= i <= self.n_bits:
            raise IndexError(f"key bit index {i} out of range 1..{self.n_bits}")
        byte = self._store.read_byte((i - 1) >> 3)
        return (byte >> ((i - 1) & 7)) & 1

    def subkey(self, probes) -> BitString:
        """Read the probed bits, in order, repeats included."""
        bits = []
        for p in probes:
            if not 1 <= p <= self.n_bits:
                raise IndexError(
                    f"probe {p} out of range 1..{self.n_bits}"
                )
            byte = self._store.read_byte((p - 1) >> 3)
            bits.append((byte >> ((p - 1) & 7)) & 1)
        return BitString(bits)

    def close(self):
        self._store.close()

    def __enter__(self) -> "BigKey":
        return self

    def __exit__(self, *exc):
        self.close()
        return False
