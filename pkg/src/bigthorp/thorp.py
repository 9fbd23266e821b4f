"""The cipher: a maximally unbalanced Feistel network over m-bit strings.

Each round peels the first bit L off the state, keeps the remaining
m - 1 bits R, and re-appends L masked by the round-function bit::

    forward:  L || R  ->  R || (L xor F(R, r))

Since R passes through unchanged, the inverse round recomputes the same
F(R, r) from the output's first m - 1 bits and unmasks the final bit, so
every round (and hence the whole cipher) is a permutation no matter what
F is.  Encryption runs rounds 1..T in order; decryption runs the same
rounds in reverse.  T = 0 is the identity map.
"""

from __future__ import annotations

from .bigkey import BigKey
from .bitstring import BitString
from .oracle import Oracle
from .prf import CipherParams, prf_bit


def _check(state: BitString, key: BigKey, params: CipherParams):
    if len(state) != params.msg_bits:
        raise ValueError(
            f"state has {len(state)} bits, params expect {params.msg_bits}"
        )
    if key.n_bits != params.n_bits:
        raise ValueError(
            f"key has {key.n_bits} bits but params expect {params.n_bits}"
        )


def round_forward(
    state: BitString,
    round_index: int,
    key: BigKey,
    oracle: Oracle,
    params: CipherParams,
) -> BitString:
    _check(state, key, params)
    left, rest = state.split_lr()
    f = prf_bit(key, oracle, rest, round_index, params)
    return rest.append_bit(left ^ f)


def round_backward(
    state: BitString,
    round_index: int,
    key: BigKey,
    oracle: Oracle,
    params: CipherParams,
) -> BitString:
    _check(state, key, params)
    rest, masked = state.split_last()
    f = prf_bit(key, oracle, rest, round_index, params)
    return rest.prepend_bit(masked ^ f)


def encrypt(
    message: BitString, key: BigKey, oracle: Oracle, params: CipherParams
) -> BitString:
    _check(message, key, params)
    state = message
    for r in range(1, params.rounds + 1):
        state = round_forward(state, r, key, oracle, params)
    return state


def decrypt(
    ciphertext: BitString, key: BigKey, oracle: Oracle, params: CipherParams
) -> BitString:
    _check(ciphertext, key, params)
    state = ciphertext
    for r in range(params.rounds, 0, -1):
        state = round_backward(state, r, key, oracle, params)
    return state
