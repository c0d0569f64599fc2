"""Adaptive order-0 range coding.

A carryless byte-oriented range coder with 64-bit state, paired with an
adaptive frequency model (Laplace-initialised counts, fixed increment,
periodic halving). Everything is integer arithmetic, so identical inputs
produce bit-identical payloads on every platform.

One encoder or decoder instance per stream; instances hold mutable model
state and must not be shared. Distinct streams can be coded in parallel.
"""

from __future__ import annotations

import numpy as np

from .errors import CorruptPayloadError, InvalidInputError, TruncatedPayloadError

_STATE_BITS = 64
_MASK = (1 << _STATE_BITS) - 1
_TOP = 1 << (_STATE_BITS - 8)   # renormalise when the top byte settles
_BOT = 1 << (_STATE_BITS - 16)  # minimum range before forced truncation
_FLUSH_BYTES = 8

# Model tuning: counts start at 1 so every symbol stays codable, each coded
# symbol bumps its count by 32, and all counts are halved (rounding up) once
# the total passes 2^16. Alphabets larger than 2^15 would make that ceiling
# unreachable (the floor of all-ones already exceeds it), so the trigger is
# lifted to 2*n there; totals stay far below the coder's precision limit.
_INCREMENT = 32
_MAX_TOTAL = 1 << 16


class AdaptiveModel:
    """Order-0 adaptive frequencies over [0, alphabet_size), Fenwick-backed."""

    def __init__(self, alphabet_size: int):
        if alphabet_size < 2:
            raise InvalidInputError(f"alphabet_size must be >= 2, got {alphabet_size}")
        self.n = alphabet_size
        self.max_total = max(_MAX_TOTAL, 2 * alphabet_size)
        self._counts = [1] * alphabet_size
        self.total = alphabet_size
        self._build_tree()

    def _build_tree(self):
        # Fenwick tree over _counts, 1-indexed.
        n = self.n
        tree = [0] * (n + 1)
        for i in range(1, n + 1):
            tree[i] += self._counts[i - 1]
            parent = i + (i & -i)
            if parent <= n:
                tree[parent] += tree[i]
        self._tree = tree
        self._topbit = 1 << (n.bit_length() - 1)

    def interval(self, symbol: int) -> tuple[int, int]:
        """Cumulative (low, high) counts of `symbol`."""
        tree = self._tree
        lo = 0
        i = symbol
        while i > 0:
            lo += tree[i]
            i -= i & -i
        return lo, lo + self._counts[symbol]

    def locate(self, cum: int) -> tuple[int, int, int]:
        """Symbol whose cumulative interval contains `cum`, with that interval."""
        tree = self._tree
        n = self.n
        idx = 0
        rest = cum
        bit = self._topbit
        while bit:
            nxt = idx + bit
            if nxt <= n and tree[nxt] <= rest:
                rest -= tree[nxt]
                idx = nxt
            bit >>= 1
        lo = cum - rest
        return idx, lo, lo + self._counts[idx]

    def update(self, symbol: int):
        self._counts[symbol] += _INCREMENT
        self.total += _INCREMENT
        i = symbol + 1
        tree = self._tree
        n = self.n
        while i <= n:
            tree[i] += _INCREMENT
            i += i & -i
        if self.total > self.max_total:
            self._halve()

    def _halve(self):
        counts = self._counts
        total = 0
        for i, c in enumerate(counts):
            c = (c + 1) >> 1
            counts[i] = c
            total += c
        self.total = total
        self._build_tree()


class RangeEncoder:
    def __init__(self):
        self._low = 0
        self._range = _MASK
        self._out = bytearray()

    def encode(self, cum_lo: int, cum_hi: int, total: int):
        r = self._range // total
        low = self._low + r * cum_lo
        rng = r * (cum_hi - cum_lo)
        out = self._out
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass  # top byte settled, safe to emit
            elif rng < _BOT:
                rng = (-low) & (_BOT - 1)  # truncate to the next alignment
            else:
                break
            out.append(low >> (_STATE_BITS - 8))
            low = (low << 8) & _MASK
            rng <<= 8
        self._low = low
        self._range = rng

    def finish(self) -> bytes:
        low = self._low
        out = self._out
        for _ in range(_FLUSH_BYTES):
            out.append(low >> (_STATE_BITS - 8))
            low = (low << 8) & _MASK
        return bytes(out)


class RangeDecoder:
    def __init__(self, payload: bytes):
        self._data = payload
        self._pos = 0
        self._low = 0
        self._range = _MASK
        code = 0
        for _ in range(_FLUSH_BYTES):
            code = (code << 8) | self._next_byte()
        self._code = code

    def _next_byte(self) -> int:
        if self._pos >= len(self._data):
            raise TruncatedPayloadError(
                f"payload exhausted after {len(self._data)} bytes"
            )
        b = self._data[self._pos]
        self._pos += 1
        return b

    def decode_target(self, total: int) -> int:
        """Cumulative count the next symbol's interval must contain."""
        self._r = self._range // total
        target = (self._code - self._low) // self._r
        if not 0 <= target < total:
            raise CorruptPayloadError("decoded cumulative count out of range")
        return target

    def consume(self, cum_lo: int, cum_hi: int):
        r = self._r
        low = self._low + r * cum_lo
        rng = r * (cum_hi - cum_lo)
        code = self._code
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = (-low) & (_BOT - 1)
            else:
                break
            code = ((code << 8) & _MASK) | self._next_byte()
            low = (low << 8) & _MASK
            rng <<= 8
        self._low = low
        self._range = rng
        self._code = code


def entropy_encode(symbols, alphabet_size: int) -> bytes:
    """Losslessly code a symbol sequence with a fresh adaptive model."""
    if alphabet_size < 2:
        raise InvalidInputError(f"alphabet_size must be >= 2, got {alphabet_size}")
    syms = np.asarray(symbols, dtype=np.int64).ravel()
    if syms.size and (syms.min() < 0 or syms.max() >= alphabet_size):
        raise InvalidInputError("symbol outside [0, alphabet_size)")
    model = AdaptiveModel(alphabet_size)
    enc = RangeEncoder()
    interval = model.interval
    update = model.update
    encode = enc.encode
    for s in syms.tolist():
        lo, hi = interval(s)
        encode(lo, hi, model.total)
        update(s)
    return enc.finish()


def entropy_decode(payload: bytes, count: int, alphabet_size: int) -> np.ndarray:
    """Recover exactly `count` symbols written by :func:`entropy_encode`."""
    if alphabet_size < 2:
        raise InvalidInputError(f"alphabet_size must be >= 2, got {alphabet_size}")
    if count < 0:
        raise InvalidInputError(f"count must be >= 0, got {count}")
    model = AdaptiveModel(alphabet_size)
    dec = RangeDecoder(payload)
    out = np.empty(count, dtype=np.int64)
    locate = model.locate
    update = model.update
    for i in range(count):
        target = dec.decode_target(model.total)
        sym, lo, hi = locate(target)
        dec.consume(lo, hi)
        update(sym)
        out[i] = sym
    return out
