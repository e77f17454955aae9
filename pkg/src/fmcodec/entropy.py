"""Bitplane entropy coding of masked map sets over a binary range coder.

Coder: LZMA-style range coder. The encoder keeps a 64-bit ``low`` (bit 32 is
the pending carry), a 32-bit ``range``, and a cache/cache_size carry chain;
it renormalizes whenever range drops below 2^24, emitting bytes most
significant first. The first emitted byte is always 0x00 (an artifact of the
carry chain starting with cache=0, cache_size=1); the decoder skips it.

Probability model: per-context adaptive counts with Laplace smoothing,
p(1) = (c1 + 1) / (c0 + c1 + 2). Once c0 + c1 reaches 1024 both counts halve
(integer division) before the next increment, which bounds p(1) inside
[1/1026, 1025/1026] and therefore the cost of a single decision below
log2(1026) < 10.01 bits.

Scan order (the map-set walk both sides must agree on): channels in order;
within a channel, bitplanes from MSB (d-1) down to 0; within a plane, blocks
in raster order; within a block, samples in raster order. Three flag families
reset per channel: AZB (all-zero-bitplane, starts 1, coded only while no
non-zero plane has been seen; coded bit 1 means "this plane is all zero"),
B per block (starts 0, coded once per plane while 0), S per sample (starts 0,
flips to 1 when the sample first codes a 1). A block that turns significant
has its samples coded in that same plane. Samples not yet significant use one
of three significance contexts keyed by how many of their 4-neighbors are
already significant (saturated at 2); significant samples use the refinement
context. Context probabilities persist across channels and planes within one
payload; only the flags reset.

Everything here is deterministic integer arithmetic: identical inputs yield
byte-identical payloads on any platform.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .model import CodecParams, MaskedMapSet

__all__ = [
    "CTX_ALL_ZERO",
    "CTX_BLOCK",
    "CTX_SIG_BASE",
    "CTX_REFINE",
    "NUM_CONTEXTS",
    "COUNT_HALVING_LIMIT",
    "ContextModel",
    "RangeEncoder",
    "RangeDecoder",
    "encode_maps",
    "decode_maps",
]

U32_MASK = 0xFFFFFFFF
RENORM_LIMIT = 1 << 24
COUNT_HALVING_LIMIT = 1024

CTX_ALL_ZERO = 0
CTX_BLOCK = 1
CTX_SIG_BASE = 2  # +0, +1, +2 significant 4-neighbors
CTX_REFINE = 5
NUM_CONTEXTS = 6


@njit(cache=True)
def _shift_low(low, cache, cache_size, buf, pos):
    if (low & U32_MASK) < 0xFF000000 or low > U32_MASK:
        carry = low >> 32
        buf[pos] = (cache + carry) & 0xFF
        pos += 1
        for _ in range(cache_size - 1):
            buf[pos] = (0xFF + carry) & 0xFF
            pos += 1
        cache = (low >> 24) & 0xFF
        cache_size = 0
    cache_size += 1
    low = (low << 8) & U32_MASK
    return low, cache, cache_size, pos


@njit(cache=True)
def _update_counts(ctx, cid, bit):
    c0 = ctx[cid, 0]
    c1 = ctx[cid, 1]
    if c0 + c1 >= COUNT_HALVING_LIMIT:
        c0 >>= 1
        c1 >>= 1
    if bit:
        c1 += 1
    else:
        c0 += 1
    ctx[cid, 0] = c0
    ctx[cid, 1] = c1


@njit(cache=True)
def _encode_bit(low, rng, cache, cache_size, pos, buf, ctx, cid, bit):
    r1 = rng * (ctx[cid, 1] + 1) // (ctx[cid, 0] + ctx[cid, 1] + 2)
    if bit:
        rng = r1
    else:
        low += r1
        rng -= r1
    while rng < RENORM_LIMIT:
        low, cache, cache_size, pos = _shift_low(low, cache, cache_size, buf, pos)
        rng <<= 8
    _update_counts(ctx, cid, bit)
    return low, rng, cache, cache_size, pos


@njit(cache=True)
def _flush(low, cache, cache_size, buf, pos):
    for _ in range(5):
        low, cache, cache_size, pos = _shift_low(low, cache, cache_size, buf, pos)
    return pos


@njit(cache=True)
def _decode_init(data):
    code = 0
    n = len(data)
    # byte 0 is the encoder's constant 0x00; bytes 1..4 seed the code register
    for i in range(1, 5):
        b = data[i] if i < n else 0
        code = (code << 8) | b
    return code, U32_MASK, 5


@njit(cache=True)
def _decode_bit(code, rng, pos, data, ctx, cid):
    r1 = rng * (ctx[cid, 1] + 1) // (ctx[cid, 0] + ctx[cid, 1] + 2)
    if code < r1:
        bit = 1
        rng = r1
    else:
        bit = 0
        code -= r1
        rng -= r1
    n = len(data)
    while rng < RENORM_LIMIT:
        b = data[pos] if pos < n else 0
        pos += 1
        code = ((code << 8) | b) & U32_MASK
        rng <<= 8
    _update_counts(ctx, cid, bit)
    return bit, code, rng, pos


@njit(cache=True)
def _sig_context(s, y, x, fh, fw):
    k = 0
    if y > 0 and s[y - 1, x]:
        k += 1
    if y + 1 < fh and s[y + 1, x]:
        k += 1
    if x > 0 and s[y, x - 1]:
        k += 1
    if x + 1 < fw and s[y, x + 1]:
        k += 1
    if k > 2:
        k = 2
    return CTX_SIG_BASE + k


@njit(cache=True)
def _encode_maps_kernel(values, d, bs, buf):
    channels, fh, fw = values.shape
    nbh = (fh + bs - 1) // bs
    nbw = (fw + bs - 1) // bs
    ctx = np.zeros((NUM_CONTEXTS, 2), dtype=np.int64)
    sflag = np.zeros((fh, fw), dtype=np.uint8)
    bflag = np.zeros((nbh, nbw), dtype=np.uint8)
    low = 0
    rng = U32_MASK
    cache = 0
    cache_size = 1
    pos = 0
    for c in range(channels):
        sflag[:, :] = 0
        bflag[:, :] = 0
        azb = 1
        orall = 0
        for y in range(fh):
            for x in range(fw):
                orall |= np.int64(values[c, y, x])
        for k in range(d - 1, -1, -1):
            if azb == 1:
                plane_zero = ((orall >> k) & 1) == 0
                flag = 1 if plane_zero else 0
                low, rng, cache, cache_size, pos = _encode_bit(
                    low, rng, cache, cache_size, pos, buf, ctx, CTX_ALL_ZERO, flag
                )
                if not plane_zero:
                    azb = 0
            if azb == 0:
                for by in range(nbh):
                    y0 = by * bs
                    y1 = min(y0 + bs, fh)
                    for bx in range(nbw):
                        x0 = bx * bs
                        x1 = min(x0 + bs, fw)
                        if bflag[by, bx] == 0:
                            sig = 0
                            for y in range(y0, y1):
                                for x in range(x0, x1):
                                    if (np.int64(values[c, y, x]) >> k) & 1:
                                        sig = 1
                                        break
                                if sig:
                                    break
                            low, rng, cache, cache_size, pos = _encode_bit(
                                low, rng, cache, cache_size, pos, buf, ctx, CTX_BLOCK, sig
                            )
                            bflag[by, bx] = sig
                        if bflag[by, bx] == 1:
                            for y in range(y0, y1):
                                for x in range(x0, x1):
                                    bit = (np.int64(values[c, y, x]) >> k) & 1
                                    if sflag[y, x] == 0:
                                        cid = _sig_context(sflag, y, x, fh, fw)
                                        low, rng, cache, cache_size, pos = _encode_bit(
                                            low, rng, cache, cache_size, pos, buf, ctx, cid, bit
                                        )
                                        if bit:
                                            sflag[y, x] = 1
                                    else:
                                        low, rng, cache, cache_size, pos = _encode_bit(
                                            low, rng, cache, cache_size, pos, buf, ctx,
                                            CTX_REFINE, bit,
                                        )
    return _flush(low, cache, cache_size, buf, pos)


@njit(cache=True)
def _decode_maps_kernel(data, channels, fh, fw, d, bs):
    values = np.zeros((channels, fh, fw), dtype=np.uint8)
    nbh = (fh + bs - 1) // bs
    nbw = (fw + bs - 1) // bs
    ctx = np.zeros((NUM_CONTEXTS, 2), dtype=np.int64)
    sflag = np.zeros((fh, fw), dtype=np.uint8)
    bflag = np.zeros((nbh, nbw), dtype=np.uint8)
    code, rng, pos = _decode_init(data)
    for c in range(channels):
        sflag[:, :] = 0
        bflag[:, :] = 0
        azb = 1
        for k in range(d - 1, -1, -1):
            if azb == 1:
                flag, code, rng, pos = _decode_bit(code, rng, pos, data, ctx, CTX_ALL_ZERO)
                if flag == 0:
                    azb = 0
            if azb == 0:
                for by in range(nbh):
                    y0 = by * bs
                    y1 = min(y0 + bs, fh)
                    for bx in range(nbw):
                        x0 = bx * bs
                        x1 = min(x0 + bs, fw)
                        if bflag[by, bx] == 0:
                            sig, code, rng, pos = _decode_bit(code, rng, pos, data, ctx, CTX_BLOCK)
                            bflag[by, bx] = sig
                        if bflag[by, bx] == 1:
                            for y in range(y0, y1):
                                for x in range(x0, x1):
                                    if sflag[y, x] == 0:
                                        cid = _sig_context(sflag, y, x, fh, fw)
                                        bit, code, rng, pos = _decode_bit(
                                            code, rng, pos, data, ctx, cid
                                        )
                                        if bit:
                                            sflag[y, x] = 1
                                            values[c, y, x] |= np.uint8(1 << k)
                                    else:
                                        bit, code, rng, pos = _decode_bit(
                                            code, rng, pos, data, ctx, CTX_REFINE
                                        )
                                        if bit:
                                            values[c, y, x] |= np.uint8(1 << k)
    return values


class ContextModel:
    """Adaptive binary probability estimate backed by smoothed counts."""

    __slots__ = ("c0", "c1")

    def __init__(self, c0: int = 0, c1: int = 0):
        self.c0 = c0
        self.c1 = c1

    def p1(self) -> float:
        return (self.c1 + 1) / (self.c0 + self.c1 + 2)

    def update(self, bit: int) -> None:
        if self.c0 + self.c1 >= COUNT_HALVING_LIMIT:
            self.c0 >>= 1
            self.c1 >>= 1
        if bit:
            self.c1 += 1
        else:
            self.c0 += 1


class RangeEncoder:
    """Streaming binary range encoder over an adaptive context table.

    Drives the same compiled primitives as the batch kernel, so any sequence
    of (context_id, bit) decisions produces byte-identical output either way.
    """

    def __init__(self, num_contexts: int = NUM_CONTEXTS):
        self._ctx = np.zeros((num_contexts, 2), dtype=np.int64)
        self._buf = np.empty(4096, dtype=np.uint8)
        self._low = 0
        self._range = U32_MASK
        self._cache = 0
        self._cache_size = 1
        self._pos = 0
        self._result: bytes | None = None

    @property
    def contexts(self) -> np.ndarray:
        return self._ctx

    def _reserve(self, extra: int) -> None:
        if self._pos + extra > self._buf.size:
            grown = np.empty(max(self._buf.size * 2, self._pos + extra), dtype=np.uint8)
            grown[: self._pos] = self._buf[: self._pos]
            self._buf = grown

    def encode_bit(self, context_id: int, bit: int) -> None:
        if self._result is not None:
            raise RuntimeError("encoder already finished")
        self._reserve(16)
        self._low, self._range, self._cache, self._cache_size, self._pos = _encode_bit(
            self._low, self._range, self._cache, self._cache_size, self._pos,
            self._buf, self._ctx, context_id, 1 if bit else 0,
        )

    def finish(self) -> bytes:
        if self._result is None:
            self._reserve(16)
            self._pos = _flush(self._low, self._cache, self._cache_size, self._buf, self._pos)
            self._result = self._buf[: self._pos].tobytes()
        return self._result


class RangeDecoder:
    """Mirror of :class:`RangeEncoder`; reads past the payload end as zeros."""

    def __init__(self, data: bytes, num_contexts: int = NUM_CONTEXTS):
        self._data = np.frombuffer(bytes(data), dtype=np.uint8).copy()
        self._ctx = np.zeros((num_contexts, 2), dtype=np.int64)
        self._code, self._range, self._pos = _decode_init(self._data)

    @property
    def contexts(self) -> np.ndarray:
        return self._ctx

    def decode_bit(self, context_id: int) -> int:
        bit, self._code, self._range, self._pos = _decode_bit(
            self._code, self._range, self._pos, self._data, self._ctx, context_id
        )
        return int(bit)


def _decision_bound(channels: int, fh: int, fw: int, d: int, bs: int) -> int:
    nbh = (fh + bs - 1) // bs
    nbw = (fw + bs - 1) // bs
    return channels * d * (1 + nbh * nbw + fh * fw)


def encode_maps(masked: MaskedMapSet, params: CodecParams) -> bytes:
    """Entropy-code a masked map set into payload bytes."""
    v = masked.values
    if v.size == 0:
        return b""
    # worst case is < 10.01 bits per decision; 2 bytes each is a safe ceiling
    bound = 2 * _decision_bound(*v.shape, params.d, params.block_size) + 64
    buf = np.empty(bound, dtype=np.uint8)
    n = _encode_maps_kernel(v, params.d, params.block_size, buf)
    return buf[:n].tobytes()


def decode_maps(payload: bytes, params: CodecParams, shape: tuple[int, int, int]) -> MaskedMapSet:
    """Inverse of :func:`encode_maps` for the same params and shape.

    A truncated payload never raises here: missing bytes read as zeros, which
    resolves every remaining decision deterministically (the container layer
    is responsible for flagging real truncation via payload_len).
    """
    channels, fh, fw = shape
    if channels * fh * fw == 0:
        return MaskedMapSet(np.zeros(shape, dtype=np.uint8))
    data = np.frombuffer(bytes(payload), dtype=np.uint8).copy()
    values = _decode_maps_kernel(data, channels, fh, fw, params.d, params.block_size)
    return MaskedMapSet(values)
