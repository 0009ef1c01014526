"""Binary packet format for a single description.

Layout (little-endian)::

    offset  size  field
    0       4     magic b"EMD1"
    4       1     version (1)
    5       1     n
    6       1     k
    7       1     description index, 1-based
    8       1     regime (0 uncoded, 1 mds)
    9       1     field degree m (0 when uncoded)
    10      2     alpha
    12      4     d_k numerator
    16      4     d_k denominator
    20      4     payload length in bits
    24      ...   payload, MSB-first, zero-padded to a whole byte

The payload is the uncoded bits followed by every parity symbol, m bits each.
"""

from __future__ import annotations

import struct
from fractions import Fraction

import numpy as np

from .emdcodec import MDS, UNCODED, Description, MdParams, derive_params
from .errors import ErasureMDError, MalformedPacketError

MAGIC = b"EMD1"
VERSION = 1
HEADER = struct.Struct("<4sBBBBBBHIII")
_REGIME_CODES = {UNCODED: 0, MDS: 1}


def serialize(d: Description, p: MdParams) -> bytes:
    bits = d.payload_bits(p.m)
    if len(bits) != p.payload_bits:
        raise ValueError(f"description carries {len(bits)} bits, parameters say {p.payload_bits}")
    header = HEADER.pack(
        MAGIC,
        VERSION,
        p.n,
        p.k,
        d.index,
        _REGIME_CODES[p.regime],
        p.m,
        p.alpha,
        p.d_k.numerator,
        p.d_k.denominator,
        len(bits),
    )
    return header + np.packbits(np.array(bits, dtype=np.uint8)).tobytes()


def parse(data: bytes) -> tuple[Description, MdParams]:
    """Inverse of :func:`serialize`; every inconsistency raises MalformedPacketError."""
    data = bytes(data)
    if data[:4] != MAGIC:
        if len(data) < 4 and MAGIC.startswith(data):
            raise MalformedPacketError("truncated header", len(data))
        raise MalformedPacketError("bad magic", 0)
    if len(data) < HEADER.size:
        raise MalformedPacketError("truncated header", len(data))
    _, version, n, k, index, regime, m, alpha, dnum, dden, nbits = HEADER.unpack_from(data)
    if version != VERSION:
        raise MalformedPacketError(f"unsupported version {version}", 4)
    if regime not in (0, 1):
        raise MalformedPacketError(f"unknown regime code {regime}", 8)
    if dden == 0:
        raise MalformedPacketError("zero d_k denominator", 16)
    try:
        p = derive_params(n, k, Fraction(dnum, dden), alpha)
    except ErasureMDError as exc:
        raise MalformedPacketError(f"header parameters are invalid: {exc}", 5) from None
    if not 1 <= index <= n:
        raise MalformedPacketError(f"description index {index} outside [1, {n}]", 7)
    if _REGIME_CODES[p.regime] != regime:
        raise MalformedPacketError("regime does not match n, k, d_k", 8)
    if p.m != m:
        raise MalformedPacketError(f"field degree {m} does not match the derived {p.m}", 9)
    if nbits != p.payload_bits:
        raise MalformedPacketError(f"payload length {nbits} differs from l*R = {p.payload_bits}", 20)
    need = HEADER.size + -(-nbits // 8)
    if len(data) < need:
        raise MalformedPacketError("truncated payload", len(data))
    if len(data) > need:
        raise MalformedPacketError("trailing bytes after payload", need)
    raw = np.unpackbits(np.frombuffer(data, dtype=np.uint8, offset=HEADER.size))
    if raw[nbits:].any():
        raise MalformedPacketError("nonzero padding bits", need - 1)
    bits = raw[:nbits]
    uncoded = tuple(int(b) for b in bits[: p.uncoded_len])
    symbols: tuple[int, ...] = ()
    if p.regime == MDS:
        groups = bits[p.uncoded_len :].reshape(-1, p.m).astype(np.int64)
        weights = 1 << np.arange(p.m - 1, -1, -1)
        symbols = tuple(int(s) for s in groups @ weights)
    return Description(index, uncoded, symbols), p
