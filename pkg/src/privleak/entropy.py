"""Entropy metrics over alarm payload bytes.

Shannon and Min entropy are computed from the empirical symbol frequencies of
a single payload, under either a bit or an octet symbol definition.  All
logarithms are base 2, so entropies are in bits per symbol.  Frequencies are
plain plug-in estimates with no smoothing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Algorithm",
    "Symbol",
    "EntropyConfig",
    "EntropyValue",
    "EmptyPayloadError",
    "DegenerateLengthError",
    "shannon_entropy",
    "min_entropy",
    "correction_factor",
    "length_correct",
    "payload_entropy",
    "batch_entropy",
    "binary_shannon_constant",
    "binary_min_constant",
    "octet_bit_entropy_classes",
    "RELIABLE_FLOOR_OCTETS",
]

# Payloads shorter than this are still measurable but sit inside the short
# transient where the octet metric cannot reliably tell plaintext from
# random data; reports flag them as below_floor.
RELIABLE_FLOOR_OCTETS = 5

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


class Algorithm(str, Enum):
    SHANNON = "shannon"
    MIN = "min"


class Symbol(str, Enum):
    BIT = "bit"
    OCTET = "octet"


class EmptyPayloadError(ValueError):
    """Entropy of a zero-length payload is undefined."""


class DegenerateLengthError(ValueError):
    """Octet length correction is undefined at one octet (log2(1) == 0)."""


@dataclass(frozen=True)
class EntropyConfig:
    """Which entropy variant the toolkit computes.

    ``normalized`` divides by log2 of the alphabet size (1 for bits, 8 for
    octets) so values land in [0, 1] before any length correction.
    """

    algorithm: Algorithm = Algorithm.SHANNON
    symbol: Symbol = Symbol.OCTET
    normalized: bool = True
    length_corrected: bool = True

    def label(self) -> str:
        parts = [self.algorithm.value, self.symbol.value]
        if self.normalized:
            parts.append("norm")
        if self.length_corrected:
            parts.append("lc")
        return "-".join(parts)


@dataclass(frozen=True)
class EntropyValue:
    """An entropy measurement plus the length used for correction."""

    value: float
    n: int


def _alphabet_bits(symbol: Symbol) -> float:
    return 1.0 if symbol is Symbol.BIT else 8.0


def _bit_probability(payload: bytes) -> float:
    ones = int(_POPCOUNT[np.frombuffer(payload, dtype=np.uint8)].sum())
    return ones / (8.0 * len(payload))


def _octet_frequencies(payload: bytes) -> np.ndarray:
    counts = np.bincount(np.frombuffer(payload, dtype=np.uint8), minlength=256)
    return counts / len(payload)


def shannon_entropy(payload: bytes, symbol: Symbol = Symbol.OCTET) -> EntropyValue:
    """Empirical Shannon entropy of one payload, in bits per symbol.

    ``n`` on the result is the payload length counted in the chosen symbol
    (bits or octets).
    """
    if len(payload) == 0:
        raise EmptyPayloadError("shannon_entropy of empty payload")
    if symbol is Symbol.BIT:
        p1 = _bit_probability(payload)
        return EntropyValue(binary_shannon_constant(p1), 8 * len(payload))
    p = _octet_frequencies(payload)
    nz = p[p > 0]
    value = float(-(nz * np.log2(nz)).sum()) + 0.0  # normalize -0.0
    return EntropyValue(value, len(payload))


def min_entropy(payload: bytes, symbol: Symbol = Symbol.OCTET) -> EntropyValue:
    """Empirical Min-entropy: -log2 of the most frequent symbol's share."""
    if len(payload) == 0:
        raise EmptyPayloadError("min_entropy of empty payload")
    if symbol is Symbol.BIT:
        p1 = _bit_probability(payload)
        return EntropyValue(float(-math.log2(max(p1, 1.0 - p1))), 8 * len(payload))
    p = _octet_frequencies(payload)
    return EntropyValue(float(-math.log2(p.max())) + 0.0, len(payload))


def correction_factor(n: int | float, symbol: Symbol) -> float:
    """Length correction factor: sqrt(n) for bits, sqrt(n)/log2(n) for octets.

    ``n`` is interpreted in whatever unit the caller carries; the octet
    formula is undefined at n == 1.
    """
    if n < 1:
        raise DegenerateLengthError(f"length correction needs n >= 1, got {n}")
    if symbol is Symbol.BIT:
        return math.sqrt(n)
    if n == 1:
        raise DegenerateLengthError("octet length correction undefined for n == 1")
    return math.sqrt(n) / math.log2(n)


def length_correct(h: EntropyValue, symbol: Symbol) -> EntropyValue:
    """Apply the payload-length correction to an entropy value.

    The correction makes the standard deviation of plaintext entropy grow
    with payload size while random data still converges to zero.
    """
    return EntropyValue(h.value * correction_factor(h.n, symbol), h.n)


def payload_entropy(payload: bytes, config: EntropyConfig) -> EntropyValue:
    """Full metric pipeline: entropy, optional normalization, optional
    length correction.

    The correction factor always uses the payload length in octets (the
    alarm's size), for the bit symbol as well.  Correcting bit entropy by
    sqrt(bit-count) only differs by a constant sqrt(8), but the calibrated
    plaintext/random thresholds (0.028 and 0.14) are stated against the
    octet-length convention, so that is the one the toolkit uses end to end.
    The returned ``n`` is the octet count.
    """
    if config.algorithm is Algorithm.SHANNON:
        raw = shannon_entropy(payload, config.symbol)
    else:
        raw = min_entropy(payload, config.symbol)
    value = raw.value
    if config.normalized:
        value /= _alphabet_bits(config.symbol)
    n_octets = len(payload)
    if config.length_corrected:
        value *= correction_factor(n_octets, config.symbol)
    return EntropyValue(value, n_octets)


def batch_entropy(payloads: np.ndarray, config: EntropyConfig) -> np.ndarray:
    """Vectorized ``payload_entropy`` over equal-length payloads.

    ``payloads`` is a (count, n_octets) uint8 matrix.  Used by the
    Monte-Carlo simulations, where millions of payloads are measured.
    """
    if payloads.ndim != 2 or payloads.shape[1] == 0:
        raise EmptyPayloadError("batch_entropy needs a (count, n>=1) matrix")
    count, n = payloads.shape
    if config.symbol is Symbol.BIT:
        ones = _POPCOUNT[payloads].sum(axis=1, dtype=np.int64)
        p1 = ones / (8.0 * n)
        if config.algorithm is Algorithm.SHANNON:
            values = np.zeros(count)
            inner = (p1 > 0) & (p1 < 1)
            q = p1[inner]
            values[inner] = -q * np.log2(q) - (1 - q) * np.log2(1 - q)
        else:
            values = -np.log2(np.maximum(p1, 1.0 - p1))
    else:
        offsets = (np.arange(count, dtype=np.int64) * 256)[:, None]
        flat = payloads.astype(np.int64) + offsets
        counts = np.bincount(flat.ravel(), minlength=256 * count).reshape(count, 256)
        if config.algorithm is Algorithm.SHANNON:
            p = counts / n
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(p > 0, -p * np.log2(p), 0.0)
            values = terms.sum(axis=1)
        else:
            values = -np.log2(counts.max(axis=1) / n)
    if config.normalized:
        values = values / _alphabet_bits(config.symbol)
    if config.length_corrected:
        values = values * correction_factor(n, config.symbol)
    return values + 0.0  # normalize -0.0 entries


def binary_shannon_constant(p: float) -> float:
    """Binary Shannon entropy H(p), with 0*log(1/0) taken as 0.

    This is the constant per-alarm leakage of an ideal rule whose alarms are
    a fixed bit pattern with ones-share p.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def binary_min_constant(p: float) -> float:
    """Min-entropy analogue of the ideal-rule constant: log2 1/(1-2p(1-p))."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    vulnerability = 1.0 - 2.0 * p * (1.0 - p)
    return float(math.log2(1.0 / vulnerability))


def octet_bit_entropy_classes() -> list[tuple[int, float, tuple[int, ...]]]:
    """Partition the 256 octet values by their bit-frequency signature.

    Bit entropy only sees how many bits of an octet are set, so the 256
    octets collapse onto the 9 possible ones-counts.  Each entry is
    (ones_count, shannon_bit_entropy, octets in the class); the two-bits-set
    class has C(8,2) == 28 members, one of which is the 0x90 NOP opcode.
    """
    classes: dict[int, list[int]] = {k: [] for k in range(9)}
    for value in range(256):
        classes[int(_POPCOUNT[value])].append(value)
    return [
        (ones, binary_shannon_constant(ones / 8.0), tuple(members))
        for ones, members in sorted(classes.items())
    ]
