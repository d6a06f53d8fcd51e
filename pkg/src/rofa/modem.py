"""Bit- and symbol-level processing.

CRC32 framing, the rate-1/2 constraint-length-7 convolutional code with
soft-decision Viterbi decoding, BPSK/QPSK/16-QAM mapping, unitary OFDM
modulation, and training-sequence synthesis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import acs_traceback

# Convolutional code: the standard WLAN rate-1/2 code, generators 133/171
# octal, constraint length 7, zero-tail terminated.
CONV_K = 7
CONV_GENERATORS = (0o133, 0o171)

# CRC32 (IEEE 802.3), reflected form. Bit streams are processed in order,
# which matches the byte CRC when bits are unpacked LSB-first per byte.
_CRC_POLY = 0xEDB88320

BPSK = "bpsk"
QPSK = "qpsk"
QAM16 = "qam16"

_BITS_PER_SYMBOL = {BPSK: 1, QPSK: 2, QAM16: 4}


def as_bits(bits) -> np.ndarray:
    """Coerce to a uint8 array of 0/1 values."""
    out = np.asarray(bits, dtype=np.uint8)
    if out.ndim != 1:
        out = out.ravel()
    return out


# ---------------------------------------------------------------------------
# CRC32
# ---------------------------------------------------------------------------

def crc32_bits(bits) -> int:
    """CRC32 of a bit stream (init/xorout 0xFFFFFFFF, reflected polynomial)."""
    crc = 0xFFFFFFFF
    for b in as_bits(bits):
        crc ^= int(b)
        crc = (crc >> 1) ^ _CRC_POLY if crc & 1 else crc >> 1
    return crc ^ 0xFFFFFFFF


def crc32_append(bits) -> np.ndarray:
    """Append the 32 checksum bits (LSB first) to the message."""
    bits = as_bits(bits)
    crc = crc32_bits(bits)
    tail = np.array([(crc >> i) & 1 for i in range(32)], dtype=np.uint8)
    return np.concatenate([bits, tail])


def crc32_check(bits) -> bool:
    """True when the trailing 32 bits match the CRC of the preceding bits."""
    bits = as_bits(bits)
    if bits.size < 32:
        raise ValueError("need at least 32 bits to check a CRC32")
    crc = crc32_bits(bits[:-32])
    expect = np.array([(crc >> i) & 1 for i in range(32)], dtype=np.uint8)
    return bool(np.array_equal(bits[-32:], expect))


# ---------------------------------------------------------------------------
# Convolutional code + Viterbi
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _generator_taps() -> np.ndarray:
    """Tap vectors indexed by delay (current input first), one row per generator."""
    taps = np.zeros((2, CONV_K), dtype=np.uint8)
    for g, gen in enumerate(CONV_GENERATORS):
        for i in range(CONV_K):
            taps[g, i] = (gen >> (CONV_K - 1 - i)) & 1
    return taps


@lru_cache(maxsize=None)
def _output_tables():
    """Per-(state, input) output bits for the 64-state trellis."""
    c0 = np.zeros((64, 2), dtype=np.uint8)
    c1 = np.zeros((64, 2), dtype=np.uint8)
    for state in range(64):
        for b in range(2):
            reg = (b << 6) | state
            c0[state, b] = bin(reg & CONV_GENERATORS[0]).count("1") & 1
            c1[state, b] = bin(reg & CONV_GENERATORS[1]).count("1") & 1
    return c0, c1


def conv_encode(bits) -> np.ndarray:
    """Rate-1/2 encode with zero-tail termination.

    Output length is 2*(len(bits) + K - 1); the K-1 flushing zeros are
    implicit in the full convolution.
    """
    bits = as_bits(bits)
    taps = _generator_taps()
    c0 = np.convolve(bits, taps[0]) % 2
    c1 = np.convolve(bits, taps[1]) % 2
    out = np.empty(2 * c0.size, dtype=np.uint8)
    out[0::2] = c0
    out[1::2] = c1
    return out


def viterbi_decode_soft(llrs) -> np.ndarray:
    """Maximum-likelihood message under per-coded-bit soft values.

    Positive LLR favours coded bit 1. Exact metric ties resolve to the
    lexicographically smallest message so the brute-force oracle comparison
    is deterministic.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.size % 2:
        raise ValueError("LLR length must be even")
    if llrs.size < 2 * (CONV_K - 1):
        raise ValueError("LLR vector shorter than the code tail")
    n_msg = llrs.size // 2 - (CONV_K - 1)
    c0, c1 = _output_tables()
    return acs_traceback(np.ascontiguousarray(llrs), n_msg, c0, c1)


# ---------------------------------------------------------------------------
# Constellation mapping
# ---------------------------------------------------------------------------

_QAM16_AXIS = np.array([-3.0, -1.0, 3.0, 1.0]) / np.sqrt(10.0)  # Gray: 00 01 10 11


def qam_modulate(bits, scheme: str = BPSK) -> np.ndarray:
    """Map bits to unit-average-power constellation symbols (bit 1 -> +1 on BPSK)."""
    bits = as_bits(bits)
    if scheme not in _BITS_PER_SYMBOL:
        raise ValueError(f"unknown modulation scheme {scheme!r}")
    bps = _BITS_PER_SYMBOL[scheme]
    if bits.size % bps:
        raise ValueError("bit count not divisible by bits per symbol")
    if scheme == BPSK:
        return (2.0 * bits - 1.0).astype(np.complex128)
    if scheme == QPSK:
        b = bits.reshape(-1, 2).astype(np.float64)
        return ((2 * b[:, 0] - 1) + 1j * (2 * b[:, 1] - 1)) / np.sqrt(2.0)
    b = bits.reshape(-1, 4)
    i = _QAM16_AXIS[(b[:, 0] << 1) | b[:, 1]]
    q = _QAM16_AXIS[(b[:, 2] << 1) | b[:, 3]]
    return i + 1j * q


def qam_soft_demod(symbols, noise_var, scheme: str = BPSK) -> np.ndarray:
    """Per-bit LLRs, positive favouring bit 1.

    ``noise_var`` is the per-axis (real-dimension) Gaussian noise variance;
    it may be a scalar or one value per symbol. For BPSK the exact AWGN LLR
    is ``2 * Re(y) / noise_var``.
    """
    symbols = np.asarray(symbols, dtype=np.complex128)
    nv = np.broadcast_to(np.asarray(noise_var, dtype=np.float64), symbols.shape)
    if scheme == BPSK:
        return 2.0 * symbols.real / nv
    if scheme == QPSK:
        a = 1.0 / np.sqrt(2.0)
        out = np.empty(symbols.size * 2)
        out[0::2] = 2.0 * a * symbols.real / nv
        out[1::2] = 2.0 * a * symbols.imag / nv
        return out
    if scheme == QAM16:
        return _qam16_llrs(symbols, nv)
    raise ValueError(f"unknown modulation scheme {scheme!r}")


def _qam16_llrs(symbols, nv):
    # max-log LLRs via per-axis minimum distances
    points = _QAM16_AXIS
    labels = np.array([0b00, 0b01, 0b10, 0b11])
    out = np.empty(symbols.size * 4)
    for axis, vals in ((0, symbols.real), (1, symbols.imag)):
        d2 = (vals[:, None] - points[None, :]) ** 2 / nv[:, None]
        for bit in range(2):
            mask1 = (labels >> (1 - bit)) & 1 == 1
            llr = d2[:, ~mask1].min(axis=1) - d2[:, mask1].min(axis=1)
            out[2 * axis + bit :: 4] = llr
    return out


def qam_hard_demod(symbols, scheme: str = BPSK) -> np.ndarray:
    """Nearest-point decision back to bits."""
    return (qam_soft_demod(symbols, 1.0, scheme) > 0).astype(np.uint8)


# ---------------------------------------------------------------------------
# OFDM
# ---------------------------------------------------------------------------

def ofdm_modulate(freq_symbols, n_fft: int, cp_len: int) -> np.ndarray:
    """Unitary IFFT plus cyclic prefix; accepts one symbol or a (n, n_fft) block."""
    freq = np.asarray(freq_symbols, dtype=np.complex128)
    if freq.ndim == 1:
        freq = freq[None, :]
    if freq.shape[1] != n_fft:
        raise ValueError(f"frequency vectors must have length {n_fft}")
    body = np.fft.ifft(freq, norm="ortho", axis=1)
    return np.hstack([body[:, n_fft - cp_len :], body]).ravel()


def ofdm_demodulate(samples, n_fft: int, cp_len: int, cut_offset: int = 0) -> np.ndarray:
    """FFT back to per-symbol bin values.

    ``cut_offset`` moves the FFT window into the cyclic prefix (window starts
    at cp_len - cut_offset), trading margin against late arrivals for a
    per-bin phase ramp that channel estimation absorbs.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    sym_len = n_fft + cp_len
    if samples.size % sym_len:
        raise ValueError("sample count is not a whole number of OFDM symbols")
    if not 0 <= cut_offset <= cp_len:
        raise ValueError("cut_offset must lie within the cyclic prefix")
    blocks = samples.reshape(-1, sym_len)
    start = cp_len - cut_offset
    return np.fft.fft(blocks[:, start : start + n_fft], norm="ortho", axis=1)


# ---------------------------------------------------------------------------
# Subcarrier indexing
# ---------------------------------------------------------------------------

# Legacy 64-FFT occupancy: data on +-1..26 except the pilots at +-7, +-21.
PILOT_SUBCARRIERS = (-21, -7, 7, 21)
PILOT_VALUES = np.array([1.0, 1.0, 1.0, -1.0])
DATA_SUBCARRIERS = tuple(
    k for k in list(range(-26, 0)) + list(range(1, 27)) if k not in PILOT_SUBCARRIERS
)


def subcarrier_bins(indices, n_fft: int) -> np.ndarray:
    """Signed logical subcarrier indices -> FFT bin numbers."""
    idx = np.asarray(indices, dtype=np.int64)
    if np.any(idx == 0) or np.any(np.abs(idx) >= n_fft // 2):
        raise ValueError("subcarrier indices must be nonzero and inside the FFT")
    return idx % n_fft


def place_bins(values, indices, n_fft: int) -> np.ndarray:
    """Scatter values onto the signed subcarrier indices of a zero spectrum."""
    out = np.zeros(n_fft, dtype=np.complex128)
    out[subcarrier_bins(indices, n_fft)] = values
    return out


# ---------------------------------------------------------------------------
# Training sequences
# ---------------------------------------------------------------------------

# Legacy short-training occupancy: QPSK points on every 4th subcarrier,
# giving a 16-sample-periodic waveform.
_STS_CARRIERS = (-24, -20, -16, -12, -8, -4, 4, 8, 12, 16, 20, 24)
_STS_POINTS = np.sqrt(13.0 / 6.0) * np.array(
    [1 + 1j, -1 - 1j, 1 + 1j, -1 - 1j, -1 - 1j, 1 + 1j,
     -1 - 1j, -1 - 1j, 1 + 1j, 1 + 1j, 1 + 1j, 1 + 1j]
)

# Legacy long-training BPSK sequence on subcarriers -26..26.
_LTS_VALUES = np.array(
    [1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1,
     1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1],
    dtype=np.float64,
)
_LTS_CARRIERS = tuple(k for k in range(-26, 27) if k != 0)


@dataclass(frozen=True)
class TrainingSequences:
    """Deterministic training waveforms, all at unit average power.

    sts: one 16-sample short training sequence; stf is 10 identical copies.
    lts: 64-sample long training sequence; lts_freq holds the matching
    frequency-domain reference values.
    ul_ltf_freq/ul_ltf_time: the per-user uplink LTF (BPSK on the allocated
    subcarriers, zero elsewhere), present when an allocation was given.
    """

    sts: np.ndarray
    stf: np.ndarray
    lts: np.ndarray
    lts_freq: np.ndarray
    ul_ltf_freq: np.ndarray | None = None
    ul_ltf_time: np.ndarray | None = None


def ul_ltf_values(subcarriers, n_fft: int, seed: int) -> np.ndarray:
    """Frequency-domain uplink LTF: random BPSK on the allocation, zero elsewhere."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    symbols = 2.0 * rng.integers(0, 2, size=len(tuple(subcarriers))) - 1.0
    return place_bins(symbols, subcarriers, n_fft)


def synth_training(allocation=None, seed: int = 0, n_fft: int = 64) -> TrainingSequences:
    if n_fft != 64:
        raise ValueError("training sequences are defined for the 64-point FFT")
    sts64 = np.fft.ifft(place_bins(_STS_POINTS, _STS_CARRIERS, n_fft), norm="ortho")
    sts = sts64[:16] / np.sqrt(np.mean(np.abs(sts64) ** 2))
    stf = np.tile(sts, 10)

    lts_freq = place_bins(_LTS_VALUES, _LTS_CARRIERS, n_fft)
    lts = np.fft.ifft(lts_freq, norm="ortho")
    scale = 1.0 / np.sqrt(np.mean(np.abs(lts) ** 2))
    lts = lts * scale
    lts_freq = lts_freq * scale

    ul_freq = ul_time = None
    if allocation is not None:
        ul_freq = ul_ltf_values(allocation, n_fft, seed)
        ul_time = np.fft.ifft(ul_freq, norm="ortho")
    return TrainingSequences(sts, stf, lts, lts_freq, ul_freq, ul_time)
