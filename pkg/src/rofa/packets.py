"""Transmit-side waveform assembly for every packet type.

Downlink fields are normalized to unit average power (payload bins carry
sqrt(n_fft/48) BPSK so the time-domain symbol power matches the preamble),
which makes a scenario's SNR a per-sample quantity on every field. Uplink
and benchmark payload bins stay at unit magnitude: concentrating the same
per-bin power on fewer subcarriers is the effect under study.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import framing, modem
from .framing import ControlInfo, PacketLayout
from .modem import TrainingSequences


def _prefixed(body: np.ndarray, cp_len: int) -> np.ndarray:
    return np.concatenate([body[body.size - cp_len :], body])


@dataclass(frozen=True)
class DlPacket:
    samples: np.ndarray
    layout: PacketLayout
    ci_bits: np.ndarray | None
    payload_bits: np.ndarray


@dataclass(frozen=True)
class UlPacket:
    user: int
    samples: np.ndarray
    layout: PacketLayout
    subcarriers: tuple
    msg_bits: np.ndarray
    coded_bits: np.ndarray
    symbols: np.ndarray  # (n_data, n_subcarriers), zero-padded tail slots
    ltf_freq: np.ndarray


@dataclass(frozen=True)
class TdmaPacket:
    samples: np.ndarray
    layout: PacketLayout
    msg_bits: np.ndarray
    coded_bits: np.ndarray
    symbols: np.ndarray  # (n_data, 48)


def build_dl_packet(layout: PacketLayout, train: TrainingSequences,
                    ci: ControlInfo | None = None,
                    rng: np.random.Generator | None = None) -> DlPacket:
    """Assemble a downlink packet: STF, LTF, payload (+mid-LTFs), post-LTF.

    Control-info bits occupy the head of the payload bit stream at one bit
    per data subcarrier; the rest is random BPSK filler.
    """
    if layout.kind != "dl":
        raise ValueError("layout is not a downlink layout")
    n_fft, cp = layout.n_fft, layout.cp_len
    data_sc = modem.DATA_SUBCARRIERS
    n_bits = layout.n_data * len(data_sc)

    ci_bits = None
    if ci is not None:
        ci_bits = framing.encode_ci(ci)
        if ci_bits.size > n_bits:
            raise framing.LayoutError("control info does not fit in the payload")
    if rng is None:
        rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, size=n_bits).astype(np.uint8)
    if ci_bits is not None:
        bits[: ci_bits.size] = ci_bits

    scale = np.sqrt(n_fft / len(data_sc))  # unit time-domain symbol power
    bins = np.zeros((layout.n_data, n_fft), dtype=np.complex128)
    if layout.n_data:
        points = scale * modem.qam_modulate(bits, modem.BPSK)
        bins[:, modem.subcarrier_bins(data_sc, n_fft)] = points.reshape(
            layout.n_data, len(data_sc)
        )
        payload = modem.ofdm_modulate(bins, n_fft, cp).reshape(layout.n_data, -1)

    out = np.zeros(layout.duration, dtype=np.complex128)
    sym_iter = iter(range(layout.n_data))
    for name, (start, length) in layout.fields.items():
        if name == "stf":
            out[start : start + length] = train.stf
        elif name == "ltf":
            out[start : start + length] = np.concatenate(
                [train.lts[n_fft - 2 * cp :], train.lts, train.lts]
            )
        elif name.startswith("payload"):
            out[start : start + length] = payload[next(sym_iter)]
        else:  # mid-LTF or post-LTF field
            out[start : start + length] = _prefixed(train.lts, cp)
    return DlPacket(out, layout, ci_bits, bits)


def encode_ul_payload(msg_bits, n_subcarriers: int, n_data: int,
                      scheme: str = modem.BPSK):
    """CRC + convolutional encode + map onto the per-symbol subcarrier grid.

    Returns (coded_bits, symbols) where symbols is (n_data, n_subcarriers)
    with unused tail slots left at zero (no transmit energy).
    """
    with_crc = modem.crc32_append(msg_bits)
    coded = modem.conv_encode(with_crc)
    bps = {modem.BPSK: 1, modem.QPSK: 2, modem.QAM16: 4}[scheme]
    slots = n_data * n_subcarriers
    if coded.size > slots * bps:
        raise framing.LayoutError(
            f"{coded.size} coded bits exceed {slots} symbol slots"
        )
    points = modem.qam_modulate(coded, scheme)
    symbols = np.zeros(slots, dtype=np.complex128)
    symbols[: points.size] = points
    return coded, symbols.reshape(n_data, n_subcarriers)


def build_ul_packet(layout: PacketLayout, user: int, subcarriers, msg_bits,
                    ltf_seed: int, scheme: str = modem.BPSK) -> UlPacket:
    """Assemble one user's uplink packet: LTF pair plus payload, no STF."""
    if layout.kind != "ul":
        raise ValueError("layout is not an uplink layout")
    n_fft, cp = layout.n_fft, layout.cp_len
    subcarriers = tuple(sorted(subcarriers))
    coded, symbols = encode_ul_payload(msg_bits, len(subcarriers), layout.n_data, scheme)

    ltf_freq = modem.ul_ltf_values(subcarriers, n_fft, ltf_seed)
    ltf_time = np.fft.ifft(ltf_freq, norm="ortho")
    ltf_field = _prefixed(ltf_time, cp)

    out = np.zeros(layout.duration, dtype=np.complex128)
    out[: layout.sym_len] = ltf_field
    out[layout.sym_len : 2 * layout.sym_len] = ltf_field
    if layout.n_data:
        bins = np.zeros((layout.n_data, n_fft), dtype=np.complex128)
        bins[:, modem.subcarrier_bins(subcarriers, n_fft)] = symbols
        out[2 * layout.sym_len :] = modem.ofdm_modulate(bins, n_fft, cp)
    return UlPacket(user, out, layout, subcarriers,
                    modem.as_bits(msg_bits), coded, symbols, ltf_freq)


def build_probe_packet(layout: PacketLayout, train: TrainingSequences) -> np.ndarray:
    """Channel-probe packet: STF followed by back-to-back LTS copies."""
    if layout.kind != "probe":
        raise ValueError("layout is not a probe layout")
    n_lts = len(layout.lts_offsets)
    return np.concatenate([train.stf, np.tile(train.lts, n_lts)])


# Benchmark OFDM-TDMA occupancy: raw +-1 training bins so the LTF power
# matches the 52-bin payload power.
_TDMA_LTS_CACHE: dict = {}


def _tdma_lts(n_fft: int):
    if n_fft not in _TDMA_LTS_CACHE:
        freq = modem.place_bins(modem._LTS_VALUES, modem._LTS_CARRIERS, n_fft)
        _TDMA_LTS_CACHE[n_fft] = (freq, np.fft.ifft(freq, norm="ortho"))
    return _TDMA_LTS_CACHE[n_fft]


def build_tdma_packet(layout: PacketLayout, msg_bits, train: TrainingSequences,
                      scheme: str = modem.BPSK) -> TdmaPacket:
    """Benchmark single-user OFDM packet: STF, LTF, 48 data + 4 pilot bins."""
    if layout.kind != "tdma_ul":
        raise ValueError("layout is not a TDMA layout")
    n_fft, cp = layout.n_fft, layout.cp_len
    data_sc = modem.DATA_SUBCARRIERS
    coded, symbols = encode_ul_payload(msg_bits, len(data_sc), layout.n_data, scheme)
    ltf_freq, ltf_time = _tdma_lts(n_fft)
    ltf_field = _prefixed(ltf_time, cp)

    out = np.zeros(layout.duration, dtype=np.complex128)
    stf_len = 10 * layout.sts_len
    out[:stf_len] = train.stf
    out[stf_len : stf_len + layout.sym_len] = ltf_field
    out[stf_len + layout.sym_len : stf_len + 2 * layout.sym_len] = ltf_field
    if layout.n_data:
        bins = np.zeros((layout.n_data, n_fft), dtype=np.complex128)
        bins[:, modem.subcarrier_bins(data_sc, n_fft)] = symbols
        bins[:, modem.subcarrier_bins(modem.PILOT_SUBCARRIERS, n_fft)] = modem.PILOT_VALUES
        out[stf_len + 2 * layout.sym_len :] = modem.ofdm_modulate(bins, n_fft, cp)
    return TdmaPacket(out, layout, modem.as_bits(msg_bits), coded, symbols)


def tdma_ltf_reference(n_fft: int = 64) -> np.ndarray:
    """Frequency-domain LTF values the TDMA receiver equalizes against."""
    return _tdma_lts(n_fft)[0]
