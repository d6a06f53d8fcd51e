"""Frame scheduling, auto-triggered reception, and the multiuser uplink receiver.

The access point never detects uplink packets: it owns the system time, so
the arrival index of an uplink packet is the downlink transmit index plus
the known slot schedule (auto-trigger). Users detect the downlink packet
with conventional STF/LTS correlation and count forward on their own
sample clocks to place the uplink transmission; local counting cancels any
clock skew, leaving only detection error and propagation delay.

All receiver FFT windows are cut ``CP_CUT`` samples early into the cyclic
prefix, centering the +-1-sample arrival spread inside the inter-symbol-
interference-free range; the induced per-bin phase ramp is common to the
training and payload windows and drops out in equalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import modem
from .framing import FrameTiming, PacketLayout
from .modem import TrainingSequences
from .packets import tdma_ltf_reference

# FFT windows start this many samples before the nominal symbol body.
CP_CUT = 2

DETECT_THRESHOLD = 0.35


@dataclass(frozen=True)
class SampleClock:
    """A node's sample counter: a fixed integer skew against the global timeline."""

    node: int
    skew: int = 0

    def to_local(self, global_index: int) -> int:
        return global_index - self.skew

    def to_global(self, local_index: int) -> int:
        return local_index + self.skew


@dataclass(frozen=True)
class TriggerEvent:
    index: int
    frame: int = 0


def auto_trigger(t_dl: int, t_dl_slot: int, frame: int = 0) -> TriggerEvent:
    """Uplink arrival index from the downlink transmit index and slot length.

    Pure schedule arithmetic: the AP kick-starts uplink reception at
    t_dl + t_dl_slot without any packet detection.
    """
    return TriggerEvent(int(t_dl) + int(t_dl_slot), frame)


def schedule_ul_start(dl_start_local: int, frame: FrameTiming,
                      clock: SampleClock | None = None) -> int:
    """Uplink transmit index on the user's own clock (counting before sending).

    The count is purely local, so the clock skew cancels between the
    measured downlink start and the scheduled uplink start; ``clock`` is
    accepted for interface symmetry and only documents whose counter the
    index lives on.
    """
    del clock
    return int(dl_start_local) + frame.t_dl + frame.guard


# ---------------------------------------------------------------------------
# Downlink packet detection (users / benchmark receiver)
# ---------------------------------------------------------------------------

def _normalized_xcorr(samples: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """|correlation|^2 normalized by reference and window energy, in [0, 1]."""
    n = ref.size
    corr = np.correlate(samples, ref, mode="valid")
    power = np.abs(samples) ** 2
    window = np.convolve(power, np.ones(n), mode="valid")
    e_ref = float(np.sum(np.abs(ref) ** 2))
    return np.abs(corr) ** 2 / np.maximum(e_ref * window, 1e-300)


def detect_dl_start(samples, lts_reference, lts1_offset: int = 192,
                    lts_gap: int = 64,
                    threshold: float = DETECT_THRESHOLD) -> int | None:
    """Packet-start index via the two-LTS cross-correlation peak, or None.

    Both preamble LTS copies must clear the normalized-correlation
    threshold; requiring the pair keeps the false-alarm rate on pure noise
    negligible. Returns the index of the first STF sample.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.size < lts1_offset + lts_gap + lts_reference.size:
        return None
    nc = _normalized_xcorr(samples, np.asarray(lts_reference))
    joint = nc[:-lts_gap] + nc[lts_gap:]
    best = int(np.argmax(joint))
    if nc[best] < threshold or nc[best + lts_gap] < threshold:
        return None
    start = best - lts1_offset
    return start if start >= 0 else None


# ---------------------------------------------------------------------------
# Uplink channel estimation and decoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelEstimate:
    """Per-subcarrier gains on one user's allocation, from the two LTF copies."""

    bins: np.ndarray
    h: np.ndarray
    lts_copies: np.ndarray  # (2, n_bins) raw received training bins


@dataclass(frozen=True)
class UlUser:
    """Receiver-side knowledge of one uplink user."""

    user_id: int
    subcarriers: tuple
    ltf_seed: int
    n_msg_bits: int
    scheme: str = modem.BPSK
    known_symbols: np.ndarray | None = None


@dataclass(frozen=True)
class UlDecodeResult:
    user_id: int
    detected: bool
    crc_ok: bool
    bits: np.ndarray
    raw_bits: np.ndarray
    raw_coded_slots: int
    eq_symbols: np.ndarray
    ideal_symbols: np.ndarray | None
    ul_snr_db: float


def estimate_ul_channel(lts_bins, ref_values, bins) -> ChannelEstimate:
    """Average the two per-LTS ratios (received / reference) on the allocation."""
    lts_bins = np.asarray(lts_bins)
    if lts_bins.ndim != 2 or lts_bins.shape[0] != 2:
        raise ValueError("need the bin values of exactly two LTS copies")
    bins = np.asarray(bins)
    ref = np.asarray(ref_values)[bins]
    copies = lts_bins[:, bins]
    h = 0.5 * (copies[0] / ref + copies[1] / ref)
    return ChannelEstimate(bins, h, copies)


def measure_ul_snr(ltf_bins, guard_samples, subcarriers, n_fft: int) -> float:
    """Uplink received SNR in dB: |S| * P / (n_fft * N0).

    P is the mean received power per allocated subcarrier over the two LTF
    copies; N0 is the per-bin noise power, measured on the noise-only guard
    interval ahead of the packet (per-bin equals per-sample power under the
    unitary FFT).
    """
    guard = np.asarray(guard_samples)
    if guard.size == 0:
        raise ValueError("empty guard window")
    bins = modem.subcarrier_bins(subcarriers, n_fft)
    p_sig = float(np.mean(np.abs(np.asarray(ltf_bins)[:, bins]) ** 2))
    n0 = float(np.mean(np.abs(guard) ** 2))
    return 10.0 * np.log10(len(bins) * p_sig / (n_fft * n0))


def ul_received_snr_db(n_used: int, n_fft: int, per_sub_snr_db: float) -> float:
    """Axis conversion: per-subcarrier SNR -> uplink received SNR."""
    return per_sub_snr_db + 10.0 * np.log10(n_used / n_fft)


def _decode_stream(eq_slots, noise_var_slots, n_msg_bits, scheme):
    """Equalized slots -> (message bits, crc_ok, raw hard bits, slots used)."""
    bps = {modem.BPSK: 1, modem.QPSK: 2, modem.QAM16: 4}[scheme]
    n_coded = 2 * (n_msg_bits + 32 + modem.CONV_K - 1)
    n_slots = -(-n_coded // bps)
    used = eq_slots[:n_slots]
    llrs = modem.qam_soft_demod(used, noise_var_slots[:n_slots], scheme)[:n_coded]
    decoded = modem.viterbi_decode_soft(llrs)
    crc_ok = modem.crc32_check(decoded)
    raw = modem.qam_hard_demod(used, scheme)[:n_coded]
    return decoded[:n_msg_bits], crc_ok, raw, n_slots


def decode_ul(rx_samples, trigger, users, layout: PacketLayout,
              guard_samples=None, n0: float | None = None) -> list:
    """Decode every user's stream from one auto-triggered uplink window.

    ``trigger`` is the sample index (or TriggerEvent) where the packet
    nominally starts; ``guard_samples`` is the noise-only window used for
    noise-floor measurement unless ``n0`` is given directly. A CRC failure
    flags either a decoding error or a silent user.
    """
    if isinstance(trigger, TriggerEvent):
        trigger = trigger.index
    rx = np.asarray(rx_samples, dtype=np.complex128)
    seg = rx[trigger : trigger + layout.duration]
    if seg.size < layout.duration:
        raise ValueError("received stream ends before the packet does")
    all_bins = modem.ofdm_demodulate(seg, layout.n_fft, layout.cp_len, CP_CUT)
    ltf_bins = all_bins[:2]
    payload_bins = all_bins[2:]

    if n0 is None:
        if guard_samples is None or np.size(guard_samples) == 0:
            raise ValueError("need guard samples or an explicit noise floor")
        n0 = float(np.mean(np.abs(np.asarray(guard_samples)) ** 2))

    results = []
    for u in users:
        bins = modem.subcarrier_bins(u.subcarriers, layout.n_fft)
        ref = modem.ul_ltf_values(u.subcarriers, layout.n_fft, u.ltf_seed)
        est = estimate_ul_channel(ltf_bins, ref, bins)
        eq = (payload_bins[:, bins] / est.h).ravel()
        nv = np.broadcast_to(n0 / (2.0 * np.abs(est.h) ** 2),
                             (layout.n_data, bins.size)).ravel()
        bits, crc_ok, raw, n_slots = _decode_stream(eq, nv, u.n_msg_bits, u.scheme)
        snr_db = measure_ul_snr(ltf_bins, guard_samples if guard_samples is not None
                                else np.sqrt(n0) * np.ones(1), u.subcarriers,
                                layout.n_fft)
        ideal = None
        if u.known_symbols is not None:
            ideal = np.asarray(u.known_symbols).ravel()[:n_slots]
        results.append(
            UlDecodeResult(u.user_id, True, crc_ok, bits, raw, n_slots,
                           eq[:n_slots], ideal, snr_db)
        )
    return results


def decode_dl_ci(rx_samples, layout: PacketLayout, train: TrainingSequences,
                 start: int = 0):
    """Recover the piggybacked control info from a downlink packet.

    Equalizes against the preamble LTF, hard-slices the BPSK payload bins,
    and parses the self-delimiting control-info field. Raises CiError when
    the CRC does not check out.
    """
    from . import framing

    rx = np.asarray(rx_samples, dtype=np.complex128)
    seg = rx[start : start + layout.duration]
    n_fft, cp = layout.n_fft, layout.cp_len
    lts1, lts2 = layout.lts_offsets
    win = np.stack([seg[lts1 - CP_CUT : lts1 - CP_CUT + n_fft],
                    seg[lts2 - CP_CUT : lts2 - CP_CUT + n_fft]])
    lts_bins = np.fft.fft(win, norm="ortho", axis=1)
    bins = modem.subcarrier_bins(modem.DATA_SUBCARRIERS, n_fft)
    est = estimate_ul_channel(lts_bins, train.lts_freq, bins)

    bits = []
    need = None
    for off in layout.payload_offsets:
        sym = seg[off + cp - CP_CUT : off + cp - CP_CUT + n_fft]
        eq = np.fft.fft(sym, norm="ortho")[bins] / est.h
        bits.append((eq.real > 0).astype(np.uint8))
        flat = np.concatenate(bits)
        if need is None:
            try:
                need = framing.peek_ci_length(flat)
            except framing.CiError:
                continue
        if need is not None and flat.size >= need:
            return framing.decode_ci(flat[:need])
    raise framing.CiError("payload ended before the control info did")


# ---------------------------------------------------------------------------
# Benchmark OFDM-TDMA receiver
# ---------------------------------------------------------------------------

def tdma_baseline_decode(rx_samples, layout: PacketLayout,
                         train: TrainingSequences, n_msg_bits: int,
                         guard_samples=None, n0: float | None = None,
                         scheme: str = modem.BPSK,
                         known_symbols=None,
                         threshold: float = DETECT_THRESHOLD) -> UlDecodeResult:
    """Conventional single-user OFDM reception with STF detection.

    Detection failure is possible by design (the contrast with
    auto-trigger); it returns an undetected, CRC-failed result. After
    detection: coarse CFO from the STF, LTF channel estimation, and
    per-symbol common-phase-error correction from the four pilots.
    """
    from . import cfo as cfo_mod

    rx = np.asarray(rx_samples, dtype=np.complex128)
    n_fft, cp = layout.n_fft, layout.cp_len
    lts1 = layout.lts_offsets[0]
    start = detect_dl_start(rx, train.lts, lts1_offset=lts1,
                            lts_gap=layout.lts_gap, threshold=threshold)
    empty = np.zeros(0, dtype=np.uint8)
    if start is None or start + layout.duration > rx.size:
        return UlDecodeResult(0, False, False, empty, empty, 0,
                              np.zeros(0, dtype=np.complex128), None, -np.inf)

    seg = rx[start : start + layout.duration]
    coarse = cfo_mod.coarse_estimate(seg[: 10 * layout.sts_len], layout.sts_len)
    seg = cfo_mod.compensate(seg, coarse)

    body = seg[10 * layout.sts_len :]
    all_bins = modem.ofdm_demodulate(body, n_fft, cp, CP_CUT)
    ltf_bins = all_bins[:2]
    payload_bins = all_bins[2:]

    if n0 is None:
        if guard_samples is None or np.size(guard_samples) == 0:
            raise ValueError("need guard samples or an explicit noise floor")
        n0 = float(np.mean(np.abs(np.asarray(guard_samples)) ** 2))

    data_bins = modem.subcarrier_bins(modem.DATA_SUBCARRIERS, n_fft)
    pilot_bins = modem.subcarrier_bins(modem.PILOT_SUBCARRIERS, n_fft)
    ref = tdma_ltf_reference(n_fft)
    est_d = estimate_ul_channel(ltf_bins, ref, data_bins)
    est_p = estimate_ul_channel(ltf_bins, ref, pilot_bins)

    eq = payload_bins[:, data_bins] / est_d.h
    pilots = payload_bins[:, pilot_bins] / est_p.h
    # residual-CFO tracking: common phase error per symbol from the pilots
    cpe = np.angle(np.sum(pilots * np.conj(modem.PILOT_VALUES), axis=1))
    eq = eq * np.exp(-1j * cpe)[:, None]

    nv = np.broadcast_to(n0 / (2.0 * np.abs(est_d.h) ** 2), eq.shape).ravel()
    bits, crc_ok, raw, n_slots = _decode_stream(eq.ravel(), nv, n_msg_bits, scheme)
    snr_db = measure_ul_snr(ltf_bins, guard_samples if guard_samples is not None
                            else np.sqrt(n0) * np.ones(1),
                            modem.DATA_SUBCARRIERS + modem.PILOT_SUBCARRIERS, n_fft)
    ideal = None
    if known_symbols is not None:
        ideal = np.asarray(known_symbols).ravel()[:n_slots]
    return UlDecodeResult(0, True, crc_ok, bits, raw, n_slots,
                          eq.ravel()[:n_slots], ideal, snr_db)
