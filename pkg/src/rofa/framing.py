"""Packet and frame structure.

Computes exact sample offsets for every field of the downlink, uplink,
channel-probe and benchmark packets, and encodes/decodes the control
information piggybacked on downlink packets.

Field geometry (64-FFT defaults, all sizes in samples):

    DL:    STF 160 (10 x 16 STS) | LTF 160 (32 guard + LTS + LTS)
           | payload symbols (cp+fft each, control info occupies the first
           payload symbols) interleaved with mid-LTF fields (cp + LTS) after
           every ``mltf_gap`` payload symbols | post-LTF field (cp + LTS)
    UL:    two (cp + LTS) LTF fields | payload symbols; no STF, no post-LTF
    probe: STF | ``n_lts`` back-to-back LTS bodies (no prefixes)
    TDMA:  STF | two (cp + LTS) LTF fields | payload symbols

``pltf_dist`` is the sample distance from the first sample of the second
preamble LTS to the first sample of the post-LTF training body; it is the
correlation baseline of the long-span CFO estimate and the quantum of its
integer ambiguity. The degenerate empty-payload layout gives
``pltf_dist == lts_len + cp_len``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import modem


class LayoutError(ValueError):
    """Inconsistent packet-layout parameters."""


class CiError(ValueError):
    """Malformed control-information bit stream."""


def expected_mltf_count(n_data: int, mltf_gap: int) -> int:
    """Mid-LTFs inserted after every ``mltf_gap`` payload symbols, none after
    the final segment."""
    if n_data <= 0 or mltf_gap <= 0:
        return 0
    return max(-(-n_data // mltf_gap) - 1, 0)


@dataclass(frozen=True)
class PacketLayout:
    """Sample-indexed map of one packet's fields.

    ``fields`` maps field name -> (start, length) and covers the packet
    exactly. ``lts_offsets`` are the body starts of the preamble LTS pair
    (or of every LTS for probe packets); ``chain_offsets`` are the body
    starts of the long-span correlation chain (LTS2, each mid-LTF, post-LTF)
    for downlink packets.
    """

    kind: str
    n_fft: int
    cp_len: int
    sts_len: int
    lts_len: int
    lts_gap: int
    n_data: int
    n_mltf: int
    mltf_gap: int
    pltf_dist: int
    fields: dict = field(repr=False)
    lts_offsets: tuple
    chain_offsets: tuple = ()

    @property
    def duration(self) -> int:
        start, length = next(reversed(self.fields.values()))
        return start + length

    @property
    def sym_len(self) -> int:
        return self.n_fft + self.cp_len

    @property
    def payload_offsets(self) -> tuple:
        return tuple(v[0] for k, v in self.fields.items() if k.startswith("payload"))

    @property
    def mltf_offsets(self) -> tuple:
        return tuple(v[0] for k, v in self.fields.items() if k.startswith("mltf"))

    def _check(self):
        pos = 0
        for name, (start, length) in self.fields.items():
            if start != pos or length <= 0:
                raise LayoutError(f"field {name} breaks contiguous coverage")
            pos = start + length


def _finish(layout: PacketLayout) -> PacketLayout:
    layout._check()
    return layout


def build_dl_layout(
    n_fft: int = 64,
    cp_len: int = 16,
    n_data: int = 128,
    n_mltf: int = 0,
    mltf_gap: int = 32,
    sts_len: int = 16,
) -> PacketLayout:
    """Downlink packet layout; raises LayoutError on inconsistent mid-LTF counts."""
    if n_data < 0 or n_mltf < 0:
        raise LayoutError("negative field counts")
    if n_mltf > 0 and n_mltf != expected_mltf_count(n_data, mltf_gap):
        raise LayoutError(
            f"{n_mltf} mid-LTFs inconsistent with {n_data} payload symbols "
            f"at gap {mltf_gap}"
        )
    lts = n_fft
    sym = n_fft + cp_len
    ltf_len = 2 * lts + 2 * cp_len  # double-length guard ahead of the LTS pair

    fields: dict = {}
    pos = 0

    def add(name, length):
        nonlocal pos
        fields[name] = (pos, length)
        pos += length

    add("stf", 10 * sts_len)
    ltf_start = pos
    add("ltf", ltf_len)
    lts1 = ltf_start + 2 * cp_len
    lts2 = lts1 + lts

    chain = [lts2]
    placed = 0
    mltf_idx = 0
    while placed < n_data:
        seg = min(mltf_gap, n_data - placed) if n_mltf else n_data
        for k in range(seg):
            add(f"payload_{placed + k:03d}", sym)
        placed += seg
        if n_mltf and placed < n_data:
            start = pos
            add(f"mltf_{mltf_idx}", cp_len + lts)
            chain.append(start + cp_len)
            mltf_idx += 1
    pltf_start = pos
    add("pltf", cp_len + lts)
    chain.append(pltf_start + cp_len)

    return _finish(
        PacketLayout(
            kind="dl",
            n_fft=n_fft,
            cp_len=cp_len,
            sts_len=sts_len,
            lts_len=lts,
            lts_gap=lts,
            n_data=n_data,
            n_mltf=mltf_idx,
            mltf_gap=mltf_gap if n_mltf else 0,
            pltf_dist=(pltf_start + cp_len) - lts2,
            fields=fields,
            lts_offsets=(lts1, lts2),
            chain_offsets=tuple(chain),
        )
    )


def build_ul_layout(n_fft: int = 64, cp_len: int = 16, n_data: int = 128) -> PacketLayout:
    """Uplink packet layout: LTF pair plus payload only."""
    if n_data < 0:
        raise LayoutError("negative payload length")
    sym = n_fft + cp_len
    fields = {"ltf0": (0, sym), "ltf1": (sym, sym)}
    pos = 2 * sym
    for k in range(n_data):
        fields[f"payload_{k:03d}"] = (pos, sym)
        pos += sym
    return _finish(
        PacketLayout(
            kind="ul",
            n_fft=n_fft,
            cp_len=cp_len,
            sts_len=0,
            lts_len=n_fft,
            lts_gap=sym,
            n_data=n_data,
            n_mltf=0,
            mltf_gap=0,
            pltf_dist=0,
            fields=fields,
            lts_offsets=(cp_len, sym + cp_len),
        )
    )


def build_probe_layout(n_fft: int = 64, n_lts: int = 128, sts_len: int = 16) -> PacketLayout:
    """Channel-probe packet: STF followed by back-to-back LTS bodies."""
    if n_lts < 2:
        raise LayoutError("probe packets need at least two LTS copies")
    fields = {"stf": (0, 10 * sts_len)}
    pos = 10 * sts_len
    offsets = []
    for k in range(n_lts):
        fields[f"lts_{k:03d}"] = (pos, n_fft)
        offsets.append(pos)
        pos += n_fft
    return _finish(
        PacketLayout(
            kind="probe",
            n_fft=n_fft,
            cp_len=0,
            sts_len=sts_len,
            lts_len=n_fft,
            lts_gap=n_fft,
            n_data=0,
            n_mltf=0,
            mltf_gap=0,
            pltf_dist=0,
            fields=fields,
            lts_offsets=tuple(offsets),
        )
    )


def build_tdma_ul_layout(n_fft: int = 64, cp_len: int = 16, n_data: int = 8,
                         sts_len: int = 16) -> PacketLayout:
    """Benchmark OFDM-TDMA uplink packet: conventional STF + LTF preamble."""
    sym = n_fft + cp_len
    fields = {"stf": (0, 10 * sts_len)}
    pos = 10 * sts_len
    fields["ltf0"] = (pos, sym)
    fields["ltf1"] = (pos + sym, sym)
    lts_offsets = (pos + cp_len, pos + sym + cp_len)
    pos += 2 * sym
    for k in range(n_data):
        fields[f"payload_{k:03d}"] = (pos, sym)
        pos += sym
    return _finish(
        PacketLayout(
            kind="tdma_ul",
            n_fft=n_fft,
            cp_len=cp_len,
            sts_len=sts_len,
            lts_len=n_fft,
            lts_gap=sym,
            n_data=n_data,
            n_mltf=0,
            mltf_gap=0,
            pltf_dist=0,
            fields=fields,
            lts_offsets=lts_offsets,
        )
    )


# ---------------------------------------------------------------------------
# Frame timing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameTiming:
    """Frame schedule: DL slot, guard, UL slot, guard, repeating."""

    t_dl_start: int
    t_dl: int
    t_ul: int
    guard: int

    def __post_init__(self):
        if self.t_dl <= 0 or self.t_ul <= 0 or self.guard <= 0:
            raise LayoutError("slot and guard durations must be positive")

    @property
    def period(self) -> int:
        return self.t_dl + self.t_ul + 2 * self.guard

    def dl_start(self, frame: int = 0) -> int:
        return self.t_dl_start + frame * self.period

    def ul_start(self, frame: int = 0) -> int:
        return self.dl_start(frame) + self.t_dl + self.guard


# ---------------------------------------------------------------------------
# Subcarrier allocations and control information
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubcarrierAllocation:
    """One user's set of signed subcarrier indices (DC and guard band excluded)."""

    user: int
    subcarriers: tuple

    def __post_init__(self):
        object.__setattr__(self, "subcarriers", tuple(sorted(self.subcarriers)))

    def validate(self, n_fft: int = 64):
        limit = n_fft // 2 - 6  # guard band width of the legacy 64-FFT mask
        seen = set()
        for k in self.subcarriers:
            if k == 0 or abs(k) > limit:
                raise LayoutError(f"subcarrier {k} is DC or inside the guard band")
            if k in seen:
                raise LayoutError(f"duplicate subcarrier {k}")
            seen.add(k)

    def bins(self, n_fft: int = 64) -> np.ndarray:
        return modem.subcarrier_bins(self.subcarriers, n_fft)


def validate_disjoint(allocations, n_fft: int = 64):
    used = set()
    for alloc in allocations:
        alloc.validate(n_fft)
        overlap = used.intersection(alloc.subcarriers)
        if overlap:
            raise LayoutError(f"subcarriers {sorted(overlap)} allocated twice")
        used.update(alloc.subcarriers)


@dataclass(frozen=True)
class ControlInfo:
    """Piggybacked control info: allocation map plus next-frame slot durations."""

    allocations: tuple  # of SubcarrierAllocation
    t_dl: int
    t_ul: int

    def validate(self, n_fft: int = 64):
        validate_disjoint(self.allocations, n_fft)
        if not (0 <= self.t_dl < 2**32 and 0 <= self.t_ul < 2**32):
            raise LayoutError("slot durations out of range")


def _pack_uint(value: int, width: int) -> list:
    return [(value >> i) & 1 for i in range(width)]


def _take_uint(bits, pos: int, width: int):
    if pos + width > bits.size:
        raise CiError("control info truncated")
    value = 0
    for i in range(width):
        value |= int(bits[pos + i]) << i
    return value, pos + width


def encode_ci(ci: ControlInfo) -> np.ndarray:
    """Serialize control info to bits (uncoded, CRC32-protected)."""
    ci.validate()
    out = _pack_uint(len(ci.allocations), 8)
    for alloc in ci.allocations:
        out += _pack_uint(alloc.user, 8)
        out += _pack_uint(len(alloc.subcarriers), 8)
        for k in alloc.subcarriers:
            out += _pack_uint(k % 256, 8)  # signed index, two's complement
    out += _pack_uint(ci.t_dl, 32)
    out += _pack_uint(ci.t_ul, 32)
    return modem.crc32_append(np.array(out, dtype=np.uint8))


def decode_ci(bits) -> ControlInfo:
    """Parse control-info bits; raises CiError on CRC failure or bad structure."""
    bits = modem.as_bits(bits)
    if bits.size < 32 + 72:
        raise CiError("control info shorter than the fixed header")
    if not modem.crc32_check(bits):
        raise CiError("control info CRC mismatch")
    body = bits[:-32]
    pos = 0
    n_users, pos = _take_uint(body, pos, 8)
    allocations = []
    for _ in range(n_users):
        user, pos = _take_uint(body, pos, 8)
        count, pos = _take_uint(body, pos, 8)
        subs = []
        for _ in range(count):
            raw, pos = _take_uint(body, pos, 8)
            subs.append(raw - 256 if raw >= 128 else raw)
        allocations.append(SubcarrierAllocation(user, tuple(subs)))
    t_dl, pos = _take_uint(body, pos, 32)
    t_ul, pos = _take_uint(body, pos, 32)
    if pos != body.size:
        raise CiError("trailing bits after control info")
    ci = ControlInfo(tuple(allocations), t_dl, t_ul)
    try:
        ci.validate()
    except LayoutError as exc:
        raise CiError(str(exc)) from exc
    return ci


def peek_ci_length(bits) -> int:
    """Total control-info length in bits, parsed from its self-delimiting
    header counts; raises CiError when the stream is too short to tell."""
    bits = modem.as_bits(bits)
    pos = 0
    n_users, pos = _take_uint(bits, pos, 8)
    for _ in range(n_users):
        pos += 8  # user id
        count, pos = _take_uint(bits, pos, 8)
        pos += 8 * count
    total = pos + 64 + 32
    if n_users > 64:
        raise CiError("implausible user count")
    return total


def ci_symbol_count(ci: ControlInfo, bins_per_symbol: int = 48) -> int:
    """Payload OFDM symbols consumed by the control info at one bit per bin."""
    n_bits = encode_ci(ci).size
    return -(-n_bits // bins_per_symbol)
