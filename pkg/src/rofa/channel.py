"""Simulated link impairments.

Reciprocal CFO links (one oscillator per node: downlink and uplink
rotations have equal magnitude and opposite sign), complex AWGN, FIR
multipath, integer timing offsets, per-direction gains, multiuser
superposition, and a bounded CFO random walk for coherence experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DL = "dl"
UL = "ul"


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic generator for (seed, stream id...); identical keys give
    identical draws, distinct keys independent streams."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def apply_cfo(samples, rate: float) -> np.ndarray:
    """Rotate by a frequency offset: out[n] = in[n] * exp(1j*rate*n)."""
    samples = np.asarray(samples, dtype=np.complex128)
    return samples * np.exp(1j * rate * np.arange(samples.size))


def awgn(samples, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise of total variance noise_var."""
    samples = np.asarray(samples, dtype=np.complex128)
    if noise_var <= 0:
        return samples.copy()
    scale = np.sqrt(noise_var / 2.0)
    return samples + scale * (
        rng.standard_normal(samples.size) + 1j * rng.standard_normal(samples.size)
    )


def complex_noise(n: int, noise_var: float, rng: np.random.Generator) -> np.ndarray:
    scale = np.sqrt(noise_var / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


@dataclass
class DriftModel:
    """Bounded random walk of the link CFO, stepped once per frame."""

    bound: float  # max |cfo(t) - cfo(0)|, rad/sample
    step: float   # max per-frame increment, rad/sample


@dataclass
class LinkModel:
    """One user<->AP link.

    ``cfo`` carries the uplink-direction sign; the downlink direction sees
    ``-cfo`` (reciprocity is exact by construction). ``timing_offset`` is an
    integer sample delay, ``noise_var`` the per-sample complex noise power.
    """

    cfo: float = 0.0
    dl_gain: float = 1.0
    ul_gain: float = 1.0
    taps: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=np.complex128))
    timing_offset: int = 0
    noise_var: float = 0.0
    drift: DriftModel | None = None
    _cfo_nominal: float = field(init=False, repr=False)
    _drift_offset: float = field(init=False, default=0.0, repr=False)

    def __post_init__(self):
        self.taps = np.atleast_1d(np.asarray(self.taps, dtype=np.complex128))
        if self.taps.size == 0:
            raise ValueError("multipath taps must be non-empty")
        if self.dl_gain <= 0 or self.ul_gain <= 0:
            raise ValueError("gains must be positive")
        self._cfo_nominal = self.cfo

    @property
    def ul_cfo(self) -> float:
        return self.cfo

    @property
    def dl_cfo(self) -> float:
        return -self.cfo


def traverse(link: LinkModel, direction: str, samples,
             rng: np.random.Generator | None = None,
             noise_var: float | None = None) -> np.ndarray:
    """Run samples through the link in one direction.

    Applies the FIR taps, the direction gain, the integer timing delay, the
    direction-signed CFO (phase anchored at the output stream origin), and
    AWGN. ``noise_var`` overrides the link's configured value.
    """
    if direction not in (DL, UL):
        raise ValueError(f"direction must be {DL!r} or {UL!r}")
    x = np.asarray(samples, dtype=np.complex128)
    y = np.convolve(x, link.taps) if link.taps.size > 1 else link.taps[0] * x
    y = (link.dl_gain if direction == DL else link.ul_gain) * y
    if link.timing_offset:
        y = np.concatenate([np.zeros(link.timing_offset, dtype=np.complex128), y])
    y = apply_cfo(y, link.dl_cfo if direction == DL else link.ul_cfo)
    var = link.noise_var if noise_var is None else noise_var
    if var > 0:
        if rng is None:
            raise ValueError("noise injection requires an RNG stream")
        y = awgn(y, var, rng)
    return y


def superimpose(streams, total_len: int | None = None) -> np.ndarray:
    """Sum (samples, start_index) pairs on a common timeline."""
    streams = [(np.asarray(s, dtype=np.complex128), int(at)) for s, at in streams]
    if total_len is None:
        total_len = max((at + s.size for s, at in streams), default=0)
    out = np.zeros(total_len, dtype=np.complex128)
    for s, at in streams:
        stop = min(at + s.size, total_len)
        if stop > at:
            out[at:stop] += s[: stop - at]
    return out


def step_drift(link: LinkModel, rng: np.random.Generator) -> LinkModel:
    """Advance the link's CFO random walk by one frame; reciprocity preserved."""
    if link.drift is None or link.drift.bound <= 0:
        return link
    delta = rng.uniform(-link.drift.step, link.drift.step)
    walk = np.clip(link._drift_offset + delta, -link.drift.bound, link.drift.bound)
    link._drift_offset = float(walk)
    link.cfo = link._cfo_nominal + link._drift_offset
    return link
