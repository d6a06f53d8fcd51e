"""Carrier-frequency-offset estimation, compensation, and uplink precoding.

All offsets are radians per sample; the channel model applies an offset f
as ``x[n] * exp(1j*f*n)``. Estimators return angle divided by correlation
distance, so a noiseless injected offset is recovered exactly. Conversion
to Hz multiplies by sample_rate / (2*pi).

The downlink chain is coarse (short-training autocorrelation, unambiguous
to +-pi/sts_len) -> fine (preamble LTS pair at distance lts_len) ->
ultra-fine (LTS to post-LTF over the full packet). The long ultra-fine
baseline measures only the fractional part of the accumulated rotation;
mid-LTF fields recover the integer multiple of 2*pi via a floor of the
summed per-segment rotations. The fractional part entering that
combination lives in [0, 2*pi) so that floor(total/2*pi) composes exactly
(total = fractional + 2*pi*m), with m negative for negative drifts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framing import PacketLayout

TWO_PI = 2.0 * np.pi

# A measured per-segment rotation this close to +-pi may have wrapped;
# larger true rotations alias silently and cannot be detected at all.
AMBIGUITY_GUARD = np.pi * (31.0 / 32.0)


def wrap_phase(x):
    """Map angles to (-pi, pi]."""
    w = np.mod(x, TWO_PI)
    return np.where(w > np.pi, w - TWO_PI, w) if np.ndim(x) else (
        w - TWO_PI if w > np.pi else w
    )


def rad_per_sample_to_hz(f, sample_rate: float) -> float:
    """rad/sample -> Hz (1 rad/sample = sample_rate/(2*pi) Hz)."""
    if sample_rate <= 0:
        raise ValueError("sample rate must be positive")
    return f * sample_rate / TWO_PI


def hz_to_rad_per_sample(f_hz, sample_rate: float) -> float:
    if sample_rate <= 0:
        raise ValueError("sample rate must be positive")
    return f_hz * TWO_PI / sample_rate


def compensate(samples, f: float) -> np.ndarray:
    """Remove a rotation of f rad/sample: out[n] = in[n] * exp(-1j*f*n)."""
    samples = np.asarray(samples, dtype=np.complex128)
    n = np.arange(samples.size)
    return samples * np.exp(-1j * f * n)


def _pair_angle(samples, span: int, distance: int) -> float:
    """Angle of the correlation of two identical training copies.

    samples[0] must be the first sample of the earlier copy; the later copy
    starts ``distance`` samples after it.
    """
    samples = np.asarray(samples)
    if samples.size < distance + span:
        raise ValueError("stream too short for the requested correlation")
    early = samples[:span]
    late = samples[distance : distance + span]
    return float(np.angle(np.vdot(early, late)))


def coarse_estimate(stf_samples, sts_len: int = 16, n_sts: int = 10) -> float:
    """Coarse CFO from the short training field.

    Averages the autocorrelation angle of successive STS copies over the
    nine adjacent pairs; unambiguous for |f| < pi/sts_len.
    """
    y = np.asarray(stf_samples)
    if y.size < n_sts * sts_len:
        raise ValueError(f"need at least {n_sts * sts_len} STF samples")
    total = 0.0
    for p in range(1, n_sts):
        z = np.vdot(y[(p - 1) * sts_len : p * sts_len], y[p * sts_len : (p + 1) * sts_len])
        total += np.angle(z) / sts_len
    return total / (n_sts - 1)


def fine_estimate(samples, lts_len: int, gap: int) -> float:
    """Fine CFO from the preamble LTS pair; samples[0] is the first LTS sample.

    Result lies in (-pi/gap, pi/gap]; rotations beyond that alias.
    """
    return _pair_angle(samples, lts_len, gap) / gap


def ultrafine_estimate(samples, lts_len: int, pltf_dist: int) -> float:
    """Fractional long-baseline CFO between a preamble LTS and the post-LTF.

    samples[0] is the first sample of the earlier LTS of the correlation
    pair. Only the fractional part of the rotation over ``pltf_dist``
    samples is observable; the result lies in (-pi/pltf_dist, pi/pltf_dist].
    """
    return _pair_angle(samples, lts_len, pltf_dist) / pltf_dist


@dataclass(frozen=True)
class MltfRecovery:
    """Integer-ambiguity recovery result.

    combined = fractional + m * 2*pi / pltf_dist holds exactly, with the
    fractional rotation taken in [0, 2*pi). ``ambiguous`` is set when any
    measured segment rotation sits within the guard zone of +-pi; true
    per-segment rotations beyond pi alias silently.
    """

    m: int
    combined: float
    fractional: float
    segment_angles: np.ndarray
    ambiguous: bool


def mltf_recover(samples, layout: PacketLayout) -> MltfRecovery:
    """Recover the integer part of the long-baseline rotation via mid-LTFs.

    ``samples`` is the fine-compensated packet stream (sample 0 = packet
    start). Correlates each adjacent pair of the chain LTS2 -> mid-LTFs ->
    post-LTF; the per-segment angles sum to the total rotation over
    ``pltf_dist`` samples, whose floor multiple of 2*pi reinstates the part
    the fractional estimate cannot see.
    """
    samples = np.asarray(samples)
    chain = layout.chain_offsets
    if len(chain) < 2:
        raise ValueError("layout has no mid-LTF correlation chain")
    span = layout.lts_len
    angles = np.empty(len(chain) - 1)
    for j in range(1, len(chain)):
        seg = samples[chain[j - 1] :]
        angles[j - 1] = _pair_angle(seg, span, chain[j] - chain[j - 1])
    ambiguous = bool(np.max(np.abs(angles)) >= AMBIGUITY_GUARD)

    m = int(np.floor(np.sum(angles) / TWO_PI))
    frac = float(
        np.mod(_pair_angle(samples[chain[0] :], span, layout.pltf_dist), TWO_PI)
    )
    combined = (frac + m * TWO_PI) / layout.pltf_dist
    return MltfRecovery(m, combined, frac / layout.pltf_dist, angles, ambiguous)


@dataclass(frozen=True)
class CfoEstimate:
    """Stage-by-stage downlink CFO estimate, all in rad/sample.

    total = coarse + fine + combined estimates the rotation present on the
    received downlink packet; theta = -total is the uplink precoding phase
    rate (by CFO reciprocity the uplink sees the opposite-sign offset, so
    pre-rotating by exp(-1j*theta*n) cancels it).
    """

    coarse: float
    fine: float
    ultrafine: float
    m: int
    combined: float
    ambiguous: bool = False

    @property
    def total(self) -> float:
        return self.coarse + self.fine + self.combined

    @property
    def theta(self) -> float:
        return -self.total

    @property
    def theta_components(self) -> tuple:
        return (-self.coarse, -self.fine, -self.combined)


def slp_estimate(samples, layout: PacketLayout) -> CfoEstimate:
    """Full downlink estimation chain on one received packet.

    ``samples`` must start at the first STF sample. Runs coarse ->
    compensate -> fine -> compensate -> ultra-fine, with mid-LTF integer
    recovery when the layout carries mid-LTFs.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    if layout.kind != "dl":
        raise ValueError("SLP estimation runs on downlink packets")
    lts1, lts2 = layout.lts_offsets

    coarse = coarse_estimate(samples[: 10 * layout.sts_len], layout.sts_len)
    r1 = compensate(samples, coarse)
    fine = fine_estimate(r1[lts1:], layout.lts_len, layout.lts_gap)
    r2 = compensate(r1, fine)

    if layout.n_mltf > 0:
        rec = mltf_recover(r2, layout)
        return CfoEstimate(coarse, fine, rec.fractional, rec.m, rec.combined,
                           rec.ambiguous)
    uf = ultrafine_estimate(r2[lts2:], layout.lts_len, layout.pltf_dist)
    return CfoEstimate(coarse, fine, uf, 0, uf)


def precode(samples, rates) -> np.ndarray:
    """Pre-rotate an uplink packet: out[n] = in[n] * exp(-1j*sum(rates)*n).

    ``rates`` is the precoding phase rate or its per-stage components
    (CfoEstimate.theta_components for a closed precoding loop).
    """
    rate = float(np.sum(rates))
    samples = np.asarray(samples, dtype=np.complex128)
    n = np.arange(samples.size)
    return samples * np.exp(-1j * rate * n)


def residual_cfo(estimate, truth: float) -> float:
    """Absolute error between an estimate (or its total) and the true offset."""
    value = estimate.total if isinstance(estimate, CfoEstimate) else float(estimate)
    return abs(value - truth)


def probe_track_cfo(samples, layout: PacketLayout) -> float:
    """CFO of a channel-probe packet (STF + back-to-back LTS copies).

    Coarse STF estimate plus the mean adjacent-LTS correlation angle over
    the LTS train; the probing experiment's estimator for tracking CFO
    variation over time.
    """
    if layout.kind != "probe":
        raise ValueError("probe tracking runs on probe packets")
    samples = np.asarray(samples, dtype=np.complex128)
    coarse = coarse_estimate(samples[: 10 * layout.sts_len], layout.sts_len)
    r = compensate(samples, coarse)
    offs = layout.lts_offsets
    angles = [
        _pair_angle(r[offs[j - 1] :], layout.lts_len, layout.lts_len)
        for j in range(1, len(offs))
    ]
    return coarse + float(np.mean(angles)) / layout.lts_len
