"""Quality metrics: EVM, BER, PER, empirical CDFs, effective-SNR gain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def evm(received, ideal) -> float:
    """Root-mean-square error vector length, normalized to the constellation.

    ``ideal`` gives the per-symbol ideal constellation points; the
    normalization denominator is the mean power of the unique points.
    """
    received = np.asarray(received, dtype=np.complex128).ravel()
    ideal = np.asarray(ideal, dtype=np.complex128).ravel()
    if received.size == 0:
        raise ValueError("EVM needs at least one received symbol")
    if ideal.size != received.size:
        raise ValueError("received and ideal symbol counts differ")
    err = np.mean(np.abs(received - ideal) ** 2)
    ref = np.mean(np.abs(np.unique(ideal)) ** 2)
    return float(np.sqrt(err / ref))


def ber(tx_bits, rx_bits) -> float:
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.size != rx.size:
        raise ValueError("bit streams differ in length")
    if tx.size == 0:
        raise ValueError("empty bit streams")
    return float(np.count_nonzero(tx != rx) / tx.size)


def per(crc_outcomes) -> float:
    """Packet error rate from a sequence of pass/fail outcomes (True = pass)."""
    outcomes = np.asarray(crc_outcomes, dtype=bool).ravel()
    if outcomes.size == 0:
        raise ValueError("no packet outcomes")
    return float(np.count_nonzero(~outcomes) / outcomes.size)


@dataclass(frozen=True)
class Ecdf:
    """Right-continuous empirical CDF of a sample."""

    values: np.ndarray

    @classmethod
    def of(cls, samples) -> "Ecdf":
        v = np.sort(np.asarray(samples, dtype=np.float64).ravel())
        if v.size == 0:
            raise ValueError("empty sample")
        return cls(v)

    def __call__(self, x):
        idx = np.searchsorted(self.values, x, side="right")
        return idx / self.values.size

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.values, q))


def ecdf(samples) -> Ecdf:
    return Ecdf.of(samples)


def effective_snr_gain(n_used_a: int, n_used_b: int) -> float:
    """Effective-SNR gain in dB of concentrating a fixed transmit power on
    ``n_used_a`` subcarriers instead of ``n_used_b``."""
    if n_used_a <= 0 or n_used_b <= 0:
        raise ValueError("subcarrier counts must be positive")
    return float(10.0 * np.log10(n_used_b / n_used_a))
