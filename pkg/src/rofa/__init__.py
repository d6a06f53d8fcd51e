"""Deterministic baseband simulator for a reliability-first OFDMA uplink.

Subpackages by concern: framing (packet/frame geometry), modem (bits,
coding, OFDM, training), cfo (estimation chain and uplink precoding),
channel (reciprocal link impairments), packets (waveform assembly),
sync_rx (auto-trigger scheduling and the multiuser receiver), metrics,
and scenarios (the experiment harness behind the ``rofa`` CLI).
"""

from . import cfo, channel, config, framing, metrics, modem, packets, scenarios, sync_rx
from ._kernels import HAVE_COMPILED

__version__ = "0.1.0"

__all__ = [
    "cfo", "channel", "config", "framing", "metrics", "modem", "packets",
    "scenarios", "sync_rx", "HAVE_COMPILED", "__version__",
]
