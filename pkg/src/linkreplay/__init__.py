"""Trace-driven cellular-link replay testbed.

Converts field-measured GNSS and network-performance traces into
time-aligned, delay-corrected replay scenarios, and replays them through
packet-level emulated links so transport and application stacks can be
compared under identical, reproducible network conditions.
"""

__version__ = "0.1.0"
