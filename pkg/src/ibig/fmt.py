"""Locale-independent number formatting used by every textual surface.

All human-readable output (CLI text, trace files, API display strings) goes
through the same 12-significant-digit rule so golden files stay portable.
"""


def sig12(x: float) -> str:
    """Format a float with 12 significant digits."""
    return format(float(x), ".12g")


def round12(x: float) -> float:
    """Round to the 12-significant-digit grid used for emitted numbers."""
    return float(sig12(x))
