"""Reed–Muller codes over the erasure channel: EXIT functions, symmetry and thresholds."""

__version__ = "0.1.0"
