"""Enumeration and solver caps.

Exceeding a cap raises :class:`ptlab.errors.ResourceLimitError`; nothing is
silently truncated. The module-level :data:`LIMITS` instance is what the
library consults by default, and every capped function also takes an explicit
``cap`` keyword.
"""

from dataclasses import dataclass


@dataclass
class Limits:
    pairing_m: int = 8          # all pairings of [2m]: (2m-1)!! objects
    set_partition_n: int = 7    # full scans over set partitions of [n]
    noncrossing_m: int = 12
    ap_m: int = 8
    wg_symbolic_m: int = 5      # rational-function Gram solve
    wg_integer_m: int = 7       # exact rational Gram solve at fixed M
    blocks_sweep_m: int = 3


LIMITS = Limits()
