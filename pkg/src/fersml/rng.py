"""Seeded random streams for the simulators.

A 64-bit seed is expanded with SplitMix64 into per-stream seeds, each of which
seeds a ``random.Random`` (MT19937).  Both algorithms are fixed and their
seeding is platform independent, so results reproduce bit for bit.
"""

import random

MASK64 = (1 << 64) - 1

# Stream selectors; each is XORed into the match seed before mixing.
MATCH_STREAM = 0x4D41544348000000
HOME_STREAM = 0x484F4D4500000000
AWAY_STREAM = 0x4157415900000000


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, stream: int) -> int:
    return splitmix64((seed & MASK64) ^ stream)


def stream(seed: int, selector: int) -> random.Random:
    return random.Random(derive_seed(seed, selector))
