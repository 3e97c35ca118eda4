"""Deterministic counter-based randomness.

All random objects in the package (binning codes, key maps, Monte Carlo
samplers, random colorings) are drawn from Philox streams keyed by a user
seed plus small integer domain-separation tags.  Identical (seed, tags)
always reproduce the same stream, independent of call order and platform.
"""

import numpy as np

# domain-separation tags
STAGE1_BIN = 1
STAGE2_CODEWORD = 2
STAGE2_KEY = 3
MC_SAMPLER = 4
COLOR_PHI = 5
COLOR_CELL = 6

_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)


def _fold(parts):
    """FNV-1a fold of integer tags into a single 64-bit subkey."""
    h = _FNV_OFFSET
    with np.errstate(over="ignore"):
        for p in parts:
            h = (h ^ np.uint64(int(p) & 0xFFFFFFFFFFFFFFFF)) * _FNV_PRIME
    return h


def stream(seed, *tags):
    """Generator backed by Philox keyed with (seed, folded tags)."""
    key = np.array([np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF), _fold(tags)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
