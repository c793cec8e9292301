"""Counter-based random streams.

Every variate in the simulator is a pure function of
``(seed, trial, block, slot)``: the 64-bit key is built by chaining the
SplitMix64 finaliser, and a uniform in [0, 1) is the top 53 bits of the key.
Because no generator state is carried between draws, trials can be sharded
across any number of workers without changing a single bit of the output,
and two runs sharing a seed automatically share random numbers (CRN).

The compiled kernel in ``_kernels.pyx`` reimplements :func:`mix64`; both
implementations must stay bit-identical.
"""

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1
_SLOT_BITS = 20
_INV_2_53 = 2.0**-53

# scenario phases live at trial indices >= 2**63, never used by simulation trials
PHASE_TRIAL_BASE = 1 << 63

# slot layout within one (trial, block) stream
SLOT_U_OUTDATED = 0
SLOT_U_OUTDATED_PHASE = 1
SLOT_U_INNOV = 2
SLOT_U_INNOV_PHASE = 3
SLOT_B_OUTDATED = 4
SLOT_B_OUTDATED_PHASE = 5
SLOT_B_INNOV = 6
SLOT_B_INNOV_PHASE = 7
SLOT_FAILURE0 = 8


def mix64(z):
    """SplitMix64 output function on a Python int (wrapping at 2**64)."""
    z = (z + GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def mix64_array(z):
    """Vectorised :func:`mix64` over a uint64 array."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def seed_key(seed):
    return mix64(int(seed) & _MASK)


def stream_suffix(block, slot):
    if not 0 <= slot < (1 << _SLOT_BITS):
        raise ValueError(f"slot out of range: {slot}")
    return ((int(block) << _SLOT_BITS) | int(slot)) & _MASK


def key(seed, trial, block, slot):
    """64-bit key for one variate."""
    k = mix64(seed_key(seed) ^ (int(trial) & _MASK))
    return mix64(k ^ stream_suffix(block, slot))


def uniform(seed, trial, block, slot):
    """Scalar uniform in [0, 1) for one (seed, trial, block, slot)."""
    return (key(seed, trial, block, slot) >> 11) * _INV_2_53


def trial_keys(seed, trials):
    """Per-trial intermediate keys for an array of global trial indices."""
    t = np.asarray(trials, dtype=np.uint64)
    return mix64_array(np.uint64(seed_key(seed)) ^ t)


def uniforms_from_keys(tkeys, block, slot):
    """Uniforms in [0, 1) for every trial key at a fixed (block, slot)."""
    k = mix64_array(tkeys ^ np.uint64(stream_suffix(block, slot)))
    return (k >> np.uint64(11)).astype(np.float64) * _INV_2_53


class TrialStream:
    """The random stream of a single trial, addressed by (block, slot)."""

    def __init__(self, seed, trial):
        self.seed = int(seed)
        self.trial = int(trial)
        self._tkey = mix64(seed_key(seed) ^ (self.trial & _MASK))

    def uniform(self, block, slot):
        return (mix64(self._tkey ^ stream_suffix(block, slot)) >> 11) * _INV_2_53

    def __repr__(self):
        return f"TrialStream(seed={self.seed}, trial={self.trial})"
