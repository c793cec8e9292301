import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from ris_outage import rng


def test_mix64_reference_value():
    # first output of SplitMix64 seeded with 0
    assert rng.mix64(0) == 0xE220A8397B1DCDAF


@given(st.lists(st.integers(min_value=0, max_value=2**64 - 1), min_size=1, max_size=20))
def test_scalar_and_array_mix_agree(values):
    arr = rng.mix64_array(np.array(values, dtype=np.uint64))
    assert [int(v) for v in arr] == [rng.mix64(v) for v in values]


@given(st.integers(min_value=0, max_value=2**63), st.integers(min_value=0, max_value=10**9), st.integers(0, 63), st.integers(0, 200))
def test_uniform_range_and_stream_agreement(seed, trial, block, slot):
    u = rng.uniform(seed, trial, block, slot)
    assert 0.0 <= u < 1.0
    assert rng.TrialStream(seed, trial).uniform(block, slot) == u
    keys = rng.trial_keys(seed, np.array([trial]))
    assert rng.uniforms_from_keys(keys, block, slot)[0] == u


def test_streams_differ_by_slot_block_and_trial():
    s = rng.TrialStream(5, 9)
    vals = {s.uniform(b, k) for b in range(4) for k in range(10)}
    vals.add(rng.uniform(5, 10, 0, 0))
    assert len(vals) == 41


def test_uniforms_look_uniform():
    u = rng.uniforms_from_keys(rng.trial_keys(1, np.arange(200_000)), 3, 2)
    assert abs(u.mean() - 0.5) < 0.003
    hist, _ = np.histogram(u, bins=10, range=(0, 1))
    assert hist.min() > 19_000 and hist.max() < 21_000
