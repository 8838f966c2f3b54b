import numpy as np
from hypothesis import given, strategies as st

from escape_sensing.rng import SplitMix64, derive_seed, fnv1a, mix64


def test_splitmix_reference_values():
    # published SplitMix64 outputs for seed 0
    r = SplitMix64(0)
    assert [r.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_fnv1a_reference():
    assert fnv1a("") == 0xCBF29CE484222325
    assert fnv1a("a") == 0xAF63DC4C8601EC8C


def test_streams_differ_by_tag():
    a, b = SplitMix64(5, "x"), SplitMix64(5, "y")
    assert [a.next_u64() for _ in range(4)] != [b.next_u64() for _ in range(4)]


def test_block_matches_scalar():
    a, b = SplitMix64(11, "t"), SplitMix64(11, "t")
    blk = a.random_block(50)
    assert np.array_equal(blk, np.array([b.random() for _ in range(50)]))
    assert a.next_u64() == b.next_u64()


@given(st.integers(0, 2 ** 64 - 1), st.integers(1, 40))
def test_permutation_and_randbelow(seed, n):
    r = SplitMix64(seed, "p")
    assert sorted(r.permutation(n).tolist()) == list(range(n))
    for _ in range(10):
        assert 0 <= r.randbelow(n) < n
    assert 0.0 <= r.random() < 1.0


def test_derive_seed_stable():
    assert derive_seed(0, "cell", 3) == derive_seed(0, "cell", 3)
    assert derive_seed(0, "cell", 3) != derive_seed(0, "cell", 4)
    assert 0 <= mix64(12345) < 2 ** 64
