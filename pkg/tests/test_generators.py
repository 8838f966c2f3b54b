import numpy as np
import pytest

from escape_sensing.core import INF
from escape_sensing.generators import GeneratorConfig, generate, generate_kind


def test_same_config_bit_identical():
    for kind in ("default", "euclidean", "randomlevel", "append"):
        a = generate(GeneratorConfig(kind, 9, 4, 2, seed=77))
        b = generate(GeneratorConfig(kind, 9, 4, 2, seed=77))
        assert a.to_json() == b.to_json()
        assert a != generate(GeneratorConfig(kind, 9, 4, 2, seed=78))


def test_values_uniform_unit_interval():
    inst = generate_kind("default", 2000, 1, seed=3)
    assert inst.values.min() >= 0 and inst.values.max() < 1
    assert abs(inst.values.mean() - 0.5) < 0.03


def test_default_density():
    # 40000 Bernoulli(0.2) draws: sd of the mean is 0.002, so ±0.02 is 10 sd
    for seed in (0, 1, 2):
        inst = generate_kind("default", 200, 200, seed=seed)
        assert abs(inst.matrix.mean() - 0.2) <= 0.02


def test_append_density_half():
    inst = generate_kind("append", 200, 200, seed=5)
    assert abs(inst.matrix.mean() - 0.5) <= 0.02
    assert inst.metadata["p"] == 0.5


def test_euclidean_matches_recorded_points():
    inst = generate_kind("euclidean", 30, 6, seed=9)
    t = np.array(inst.metadata["target_points"])
    s = np.array(inst.metadata["sensor_points"])
    for i in range(30):
        for j in range(6):
            assert inst.matrix[i, j] == (np.hypot(*(t[i] - s[j])) < 0.3)


def test_euclidean_identical_point_is_sensed():
    # the comparison is strict, distance 0 is inside any positive radius
    inst = generate_kind("euclidean", 1, 1, seed=0, radius=1e-12)
    t = np.array(inst.metadata["target_points"][0])
    s = np.array(inst.metadata["sensor_points"][0])
    assert inst.matrix[0, 0] == (np.hypot(*(t - s)) < 1e-12)
    big = generate_kind("euclidean", 1, 1, seed=0, radius=2.0)
    assert big.matrix[0, 0] == 1


def test_randomlevel_forced_difficulty_one_zeroes_row():
    inst = generate(GeneratorConfig("randomlevel", 6, 8, 2, seed=4, forced_difficulty={2: 1.0}))
    assert inst.matrix[2].sum() == 0
    assert inst.metadata["difficulty"][2] == 1.0


def test_randomlevel_rate():
    # empirical density against the recorded levels: E[D_ij] = (1 - d_i) s_j
    inst = generate_kind("randomlevel", 300, 300, seed=8)
    d = np.array(inst.metadata["difficulty"])
    s = np.array(inst.metadata["skill"])
    assert abs(inst.matrix.mean() - np.outer(1 - d, s).mean()) < 0.01


def test_invalid_parameters():
    with pytest.raises(ValueError):
        GeneratorConfig("default", 3, 2, p=1.5)
    with pytest.raises(ValueError):
        GeneratorConfig("euclidean", 3, 2, radius=0)
    with pytest.raises(ValueError):
        GeneratorConfig("nope", 3, 2)
    with pytest.raises(ValueError):
        GeneratorConfig("default", 3, 2, seed=-1)


def test_metadata_and_tau():
    inst = generate_kind("default", 4, 2, tau="inf", seed=1)
    assert inst.tau == INF
    assert inst.metadata["generator"] == "default" and inst.metadata["seed"] == 1


def test_append_is_default_half_density():
    for seed in range(5):
        a = generate_kind("append", 12, 7, seed=seed)
        d = generate_kind("default", 12, 7, seed=seed, p=0.5)
        assert np.array_equal(a.values, d.values) and np.array_equal(a.matrix, d.matrix)
