import numpy as np
import pytest

from mesocorr.rng import RngStream, replica_generators


def test_same_stream_same_draws():
    a = RngStream(7, 3).generator().standard_normal(50)
    b = RngStream(7, 3).generator().standard_normal(50)
    assert np.array_equal(a, b)


def test_distinct_streams_differ_and_look_independent():
    a = RngStream(7, 0).generator().standard_normal(20000)
    b = RngStream(7, 1).generator().standard_normal(20000)
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(20000)


def test_seed_masked_to_64_bits():
    assert RngStream(-1).seed == 2 ** 64 - 1
    assert RngStream(2 ** 64 + 5, 0) == RngStream(5, 0)


def test_substream_does_not_collide_with_parent():
    s = RngStream(1, 0)
    kids = {s.substream(i).stream_id for i in range(100)}
    assert s.stream_id not in kids and len(kids) == 100


def test_replica_generators_match_streams():
    gens = replica_generators(11, 4, 7)
    for r, g in zip(range(4, 7), gens):
        assert g.random() == RngStream(11, r).generator().random()


def test_rejects_non_integer_seed():
    with pytest.raises(TypeError):
        RngStream(1.5)
