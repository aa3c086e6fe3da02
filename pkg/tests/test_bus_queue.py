import itertools
from datetime import datetime

import pytest
from hypothesis import given, strategies as st

from campusopt.bus_queue import (PduRecord, QueueConfig, bin_measurements, correct_code, coverage,
                                 detect_vector, infer_queue, is_valid_code, queue_length, valid_codes)
from oracles import nearest_codes

ALL_VECTORS = list(itertools.product((0, 1), repeat=10))


def ts(h, m, s=0.0):
    return (datetime(2019, 3, 4, h, m) - datetime(1970, 1, 1)).total_seconds() + s


def scripted_bin(start, length_segments, readings=6, sensors=10):
    """Noise-free readings: sensors inside the queue see a body at 250 cm."""
    recs = []
    for pos in range(1, sensors + 1):
        for r in range(readings):
            d = 250.0 if pos <= length_segments else None
            recs.append(PduRecord(start + 10.0 * r, pos, d))
    return recs


class TestBinning:
    def test_floor(self):
        b = bin_measurements([PduRecord(ts(16, 11, 30), 1, 250.0)])
        assert list(b) == [ts(16, 10)]

    def test_left_closed(self):
        assert list(bin_measurements([PduRecord(ts(16, 12), 1, 250.0)])) == [ts(16, 12)]

    def test_empty(self):
        assert bin_measurements([]) == {}

    def test_bad_position(self):
        with pytest.raises(ValueError):
            bin_measurements([PduRecord(0, 11, 100.0)])


class TestDetect:
    def test_fraction_above_threshold(self):
        meas = {1: [250.0] * 5 + [100.0] * 7}
        assert detect_vector(meas)[0] == 1

    def test_no_echo(self):
        assert detect_vector({1: [None] * 8})[0] == 0

    def test_passer_by(self):
        assert detect_vector({1: [150.0]})[0] == 0

    def test_threshold_is_strict(self):
        assert detect_vector({1: [250.0] + [None] * 4})[0] == 0  # exactly 0.2
        assert detect_vector({1: [300.0, 200.0, None]}) [0] == 1  # band is closed

    def test_config_validation(self):
        with pytest.raises(ValueError):
            QueueConfig(detect_threshold=0)
        with pytest.raises(ValueError):
            QueueConfig(positive_band=(200, 600))


class TestCorrection:
    def test_examples(self):
        assert correct_code((1, 1, 1, 0, 0, 0, 0, 0, 0, 0)) == (1, 1, 1, 0, 0, 0, 0, 0, 0, 0)
        assert correct_code((1, 1, 0, 1, 0, 0, 0, 0, 0, 0)) == (1, 1, 0, 0, 0, 0, 0, 0, 0, 0)
        assert correct_code((1, 1, 0, 1, 0, 0, 0, 0, 0, 0), "longer") == (1, 1, 1, 1, 0, 0, 0, 0, 0, 0)
        assert correct_code((0,) * 10) == (0,) * 10

    def test_exhaustive_minimality(self):
        for v in ALL_VECTORS:
            c = correct_code(v)
            best, dist = nearest_codes(v)
            assert is_valid_code(c)
            assert sum(a != b for a, b in zip(v, c)) == dist
            assert c == min(best, key=sum)
            assert correct_code(v, "longer") == max(best, key=sum)

    def test_idempotent(self):
        for code in valid_codes(10):
            assert correct_code(code) == code
        for v in ALL_VECTORS:
            assert correct_code(correct_code(v)) == correct_code(v)

    def test_length(self):
        assert queue_length((1, 1, 1, 1, 0, 0, 0, 0, 0, 0)) == 40
        assert queue_length((0,) * 10) == 0
        assert queue_length((1,) * 10) == 100
        with pytest.raises(ValueError):
            queue_length((0, 1) + (0,) * 8)


class TestPipeline:
    def test_noise_free_constant_queue(self):
        recs = []
        for b in range(5):
            recs += scripted_bin(ts(16, 0) + 120 * b, 4)
        est = infer_queue(recs)
        assert [e.length for e in est] == [40] * 5

    def test_empty(self):
        assert infer_queue([]) == []

    def test_gap_bins_report_zero(self):
        recs = scripted_bin(ts(16, 0), 3) + scripted_bin(ts(16, 6), 5)
        assert [e.length for e in infer_queue(recs)] == [30, 0, 0, 50]
        assert len(coverage(recs)) == 2

    @given(st.lists(st.integers(0, 10), min_size=1, max_size=15))
    def test_scripted_traces_recovered(self, lengths):
        recs = []
        for b, k in enumerate(lengths):
            recs += scripted_bin(ts(7, 0) + 120 * b, k)
        est = infer_queue(recs)
        assert [e.length for e in est] == [10 * k for k in lengths]
        assert all(e.length % 10 == 0 and 0 <= e.length <= 100 for e in est)
        assert infer_queue(list(reversed(recs))) == est

    def test_interior_flips_always_corrected(self):
        # a flip two or more positions away from the queue boundary is always undone
        for k in range(11):
            truth = tuple([1] * k + [0] * (10 - k))
            for p in range(10):
                if k - 2 <= p <= k:
                    continue
                noisy = list(truth)
                noisy[p] ^= 1
                assert correct_code(noisy) == truth, (k, p)
