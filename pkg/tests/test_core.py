import numpy as np
import pytest

import bumpsense as bs
from bumpsense.core import CHANNELS, CATALOG


def _samples(times, ay=0.0):
    return [bs.SensorSample(t, 0.0, ay, 0.0, 0.0, 0.0, 0.0) for t in times]


class TestMakeStream:
    def test_nominal_spacing_accepted(self):
        stream = bs.make_stream(_samples([0.0, 10.0, 20.0]), rate_hz=100)
        assert len(stream) == 3
        assert stream.nominal_spacing_ms == 10.0

    def test_non_monotonic_rejected(self):
        with pytest.raises(bs.StreamOrderError):
            bs.make_stream(_samples([0.0, 10.0, 5.0]), rate_hz=100)

    def test_gap_beyond_tolerance_rejected(self):
        # 30 ms gap > 15 ms tolerance (1.5 x nominal at 100 Hz)
        with pytest.raises(bs.StreamRateError):
            bs.make_stream(_samples([0.0, 10.0, 40.0]), rate_hz=100)

    def test_gap_at_tolerance_accepted(self):
        bs.make_stream(_samples([0.0, 10.0, 25.0]), rate_hz=100)

    def test_too_small_spacing_rejected(self):
        with pytest.raises(bs.StreamRateError):
            bs.make_stream(_samples([0.0, 10.0, 14.0]), rate_hz=100)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bs.make_stream([], rate_hz=100)

    def test_non_finite_sample_rejected(self):
        with pytest.raises(ValueError):
            bs.SensorSample(0.0, float("nan"), 0, 0, 0, 0, 0)

    def test_negative_timestamp_rejected(self):
        with pytest.raises(ValueError):
            bs.SensorSample(-1.0, 0, 0, 0, 0, 0, 0)

    def test_channel_arrays_read_only(self):
        stream = bs.make_stream(_samples([0.0, 10.0]), rate_hz=100)
        with pytest.raises(ValueError):
            stream.channels["ay"][0] = 1.0

    def test_sample_round_trip(self):
        s = bs.SensorSample(10.0, 1.0, -2.0, 0.5, 0.1, -0.1, 0.3)
        stream = bs.make_stream([bs.SensorSample(0, 0, 0, 0, 0, 0, 0), s], rate_hz=100)
        assert stream.sample(1) == s


class TestSegmentCatalog:
    def test_twelve_distinct_ids(self):
        catalog = bs.segment_catalog()
        assert len(catalog) == 12
        assert len({s.id for s in catalog}) == 12

    def test_category_mapping(self):
        by_id = {s.id: s for s in bs.segment_catalog()}
        for seg in ("F", "B", "L", "R"):
            assert by_id[seg].category == "Straight"
            assert by_id[seg].approach_angle_deg == 90
        for seg in ("FL", "FR", "BL", "BR"):
            assert by_id[seg].category == "Diagonal"
            assert by_id[seg].approach_angle_deg == 45
        for seg in ("FLB", "FRB", "BLF", "BRF"):
            assert by_id[seg].category == "ReversedDiagonal"
            assert by_id[seg].approach_angle_deg == 135

    def test_order_stable(self):
        assert bs.segment_catalog() == bs.segment_catalog()
        assert bs.segment_catalog() is CATALOG

    def test_lookup(self):
        assert bs.segment_by_id("FLB").approach_angle_deg == 135
        with pytest.raises(ValueError):
            bs.segment_by_id("XX")


class TestEventFrame:
    def _channels(self, n=50):
        return {c: np.zeros(n) for c in CHANNELS}

    def test_valid(self):
        f = bs.EventFrame(channels=self._channels(), peak_index=5, t_start=0.0)
        assert f.frame_len == 50

    def test_length_mismatch_rejected(self):
        chans = self._channels()
        chans["rz"] = np.zeros(49)
        with pytest.raises(ValueError, match="lengths differ"):
            bs.EventFrame(channels=chans, peak_index=5, t_start=0.0)

    def test_peak_index_out_of_range(self):
        with pytest.raises(ValueError):
            bs.EventFrame(channels=self._channels(), peak_index=50, t_start=0.0)

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            bs.EventFrame(channels=self._channels(), peak_index=0, t_start=0.0, label="XX")

    def test_missing_channel_rejected(self):
        chans = self._channels()
        del chans["rx"]
        with pytest.raises(ValueError, match="missing channels"):
            bs.EventFrame(channels=chans, peak_index=0, t_start=0.0)
