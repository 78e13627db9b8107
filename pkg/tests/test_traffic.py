import pytest
from hypothesis import given, strategies as st

from ohca.errors import DegenerateTraffic, EmptyTrace, ZeroPacketCount
from ohca.traffic import (
    BaseStationStats,
    ChannelBounds,
    ProbabilitySource,
    Sample,
    TrafficTrace,
    estimate_channel_bounds,
    idle_time_probabilities,
    inverse_packet_count_probabilities,
    read_trace_csv,
    summarize_trace,
)


def stats_idle(idle):
    return [BaseStationStats(i, t, 1) for i, t in enumerate(idle)]


def stats_packets(packets):
    return [BaseStationStats(i, 1.0, d) for i, d in enumerate(packets)]


def test_summarize_two_slots():
    trace = TrafficTrace(0, (Sample(0, 4.0, 3), Sample(1, 6.0, 7)), 10.0)
    s = summarize_trace(trace)
    assert s.idle_time == 10.0
    assert s.packet_count == 10


def test_summarize_fully_busy():
    s = summarize_trace(TrafficTrace(2, (Sample(0, 10.0, 0),), 10.0))
    assert (s.station_id, s.idle_time, s.packet_count) == (2, 0.0, 0)


def test_summarize_empty():
    with pytest.raises(EmptyTrace):
        summarize_trace(TrafficTrace(0, (), 10.0))


@pytest.mark.parametrize(
    "samples",
    [
        (Sample(0, 11.0, 1),),
        (Sample(0, -1.0, 1),),
        (Sample(1, 1.0, 1), Sample(1, 1.0, 1)),
        (Sample(2, 1.0, 1), Sample(1, 1.0, 1)),
    ],
)
def test_trace_invariants(samples):
    with pytest.raises(ValueError):
        TrafficTrace(0, samples, 10.0)


@pytest.mark.parametrize(
    "idle, expected",
    [
        ([4, 4, 4, 4], [0.25] * 4),
        ([6, 3, 1], [0.6, 0.3, 0.1]),
        ([10, 0, 0], [1.0, 0.0, 0.0]),
    ],
)
def test_idle_time_probabilities(idle, expected):
    pv = idle_time_probabilities(stats_idle(idle))
    assert pv.values == pytest.approx(expected, abs=1e-12)
    assert pv.source is ProbabilitySource.IDLE_TIME


def test_idle_time_all_zero():
    with pytest.raises(DegenerateTraffic):
        idle_time_probabilities(stats_idle([0, 0]))


@pytest.mark.parametrize(
    "packets, expected",
    [([100, 100], [0.5, 0.5]), ([1, 2, 4], [4 / 7, 2 / 7, 1 / 7])],
)
def test_inverse_packet_probabilities(packets, expected):
    pv = inverse_packet_count_probabilities(stats_packets(packets))
    assert pv.values == pytest.approx(expected, abs=1e-12)
    assert pv.source is ProbabilitySource.INVERSE_PACKET_COUNT


def test_zero_packet_count_names_station():
    with pytest.raises(ZeroPacketCount) as info:
        inverse_packet_count_probabilities(stats_packets([5, 0]))
    assert info.value.station == 1


@pytest.mark.parametrize(
    "demand, expected",
    [([2, 5, 13, 7], (2, 13)), ([0, 0, 0], (1, 1)), ([4], (4, 4))],
)
def test_channel_bounds(demand, expected):
    b = estimate_channel_bounds(demand)
    assert (b.l_min, b.l_max) == expected


def test_channel_bounds_empty():
    with pytest.raises(EmptyTrace):
        estimate_channel_bounds([])


def test_bounds_invariant():
    with pytest.raises(ValueError):
        ChannelBounds(5, 4)


positive_floats = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False)


@given(st.lists(positive_floats, min_size=1, max_size=20))
def test_idle_normalization(idle):
    pv = idle_time_probabilities(stats_idle(idle))
    assert abs(sum(pv.values) - 1.0) <= 1e-9
    assert all(v >= 0 for v in pv.values)


@given(st.lists(positive_floats, min_size=1, max_size=12), st.floats(min_value=1e-3, max_value=1e3))
def test_idle_scale_invariance(idle, k):
    a = idle_time_probabilities(stats_idle(idle)).values
    b = idle_time_probabilities(stats_idle([k * t for t in idle])).values
    assert b == pytest.approx(a, rel=1e-12, abs=1e-15)


@given(st.lists(st.integers(min_value=1, max_value=10**6), min_size=2, max_size=12))
def test_inverse_packets_order(packets):
    pv = inverse_packet_count_probabilities(stats_packets(packets))
    assert abs(sum(pv.values) - 1.0) <= 1e-9
    for i, di in enumerate(packets):
        for j, dj in enumerate(packets):
            if di < dj:
                assert pv.values[i] > pv.values[j]


sample_lists = st.lists(
    st.tuples(st.floats(min_value=0, max_value=60), st.integers(min_value=0, max_value=1000)),
    min_size=1,
    max_size=10,
)


@given(sample_lists, sample_lists)
def test_summarize_additive(first, second):
    def trace(rows, offset):
        return TrafficTrace(0, tuple(Sample(offset + i, b, p) for i, (b, p) in enumerate(rows)), 60.0)

    a = summarize_trace(trace(first, 0))
    b = summarize_trace(trace(second, 100))
    both = summarize_trace(trace(first + second, 0))
    assert both.packet_count == a.packet_count + b.packet_count
    assert both.idle_time == pytest.approx(a.idle_time + b.idle_time, rel=1e-12, abs=1e-9)


def test_read_trace_csv(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text(
        "station,slot,busy_seconds,packets\n"
        "1,0,5,10\n0,1,6,7\n0,0,4,3\n1,1,1,2\n"
    )
    traces = read_trace_csv(path, 10.0)
    stats = [summarize_trace(t) for t in traces]
    assert [(s.station_id, s.idle_time, s.packet_count) for s in stats] == [
        (0, 10.0, 10),
        (1, 14.0, 12),
    ]
