import numpy as np
import pytest

from segtree.errors import (
    IntervalOutOfBounds,
    MissingTimestampColumn,
    NonMonotonicAfterSort,
    UnparsableValue,
)
from segtree.series import (
    IndexInterval,
    detect_dimension_kinds,
    iso_utc,
    parse_csv,
    serialize_csv,
    slice_view,
)


def test_parse_basic_numeric():
    ts = parse_csv(b"timestamp,alt\n0,10\n1,20\n2,30\n")
    assert ts.n == 3
    d = ts.dimensions[0]
    assert d.kind == "numeric"
    assert d.values.tolist() == [10.0, 20.0, 30.0]
    assert ts.timestamps.tolist() == [0, 1, 2]


def test_header_kind_assignment():
    ts = parse_csv(b"timestamp,location-lat,location-long\n0,10,20\n1,11,21\n")
    assert [d.kind for d in ts.dimensions] == ["latitude", "longitude"]


def test_duplicate_timestamps_rejected():
    with pytest.raises(NonMonotonicAfterSort):
        parse_csv(b"timestamp,a\n5,1\n5,2\n")


def test_missing_timestamp_column():
    with pytest.raises(MissingTimestampColumn):
        parse_csv(b"time,a\n0,1\n")


def test_iso_timestamps_and_sorting():
    csv = b"timestamp,a\n2020-01-01T00:00:02Z,3\n2020-01-01T00:00:00Z,1\n2020-01-01T00:00:01.500Z,2\n"
    ts = parse_csv(csv)
    assert ts.dimensions[0].values.tolist() == [1.0, 2.0, 3.0]
    assert iso_utc(int(ts.timestamps[0])) == "2020-01-01T00:00:00.000Z"


def test_unparsable_value_located():
    with pytest.raises(UnparsableValue) as e:
        parse_csv(b"timestamp,a\nx,1\n")
    assert e.value.column == "timestamp"
    assert e.value.row == 1


def test_forced_numeric_hint_reports_location():
    with pytest.raises(UnparsableValue) as e:
        parse_csv(b"timestamp,a\n0,1\n1,oops\n", hints={"a": "numeric"})
    assert e.value.column == "a"


def test_latitude_range_validated():
    with pytest.raises(UnparsableValue):
        parse_csv(b"timestamp,location-lat\n0,95\n1,10\n")


def test_categorical_interning_and_missing():
    ts = parse_csv(b"timestamp,b\n0,fly\n1,\n2,rest\n3,fly\n")
    d = ts.dimensions[0]
    assert d.kind == "categorical"
    assert d.categories == ("fly", "rest")
    assert d.values.tolist() == [0, -1, 1, 0]


def test_detect_dimension_kinds():
    assert detect_dimension_kinds(["location-lat"]) == ["latitude"]
    assert detect_dimension_kinds(["LONG"]) == ["longitude"]
    assert detect_dimension_kinds(["behavior"], [["fly"], ["rest"]]) == ["categorical"]
    assert detect_dimension_kinds(["odba"], [["0.5"], ["1.25"]]) == ["numeric"]
    assert detect_dimension_kinds(["x"], []) == ["numeric"]


def test_roundtrip_serialize_parse():
    csv = b"timestamp,location-lat,location-long,b,v\n0,10.5,20.25,fly,1\n5,11.125,21,rest,\n9,,,fly,-2.5\n"
    ts = parse_csv(csv)
    again = parse_csv(serialize_csv(ts))
    assert again.equals(ts)
    assert serialize_csv(again) == serialize_csv(ts)


def test_order_insensitive_parse():
    a = parse_csv(b"timestamp,v\n2,30\n0,10\n1,20\n")
    b = parse_csv(b"timestamp,v\n0,10\n1,20\n2,30\n")
    assert a.equals(b)


def test_shuffled_categorical_codes_normalize():
    rows = [f"{i},{'ab'[i % 2]}" for i in range(10)]
    fwd = parse_csv(("timestamp,c\n" + "\n".join(rows)).encode())
    rev = parse_csv(("timestamp,c\n" + "\n".join(reversed(rows))).encode())
    assert fwd.equals(rev)


def test_slice_view_semantics():
    ts = parse_csv(b"timestamp,v\n" + b"".join(f"{i},{i * 10}\n".encode() for i in range(10)))
    v = slice_view(ts, IndexInterval(5, 7))
    assert v.length == 3
    assert v.dimension("v").values.tolist() == [40.0, 50.0, 60.0]  # view[1] is global record 5
    assert v.offset == 5
    full = slice_view(ts, IndexInterval(1, 10))
    assert full.length == 10
    with pytest.raises(IntervalOutOfBounds):
        ts.view(9, 11)


def test_view_is_zero_copy():
    ts = parse_csv(b"timestamp,v\n0,1\n1,2\n2,3\n")
    v = ts.view(2, 3)
    assert v.dimension("v").values.base is ts.dimensions[0].values


def test_slice_view_matches_global():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=50)
    ts = parse_csv(
        ("timestamp,v\n" + "\n".join(f"{i},{x!r}" for i, x in enumerate(vals))).encode()
    )
    for _ in range(20):
        a = int(rng.integers(1, 51))
        b = int(rng.integers(a, 51))
        view = ts.view(a, b)
        assert view.length == b - a + 1
        for k in range(view.length):
            assert view.dimension("v").values[k] == ts.dimensions[0].values[a + k - 1]
