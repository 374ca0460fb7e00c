import io

import pytest
from hypothesis import given, settings, strategies as st

from attnet.events import (Event, FollowEdge, IngestError, Kind, TimeWindow, filter_window, format_event,
                           normalize_tags, parse_events, parse_follow_edges, write_events)


def test_jsonl_line_maps_fields():
    events, report = parse_events(b'{"user":"u1","ts":100,"kind":"tweet","id":"T1","tags":["a"]}\n')
    assert events == [Event("u1", 100, Kind.TWEET, "T1", ("a",))]
    assert (report.read, report.accepted, report.rejected) == (1, 1, 0)


def test_retweet_without_id_is_rejected():
    events, report = parse_events(b'{"user":"u1","ts":100,"kind":"retweet","tags":[]}\n')
    assert events == []
    assert report.rejected == 1
    assert "missing keys" in report.reasons[0]


def test_empty_file():
    events, report = parse_events(b"")
    assert events == [] and report.read == 0


@pytest.mark.parametrize("line", [
    b'not json',
    b'[1,2]',
    b'{"user":"","ts":1,"kind":"tweet","id":"x"}',
    b'{"user":"a","ts":-1,"kind":"tweet","id":"x"}',
    b'{"user":"a","ts":1.5,"kind":"tweet","id":"x"}',
    b'{"user":"a","ts":true,"kind":"tweet","id":"x"}',
    b'{"user":"a","ts":1,"kind":"like","id":"x"}',
    b'{"user":"a","ts":1,"kind":"tweet","id":""}',
    b'{"user":"a","ts":1,"kind":"tweet","id":"x","tags":"a"}',
    b'{"user":"a","ts":1,"kind":"tweet","id":"x","extra":1}',
    b'{"user":"a","ts":1,"kind":"tweet","id":"\xff"}',
])
def test_malformed_lines_are_skipped_not_fatal(line):
    good = b'{"user":"a","ts":1,"kind":"tweet","id":"x"}'
    events, report = parse_events(good + b"\n" + line + b"\n" + good)
    assert len(events) == 2
    assert report.rejected == 1 and report.accepted == 2 and report.read == 3


def test_reasons_capped_at_ten():
    _, report = parse_events(b"junk\n" * 25)
    assert report.rejected == 25
    assert len(report.reasons) == 10


def test_unreadable_source_is_fatal(tmp_path):
    with pytest.raises(IngestError):
        parse_events(tmp_path / "missing.jsonl")


def test_tags_normalized():
    assert normalize_tags(["#Foo", "foo", "BAR", "", "#"]) == ("foo", "bar")
    events, _ = parse_events(b'{"user":"a","ts":1,"kind":"tweet","id":"x","tags":["#A","a","B"]}')
    assert events[0].hashtags == ("a", "b")


def test_csv_format():
    data = b"u1,100,retweet,T1,#A;b\nu2,5,tweet,T2\nu3,x,tweet,T3\n"
    events, report = parse_events(data, "csv")
    assert events == [Event("u1", 100, Kind.RETWEET, "T1", ("a", "b")), Event("u2", 5, Kind.TWEET, "T2", ())]
    assert report.rejected == 1


def test_follow_edges():
    edges, report = parse_follow_edges(b"a,b\na,a\na,b\nb , c\nbad\n")
    assert edges == [FollowEdge("a", "b"), FollowEdge("b", "c")]
    assert report.duplicates == 1
    assert report.rejected == 2


def test_filter_window_boundaries():
    events = [Event("u", ts, Kind.TWEET, str(ts)) for ts in (5, 10, 20)]
    assert [e.timestamp for e in filter_window(events, TimeWindow(10, 20))] == [10]
    assert filter_window(events, TimeWindow(0, 100)) == events
    assert filter_window(events, TimeWindow(0, 1)) == []
    assert filter_window(events, None) == events


def test_window_requires_order():
    with pytest.raises(ValueError):
        TimeWindow(5, 5)


tokens = st.text(st.characters(blacklist_categories=("Cs", "Cc", "Zs", "Zl", "Zp"), blacklist_characters=",;\"#"),
                 min_size=1, max_size=6)
events_st = st.lists(st.builds(
    lambda u, ts, k, c, tags: Event(u, ts, k, c, normalize_tags(tags)),
    tokens, st.integers(0, 2**40), st.sampled_from(list(Kind)), tokens, st.lists(tokens, max_size=4),
), max_size=30)


@settings(max_examples=100, deadline=None)
@given(events_st, st.sampled_from(["jsonl", "csv"]))
def test_round_trip(events, fmt):
    buf = io.StringIO()
    write_events(events, buf, fmt)
    parsed, report = parse_events(buf.getvalue().encode("utf-8"), fmt)
    assert parsed == events
    assert report.rejected == 0


@settings(max_examples=50, deadline=None)
@given(events_st, st.integers(0, 2**40), st.integers(1, 2**40))
def test_filter_is_subsequence(events, start, length):
    out = filter_window(events, TimeWindow(start, start + length))
    it = iter(events)
    assert all(any(e is x for x in it) for e in out)


def test_parse_deterministic_and_thread_independent():
    lines = b"\n".join(format_event(Event(f"u{i % 7}", i, Kind.TWEET, f"c{i}")).encode() for i in range(500))
    lines += b"\ngarbage\n"
    ref = parse_events(lines)
    assert parse_events(lines) == ref
    for threads in (2, 3, 8):
        assert parse_events(lines, threads=threads) == ref
