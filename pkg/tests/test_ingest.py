import io
import json

import pandas as pd
import pytest

from egoshift.core import PolarityLabel
from egoshift.errors import DataError
from egoshift.ingest import (
    build_text_corpus,
    dumps_record,
    parse_interactions,
    preprocess_text,
    read_store,
    records_to_frame,
    write_records,
    write_store,
)


def line(**kw):
    base = {"id": "x", "ego_id": "e", "alter_id": "a", "timestamp": "2016-05-01T10:00:00Z", "kind": "reply"}
    base.update(kw)
    return json.dumps(base)


def test_parse_drops_self_loops_and_out_of_span(schedule):
    lines = [
        line(id="1"),
        line(id="2", alter_id="e"),
        line(id="3", timestamp="2014-01-01T00:00:00Z"),
        "{not json",
        line(id="5", kind="like"),
    ]
    recs, stats = parse_interactions(lines, schedule)
    assert [r.record_id for r in recs] == ["1"]
    assert stats.dropped_self_loops == 1
    assert stats.dropped_out_of_span == 1
    assert stats.malformed == 2
    assert stats.per_period_counts == {1: 1}


def test_retweets_forced_neutral(schedule):
    recs, _ = parse_interactions([line(kind="retweet", polarity="negative")], schedule)
    assert recs[0].polarity is PolarityLabel.NEUTRAL


def test_csv_input(tmp_path, schedule):
    p = tmp_path / "log.csv"
    p.write_text("id,ego_id,alter_id,timestamp,kind,polarity,topic\n1,e,a,2016-05-01T10:00:00Z,mention,positive,3\n")
    recs, stats = parse_interactions(p, schedule)
    assert recs[0].topic == 3 and recs[0].polarity is PolarityLabel.POSITIVE


def test_missing_file_is_data_error(tmp_path):
    with pytest.raises(DataError):
        parse_interactions(tmp_path / "nope.jsonl")


def test_media_removal():
    assert preprocess_text("look https://x.y/z at pic.twitter.com/abc this t.co/q") == "look at this"
    assert preprocess_text("") == ""


def test_corpus_dedup_and_retweets(schedule):
    lines = [
        line(id="1", text="hello world https://t.co/x"),
        line(id="2", text="hello world"),
        line(id="3", kind="retweet", text="something"),
        line(id="4", text="https://only.link"),
    ]
    recs, _ = parse_interactions(lines, schedule)
    entries, stats = build_text_corpus(recs, schedule)
    assert [e.text for e in entries] == ["hello world"]
    assert stats.dropped_duplicates == 1
    assert stats.dropped_retweets_for_text == 1
    assert stats.dropped_empty_text == 1
    again, _ = build_text_corpus(entries, schedule)
    assert again == entries


def test_store_round_trip(tmp_path, schedule):
    lines = [line(id=str(i), alter_id=f"a{i}", polarity="negative", topic=i - 1, text="téxt") for i in range(3)]
    lines.append(line(id="9", timestamp="2017-01-01T00:00:00.250000Z"))
    recs, _ = parse_interactions(lines, schedule)
    buf = io.StringIO()
    write_records(recs, buf)
    frame = records_to_frame(recs)
    buf2 = io.StringIO()
    write_store(frame, buf2)
    assert buf.getvalue() == buf2.getvalue()
    p = tmp_path / "s.jsonl"
    p.write_text("# header\n" + buf.getvalue(), encoding="utf-8")
    back = read_store(p)
    pd.testing.assert_frame_equal(back, frame)
    assert dumps_record(recs[0]).startswith('{"id":"0","ego_id":"e"')
