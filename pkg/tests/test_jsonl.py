import pytest

from ragarena.errors import ParseError
from ragarena.jsonl import read_jsonl, write_jsonl


def test_round_trip(tmp_path):
    records = [{"a": 1}, {"b": "two", "nested": {"x": [1, 2]}}, {"unicode": "café"}]
    path = tmp_path / "data.jsonl"
    assert write_jsonl(path, records) == 3
    out = list(read_jsonl(path))
    assert [r for _, r in out] == records
    assert [n for n, _ in out] == [1, 2, 3]


def test_blank_lines_skipped_but_counted(tmp_path):
    path = tmp_path / "gaps.jsonl"
    path.write_text('{"a": 1}\n\n   \n{"b": 2}\n', encoding="utf-8")
    out = list(read_jsonl(path))
    assert [n for n, _ in out] == [1, 4]


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"ok": true}\n{broken\n', encoding="utf-8")
    with pytest.raises(ParseError, match="line 2"):
        list(read_jsonl(path))


def test_non_object_rejected(tmp_path):
    path = tmp_path / "arr.jsonl"
    path.write_text("[1, 2, 3]\n", encoding="utf-8")
    with pytest.raises(ParseError, match="not a JSON object"):
        list(read_jsonl(path))


def test_write_is_ascii_preserving(tmp_path):
    path = tmp_path / "uni.jsonl"
    write_jsonl(path, [{"text": "café"}])
    assert "café" in path.read_text(encoding="utf-8")
