"""JSON Lines helpers with line-number error reporting."""
import json
from collections.abc import Iterable, Iterator
from pathlib import Path

from .errors import ParseError


def read_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_no, record) for each non-blank line; line numbers are 1-based."""
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line_no) from exc
            if not isinstance(record, dict):
                raise ParseError("record is not a JSON object", line_no)
            yield line_no, record


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    """Write records one per line; returns the count written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            n += 1
    return n
