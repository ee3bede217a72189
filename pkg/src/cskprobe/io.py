"""Corpus and report I/O: JSONL documents, prediction dumps, TSV/JSON
report formatting. All emitters are deterministic (sorted keys, fixed float
formatting) so identical runs produce byte-identical files."""

from __future__ import annotations

import json
import sys
from typing import IO, Iterable, Iterator

from .scorer import RankedPrediction
from .segmentation import Document

__all__ = [
    "read_documents",
    "iter_documents",
    "write_documents",
    "read_predictions_jsonl",
    "write_predictions_jsonl",
    "fmt",
    "write_tsv",
    "dump_json",
    "open_output",
]


def iter_documents(fp: IO[str], *, source: str = "<corpus>") -> Iterator[Document]:
    """Stream Documents from JSONL lines with `id` and `text` fields."""
    seen_ids: set[str] = set()
    for lineno, line in enumerate(fp, 1):
        line = line.strip()
        if not line:
            continue
        try:
            row = json.loads(line)
            doc = Document(str(row["id"]), str(row["text"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"{source}:{lineno}: bad document row ({exc})")
        if doc.id in seen_ids:
            raise ValueError(f"{source}:{lineno}: duplicate document id {doc.id!r}")
        seen_ids.add(doc.id)
        yield doc


def read_documents(path: str) -> Iterator[Document]:
    with open(path, encoding="utf-8") as f:
        yield from iter_documents(f, source=path)


def write_documents(fp: IO[str], docs: Iterable[Document]) -> int:
    n = 0
    for doc in docs:
        fp.write(json.dumps({"id": doc.id, "text": doc.text}, ensure_ascii=False, sort_keys=True) + "\n")
        n += 1
    return n


def write_predictions_jsonl(fp: IO[str], predictions: Iterable[RankedPrediction]) -> None:
    for pred in predictions:
        fp.write(
            json.dumps(
                {"probe_id": pred.probe_id, "candidates": [[t, s] for t, s in pred.candidates]},
                ensure_ascii=False,
                sort_keys=True,
            )
            + "\n"
        )


def read_predictions_jsonl(path: str) -> list[RankedPrediction]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                out.append(
                    RankedPrediction(
                        str(row["probe_id"]),
                        tuple((str(t), float(s)) for t, s in row["candidates"]),
                    )
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad prediction row ({exc})")
    return out


def fmt(value) -> str:
    """Deterministic cell formatting for TSV output."""
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_tsv(fp: IO[str], header: Iterable[str], rows: Iterable[Iterable]) -> None:
    fp.write("\t".join(header) + "\n")
    for row in rows:
        fp.write("\t".join(fmt(v) for v in row) + "\n")


def dump_json(fp: IO[str], obj) -> None:
    json.dump(obj, fp, indent=2, sort_keys=True, ensure_ascii=False)
    fp.write("\n")


def dump_json_line(fp: IO[str], obj) -> None:
    fp.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")


def open_output(path: str | None):
    """Open a writable text handle; "-" or None means stdout."""
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8")
