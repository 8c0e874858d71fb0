"""Document streaming, count-table persistence, and seeded random subsets.

Corpora are line-delimited JSON (one ``{"id": ..., "text": ...}`` object per
line).  Count tables are two-column TSV sorted bytewise by category; the
escaping (tab, newline, backslash) makes the round trip exact for arbitrary
category strings.  Random subsets use the Mersenne Twister from the standard
``random`` module with an explicit integer seed, so every sample is
bit-reproducible across runs and platforms.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from filelock import FileLock

from .entropy import CategoryCounts
from .errors import InputDataError

__all__ = [
    "CorpusReader",
    "Document",
    "SubsetResult",
    "random_subset",
    "read_counts_tsv",
    "read_sample_manifest",
    "stream_documents",
    "write_counts_tsv",
    "write_sample_manifest",
]

logger = logging.getLogger(__name__)


@dataclass
class Document:
    """One unit of selection: a stable id, raw text, and its size in
    post-normalization tokens (filled in once the text has been normalized).

    Id uniqueness within a file is the producer's contract; the streaming
    reader cannot check it without keeping all ids in memory.
    """

    id: str
    text: str
    token_count: int | None = None


class CorpusReader:
    """Iterate documents from a JSONL file in file order, constant memory.

    ``strict=True`` aborts on the first malformed line; otherwise malformed
    lines are skipped with a warning and counted in :attr:`skipped`.
    Re-iterating re-reads the file from the start, so two full scans yield
    identical sequences.
    """

    def __init__(self, path: str | Path, strict: bool = False):
        self.path = Path(path)
        self.strict = strict
        self.skipped = 0
        if not self.path.is_file():
            raise InputDataError(f"corpus file not found: {self.path}")

    def __iter__(self) -> Iterator[Document]:
        with open(self.path, "r", encoding="utf-8", errors="replace") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                doc = self._parse_line(line, lineno)
                if doc is not None:
                    yield doc

    def _parse_line(self, line: str, lineno: int) -> Document | None:
        try:
            record = json.loads(line)
            if not isinstance(record, dict):
                raise ValueError("record is not an object")
            doc_id = record["id"]
            text = record["text"]
            if not isinstance(doc_id, str) or not isinstance(text, str):
                raise ValueError("'id' and 'text' must be strings")
        except (ValueError, KeyError) as exc:
            if self.strict:
                raise InputDataError(f"{self.path}:{lineno}: malformed record: {exc}") from exc
            self.skipped += 1
            logger.warning("%s:%d: skipping malformed record: %s", self.path, lineno, exc)
            return None
        return Document(id=doc_id, text=text)


def stream_documents(path: str | Path, strict: bool = False) -> CorpusReader:
    """Open a JSONL corpus for streaming iteration."""
    return CorpusReader(path, strict=strict)


@dataclass
class SubsetResult:
    """Ids drawn by a seeded shuffle, with a flag when the pool ran short."""

    ids: list[str]
    token_total: int
    reached_target: bool


def random_subset(documents: Sequence[Document], target_tokens: int, seed: int) -> SubsetResult:
    """Draw documents in seeded-shuffle order until their token counts
    reach ``target_tokens`` (the first overshooting document is included).

    Every document must already have ``token_count`` set.  If the whole pool
    is exhausted first, all ids are returned flagged short.
    """
    if target_tokens <= 0:
        raise ValueError(f"target_tokens must be positive, got {target_tokens}")
    order = list(range(len(documents)))
    random.Random(seed).shuffle(order)
    ids: list[str] = []
    total = 0
    for idx in order:
        doc = documents[idx]
        if doc.token_count is None:
            raise ValueError(f"document {doc.id!r} has no token_count; normalize first")
        ids.append(doc.id)
        total += doc.token_count
        if total >= target_tokens:
            return SubsetResult(ids=ids, token_total=total, reached_target=True)
    return SubsetResult(ids=ids, token_total=total, reached_target=False)


# --- count-table TSV ---------------------------------------------------------

_UNESCAPES = {"\\\\": "\\", "\\t": "\t", "\\n": "\n"}


def _escape_category(category: str) -> str:
    return (
        category.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")
    )


def _unescape_category(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            pair = text[i : i + 2]
            if pair not in _UNESCAPES:
                raise InputDataError(f"invalid escape {pair!r} in count table")
            out.append(_UNESCAPES[pair])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def write_counts_tsv(counts: CategoryCounts, path: str | Path) -> None:
    """Persist a count table: category, tab, decimal count; sorted bytewise."""
    path = Path(path)
    rows = sorted(counts.counts.items(), key=lambda kv: kv[0].encode("utf-8"))
    with FileLock(str(path) + ".lock"):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for category, count in rows:
                fh.write(f"{_escape_category(category)}\t{count}\n")


def read_counts_tsv(path: str | Path) -> CategoryCounts:
    """Load a count table written by :func:`write_counts_tsv`."""
    counts = CategoryCounts()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line[:-1] if line.endswith("\n") else line
            if not line:
                continue
            category, sep, count_text = line.rpartition("\t")
            if not sep:
                raise InputDataError(f"{path}:{lineno}: expected two tab-separated columns")
            try:
                count = int(count_text)
            except ValueError as exc:
                raise InputDataError(f"{path}:{lineno}: bad count {count_text!r}") from exc
            if count < 1:
                raise InputDataError(f"{path}:{lineno}: counts must be >= 1, got {count}")
            counts.add(_unescape_category(category), count)
    return counts


# --- sample manifests ---------------------------------------------------------


def write_sample_manifest(
    path: str | Path,
    ids: Iterable[str],
    seed: int | None,
    config_fingerprint: str,
    final_entropy: float,
) -> None:
    """One selected document id per line, then a comment block with the seed,
    normalizer fingerprint, and final entropy (full round-trip precision)."""
    path = Path(path)
    with FileLock(str(path) + ".lock"):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for doc_id in ids:
                fh.write(doc_id + "\n")
            fh.write(f"# seed = {'none' if seed is None else seed}\n")
            fh.write(f"# config_fingerprint = {config_fingerprint}\n")
            fh.write(f"# final_entropy = {final_entropy!r}\n")


def read_sample_manifest(path: str | Path) -> tuple[list[str], dict[str, str]]:
    """Inverse of :func:`write_sample_manifest`: (ids, metadata dict)."""
    ids: list[str] = []
    meta: dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, sep, value = line[2:].partition("=")
                if sep:
                    meta[key.strip()] = value.strip()
            elif line:
                ids.append(line)
    return ids, meta
