"""Notebook ingestion: cell parsing, structural pairing, markdown cleanup.

A (code, markdown) pair is a code cell whose immediate neighbours are both
markdown cells; the preceding markdown cell is its documentation. Raw and
other non-code, non-markdown cells are dropped at parse time, so pairing
operates on the code/markdown sequence.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .errors import InvalidBounds, MalformedNotebook, UnsupportedFormatVersion

SUPPORTED_NBFORMAT = 4

# Normalization passes, applied in this order. Each removes one construct;
# the final pass collapses whitespace runs and trims.
_FENCED_CODE = re.compile(r"```.*?(?:```|\Z)", re.DOTALL)
_INLINE_CODE = re.compile(r"`[^`]*`")
_IMAGE_INLINE = re.compile(r"!\[[^\]]*\]\([^)]*\)")
_IMAGE_REFERENCE = re.compile(r"!\[[^\]]*\]\[[^\]]*\]")
_MATH_DISPLAY = re.compile(r"\$\$.*?\$\$", re.DOTALL)
_MATH_INLINE = re.compile(r"\$[^$]*\$")
_MARKUP_TAG = re.compile(r"<[^>]+>")
_WHITESPACE_RUN = re.compile(r"\s+")


@dataclass(frozen=True)
class NotebookCell:
    """One notebook cell in document order."""

    index: int
    kind: str  # "code" or "markdown"
    source: str
    execution_count: int | None = None
    has_outputs: bool = False


@dataclass(frozen=True)
class PairProvenance:
    """Where a pair came from and who wrote it."""

    notebook_id: str
    author_tier: int = 1
    is_fork: bool = False


@dataclass(frozen=True)
class CodeMarkdownPair:
    """A documented code cell: code plus the markdown directly above it."""

    pair_id: str
    code: str
    markdown_raw: str
    markdown_normalized: str
    provenance: PairProvenance
    cell_meta: NotebookCell


def parse_notebook(raw: bytes | str, notebook_id: str = "") -> list[NotebookCell]:
    """Parse a version-4 notebook document into cells.

    Cells keep their original document position in ``index``. Cell types
    other than code/markdown (e.g. raw) are skipped. Raises
    MalformedNotebook for container problems and UnsupportedFormatVersion
    for any nbformat other than 4.
    """
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedNotebook(f"{notebook_id}: not UTF-8: {exc}") from exc
    else:
        text = raw
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedNotebook(f"{notebook_id}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedNotebook(f"{notebook_id}: document is not an object")
    version = doc.get("nbformat")
    if version is None:
        raise MalformedNotebook(f"{notebook_id}: missing nbformat field")
    if version != SUPPORTED_NBFORMAT:
        raise UnsupportedFormatVersion(
            f"{notebook_id}: nbformat {version!r}, expected {SUPPORTED_NBFORMAT}"
        )
    cells_raw = doc.get("cells")
    if not isinstance(cells_raw, list):
        raise MalformedNotebook(f"{notebook_id}: missing cells list")

    cells: list[NotebookCell] = []
    for position, cell in enumerate(cells_raw):
        if not isinstance(cell, dict):
            raise MalformedNotebook(f"{notebook_id}: cell {position} is not an object")
        kind = cell.get("cell_type")
        if kind not in ("code", "markdown"):
            if isinstance(kind, str):
                continue
            raise MalformedNotebook(f"{notebook_id}: cell {position} has no cell_type")
        source = _join_source(cell.get("source"), notebook_id, position)
        if kind == "code":
            execution_count = cell.get("execution_count")
            if execution_count is not None and not isinstance(execution_count, int):
                raise MalformedNotebook(
                    f"{notebook_id}: cell {position} execution_count not an integer"
                )
            has_outputs = bool(cell.get("outputs"))
        else:
            execution_count = None
            has_outputs = False
        cells.append(
            NotebookCell(
                index=position,
                kind=kind,
                source=source,
                execution_count=execution_count,
                has_outputs=has_outputs,
            )
        )
    return cells


def _join_source(source: Any, notebook_id: str, position: int) -> str:
    if isinstance(source, str):
        return source
    if isinstance(source, list) and all(isinstance(part, str) for part in source):
        return "".join(source)
    raise MalformedNotebook(f"{notebook_id}: cell {position} has malformed source")


def pair_cells(
    cells: Sequence[NotebookCell], provenance: PairProvenance
) -> list[CodeMarkdownPair]:
    """Emit one pair per code cell flanked by markdown cells on both sides.

    The documentation is the immediately preceding markdown cell. Boundary
    cells (first/last) are never paired. Code cells that are empty after
    whitespace trim are skipped. Pair ids are `<notebook_id>:<cell index>`
    with the index zero-padded so lexicographic order matches document order.
    """
    pairs: list[CodeMarkdownPair] = []
    for i in range(1, len(cells) - 1):
        cell = cells[i]
        if cell.kind != "code":
            continue
        if cells[i - 1].kind != "markdown" or cells[i + 1].kind != "markdown":
            continue
        if not cell.source.strip():
            continue
        markdown_raw = cells[i - 1].source
        pairs.append(
            CodeMarkdownPair(
                pair_id=f"{provenance.notebook_id}:{cell.index:04d}",
                code=cell.source,
                markdown_raw=markdown_raw,
                markdown_normalized=normalize_markdown(markdown_raw),
                provenance=provenance,
                cell_meta=cell,
            )
        )
    return pairs


def _normalize_sweep(text: str) -> str:
    text = _FENCED_CODE.sub("", text)
    text = _INLINE_CODE.sub("", text)
    text = _IMAGE_INLINE.sub("", text)
    text = _IMAGE_REFERENCE.sub("", text)
    text = _MATH_DISPLAY.sub("", text)
    text = _MATH_INLINE.sub("", text)
    text = _MARKUP_TAG.sub("", text)
    return _WHITESPACE_RUN.sub(" ", text).strip()


def normalize_markdown(markdown_raw: str) -> str:
    """Strip non-prose constructs and collapse whitespace.

    Removal order within a sweep: fenced code blocks, inline code spans,
    image references, math regions ($$...$$ then $...$), markup tags; then
    whitespace runs collapse to single spaces and the result is trimmed.
    Sweeps repeat until the text stops changing, so the whole function is
    idempotent even when one removal grafts together a new construct.
    """
    text = markdown_raw
    for _ in range(10):
        swept = _normalize_sweep(text)
        if swept == text:
            break
        text = swept
    return text


def count_words(text: str) -> int:
    """Count words: whitespace-separated tokens containing a letter or digit."""
    return sum(1 for token in text.split() if any(ch.isalnum() for ch in token))


def length_filter(pair: CodeMarkdownPair, min_words: int, max_words: int) -> bool:
    """Keep a pair iff its normalized markdown word count is within bounds.

    Both bounds are inclusive. Raises InvalidBounds when min > max.
    """
    if min_words > max_words:
        raise InvalidBounds(f"min_words {min_words} > max_words {max_words}")
    return min_words <= count_words(pair.markdown_normalized) <= max_words


def pair_to_record(pair: CodeMarkdownPair) -> dict[str, Any]:
    """Flatten a pair into the line-record schema used by the pair files."""
    return {
        "pair_id": pair.pair_id,
        "notebook_id": pair.provenance.notebook_id,
        "author_tier": pair.provenance.author_tier,
        "is_fork": pair.provenance.is_fork,
        "code": pair.code,
        "markdown_raw": pair.markdown_raw,
        "markdown_normalized": pair.markdown_normalized,
        "cell_index": pair.cell_meta.index,
        "execution_count": pair.cell_meta.execution_count,
        "has_outputs": pair.cell_meta.has_outputs,
    }


def pair_from_record(record: dict[str, Any]) -> CodeMarkdownPair:
    """Inverse of pair_to_record."""
    return CodeMarkdownPair(
        pair_id=record["pair_id"],
        code=record["code"],
        markdown_raw=record["markdown_raw"],
        markdown_normalized=record["markdown_normalized"],
        provenance=PairProvenance(
            notebook_id=record["notebook_id"],
            author_tier=record["author_tier"],
            is_fork=record.get("is_fork", False),
        ),
        cell_meta=NotebookCell(
            index=record.get("cell_index", 0),
            kind="code",
            source=record["code"],
            execution_count=record.get("execution_count"),
            has_outputs=record.get("has_outputs", False),
        ),
    )
