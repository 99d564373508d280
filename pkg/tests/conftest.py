"""Shared fixtures: the packaged notebook corpus and pair factories."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import pytest

from celldoc.ingest import CodeMarkdownPair, NotebookCell, PairProvenance, pair_cells, parse_notebook
from celldoc.metrics import (
    build_popularity_table,
    cell_import_occurrences,
    parse_cell,
    sanitize_cell_source,
)


def make_pair(
    pair_id: str,
    code: str,
    markdown: str,
    author_tier: int = 1,
    is_fork: bool = False,
    executed: bool = True,
) -> CodeMarkdownPair:
    """A synthetic pair whose normalized markdown equals the given text."""
    return CodeMarkdownPair(
        pair_id=pair_id,
        code=code,
        markdown_raw=markdown,
        markdown_normalized=markdown,
        provenance=PairProvenance(
            notebook_id=pair_id.split(":")[0], author_tier=author_tier, is_fork=is_fork
        ),
        cell_meta=NotebookCell(
            index=1,
            kind="code",
            source=code,
            execution_count=1 if executed else None,
            has_outputs=executed,
        ),
    )


def fixture_dir() -> Path:
    return Path(str(resources.files("celldoc") / "data"))


@pytest.fixture(scope="session")
def golden():
    return json.loads((fixture_dir() / "golden_metrics.json").read_text())


@pytest.fixture(scope="session")
def fixture_pairs():
    pairs = []
    for path in sorted((fixture_dir() / "fixture_notebooks").glob("*.ipynb")):
        cells = parse_notebook(path.read_bytes(), path.stem)
        pairs.extend(pair_cells(cells, PairProvenance(notebook_id=path.stem)))
    return pairs


@pytest.fixture(scope="session")
def fixture_popularity(fixture_pairs):
    rows = []
    for pair in fixture_pairs:
        try:
            tree = parse_cell(sanitize_cell_source(pair.code))
        except Exception:
            rows.append([])
            continue
        rows.append(cell_import_occurrences(tree))
    return build_popularity_table(rows)
