"""From a raw notebook to curated (code, markdown) pairs.

A code cell becomes a pair only when markdown flanks it on both sides; the
preceding markdown is its documentation. Curation then drops pairs whose
documentation does not describe the code, whose author tier is too low, or
whose code near-duplicates an earlier pair.

Run: python3 demos/01_ingest_and_curate.py
"""
from __future__ import annotations

import json

from celldoc import curation, ingest
from celldoc.providers import HashingEmbedder


def cell(kind: str, source: str) -> dict:
    body = {"cell_type": kind, "source": source, "metadata": {}}
    if kind == "code":
        body.update(execution_count=1, outputs=[{"output_type": "stream"}])
    return body


NOTEBOOK = {
    "nbformat": 4,
    "nbformat_minor": 5,
    "metadata": {},
    "cells": [
        cell("markdown", "## Load the survey\n\nRead the `survey.csv` export."),
        cell("code", "import pandas as pd\ndf = pd.read_csv('survey.csv')"),
        cell("markdown", "Count replies per country."),
        cell("code", "counts = df['country'].value_counts()\nprint(counts)"),
        cell("markdown", "Done."),
        cell("code", "df.to_csv('backup.csv')  # not paired: no markdown below"),
    ],
}


def main() -> None:
    raw = json.dumps(NOTEBOOK).encode("utf-8")
    cells = ingest.parse_notebook(raw, notebook_id="survey")
    print(f"parsed {len(cells)} cells from one notebook")

    provenance = ingest.PairProvenance(notebook_id="survey", author_tier=2)
    pairs = ingest.pair_cells(cells, provenance)
    print(f"paired {len(pairs)} code cells (markdown on both sides)\n")
    for pair in pairs:
        print(f"{pair.pair_id}")
        print(f"  raw markdown:        {pair.markdown_raw!r}")
        print(f"  normalized markdown: {pair.markdown_normalized!r}")
        words = ingest.count_words(pair.markdown_normalized)
        kept = ingest.length_filter(pair, 4, 281)
        print(f"  {words} words -> {'kept' if kept else 'dropped'} by length filter")

    # curation: the second copy of a pair is a near-duplicate and goes away
    duplicate = ingest.CodeMarkdownPair(
        pair_id="zz-mirror:0001",
        code=pairs[0].code,
        markdown_raw=pairs[0].markdown_raw,
        markdown_normalized=pairs[0].markdown_normalized,
        provenance=ingest.PairProvenance(notebook_id="zz-mirror", author_tier=2),
        cell_meta=pairs[0].cell_meta,
    )
    corpus = list(pairs) + [duplicate]
    result = curation.apply(
        corpus,
        curation.CurationConfig(semantic_threshold=0.0),
        HashingEmbedder(dim=384),
    )
    print("\ncuration over the corpus plus one copied pair:")
    print(result.report_text())
    print(f"survivors: {[p.pair_id for p in result.pairs]}")


if __name__ == "__main__":
    main()
