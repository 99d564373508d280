"""Notebook parsing, pairing, markdown normalization, length bounds."""
from __future__ import annotations

import json

import pytest

from celldoc.errors import InvalidBounds, MalformedNotebook, UnsupportedFormatVersion
from celldoc.ingest import (
    NotebookCell,
    PairProvenance,
    count_words,
    length_filter,
    normalize_markdown,
    pair_cells,
    pair_from_record,
    pair_to_record,
    parse_notebook,
)

from conftest import make_pair


def nb(cells, nbformat=4):
    return json.dumps({"nbformat": nbformat, "nbformat_minor": 5, "cells": cells})


def code_cell(source, execution_count=None, outputs=()):
    return {
        "cell_type": "code",
        "source": source,
        "execution_count": execution_count,
        "outputs": list(outputs),
        "metadata": {},
    }


def md_cell(source):
    return {"cell_type": "markdown", "source": source, "metadata": {}}


def test_parse_notebook_joins_line_lists():
    doc = nb([code_cell(["x = 1\n", "y = 2\n"])])
    cells = parse_notebook(doc)
    assert cells == [
        NotebookCell(index=0, kind="code", source="x = 1\ny = 2\n")
    ]


def test_parse_notebook_accepts_plain_string_source():
    cells = parse_notebook(nb([md_cell("# Title")]))
    assert cells[0].kind == "markdown"
    assert cells[0].source == "# Title"


def test_parse_notebook_execution_state():
    doc = nb(
        [
            code_cell("a = 1", execution_count=3),
            code_cell("b = 2", outputs=[{"output_type": "stream", "text": ["hi\n"]}]),
            code_cell("c = 3"),
        ]
    )
    cells = parse_notebook(doc)
    assert cells[0].execution_count == 3 and not cells[0].has_outputs
    assert cells[1].execution_count is None and cells[1].has_outputs
    assert cells[2].execution_count is None and not cells[2].has_outputs


def test_parse_notebook_skips_raw_cells_keeps_positions():
    doc = nb(
        [
            md_cell("before"),
            {"cell_type": "raw", "source": "raw text"},
            code_cell("x = 1"),
        ]
    )
    cells = parse_notebook(doc)
    assert [(c.index, c.kind) for c in cells] == [(0, "markdown"), (2, "code")]


def test_parse_notebook_decodes_utf8_bytes():
    doc = nb([md_cell("voilà")]).encode("utf-8")
    assert parse_notebook(doc)[0].source == "voilà"


@pytest.mark.parametrize(
    "raw",
    [
        "not json",
        b"\xff\xfe invalid",
        json.dumps(["not", "an", "object"]),
        json.dumps({"cells": []}),
        json.dumps({"nbformat": 4, "cells": "nope"}),
        nb(["not a cell dict"]),
        nb([{"source": "no cell_type"}]),
        nb([code_cell("x", execution_count="three")]),
        nb([{"cell_type": "code", "source": 42}]),
    ],
)
def test_parse_notebook_rejects_malformed_documents(raw):
    with pytest.raises(MalformedNotebook):
        parse_notebook(raw, "bad")


def test_parse_notebook_rejects_other_versions():
    with pytest.raises(UnsupportedFormatVersion):
        parse_notebook(nb([], nbformat=3))


def test_pair_cells_requires_markdown_on_both_sides():
    cells = parse_notebook(
        nb(
            [
                md_cell("intro"),
                code_cell("a = 1"),
                md_cell("middle"),
                code_cell("b = 2"),
                code_cell("c = 3"),
                md_cell("tail"),
            ]
        )
    )
    pairs = pair_cells(cells, PairProvenance(notebook_id="n1"))
    # only index 1 is flanked by markdown; 3 is followed by code, 4 preceded by code
    assert [p.pair_id for p in pairs] == ["n1:0001"]
    assert pairs[0].markdown_raw == "intro"
    assert pairs[0].markdown_normalized == "intro"


def test_pair_cells_skips_boundary_and_blank_code():
    cells = parse_notebook(
        nb(
            [
                code_cell("first = True"),  # boundary: nothing above
                md_cell("doc"),
                code_cell("   \n  "),  # blank after trim
                md_cell("doc2"),
            ]
        )
    )
    assert pair_cells(cells, PairProvenance(notebook_id="n2")) == []


def test_pair_ids_zero_padded_in_document_order():
    body = [md_cell("m")]
    for i in range(12):
        body += [code_cell(f"v{i} = {i}"), md_cell("m")]
    pairs = pair_cells(parse_notebook(nb(body)), PairProvenance(notebook_id="nb"))
    ids = [p.pair_id for p in pairs]
    assert ids == sorted(ids)
    assert ids[0] == "nb:0001" and ids[-1] == "nb:0023"


def test_normalize_markdown_strips_constructs():
    raw = (
        "## Load\n\n"
        "Reads `csv` files.\n"
        "```python\nx = 1\n```\n"
        "![plot](img.png)\n"
        "Cost is $O(n)$ overall.\n"
        "$$\\sum_i x_i$$\n"
        "<b>bold</b> done\n"
    )
    assert normalize_markdown(raw) == "## Load Reads files. Cost is overall. bold done"


def test_normalize_markdown_is_idempotent():
    raw = "before `a` $x$ <i>mid</i> `$` after"
    once = normalize_markdown(raw)
    assert normalize_markdown(once) == once


def test_count_words_requires_alphanumerics():
    assert count_words("two words") == 2
    assert count_words("-- == ~~") == 0
    assert count_words("df2 , x;") == 2
    assert count_words("") == 0


def test_length_filter_bounds_are_inclusive():
    four = make_pair("n:0001", "x = 1", "one two three four")
    three = make_pair("n:0002", "x = 1", "one two three")
    assert length_filter(four, 4, 281)
    assert not length_filter(three, 4, 281)
    long_md = " ".join(f"w{i}" for i in range(281))
    assert length_filter(make_pair("n:0003", "x = 1", long_md), 4, 281)
    longer = long_md + " w281"
    assert not length_filter(make_pair("n:0004", "x = 1", longer), 4, 281)


def test_length_filter_rejects_inverted_bounds():
    with pytest.raises(InvalidBounds):
        length_filter(make_pair("n:0001", "x = 1", "a b c d"), 5, 4)


def test_pair_record_round_trip():
    pair = make_pair("n:0007", "x = 1", "sets x", author_tier=2, executed=False)
    assert pair_from_record(pair_to_record(pair)) == pair


def test_fixture_corpus_shape(fixture_pairs):
    assert len(fixture_pairs) == 23
    assert len({p.pair_id for p in fixture_pairs}) == 23
    for pair in fixture_pairs:
        assert pair.code.strip()
        assert pair.markdown_normalized
