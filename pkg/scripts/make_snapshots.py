"""Regenerate the committed prompt snapshots under tests/snapshots/.

The query is the first cell of fixture notebook c01; exemplars come from a
code-metric index over the full fixture corpus. Run from the repository root:

    python3 scripts/make_snapshots.py
"""
from __future__ import annotations

import hashlib
from importlib import resources
from pathlib import Path

from celldoc import ingest, metrics, prompting, retrieval

QUERY_PAIR_ID = "c01:0001"
SHOT_COUNTS = (0, 1, 5)
TEMPLATES = ("no_metric", "with_metric")


def fixture_pairs() -> list[ingest.CodeMarkdownPair]:
    root = Path(str(resources.files("celldoc") / "data")) / "fixture_notebooks"
    pairs = []
    for path in sorted(root.glob("*.ipynb")):
        cells = ingest.parse_notebook(path.read_bytes(), path.stem)
        provenance = ingest.PairProvenance(notebook_id=path.stem)
        pairs.extend(ingest.pair_cells(cells, provenance))
    return pairs


def import_rows(pairs) -> list[list[str]]:
    rows = []
    for pair in pairs:
        try:
            tree = metrics.parse_cell(metrics.sanitize_cell_source(pair.code))
            rows.append(metrics.cell_import_occurrences(tree))
        except Exception:
            rows.append([])
    return rows


def build_snapshot_prompts() -> dict[str, str]:
    """Rendered prompt text keyed by snapshot file stem."""
    pairs = fixture_pairs()
    popularity = metrics.build_popularity_table(import_rows(pairs))
    index = retrieval.build_index(pairs, popularity)
    query = next(p for p in pairs if p.pair_id == QUERY_PAIR_ID)

    meta_by_code = {}
    for pair in pairs:
        meta_by_code.setdefault(pair.code, pair.cell_meta)

    def metrics_fn(code: str) -> metrics.MetricVector:
        return metrics.extract_metrics(
            metrics.sanitize_cell_source(code),
            popularity,
            meta_by_code.get(code),
        )

    rendered = {}
    for n_shots in SHOT_COUNTS:
        shots = []
        if n_shots:
            shots = retrieval.top_k(
                query.code, index, retrieval.SamplerConfig("cm_ir", n_shots)
            )
            assert len(shots) == n_shots
        for template_id in TEMPLATES:
            spec = prompting.render_prompt(
                query.code, shots, template_id, metrics_fn=metrics_fn
            )
            rendered[f"{template_id}_{n_shots}shot"] = spec.rendered
    return rendered


def main() -> None:
    out_dir = Path(__file__).resolve().parent.parent / "tests" / "snapshots"
    out_dir.mkdir(parents=True, exist_ok=True)
    for stem, text in sorted(build_snapshot_prompts().items()):
        path = out_dir / f"{stem}.txt"
        path.write_bytes(text.encode("utf-8"))
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
        print(f"{path.relative_to(out_dir.parent.parent)}  sha256:{digest}")


if __name__ == "__main__":
    main()
