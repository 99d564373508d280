"""Pick exemplars by metric similarity and render the prompt.

Builds an index over the bundled notebook corpus, retrieves the nearest
neighbors of a query cell by code-metric cosine, and renders the prompt
that sends those neighbors along as worked examples — with and without the
metric block.

Run: python3 demos/03_retrieval_and_prompts.py
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from celldoc import ingest, metrics, prompting, retrieval


def load_corpus() -> list[ingest.CodeMarkdownPair]:
    root = Path(str(resources.files("celldoc") / "data")) / "fixture_notebooks"
    pairs = []
    for path in sorted(root.glob("*.ipynb")):
        cells = ingest.parse_notebook(path.read_bytes(), path.stem)
        pairs.extend(ingest.pair_cells(cells, ingest.PairProvenance(path.stem)))
    return pairs


def main() -> None:
    pairs = load_corpus()
    rows = []
    for pair in pairs:
        tree = metrics.parse_cell(metrics.sanitize_cell_source(pair.code))
        rows.append(metrics.cell_import_occurrences(tree))
    popularity = metrics.build_popularity_table(rows)
    index = retrieval.build_index(pairs, popularity)
    print(f"indexed {len(index.pair_ids)} pairs over {len(index.stats.mins)} metrics")

    query = next(p for p in pairs if p.pair_id == "c01:0001")
    print(f"\nquery ({query.pair_id}):")
    print(query.code)

    shots = retrieval.top_k(
        query.code, index, retrieval.SamplerConfig("cm_ir", 5)
    )
    print("\nnearest neighbors by code-metric cosine:")
    for rank, shot in enumerate(shots, start=1):
        print(f"  {rank}. {shot.pair_id}: {shot.markdown_normalized}")

    meta_by_code = {p.code: p.cell_meta for p in pairs}

    def metrics_fn(code: str) -> metrics.MetricVector:
        return metrics.extract_metrics(
            metrics.sanitize_cell_source(code), popularity, meta_by_code.get(code)
        )

    spec = prompting.render_prompt(
        query.code, shots[:1], "with_metric", metrics_fn=metrics_fn
    )
    print(f"\nwith_metric one-shot prompt (hash {spec.prompt_hash[:12]}):\n")
    print(spec.rendered)

    plain = prompting.render_prompt(query.code, shots[:1], "no_metric")
    print(f"no_metric variant is {len(plain.rendered)} chars"
          f" vs {len(spec.rendered)} with metrics")


if __name__ == "__main__":
    main()
