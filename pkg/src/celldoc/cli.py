"""Command-line pipeline: ingest, curate, metrics, index, generate, eval, judge.

Every stage is idempotent: with unchanged inputs and seed it rewrites
byte-identical artifacts. Each artifact starts with a header carrying the
tool version, the config hash, and the run seed. Exit codes: 0 success,
1 validation/usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import glob as globlib
import importlib.resources
import json
import sys
from pathlib import Path
from typing import Callable, Sequence

from . import config as config_mod
from . import curation, evaluation, ingest, metrics, prompting, retrieval
from ._version import __version__
from .config import PipelineConfig
from .errors import (
    CelldocError,
    ConfigInvalid,
    MalformedNotebook,
    StageFailed,
    UnsupportedFormatVersion,
)
from .metrics import MetricVector, PopularityTable
from .providers import EmbeddingProvider, HashingEmbedder, HttpEmbedder

STAGES = ("ingest", "curate", "metrics", "index", "generate", "eval", "judge", "demo")


# ---------------------------------------------------------------------------
# Artifact I/O

def _header(cfg: PipelineConfig, artifact: str) -> dict:
    return {
        "artifact": artifact,
        "tool_version": __version__,
        "config_hash": config_mod.config_hash(cfg),
        "seed": cfg.rng_seed,
    }


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_jsonl(path: Path, cfg: PipelineConfig, artifact: str, records) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [_dumps(_header(cfg, artifact))]
    lines.extend(_dumps(record) for record in records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_jsonl(path: Path) -> list[dict]:
    """Records from a JSONL artifact, header line skipped."""
    records = []
    with path.open(encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if i == 0 and isinstance(record, dict) and "tool_version" in record:
                continue
            records.append(record)
    return records


def write_json(path: Path, cfg: PipelineConfig, artifact: str, body: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"header": _header(cfg, artifact)}
    document.update(body)
    path.write_text(
        json.dumps(document, sort_keys=False, indent=2) + "\n", encoding="utf-8"
    )


def write_text(path: Path, cfg: PipelineConfig, artifact: str, body: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _header(cfg, artifact)
    first = (
        f"# {header['artifact']} tool_version={header['tool_version']}"
        f" config_hash={header['config_hash']} seed={header['seed']}\n"
    )
    path.write_text(first + body, encoding="utf-8")


# ---------------------------------------------------------------------------
# Shared stage helpers

def _embedding_provider(cfg: PipelineConfig) -> EmbeddingProvider:
    if cfg.offline or cfg.embedding.kind == "hash":
        return HashingEmbedder(dim=cfg.embedding.dim)
    return HttpEmbedder(
        endpoint=cfg.embedding.endpoint,
        model_id=cfg.embedding.model_id,
        api_key_env=cfg.embedding.api_key_env,
    )


def _load_pairs(path: Path) -> list[ingest.CodeMarkdownPair]:
    return [ingest.pair_from_record(record) for record in read_jsonl(path)]


def _pairs_file(out: Path) -> Path:
    """Curated pairs when present, otherwise the raw ingest output."""
    curated = out / "curated.jsonl"
    return curated if curated.exists() else out / "pairs.jsonl"


def _import_rows(pairs) -> list[list[str]]:
    rows = []
    for pair in pairs:
        try:
            tree = metrics.parse_cell(metrics.sanitize_cell_source(pair.code))
        except CelldocError:
            rows.append([])
            continue
        rows.append(metrics.cell_import_occurrences(tree))
    return rows


def _popularity(cfg: PipelineConfig, out: Path, pairs) -> PopularityTable:
    path = out / "popularity.json"
    if path.exists():
        with path.open(encoding="utf-8") as fh:
            document = json.load(fh)
        return PopularityTable(
            counts=dict(document["counts"]),
            total_imports=int(document["total_imports"]),
        )
    return metrics.build_popularity_table(_import_rows(pairs))


def _metrics_fn(
    pairs, popularity: PopularityTable, cfg: PipelineConfig
) -> Callable[[str], MetricVector]:
    """Code -> metrics closure that recovers cell metadata for known code."""
    meta_by_code = {}
    for pair in pairs:
        meta_by_code.setdefault(pair.code, pair.cell_meta)

    def fn(code: str) -> MetricVector:
        return metrics.extract_metrics(
            metrics.sanitize_cell_source(code),
            popularity,
            meta_by_code.get(code),
            viz_allowlist=frozenset(cfg.viz_allowlist),
        )

    return fn


# ---------------------------------------------------------------------------
# Stages

def stage_ingest(cfg: PipelineConfig, out: Path) -> None:
    sidecar = {}
    if cfg.input.metadata_sidecar:
        with open(cfg.input.metadata_sidecar, encoding="utf-8") as fh:
            sidecar = json.load(fh)

    paths: list[str] = []
    for pattern in cfg.input.notebook_globs:
        paths.extend(globlib.glob(pattern, recursive=True))
    paths = sorted(set(paths))

    pairs: list[ingest.CodeMarkdownPair] = []
    skipped = 0
    for path in paths:
        notebook_id = Path(path).as_posix()
        if notebook_id.endswith(".ipynb"):
            notebook_id = notebook_id[: -len(".ipynb")]
        try:
            cells = ingest.parse_notebook(Path(path).read_bytes(), notebook_id)
        except (MalformedNotebook, UnsupportedFormatVersion) as exc:
            print(f"skipping {path}: {exc}", file=sys.stderr)
            skipped += 1
            continue
        meta = sidecar.get(notebook_id) or sidecar.get(Path(path).name) or {}
        provenance = ingest.PairProvenance(
            notebook_id=notebook_id,
            author_tier=int(meta.get("author_tier", cfg.input.default_author_tier)),
            is_fork=bool(meta.get("is_fork", False)),
        )
        for pair in ingest.pair_cells(cells, provenance):
            if ingest.length_filter(pair, cfg.bounds.min_words, cfg.bounds.max_words):
                pairs.append(pair)

    write_jsonl(
        out / "pairs.jsonl", cfg, "pairs", (ingest.pair_to_record(p) for p in pairs)
    )
    print(
        f"ingest: {len(paths)} notebooks ({skipped} skipped), {len(pairs)} pairs kept"
    )


def stage_curate(cfg: PipelineConfig, out: Path) -> None:
    pairs = _load_pairs(out / "pairs.jsonl")
    provider = _embedding_provider(cfg)
    result = curation.apply(pairs, cfg.curation, provider)
    write_jsonl(
        out / "curated.jsonl",
        cfg,
        "curated",
        (ingest.pair_to_record(p) for p in result.pairs),
    )
    write_json(
        out / "curation_report.json",
        cfg,
        "curation_report",
        {"stages": [report.as_dict() for report in result.reports]},
    )
    write_text(out / "curation_report.txt", cfg, "curation_report", result.report_text())
    print(f"curate: {len(pairs)} -> {len(result.pairs)} pairs")


def stage_metrics(cfg: PipelineConfig, out: Path) -> None:
    pairs = _load_pairs(_pairs_file(out))
    popularity = metrics.build_popularity_table(_import_rows(pairs))

    header = _header(cfg, "metrics")
    lines = [
        f"# tool_version={header['tool_version']}"
        f" config_hash={header['config_hash']} seed={header['seed']}",
        ",".join(("pair_id",) + metrics.METRIC_COLUMNS),
    ]
    for pair in pairs:
        vector = metrics.extract_metrics(
            metrics.sanitize_cell_source(pair.code),
            popularity,
            pair.cell_meta,
            viz_allowlist=frozenset(cfg.viz_allowlist),
        )
        values = [
            metrics.format_metric_value(name, value)
            for name, value in zip(metrics.METRIC_COLUMNS, vector.as_row())
        ]
        lines.append(",".join([pair.pair_id] + values))
    path = out / "metrics.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    write_json(
        out / "popularity.json",
        cfg,
        "popularity",
        {
            "counts": dict(sorted(popularity.counts.items())),
            "total_imports": popularity.total_imports,
        },
    )
    print(f"metrics: {len(pairs)} rows -> metrics.csv, popularity.json")


def stage_index(cfg: PipelineConfig, out: Path) -> None:
    pairs = _load_pairs(_pairs_file(out))
    popularity = _popularity(cfg, out, pairs)
    provider = _embedding_provider(cfg)
    index = retrieval.build_index(
        pairs, popularity, provider, viz_allowlist=frozenset(cfg.viz_allowlist)
    )
    out.mkdir(parents=True, exist_ok=True)
    retrieval.save_index(
        index,
        str(out / "index.bin"),
        tool_version=__version__,
        config_hash=config_mod.config_hash(cfg),
        seed=cfg.rng_seed,
    )
    print(f"index: {len(pairs)} pairs -> index.bin")


def stage_generate(cfg: PipelineConfig, out: Path, fold: int = 0) -> None:
    pairs = _load_pairs(_pairs_file(out))
    index_path = out / "index.bin"
    if not index_path.exists():
        raise FileNotFoundError(f"{index_path} missing; run the index stage first")
    index = retrieval.load_index(str(index_path), pairs=pairs)
    popularity = index.popularity
    provider = _embedding_provider(cfg)

    splits = evaluation.make_splits(
        pairs,
        cfg.eval.strategy,
        seed=config_mod.derive_seed(cfg.rng_seed, "split"),
        folds=cfg.eval.folds,
        fraction=cfg.eval.fraction,
    )
    if not 0 <= fold < len(splits.folds):
        raise ConfigInvalid(f"fold must be in 0..{len(splits.folds) - 1}")
    assignment = splits.folds[fold]
    held_out = frozenset(assignment.test) | frozenset(assignment.evaluation)
    by_id = {pair.pair_id: pair for pair in pairs}

    sampler = cfg.sampler
    if sampler.kind == "random_shot" and sampler.rng_seed is None:
        sampler = retrieval.SamplerConfig(
            kind=sampler.kind,
            n_shots=sampler.n_shots,
            alpha=sampler.alpha,
            rng_seed=config_mod.derive_seed(cfg.rng_seed, "sampler"),
        )
    needs_embeddings = sampler.kind in ("embedding_ir", "combined_ir")
    metrics_fn = _metrics_fn(pairs, popularity, cfg)

    client = None
    cache = None
    if not cfg.offline:
        client = prompting.ChatClient(cfg.generator)
        if cfg.cache_dir:
            cache = prompting.CompletionCache(cfg.cache_dir)

    records = []
    for pair_id in assignment.test:
        pair = by_id[pair_id]
        shots = retrieval.top_k(
            pair.code,
            index,
            sampler,
            provider=provider if needs_embeddings else None,
            exclude_ids=held_out,
        )
        prompt = prompting.render_prompt(
            pair.code, shots, cfg.template_id, metrics_fn=metrics_fn
        )
        if cfg.offline:
            generated = pair.markdown_normalized
        else:
            generated = prompting.complete(prompt, cfg.generator, client=client, cache=cache)
        records.append(
            evaluation.GenerationRecord(
                pair_id=pair.pair_id,
                sampler_kind=sampler.kind,
                template_id=cfg.template_id,
                prompt_hash=prompt.prompt_hash,
                generated=generated,
                reference=pair.markdown_normalized,
            )
        )

    write_jsonl(
        out / "generations.jsonl",
        cfg,
        "generations",
        (record.as_dict() for record in records),
    )
    print(
        f"generate: fold {fold}, {len(records)} completions"
        f" ({'echo reference' if cfg.offline else cfg.generator.model_id})"
    )


def stage_eval(cfg: PipelineConfig, out: Path, baseline: str | None = None) -> None:
    records = [
        evaluation.GenerationRecord.from_dict(r)
        for r in read_jsonl(out / "generations.jsonl")
    ]
    baseline_records = None
    if baseline:
        baseline_records = [
            evaluation.GenerationRecord.from_dict(r) for r in read_jsonl(Path(baseline))
        ]
    report = evaluation.aggregate_report(records, baseline_records)

    write_jsonl(
        out / "eval_records.jsonl",
        cfg,
        "eval_records",
        (
            {"pair_id": s.pair_id, "run_id": s.run_id, "scores": s.scores}
            for s in report.records
        ),
    )
    body: dict = {"mean": report.mean, "std": report.std}
    if report.baseline_run_id:
        body["baseline_run_id"] = report.baseline_run_id
        body["comparisons"] = [
            {
                "metric": c.metric,
                "w": c.result.w if c.result else None,
                "p_value": c.result.p_value if c.result else None,
                "reject": c.result.reject if c.result else None,
                "method": c.result.method if c.result else None,
                "note": c.note,
            }
            for c in report.comparisons
        ]
    write_json(out / "eval_summary.json", cfg, "eval_summary", body)
    write_text(out / "eval_summary.txt", cfg, "eval_summary", report.summary_text())
    print(
        f"eval: {len(records)} records, bleu_1={report.mean['bleu_1']:.4f},"
        f" rougeL_f1={report.mean['rougeL_f1']:.4f}"
    )


def _canned_judge(generated: str, reference: str) -> evaluation.JudgeScore:
    """Offline stand-in: full marks for echoes, middling otherwise."""
    if generated == reference:
        return evaluation.JudgeScore(5, 5, 5)
    return evaluation.JudgeScore(3, 3, 3)


def stage_judge(cfg: PipelineConfig, out: Path) -> None:
    records = [
        evaluation.GenerationRecord.from_dict(r)
        for r in read_jsonl(out / "generations.jsonl")
    ]
    pairs = _load_pairs(_pairs_file(out))
    by_id = {pair.pair_id: pair for pair in pairs}

    client = None
    cache = None
    if not cfg.offline:
        client = prompting.ChatClient(cfg.judge)
        if cfg.cache_dir:
            cache = prompting.CompletionCache(cfg.cache_dir)

    rows = []
    for record in records:
        pair = by_id.get(record.pair_id)
        code = pair.code if pair is not None else ""
        if cfg.offline:
            score = _canned_judge(record.generated, record.reference)
        else:
            scores = evaluation.judge(
                code,
                record.reference,
                {record.run_id: record.generated},
                cfg.judge,
                client=client,
                cache=cache,
            )
            score = scores[record.run_id]
        row = {"pair_id": record.pair_id, "run_id": record.run_id}
        row.update(score.as_dict())
        rows.append(row)

    write_jsonl(out / "judge_scores.jsonl", cfg, "judge_scores", rows)
    if rows:
        mean = sum(row["overall"] for row in rows) / len(rows)
        print(f"judge: {len(rows)} candidates, mean overall {mean:.2f}")
    else:
        print("judge: no records")


def fixture_config(out_dir: str, seed: int = 7) -> PipelineConfig:
    """Pipeline config over the packaged fixture notebooks, fully offline."""
    data = importlib.resources.files("celldoc") / "data"
    notebooks = str(data / "fixture_notebooks" / "*.ipynb")
    return config_mod.config_from_dict(
        {
            "input": {"notebook_globs": [notebooks]},
            "curation": {"semantic_threshold": 0.0},
            "sampler": {"kind": "cm_ir", "n_shots": 1},
            "eval": {"strategy": "holdout", "fraction": 0.2},
            "template_id": "with_metric",
            "output_dir": out_dir,
            "rng_seed": seed,
            "offline": True,
        }
    )


def stage_demo(out_dir: str, seed: int) -> None:
    """Walk the motivating example end-to-end against the bundled fixtures."""
    cfg = fixture_config(out_dir, seed)
    out = Path(cfg.output_dir)
    print("== demo: documenting notebook cells offline ==")
    stage_ingest(cfg, out)
    stage_curate(cfg, out)
    stage_metrics(cfg, out)
    stage_index(cfg, out)

    pairs = _load_pairs(out / "curated.jsonl")
    index = retrieval.load_index(str(out / "index.bin"), pairs=pairs)
    query = next(p for p in pairs if p.pair_id.endswith("c01:0001"))
    shots = retrieval.top_k(
        query.code, index, retrieval.SamplerConfig(kind="cm_ir", n_shots=1)
    )
    print("\nquery code:")
    print("  " + "\n  ".join(query.code.splitlines()))
    if shots:
        print(f"\nnearest pair by code-metric similarity: {shots[0].pair_id}")
        print("  " + "\n  ".join(shots[0].code.splitlines()))

    stage_generate(cfg, out)
    stage_eval(cfg, out)
    stage_judge(cfg, out)
    print(f"\nartifacts in {out}/")


# ---------------------------------------------------------------------------
# Argument parsing and dispatch

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config YAML")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument(
        "--offline", action="store_true", help="force deterministic mock providers"
    )
    common.add_argument("--cache-dir", help="completion cache directory")

    parser = argparse.ArgumentParser(
        prog="celldoc",
        description="Curate notebook (code, markdown) pairs and document code cells.",
    )
    parser.add_argument("--version", action="version", version=f"celldoc {__version__}")
    sub = parser.add_subparsers(dest="stage", required=True)

    for stage in ("ingest", "curate", "metrics", "index"):
        sub.add_parser(stage, parents=[common])
    generate = sub.add_parser("generate", parents=[common])
    generate.add_argument("--fold", type=int, default=0, help="fold to generate for")
    eval_parser = sub.add_parser("eval", parents=[common])
    eval_parser.add_argument(
        "--baseline", help="generations.jsonl to test against (Wilcoxon)"
    )
    sub.add_parser("judge", parents=[common])
    demo = sub.add_parser("demo", parents=[common])
    demo.add_argument("--out", default="out/demo", help="demo output directory")
    return parser


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    if args.config:
        cfg = config_mod.from_yaml(args.config)
    else:
        cfg = PipelineConfig()
    overrides = {}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if args.offline:
        overrides["offline"] = True
    if args.cache_dir:
        overrides["cache_dir"] = args.cache_dir
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
        config_mod.validate(cfg)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    try:
        if args.stage == "demo":
            stage_demo(args.out, args.seed if args.seed is not None else 7)
            return 0
        cfg = _load_config(args)
        out = Path(cfg.output_dir)
        if args.stage == "ingest":
            stage_ingest(cfg, out)
        elif args.stage == "curate":
            stage_curate(cfg, out)
        elif args.stage == "metrics":
            stage_metrics(cfg, out)
        elif args.stage == "index":
            stage_index(cfg, out)
        elif args.stage == "generate":
            stage_generate(cfg, out, fold=args.fold)
        elif args.stage == "eval":
            stage_eval(cfg, out, baseline=args.baseline)
        elif args.stage == "judge":
            stage_judge(cfg, out)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except CelldocError as exc:
        failure = StageFailed(args.stage, exc)
        print(f"error: {failure}", file=sys.stderr)
        return 2
    except OSError as exc:
        failure = StageFailed(args.stage, exc)
        print(f"error: {failure}", file=sys.stderr)
        return 2
    return 0


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
