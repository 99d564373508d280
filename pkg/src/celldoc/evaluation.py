"""Evaluation: lexical scores, significance tests, splits, judge protocol.

BLEU is sentence-level with add-one smoothing applied only to zero-count
precisions of order two and above; order-one scores stay unsmoothed, so
fully disjoint texts score 0. ROUGE-L uses token-level LCS without stemming.
The Wilcoxon signed-rank test is exact (full enumeration over sign
assignments, computed by dynamic programming) for up to 12 nonzero
differences and a tie-corrected normal approximation above that. The judge
rates one candidate per request on three 1-5 dimensions.
"""
from __future__ import annotations

import math
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import httpx

from .errors import (
    ConfigInvalid,
    CorpusTooSmall,
    EmptyRun,
    TooFewPairs,
    UnparseableJudgeOutput,
)
from .ingest import CodeMarkdownPair, count_words
from .metrics import sanitize_cell_source
from .prompting import ChatClient, CompletionCache, LlmConfig, complete_text, load_template

_EVAL_TOKEN = re.compile(r"\w+|[^\w\s]")

SCORE_NAMES = (
    "bleu_1", "bleu_2", "bleu_3", "bleu_4",
    "rouge1_f1", "rouge1_p", "rouge1_r",
    "rouge2_f1", "rouge2_p", "rouge2_r",
    "rougeL_f1", "rougeL_p", "rougeL_r",
)


def tokenize_for_eval(text: str) -> list[str]:
    """Lowercase, split on whitespace, detach punctuation as single tokens."""
    return _EVAL_TOKEN.findall(text.lower())


# ---------------------------------------------------------------------------
# BLEU / ROUGE

def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    candidate: Sequence[str], reference: Sequence[str], max_n: int = 4
) -> dict[int, float]:
    """Sentence BLEU-n for every n in 1..max_n.

    Modified n-gram precision with reference clipping; brevity penalty
    exp(1 - r/c) when the candidate is shorter. A zero-count precision at
    order >= 2 becomes 1/(slots+1) (add-one); at order 1 it stays 0, which
    zeroes the geometric mean. A candidate with no n-gram slots at some
    order scores 0 for every BLEU-n that includes that order.
    """
    if not 1 <= max_n <= 4:
        raise ValueError("max_n must be in 1..4")
    scores: dict[int, float] = {}
    c = len(candidate)
    r = len(reference)
    precisions: list[float] = []
    for k in range(1, max_n + 1):
        slots = c - k + 1
        if slots <= 0:
            precisions.append(0.0)
        else:
            overlap = _ngram_counts(candidate, k) & _ngram_counts(reference, k)
            matched = sum(overlap.values())
            if matched == 0:
                precisions.append(1.0 / (slots + 1) if k >= 2 else 0.0)
            else:
                precisions.append(matched / slots)
        if c == 0 or any(p == 0.0 for p in precisions):
            scores[k] = 0.0
            continue
        mean_log = sum(math.log(p) for p in precisions) / k
        brevity = 1.0 if c > r else math.exp(1.0 - r / c)
        scores[k] = brevity * math.exp(mean_log)
    return scores


def _overlap_f1(matched: int, n_candidate: int, n_reference: int) -> tuple[float, float, float]:
    precision = matched / n_candidate if n_candidate else 0.0
    recall = matched / n_reference if n_reference else 0.0
    if precision + recall == 0.0:
        return 0.0, 0.0, 0.0
    return 2 * precision * recall / (precision + recall), precision, recall


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


def rouge(
    candidate: Sequence[str], reference: Sequence[str], variant: str
) -> tuple[float, float, float]:
    """(F1, precision, recall) for ROUGE-1, ROUGE-2, or ROUGE-L."""
    if variant in ("1", "2", 1, 2):
        n = int(variant)
        cand = _ngram_counts(candidate, n)
        ref = _ngram_counts(reference, n)
        matched = sum((cand & ref).values())
        return _overlap_f1(matched, sum(cand.values()), sum(ref.values()))
    if variant in ("L", "l"):
        lcs = _lcs_length(candidate, reference)
        return _overlap_f1(lcs, len(candidate), len(reference))
    raise ValueError(f"unknown rouge variant {variant!r}")


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank

@dataclass(frozen=True)
class WilcoxonResult:
    w: float
    p_value: float
    reject: bool
    n: int
    method: str  # "exact" or "approx"


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _exact_two_sided_p(doubled_ranks: Sequence[int], doubled_w: int) -> float:
    """P(min(W+, W-) <= w) over all sign assignments, by subset-sum DP.

    Ranks are doubled so midranks (halves) become integers and the DP stays
    exact. Equivalent to enumerating all 2^n assignments.
    """
    distribution: dict[int, int] = {0: 1}
    for rank in doubled_ranks:
        updated: dict[int, int] = {}
        for total, ways in distribution.items():
            updated[total] = updated.get(total, 0) + ways
            updated[total + rank] = updated.get(total + rank, 0) + ways
        distribution = updated
    total_rank_sum = sum(doubled_ranks)
    hits = sum(
        ways
        for total, ways in distribution.items()
        if min(total, total_rank_sum - total) <= doubled_w
    )
    return hits / 2 ** len(doubled_ranks)


def wilcoxon_signed_rank(
    x: Sequence[float], y: Sequence[float], alpha: float = 0.05
) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped; fewer than five remaining pairs raises
    TooFewPairs. W is min(W+, W-) over midranks of |differences|. The
    p-value is exact for n <= 12 and a tie-corrected normal approximation
    above. reject iff p < alpha.
    """
    if len(x) != len(y):
        raise ValueError("paired samples must have equal length")
    diffs = [a - b for a, b in zip(x, y) if a != b]
    n = len(diffs)
    if n < 5:
        raise TooFewPairs(f"{n} nonzero differences, need at least 5")
    ranks = _midranks([abs(d) for d in diffs])
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    w = min(w_plus, w_minus)

    if n <= 12:
        doubled = [round(2 * r) for r in ranks]
        p = _exact_two_sided_p(doubled, round(2 * w))
        method = "exact"
    else:
        mu = n * (n + 1) / 4
        tie_counts = Counter(abs(d) for d in diffs).values()
        correction = sum(t ** 3 - t for t in tie_counts) / 48
        sigma = math.sqrt(n * (n + 1) * (2 * n + 1) / 24 - correction)
        z = (w - mu) / sigma
        p = math.erfc(abs(z) / math.sqrt(2))
        method = "approx"
    p = min(1.0, p)
    return WilcoxonResult(w=w, p_value=p, reject=p < alpha, n=n, method=method)


# ---------------------------------------------------------------------------
# Splits

@dataclass(frozen=True)
class Fold:
    """One train/test/evaluation assignment over pair ids."""

    train: tuple[str, ...]
    test: tuple[str, ...]
    evaluation: tuple[str, ...]


@dataclass(frozen=True)
class SplitAssignment:
    strategy: str
    folds: tuple[Fold, ...]


def _loc_bucket(code: str) -> str:
    loc = len(sanitize_cell_source(code).splitlines())
    if loc <= 5:
        return "loc:1-5"
    if loc <= 15:
        return "loc:6-15"
    return "loc:16+"


def _words_bucket(markdown_normalized: str) -> str:
    words = count_words(markdown_normalized)
    if words <= 15:
        return "words:4-15"
    if words <= 50:
        return "words:16-50"
    return "words:51+"


def stratum_key(pair: CodeMarkdownPair) -> tuple[str, str]:
    """The (code length, markdown length) stratum a pair belongs to."""
    return _loc_bucket(pair.code), _words_bucket(pair.markdown_normalized)


def make_splits(
    corpus: Sequence[CodeMarkdownPair],
    strategy: str,
    seed: int = 0,
    folds: int = 10,
    fraction: float = 0.10,
) -> SplitAssignment:
    """Build data splits over pair ids.

    kfold: seeded shuffle, `folds` near-equal blocks; fold i uses block i as
    test, block i+1 (cyclically) as evaluation, the rest as training — the
    8/1/1 rotation for 10 folds. holdout: stratified sample of
    round(fraction*N) test items, allocated across strata by largest
    remainder, seeded shuffle within each stratum; one fold, no evaluation
    block. Every fold is a partition of the corpus.
    """
    ids = [pair.pair_id for pair in corpus]
    if strategy == "kfold":
        if len(ids) < folds:
            raise CorpusTooSmall(f"kfold needs >= {folds} items, got {len(ids)}")
        rng = random.Random(seed)
        shuffled = ids[:]
        rng.shuffle(shuffled)
        blocks: list[list[str]] = []
        base, extra = divmod(len(shuffled), folds)
        start = 0
        for b in range(folds):
            size = base + (1 if b < extra else 0)
            blocks.append(shuffled[start : start + size])
            start += size
        out = []
        for i in range(folds):
            test = blocks[i]
            evaluation = blocks[(i + 1) % folds]
            train = [
                pid
                for b in range(folds)
                if b not in (i, (i + 1) % folds)
                for pid in blocks[b]
            ]
            out.append(
                Fold(train=tuple(train), test=tuple(test), evaluation=tuple(evaluation))
            )
        return SplitAssignment(strategy="kfold", folds=tuple(out))

    if strategy == "holdout":
        if not corpus:
            raise CorpusTooSmall("holdout needs a non-empty corpus")
        target = int(fraction * len(corpus) + 0.5)
        strata: dict[tuple[str, str], list[str]] = {}
        for pair in corpus:
            strata.setdefault(stratum_key(pair), []).append(pair.pair_id)
        rng = random.Random(seed)
        shares = []
        for key in sorted(strata):
            exact = target * len(strata[key]) / len(corpus)
            shares.append([key, math.floor(exact), exact - math.floor(exact)])
        remaining = target - sum(share[1] for share in shares)
        for share in sorted(shares, key=lambda s: (-s[2], s[0]))[:remaining]:
            share[1] += 1
        test: list[str] = []
        train: list[str] = []
        quotas = {key: quota for key, quota, _ in shares}
        for key in sorted(strata):
            members = strata[key][:]
            rng.shuffle(members)
            quota = quotas[key]
            test.extend(members[:quota])
            train.extend(members[quota:])
        fold = Fold(train=tuple(sorted(train)), test=tuple(sorted(test)), evaluation=())
        return SplitAssignment(strategy="holdout", folds=(fold,))

    raise ValueError(f"unknown split strategy {strategy!r}")


# ---------------------------------------------------------------------------
# Records, scoring, aggregation

@dataclass(frozen=True)
class GenerationRecord:
    """One generated documentation text and its provenance."""

    pair_id: str
    sampler_kind: str
    template_id: str
    prompt_hash: str
    generated: str
    reference: str

    @property
    def run_id(self) -> str:
        return f"{self.sampler_kind}:{self.template_id}"

    def as_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "sampler_kind": self.sampler_kind,
            "template_id": self.template_id,
            "prompt_hash": self.prompt_hash,
            "generated": self.generated,
            "reference": self.reference,
        }

    @staticmethod
    def from_dict(record: Mapping) -> "GenerationRecord":
        return GenerationRecord(
            pair_id=record["pair_id"],
            sampler_kind=record["sampler_kind"],
            template_id=record["template_id"],
            prompt_hash=record["prompt_hash"],
            generated=record["generated"],
            reference=record["reference"],
        )


@dataclass(frozen=True)
class ScoredRecord:
    pair_id: str
    run_id: str
    scores: dict[str, float]


def score_record(record: GenerationRecord) -> ScoredRecord:
    """All 13 lexical scores for one generation."""
    candidate = tokenize_for_eval(record.generated)
    reference = tokenize_for_eval(record.reference)
    scores: dict[str, float] = {}
    for n, value in bleu(candidate, reference, 4).items():
        scores[f"bleu_{n}"] = value
    for variant, label in (("1", "rouge1"), ("2", "rouge2"), ("L", "rougeL")):
        f1, precision, recall = rouge(candidate, reference, variant)
        scores[f"{label}_f1"] = f1
        scores[f"{label}_p"] = precision
        scores[f"{label}_r"] = recall
    return ScoredRecord(pair_id=record.pair_id, run_id=record.run_id, scores=scores)


@dataclass(frozen=True)
class Comparison:
    """Wilcoxon outcome for one score against a baseline run."""

    metric: str
    result: WilcoxonResult | None
    note: str = ""


@dataclass(frozen=True)
class EvalReport:
    records: tuple[ScoredRecord, ...]
    mean: dict[str, float]
    std: dict[str, float]
    comparisons: tuple[Comparison, ...] = field(default_factory=tuple)
    baseline_run_id: str | None = None

    def summary_text(self) -> str:
        """Two-column table: this run's avg/std, baseline comparison if any."""
        run_ids = sorted({record.run_id for record in self.records})
        lines = [f"run: {', '.join(run_ids)}  ({len(self.records)} records)"]
        by_metric = {c.metric: c for c in self.comparisons}
        header = f"{'metric':<10} {'avg':>8} {'std':>8}"
        if self.baseline_run_id:
            header += f"   vs {self.baseline_run_id} (W, p, reject)"
        lines.append(header)
        for name in SCORE_NAMES:
            row = f"{name:<10} {self.mean[name]:>8.4f} {self.std[name]:>8.4f}"
            comparison = by_metric.get(name)
            if comparison is not None:
                if comparison.result is None:
                    row += f"   {comparison.note}"
                else:
                    res = comparison.result
                    row += f"   W={res.w:.1f} p={res.p_value:.5f} reject={res.reject}"
            lines.append(row)
        return "\n".join(lines) + "\n"


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _sample_std(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    m = _mean(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / (len(values) - 1))


def aggregate_report(
    records: Sequence[GenerationRecord],
    baseline: Sequence[GenerationRecord] | None = None,
    alpha: float = 0.05,
) -> EvalReport:
    """Score every record and aggregate; optionally test against a baseline.

    The baseline is paired by pair_id; each score is compared with the
    two-sided Wilcoxon signed-rank test. A degenerate comparison (fewer than
    five nonzero differences) is reported as a note instead of a result.
    """
    if not records:
        raise EmptyRun("no records to aggregate")
    scored = tuple(score_record(record) for record in records)
    mean = {name: _mean([s.scores[name] for s in scored]) for name in SCORE_NAMES}
    std = {name: _sample_std([s.scores[name] for s in scored]) for name in SCORE_NAMES}

    comparisons: list[Comparison] = []
    baseline_run_id = None
    if baseline:
        baseline_scored = {record.pair_id: score_record(record) for record in baseline}
        baseline_run_id = next(iter(baseline_scored.values())).run_id
        shared = [s for s in scored if s.pair_id in baseline_scored]
        for name in SCORE_NAMES:
            ours = [s.scores[name] for s in shared]
            theirs = [baseline_scored[s.pair_id].scores[name] for s in shared]
            try:
                result = wilcoxon_signed_rank(ours, theirs, alpha)
                comparisons.append(Comparison(metric=name, result=result))
            except TooFewPairs as exc:
                comparisons.append(
                    Comparison(metric=name, result=None, note=f"no test ({exc})")
                )
    return EvalReport(
        records=scored,
        mean=mean,
        std=std,
        comparisons=tuple(comparisons),
        baseline_run_id=baseline_run_id,
    )


# ---------------------------------------------------------------------------
# LLM-as-a-judge

@dataclass(frozen=True)
class JudgeScore:
    """Three 1-5 ratings; overall is their mean."""

    content_accuracy: int
    fluency_conciseness: int
    comprehension_support: int

    @property
    def overall(self) -> float:
        return (
            self.content_accuracy
            + self.fluency_conciseness
            + self.comprehension_support
        ) / 3

    def as_dict(self) -> dict:
        return {
            "content_accuracy": self.content_accuracy,
            "fluency_conciseness": self.fluency_conciseness,
            "comprehension_support": self.comprehension_support,
            "overall": self.overall,
        }


_JUDGE_PATTERNS = {
    "content_accuracy": re.compile(r"^content_accuracy:\s*([1-5])\s*$", re.MULTILINE),
    "fluency_conciseness": re.compile(
        r"^fluency_conciseness:\s*([1-5])\s*$", re.MULTILINE
    ),
    "comprehension_support": re.compile(
        r"^comprehension_support:\s*([1-5])\s*$", re.MULTILINE
    ),
}


def parse_judge_response(text: str) -> JudgeScore:
    """Extract the three ratings; raises UnparseableJudgeOutput otherwise."""
    ratings = {}
    for name, pattern in _JUDGE_PATTERNS.items():
        matches = pattern.findall(text)
        if len(matches) != 1:
            raise UnparseableJudgeOutput(
                f"expected exactly one {name} line with a 1-5 rating"
            )
        ratings[name] = int(matches[0])
    return JudgeScore(**ratings)


def render_judge_prompt(code: str, reference: str, candidate: str) -> str:
    return load_template("judge").format(
        code=code, reference=reference, candidate=candidate
    )


def judge(
    code: str,
    reference: str,
    candidates: Mapping[str, str],
    judge_cfg: LlmConfig,
    client: ChatClient | None = None,
    cache: CompletionCache | None = None,
    transport: httpx.BaseTransport | None = None,
) -> dict[str, JudgeScore]:
    """Rate each named candidate independently, one request per candidate.

    The judge temperature must be 0. An unparseable response is re-asked
    once with the identical prompt (bypassing the cache); a second failure
    raises UnparseableJudgeOutput.
    """
    if judge_cfg.temperature != 0:
        raise ConfigInvalid("judge temperature must be 0")
    if client is None:
        client = ChatClient(judge_cfg, transport=transport)
    results: dict[str, JudgeScore] = {}
    for name, candidate in candidates.items():
        rendered = render_judge_prompt(code, reference, candidate)
        response = complete_text(rendered, judge_cfg, client=client, cache=cache)
        try:
            results[name] = parse_judge_response(response)
        except UnparseableJudgeOutput:
            response = complete_text(
                rendered, judge_cfg, client=client, cache=cache, cache_read=False
            )
            results[name] = parse_judge_response(response)
    return results
