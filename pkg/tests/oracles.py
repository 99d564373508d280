"""Independent reference implementations used to check the library.

Everything here is deliberately written the slow, obvious way and shares no
code with celldoc: n-gram counting by slicing, LCS by memoized recursion,
Wilcoxon by enumerating all 2^n sign assignments, ranking by a plain Python
sort. Tests compare celldoc's answers against these.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def bleu_oracle(candidate: Sequence[str], reference: Sequence[str], n: int) -> float:
    """Sentence BLEU-n with add-one smoothing on zero-count orders >= 2."""
    if len(candidate) == 0:
        return 0.0
    precisions = []
    for k in range(1, n + 1):
        cand = ngrams(candidate, k)
        ref = ngrams(reference, k)
        if not cand:
            return 0.0
        matched = 0
        remaining = list(ref)
        for gram in cand:
            if gram in remaining:
                remaining.remove(gram)
                matched += 1
        if matched == 0:
            if k == 1:
                return 0.0
            precisions.append(1.0 / (len(cand) + 1))
        else:
            precisions.append(matched / len(cand))
    log_sum = sum(math.log(p) for p in precisions) / n
    if len(candidate) > len(reference):
        bp = 1.0
    else:
        bp = math.exp(1.0 - len(reference) / len(candidate))
    return bp * math.exp(log_sum)


def rouge_n_oracle(
    candidate: Sequence[str], reference: Sequence[str], n: int
) -> tuple[float, float, float]:
    """ROUGE-n precision/recall/F1 with clipped n-gram overlap."""
    cand = ngrams(candidate, n)
    ref = ngrams(reference, n)
    remaining = list(ref)
    matched = 0
    for gram in cand:
        if gram in remaining:
            remaining.remove(gram)
            matched += 1
    precision = matched / len(cand) if cand else 0.0
    recall = matched / len(ref) if ref else 0.0
    if precision + recall == 0.0:
        return 0.0, 0.0, 0.0
    f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def lcs_oracle(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length by memoized recursion."""
    a = tuple(a)
    b = tuple(b)

    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))

    return rec(0, 0)


def rouge_l_oracle(
    candidate: Sequence[str], reference: Sequence[str]
) -> tuple[float, float, float]:
    if not candidate or not reference:
        return 0.0, 0.0, 0.0
    lcs = lcs_oracle(candidate, reference)
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    if precision + recall == 0.0:
        return 0.0, 0.0, 0.0
    f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def midranks_oracle(values: Sequence[float]) -> list[float]:
    """Average ranks (1-based); tied values share the mean of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def wilcoxon_exact_oracle(diffs: Sequence[float]) -> tuple[float, float]:
    """(W, two-sided exact p) by enumerating every sign assignment.

    p = fraction of the 2^n assignments whose min(W+, W-) is <= the observed
    W, with ties in |d| given midranks. Zero diffs must be removed upstream.
    """
    n = len(diffs)
    ranks = midranks_oracle([abs(d) for d in diffs])
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    observed = min(w_plus, w_minus)
    total = sum(ranks)
    hits = 0
    for signs in itertools.product((1, -1), repeat=n):
        plus = sum(r for r, s in zip(ranks, signs) if s > 0)
        if min(plus, total - plus) <= observed + 1e-12:
            hits += 1
    return observed, hits / 2 ** n


def rank_ids_oracle(
    ids: Sequence[str],
    scores: Sequence[float],
    k: int,
    exclude: set[str] | None = None,
) -> list[str]:
    """Exhaustive ranking: descending score, ties by ascending id."""
    exclude = exclude or set()
    rows = [(ids[i], scores[i]) for i in range(len(ids)) if ids[i] not in exclude]
    rows.sort(key=lambda row: (-row[1], row[0]))
    return [pid for pid, _ in rows[:k]]


def cosine_oracle(a: Sequence[float], b: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = sum(x * x for x in a)
    nb = sum(y * y for y in b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / math.sqrt(na * nb)


def normalize_oracle(
    row: Sequence[float], mins: Sequence[float], maxs: Sequence[float]
) -> list[float]:
    """Min-max scaling into [0, 1]; constant columns become 0."""
    out = []
    for v, lo, hi in zip(row, mins, maxs):
        span = hi - lo
        if span == 0.0:
            out.append(0.0)
            continue
        x = (v - lo) / span
        out.append(0.0 if x < 0.0 else (1.0 if x > 1.0 else x))
    return out


def combined_oracle(alpha: float, emb: float, cm: float) -> float:
    return alpha * emb + (1.0 - alpha) * cm
