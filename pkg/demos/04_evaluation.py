"""Scoring generated documentation and testing run differences.

BLEU and ROUGE compare a candidate against the human reference; the
Wilcoxon signed-rank test says whether one run's per-pair scores beat
another's beyond chance; the judge rubric grades qualities n-gram overlap
cannot see.

Run: python3 demos/04_evaluation.py
"""
from __future__ import annotations

from celldoc import evaluation

REFERENCE = "Calculate and display the average age from the dataset."
CANDIDATES = {
    "faithful": "Calculate and display the average age from the dataset.",
    "close": "Calculate the average age from the data.",
    "literal": (
        "This code imports the pandas library, loads a CSV file, calculates"
        " the mean of the age column, and prints the result."
    ),
}


def main() -> None:
    ref = evaluation.tokenize_for_eval(REFERENCE)
    print(f"reference tokens: {ref}\n")
    for name, text in CANDIDATES.items():
        cand = evaluation.tokenize_for_eval(text)
        scores = evaluation.bleu(cand, ref)
        f1, precision, recall = evaluation.rouge(cand, ref, "L")
        print(
            f"{name:9} bleu_1 {scores[1]:.3f}  bleu_4 {scores[4]:.3f}"
            f"  rougeL f1 {f1:.3f} (p {precision:.3f}, r {recall:.3f})"
        )

    # paired per-cell BLEU-1 from two imaginary runs over ten cells
    with_shots = [0.61, 0.55, 0.72, 0.48, 0.66, 0.59, 0.70, 0.52, 0.63, 0.58]
    zero_shot = [0.44, 0.51, 0.60, 0.39, 0.52, 0.47, 0.61, 0.50, 0.49, 0.45]
    result = evaluation.wilcoxon_signed_rank(with_shots, zero_shot)
    print(
        f"\nwilcoxon over 10 paired cells: W={result.w}, p={result.p_value:.6f}"
        f" ({result.method}), reject={result.reject}"
    )
    print("the shot-augmented run scores higher than zero-shot beyond chance.")

    response = (
        "content_accuracy: 5\n"
        "fluency_conciseness: 4\n"
        "comprehension_support: 3\n"
    )
    score = evaluation.parse_judge_response(response)
    print(f"\njudge reply parsed: {score.as_dict()}")


if __name__ == "__main__":
    main()
