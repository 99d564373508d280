"""Regenerate the packaged fixture notebooks and the hand-annotated golden file.

Every notebook is [markdown, code, markdown] so the code cell pairs with the
markdown above it. The golden metric values below were derived by hand from
the documented counting rules; they are the reference the implementation is
tested against, not its output. Reals are stored as [numerator, denominator].

Run from the repository root:  python3 scripts/make_fixtures.py
"""
from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "celldoc" / "data"

# name, code, execution_count, outputs?, doc markdown, golden values
CELLS = [
    (
        "c01",
        'import pandas as pd\n'
        'df = pd.read_csv("data.csv")\n'
        'mean_value = df["age"].mean()\n'
        'print(mean_value)',
        1,
        True,
        "Load the survey data and compute the mean `age` of respondents.",
        dict(loc=4, blc=0, locom=0, cw=0, s=4, p=0, udf=0, nbd=0, cyc=1,
             klcid=[7, 4], oprnd=11, oprator=7, uoprnd=8, uoprat=4,
             allc=[93, 4], id=7, alid=[33, 7], i=1, eap=[1, 10], ndd=0, ec=1),
    ),
    (
        "c02",
        'import numpy as np\n'
        'import matplotlib.pyplot as plt\n'
        '\n'
        'values = np.random.normal(50, 10, 100)\n'
        'plt.hist(values, bins=10)\n'
        'plt.show()',
        2,
        True,
        "Draw a histogram of 100 simulated measurement values.",
        dict(loc=6, blc=1, locom=0, cw=0, s=5, p=0, udf=0, nbd=0, cyc=1,
             klcid=[7, 5], oprnd=15, oprator=6, uoprnd=10, uoprat=3,
             allc=[122, 6], id=7, alid=[25, 7], i=2, eap=[4, 10], ndd=1, ec=1),
    ),
    (
        "c03",
        "# rectangle area in square meters\narea = width * height",
        None,
        False,
        "Compute the rectangle area from width and height.",
        dict(loc=2, blc=0, locom=1, cw=5, s=1, p=0, udf=0, nbd=0, cyc=1,
             klcid=[3, 1], oprnd=3, oprator=2, uoprnd=3, uoprat=2,
             allc=[54, 2], id=3, alid=[15, 3], i=0, eap=[0, 1], ndd=0, ec=0),
    ),
    (
        "c04",
        '# load the survey table\n# one row per response\ndata = load("rows.csv")',
        3,
        False,
        "Read the raw survey responses into a table.",
        dict(loc=3, blc=0, locom=2, cw=8, s=1, p=0, udf=0, nbd=0, cyc=1,
             klcid=[2, 1], oprnd=3, oprator=2, uoprnd=3, uoprat=2,
             allc=[68, 3], id=2, alid=[8, 2], i=0, eap=[0, 1], ndd=0, ec=1),
    ),
    (
        "c05",
        "total = 0\n\n# accumulate\ntotal = total + 5\nprint(total)",
        None,
        False,
        "Accumulate a running total and print it.",
        dict(loc=5, blc=1, locom=1, cw=1, s=3, p=0, udf=0, nbd=0, cyc=1,
             klcid=[5, 3], oprnd=7, oprator=4, uoprnd=4, uoprat=3,
             allc=[50, 5], id=5, alid=[25, 5], i=0, eap=[0, 1], ndd=0, ec=0),
    ),
    (
        "c06",
        "def add(a, b):\n    return a + b\n\nresult = add(2, 3)",
        4,
        True,
        "Define a helper that adds two numbers.",
        dict(loc=4, blc=1, locom=0, cw=0, s=3, p=2, udf=1, nbd=1, cyc=1,
             klcid=[7, 3], oprnd=9, oprator=5, uoprnd=6, uoprat=5,
             allc=[48, 4], id=7, alid=[16, 7], i=0, eap=[0, 1], ndd=0, ec=1),
    ),
    (
        "c07",
        "def outer(items):\n"
        "    def inner(x):\n"
        "        return x * 2\n"
        "    total = 0\n"
        "    for item in items:\n"
        "        total += inner(item)\n"
        "    return total",
        None,
        False,
        "Sum the doubled items using a nested helper.",
        dict(loc=7, blc=0, locom=0, cw=0, s=7, p=2, udf=2, nbd=2, cyc=2,
             klcid=[12, 7], oprnd=14, oprator=9, uoprnd=8, uoprat=7,
             allc=[133, 7], id=12, alid=[50, 12], i=0, eap=[0, 1], ndd=0, ec=0),
    ),
    (
        "c08",
        "if x > 0:\n"
        "    sign = 1\n"
        "elif x < 0:\n"
        "    sign = -1\n"
        "else:\n"
        "    sign = 0",
        5,
        False,
        "Classify the sign of the input value.",
        dict(loc=6, blc=0, locom=0, cw=0, s=5, p=0, udf=0, nbd=1, cyc=3,
             klcid=[5, 5], oprnd=10, oprator=8, uoprnd=4, uoprat=5,
             allc=[62, 6], id=5, alid=[14, 5], i=0, eap=[0, 1], ndd=0, ec=1),
    ),
    (
        "c09",
        "while n > 0 and flag:\n    n = n - 1",
        None,
        False,
        "Count down while the flag stays set.",
        dict(loc=2, blc=0, locom=0, cw=0, s=2, p=0, udf=0, nbd=1, cyc=3,
             klcid=[4, 2], oprnd=6, oprator=5, uoprnd=4, uoprat=5,
             allc=[34, 2], id=4, alid=[7, 4], i=0, eap=[0, 1], ndd=0, ec=0),
    ),
    (
        "c10",
        "squares = [i * i for i in numbers if i % 2 == 0]",
        6,
        False,
        "Collect squares of the even numbers.",
        dict(loc=1, blc=0, locom=0, cw=0, s=1, p=0, udf=0, nbd=0, cyc=2,
             klcid=[6, 1], oprnd=8, oprator=6, uoprnd=5, uoprat=6,
             allc=[48, 1], id=6, alid=[18, 6], i=0, eap=[0, 1], ndd=0, ec=1),
    ),
    (
        "c11",
        "# default on parse failure\n"
        "\n"
        "try:\n"
        "    value = int(text)\n"
        "except ValueError:\n"
        "    value = 0",
        None,
        False,
        "Parse the text into an integer, defaulting to zero.",
        dict(loc=6, blc=1, locom=1, cw=4, s=3, p=0, udf=0, nbd=1, cyc=2,
             klcid=[5, 3], oprnd=6, oprator=5, uoprnd=5, uoprat=4,
             allc=[82, 6], id=5, alid=[27, 5], i=0, eap=[0, 1], ndd=0, ec=0),
    ),
    (
        "c12",
        'with open("log.txt") as fh:\n    first = fh.readline()',
        None,
        True,
        "Read the first line of the log file.",
        dict(loc=2, blc=0, locom=0, cw=0, s=2, p=0, udf=0, nbd=1, cyc=1,
             klcid=[4, 2], oprnd=6, oprator=4, uoprnd=5, uoprat=3,
             allc=[52, 2], id=4, alid=[13, 4], i=0, eap=[0, 1], ndd=0, ec=1),
    ),
    (
        "c13",
        "import os\n"
        "import sys as system\n"
        "from collections import Counter\n"
        "\n"
        "print(os.getcwd())",
        7,
        True,
        "Import the standard utilities and show the working directory.",
        dict(loc=5, blc=1, locom=0, cw=0, s=4, p=0, udf=0, nbd=0, cyc=1,
             klcid=[5, 4], oprnd=6, oprator=5, uoprnd=5, uoprat=3,
             allc=[78, 5], id=5, alid=[22, 5], i=3, eap=[3, 10], ndd=0, ec=1),
    ),
    (
        "c14",
        "import seaborn as sns\n\nsns.histplot(ages)",
        8,
        True,
        "Plot the age distribution of participants.",
        dict(loc=3, blc=1, locom=0, cw=0, s=2, p=0, udf=0, nbd=0, cyc=1,
             klcid=[3, 2], oprnd=4, oprator=2, uoprnd=3, uoprat=2,
             allc=[39, 3], id=3, alid=[10, 3], i=1, eap=[2, 10], ndd=1, ec=1),
    ),
    (
        "c15",
        "import matplotlib.pyplot as plt\n"
        "import seaborn as sns\n"
        "\n"
        "sns.boxplot(x=groups, y=scores)\n"
        'plt.title("scores by group")',
        9,
        True,
        "Compare score distributions across groups with a box plot.",
        dict(loc=5, blc=1, locom=0, cw=0, s=4, p=0, udf=0, nbd=0, cyc=1,
             klcid=[6, 4], oprnd=9, oprator=4, uoprnd=7, uoprat=2,
             allc=[111, 5], id=6, alid=[24, 6], i=2, eap=[5, 10], ndd=2, ec=1),
    ),
    (
        "c16",
        "%matplotlib inline\n"
        "import matplotlib.pyplot as plt\n"
        "plt.plot([1, 2, 3])",
        10,
        True,
        "Plot a quick line chart inline.",
        dict(loc=2, blc=0, locom=0, cw=0, s=2, p=0, udf=0, nbd=0, cyc=1,
             klcid=[2, 2], oprnd=6, oprator=2, uoprnd=5, uoprat=2,
             allc=[50, 2], id=2, alid=[6, 2], i=1, eap=[3, 10], ndd=1, ec=1),
    ),
    (
        "c17",
        "class Point:\n"
        "    def __init__(self, x, y):\n"
        "        self.x = x\n"
        "        self.y = y",
        None,
        False,
        "Define a 2-D point with x and y coordinates.",
        dict(loc=4, blc=0, locom=0, cw=0, s=4, p=3, udf=1, nbd=2, cyc=1,
             klcid=[9, 4], oprnd=11, oprator=4, uoprnd=5, uoprat=3,
             allc=[77, 4], id=9, alid=[29, 9], i=0, eap=[0, 1], ndd=0, ec=0),
    ),
    (
        "c18",
        'double = lambda v: v * 2\n'
        'label = "even" if n % 2 == 0 else "odd"',
        11,
        False,
        "Tag each number as even or odd.",
        dict(loc=2, blc=0, locom=0, cw=0, s=2, p=0, udf=0, nbd=0, cyc=2,
             klcid=[5, 2], oprnd=10, oprator=7, uoprnd=8, uoprat=6,
             allc=[63, 2], id=5, alid=[14, 5], i=0, eap=[0, 1], ndd=0, ec=1),
    ),
    (
        "c19",
        "# reset both counters\na = b = 0\na += 1\nb *= 2",
        None,
        False,
        "Initialize both counters and bump them.",
        dict(loc=4, blc=0, locom=1, cw=3, s=3, p=0, udf=0, nbd=0, cyc=1,
             klcid=[4, 3], oprnd=7, oprator=4, uoprnd=5, uoprat=3,
             allc=[42, 4], id=4, alid=[4, 4], i=0, eap=[0, 1], ndd=0, ec=0),
    ),
    (
        "c20",
        "# roster summary\n"
        'names = ["ada", "grace"]\n'
        "first = names[0]\n"
        "shout = first.upper()\n"
        "count = len(names)",
        12,
        True,
        "Uppercase the first name and count the names.",
        dict(loc=5, blc=0, locom=1, cw=2, s=4, p=0, udf=0, nbd=0, cyc=1,
             klcid=[8, 4], oprnd=12, oprator=7, uoprnd=9, uoprat=3,
             allc=[95, 5], id=8, alid=[38, 8], i=0, eap=[0, 1], ndd=0, ec=1),
    ),
    (
        "c21",
        "# Load the cleaned activity table from disk.\n"
        "# Each row is one participant-day, wide format.\n"
        "# Columns were renamed by the earlier cell.\n"
        "# Keep this block in sync with the codebook.\n"
        'activity = read_table("activity.tsv")',
        None,
        False,
        "Bring in the prepared activity table.",
        dict(loc=5, blc=0, locom=4, cw=29, s=1, p=0, udf=0, nbd=0, cyc=1,
             klcid=[2, 1], oprnd=3, oprator=2, uoprnd=3, uoprat=2,
             allc=[215, 5], id=2, alid=[18, 2], i=0, eap=[0, 1], ndd=0, ec=0),
    ),
    (
        "c22",
        "# bucket the readings by magnitude\n"
        "def classify(points):\n"
        "\n"
        '    buckets = {"low": 0, "mid": 0, "high": 0}\n'
        "\n"
        "    for value in points:\n"
        "        if value < 10:\n"
        '            buckets["low"] += 1\n'
        "        elif value < 100:\n"
        '            buckets["mid"] += 1\n'
        "        else:\n"
        '            buckets["high"] += 1\n'
        "\n"
        "    return buckets",
        None,
        False,
        "Bucket the sensor readings into magnitude classes.",
        dict(loc=14, blc=3, locom=1, cw=5, s=9, p=1, udf=1, nbd=3, cyc=4,
             klcid=[11, 9], oprnd=25, oprator=14, uoprnd=11, uoprat=8,
             allc=[296, 14], id=11, alid=[70, 11], i=0, eap=[0, 1], ndd=0,
             ec=0),
    ),
    (
        "c23",
        "# style the grid before plotting\n"
        'matplotlib.rcParams["figure.figsize"] = (8, 3)\n'
        'seaborn.set_theme(style="whitegrid")\n'
        'plotly.io.templates.default = "simple_white"',
        13,
        False,
        "Apply the shared plot styling used throughout.",
        dict(loc=4, blc=0, locom=1, cw=5, s=3, p=0, udf=0, nbd=0, cyc=1,
             klcid=[3, 3], oprnd=13, oprator=4, uoprnd=13, uoprat=3,
             allc=[158, 4], id=3, alid=[23, 3], i=0, eap=[0, 1], ndd=3, ec=1),
    ),
]

TAIL = "The output above feeds the next step."


def as_lines(text: str) -> list[str]:
    lines = text.split("\n")
    return [line + "\n" for line in lines[:-1]] + [lines[-1]]


def notebook(code: str, execution_count, has_outputs: bool, doc: str) -> dict:
    outputs = (
        [{"output_type": "stream", "name": "stdout", "text": ["ok\n"]}]
        if has_outputs
        else []
    )
    return {
        "cells": [
            {"cell_type": "markdown", "metadata": {}, "source": as_lines(doc)},
            {
                "cell_type": "code",
                "execution_count": execution_count,
                "metadata": {},
                "outputs": outputs,
                "source": as_lines(code),
            },
            {"cell_type": "markdown", "metadata": {}, "source": as_lines(TAIL)},
        ],
        "metadata": {"language_info": {"name": "python"}},
        "nbformat": 4,
        "nbformat_minor": 5,
    }


def main() -> None:
    nb_dir = OUT / "fixture_notebooks"
    nb_dir.mkdir(parents=True, exist_ok=True)
    golden = {}
    for name, code, execution_count, has_outputs, doc, values in CELLS:
        path = nb_dir / f"{name}.ipynb"
        path.write_text(
            json.dumps(notebook(code, execution_count, has_outputs, doc), indent=1)
            + "\n",
            encoding="utf-8",
        )
        golden[name] = {"source": code, "expected": values}
    (OUT / "golden_metrics.json").write_text(
        json.dumps(golden, indent=1) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(CELLS)} notebooks and golden_metrics.json under {OUT}")


if __name__ == "__main__":
    main()
