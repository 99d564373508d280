"""Structural code metrics for notebook code cells.

Twenty-one metrics per cell, in the canonical column order used everywhere
(CSV export, prompt rendering, index matrices):

    LOC    physical lines (str.splitlines; a lone trailing newline adds no line)
    BLC    blank lines (whitespace-only)
    LOCom  comment lines (first non-whitespace character is '#')
    CW     whitespace-separated tokens across comment texts, leading '#' run
           stripped
    S      statement nodes in the parse tree
    P      formal parameters across def statements (lambdas excluded)
    UDF    function definitions, nested included
    NBD    maximum suite nesting depth, 0 for flat code; elif arms stay at
           their chain's depth
    CyC    1 + decision points: if/elif arms, loop headers, exception
           handlers, conditional expressions, boolean and/or operators,
           comprehension filter clauses
    KLCID  identifier occurrences on deduplicated identifier-bearing lines
           divided by the number of such lines
    OPRND / UOPRND    Halstead operand occurrences / distinct operands
    OPRATOR / UOPRAT  Halstead operator occurrences / distinct operators
    ALLC   average characters per line
    ID     identifier occurrences
    ALID   average identifier length in characters
    I      import statements
    EAP    cumulative corpus-relative popularity of imported modules
    NDD    distinct visualization libraries referenced (allowlist)
    EC     1 iff the cell was executed or has outputs

Frozen classification rules (the names above are conventional; the exact
mapping is fixed here for reproducibility):

- Identifier occurrences are ast.Name nodes, parameter names (lambda
  parameters included), def/class definition names, and the binding name an
  import alias introduces (its asname, else the top-level module). Attribute
  names, call-site keyword names, and except-as names are not identifiers.
- Halstead operands = identifier occurrences + literal constants (every
  ast.Constant node, keyed by repr) + attribute names. Operators =
  binary/unary/boolean/comparison operators, assignments ('=' per target,
  augmented as their own kind, walrus), subscripts, calls, statement
  keywords (import/from/if/for/while/def/...), lambda/yield/await
  expressions, one 'for' per comprehension generator and one 'if' per
  comprehension filter, 'except' per handler, and 'if' for conditional
  expressions.
- Import occurrences for EAP: one per alias for plain imports, one per
  from-import statement (absolute imports only), reduced to the top-level
  module.
- NDD resolves attribute roots through the cell's import aliases and counts
  distinct allowlisted libraries referenced by import or attribute root.

Empty or whitespace-only source yields the all-zero vector (EC still per
cell metadata). Unparseable source raises ParseError; callers drop the cell.
"""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ParseError
from .ingest import NotebookCell

TABLE_ABBREVIATIONS = (
    "LOC", "BLC", "LOCom", "CW", "S", "P", "UDF", "NBD", "CyC", "KLCID",
    "OPRND", "OPRATOR", "UOPRND", "UOPRAT", "ALLC", "ID", "ALID", "I",
    "EAP", "NDD", "EC",
)
METRIC_COLUMNS = tuple(name.lower() for name in TABLE_ABBREVIATIONS)
REAL_VALUED = frozenset({"klcid", "allc", "alid", "eap"})

DEFAULT_VIZ_MODULES = frozenset({
    "matplotlib", "seaborn", "plotly", "bokeh", "altair", "plotnine",
    "holoviews", "bqplot", "pygal", "folium", "missingno", "wordcloud",
})

_MAGIC_LINE = re.compile(r"^\s*([%!])")


@dataclass(frozen=True)
class MetricVector:
    """The 21 metrics for one code cell, in canonical field order."""

    loc: int
    blc: int
    locom: int
    cw: int
    s: int
    p: int
    udf: int
    nbd: int
    cyc: int
    klcid: float
    oprnd: int
    oprator: int
    uoprnd: int
    uoprat: int
    allc: float
    id: int
    alid: float
    i: int
    eap: float
    ndd: int
    ec: int

    def as_row(self) -> list[float]:
        """Values in canonical column order."""
        return [getattr(self, name) for name in METRIC_COLUMNS]


ZERO_VECTOR_FIELDS = {name: 0.0 if name in REAL_VALUED else 0 for name in METRIC_COLUMNS}


@dataclass(frozen=True)
class PopularityTable:
    """Corpus-wide frequency of top-level imported modules."""

    counts: dict[str, int]
    total_imports: int

    @staticmethod
    def empty() -> "PopularityTable":
        return PopularityTable(counts={}, total_imports=0)


def sanitize_cell_source(source: str) -> str:
    """Drop notebook magic and shell lines; keep everything else byte-exact.

    A line whose first non-whitespace character is '%' or '!' is removed
    ('%%' starts with '%' and is covered).
    """
    kept = [line for line in source.splitlines() if not _MAGIC_LINE.match(line)]
    return "\n".join(kept)


def parse_cell(source: str) -> ast.Module:
    """Parse sanitized cell source, raising ParseError on invalid syntax."""
    try:
        return ast.parse(source)
    except SyntaxError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from exc


# ---------------------------------------------------------------------------
# Line-level metrics

def _lines(source: str) -> list[str]:
    return source.splitlines()


def _comment_text(line: str) -> str:
    return line.lstrip().lstrip("#")


def line_metrics(source: str) -> tuple[int, int, int, int, float]:
    """(loc, blc, locom, cw, allc) from the raw line structure."""
    lines = _lines(source)
    loc = len(lines)
    blc = sum(1 for line in lines if not line.strip())
    comment_lines = [line for line in lines if line.lstrip().startswith("#")]
    locom = len(comment_lines)
    cw = sum(len(_comment_text(line).split()) for line in comment_lines)
    allc = sum(len(line) for line in lines) / loc if loc else 0.0
    return loc, blc, locom, cw, allc


# ---------------------------------------------------------------------------
# Identifier occurrences

def _alias_binding(alias: ast.alias) -> str:
    return alias.asname if alias.asname else alias.name.split(".")[0]


def identifier_occurrences(tree: ast.AST) -> list[tuple[str, int]]:
    """Every identifier occurrence as (name, line number)."""
    found: list[tuple[str, int]] = []
    for node in ast.walk(tree):
        if isinstance(node, ast.Name):
            found.append((node.id, node.lineno))
        elif isinstance(node, ast.arg):
            found.append((node.arg, node.lineno))
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            found.append((node.name, node.lineno))
        elif isinstance(node, ast.alias):
            found.append((_alias_binding(node), node.lineno))
    return found


# ---------------------------------------------------------------------------
# Statement structure

def statement_metrics(tree: ast.AST) -> tuple[int, int, int]:
    """(s, p, udf): statements, def parameters, function definitions."""
    s = 0
    p = 0
    udf = 0
    for node in ast.walk(tree):
        if isinstance(node, ast.stmt):
            s += 1
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            udf += 1
            a = node.args
            p += len(a.posonlyargs) + len(a.args) + len(a.kwonlyargs)
            p += (1 if a.vararg else 0) + (1 if a.kwarg else 0)
    return s, p, udf


def _is_elif(parent: ast.If, orelse: list[ast.stmt]) -> bool:
    return (
        len(orelse) == 1
        and isinstance(orelse[0], ast.If)
        and orelse[0].col_offset == parent.col_offset
    )


def _suites(node: ast.stmt) -> list[list[ast.stmt]]:
    """The statement's directly attached suites, elif chains flattened."""
    if isinstance(node, ast.If):
        suites = [node.body]
        current = node
        while _is_elif(current, current.orelse):
            current = current.orelse[0]  # elif arm stays at the same depth
            suites.append(current.body)
        if current.orelse:
            suites.append(current.orelse)
        return suites
    if isinstance(node, (ast.For, ast.AsyncFor, ast.While)):
        return [node.body] + ([node.orelse] if node.orelse else [])
    if isinstance(node, (ast.With, ast.AsyncWith)):
        return [node.body]
    if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
        return [node.body]
    if isinstance(node, ast.Try):
        suites = [node.body]
        for handler in node.handlers:
            suites.append(handler.body)
        if node.orelse:
            suites.append(node.orelse)
        if node.finalbody:
            suites.append(node.finalbody)
        return suites
    if isinstance(node, ast.Match):
        return [case.body for case in node.cases]
    return []


def nested_block_depth(tree: ast.Module) -> int:
    """Maximum suite nesting depth; flat code is 0."""

    def walk(stmts: Sequence[ast.stmt], depth: int) -> int:
        deepest = depth
        for stmt in stmts:
            for suite in _suites(stmt):
                deepest = max(deepest, walk(suite, depth + 1))
        return deepest

    return walk(tree.body, 0)


# ---------------------------------------------------------------------------
# Cyclomatic complexity

def cyclomatic_complexity(tree: ast.AST) -> int:
    """1 + decision points; straight-line code scores 1."""
    decisions = 0
    for node in ast.walk(tree):
        if isinstance(node, (ast.If, ast.IfExp)):
            decisions += 1
        elif isinstance(node, (ast.For, ast.AsyncFor, ast.While)):
            decisions += 1
        elif isinstance(node, ast.ExceptHandler):
            decisions += 1
        elif isinstance(node, ast.BoolOp):
            decisions += len(node.values) - 1
        elif isinstance(node, ast.comprehension):
            decisions += len(node.ifs)
    return 1 + decisions


# ---------------------------------------------------------------------------
# Halstead counts

_STATEMENT_KEYWORDS: list[tuple[type, str]] = [
    (ast.Import, "import"),
    (ast.ImportFrom, "from"),
    (ast.If, "if"),
    (ast.For, "for"),
    (ast.AsyncFor, "for"),
    (ast.While, "while"),
    (ast.Return, "return"),
    (ast.Pass, "pass"),
    (ast.Break, "break"),
    (ast.Continue, "continue"),
    (ast.Raise, "raise"),
    (ast.Try, "try"),
    (ast.With, "with"),
    (ast.AsyncWith, "with"),
    (ast.FunctionDef, "def"),
    (ast.AsyncFunctionDef, "def"),
    (ast.ClassDef, "class"),
    (ast.Global, "global"),
    (ast.Nonlocal, "nonlocal"),
    (ast.Delete, "del"),
    (ast.Assert, "assert"),
    (ast.Match, "match"),
]


def halstead_counts(tree: ast.AST) -> tuple[int, int, int, int]:
    """(oprnd, oprator, uoprnd, uoprat) per the module's frozen rules."""
    operands: list[str] = [name for name, _ in identifier_occurrences(tree)]
    operators: list[str] = []

    for node in ast.walk(tree):
        if isinstance(node, ast.Constant):
            operands.append(repr(node.value))
        elif isinstance(node, ast.Attribute):
            operands.append(node.attr)
        elif isinstance(node, ast.BinOp):
            operators.append(type(node.op).__name__)
        elif isinstance(node, ast.UnaryOp):
            operators.append(type(node.op).__name__)
        elif isinstance(node, ast.BoolOp):
            operators.extend([type(node.op).__name__] * (len(node.values) - 1))
        elif isinstance(node, ast.Compare):
            operators.extend(type(op).__name__ for op in node.ops)
        elif isinstance(node, ast.Assign):
            operators.extend(["="] * len(node.targets))
        elif isinstance(node, ast.AnnAssign):
            if node.value is not None:
                operators.append("=")
        elif isinstance(node, ast.AugAssign):
            operators.append(type(node.op).__name__ + "=")
        elif isinstance(node, ast.NamedExpr):
            operators.append(":=")
        elif isinstance(node, ast.Subscript):
            operators.append("[]")
        elif isinstance(node, ast.Call):
            operators.append("()")
        elif isinstance(node, ast.Lambda):
            operators.append("lambda")
        elif isinstance(node, (ast.Yield, ast.YieldFrom)):
            operators.append("yield")
        elif isinstance(node, ast.Await):
            operators.append("await")
        elif isinstance(node, ast.IfExp):
            operators.append("if")
        elif isinstance(node, ast.ExceptHandler):
            operators.append("except")
        elif isinstance(node, ast.comprehension):
            operators.append("for")
            operators.extend(["if"] * len(node.ifs))
        else:
            for node_type, keyword in _STATEMENT_KEYWORDS:
                if type(node) is node_type:
                    operators.append(keyword)
                    break

    return len(operands), len(operators), len(set(operands)), len(set(operators))


# ---------------------------------------------------------------------------
# KLCID

def klcid(source: str) -> float:
    """Identifier density over deduplicated identifier-bearing lines.

    Lines are deduplicated by whitespace-trimmed text; each distinct line
    contributes the identifier count of its first occurrence. Returns 0.0
    when no identifier-bearing line exists.
    """
    tree = parse_cell(source)
    per_line: dict[int, int] = {}
    for _, lineno in identifier_occurrences(tree):
        per_line[lineno] = per_line.get(lineno, 0) + 1
    seen: dict[str, int] = {}
    for lineno, line in enumerate(_lines(source), start=1):
        key = line.strip()
        if key and key not in seen:
            seen[key] = per_line.get(lineno, 0)
    bearing = [count for count in seen.values() if count > 0]
    if not bearing:
        return 0.0
    return sum(bearing) / len(bearing)


# ---------------------------------------------------------------------------
# Imports, popularity, visualization references

def import_statement_count(tree: ast.AST) -> int:
    return sum(
        1 for node in ast.walk(tree) if isinstance(node, (ast.Import, ast.ImportFrom))
    )


def cell_import_occurrences(tree: ast.AST) -> list[str]:
    """Top-level modules referenced by imports, one entry per occurrence.

    Plain imports yield one occurrence per alias; from-imports one per
    statement. Relative imports have no external module and are skipped.
    """
    occurrences: list[str] = []
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            occurrences.extend(alias.name.split(".")[0] for alias in node.names)
        elif isinstance(node, ast.ImportFrom):
            if node.level == 0 and node.module:
                occurrences.append(node.module.split(".")[0])
    return occurrences


def build_popularity_table(corpus: Iterable[Sequence[str]]) -> PopularityTable:
    """Count per-occurrence top-level module frequency across all cells."""
    counts: dict[str, int] = {}
    total = 0
    for imports in corpus:
        for name in imports:
            top = name.split(".")[0]
            counts[top] = counts.get(top, 0) + 1
            total += 1
    return PopularityTable(counts=counts, total_imports=total)


def external_api_popularity(
    imports: Sequence[str], popularity: PopularityTable
) -> float:
    """Sum of count/total over the cell's import occurrences.

    Modules absent from the table contribute 0; an empty import list or an
    empty table scores 0.
    """
    if not imports or popularity.total_imports == 0:
        return 0.0
    return sum(
        popularity.counts.get(name.split(".")[0], 0) for name in imports
    ) / popularity.total_imports


def _attribute_root(node: ast.Attribute) -> str | None:
    value = node.value
    while isinstance(value, ast.Attribute):
        value = value.value
    if isinstance(value, ast.Name):
        return value.id
    return None


def visualization_references(
    tree: ast.AST, allowlist: frozenset[str] = DEFAULT_VIZ_MODULES
) -> int:
    """Distinct allowlisted libraries referenced by import or attribute root."""
    alias_map: dict[str, str] = {}
    referenced: set[str] = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                top = alias.name.split(".")[0]
                alias_map[_alias_binding(alias)] = top
                if top in allowlist:
                    referenced.add(top)
        elif isinstance(node, ast.ImportFrom):
            if node.level == 0 and node.module:
                top = node.module.split(".")[0]
                for alias in node.names:
                    alias_map[_alias_binding(alias)] = top
                if top in allowlist:
                    referenced.add(top)
    for node in ast.walk(tree):
        if isinstance(node, ast.Attribute):
            root = _attribute_root(node)
            if root is not None:
                resolved = alias_map.get(root, root)
                if resolved in allowlist:
                    referenced.add(resolved)
    return len(referenced)


# ---------------------------------------------------------------------------
# Full vector

def _executed(cell_meta: NotebookCell | None) -> int:
    if cell_meta is None:
        return 0
    return 1 if cell_meta.execution_count is not None or cell_meta.has_outputs else 0


def extract_metrics(
    source: str,
    popularity: PopularityTable,
    cell_meta: NotebookCell | None = None,
    viz_allowlist: frozenset[str] = DEFAULT_VIZ_MODULES,
) -> MetricVector:
    """Compute all 21 metrics for sanitized cell source.

    Raises ParseError for syntactically invalid source. Empty or
    whitespace-only source returns the all-zero vector with EC still taken
    from the cell metadata.
    """
    if not source.strip():
        zero = dict(ZERO_VECTOR_FIELDS)
        zero["ec"] = _executed(cell_meta)
        return MetricVector(**zero)  # type: ignore[arg-type]

    tree = parse_cell(source)
    loc, blc, locom, cw, allc = line_metrics(source)
    s, p, udf = statement_metrics(tree)
    identifiers = identifier_occurrences(tree)
    ident_count = len(identifiers)
    alid = (
        sum(len(name) for name, _ in identifiers) / ident_count if ident_count else 0.0
    )
    oprnd, oprator, uoprnd, uoprat = halstead_counts(tree)
    imports = cell_import_occurrences(tree)

    return MetricVector(
        loc=loc,
        blc=blc,
        locom=locom,
        cw=cw,
        s=s,
        p=p,
        udf=udf,
        nbd=nested_block_depth(tree),
        cyc=cyclomatic_complexity(tree),
        klcid=klcid(source),
        oprnd=oprnd,
        oprator=oprator,
        uoprnd=uoprnd,
        uoprat=uoprat,
        allc=allc,
        id=ident_count,
        alid=alid,
        i=import_statement_count(tree),
        eap=external_api_popularity(imports, popularity),
        ndd=visualization_references(tree, viz_allowlist),
        ec=_executed(cell_meta),
    )


def format_metric_value(name: str, value: float) -> str:
    """CSV/report formatting: integers bare, reals in shortest round-trip form."""
    if name in REAL_VALUED:
        return repr(float(value))
    return str(int(value))
