"""Statement-level alignment between a buggy file and its fixed version.

The alignment is an edit-distance DP over statement sequences: substituting
one statement for another costs the character-level Levenshtein distance of
their normalized texts scaled to [0, 1], insertions and deletions cost 1.
Statements whose normalized texts are equal align as matches, so
whitespace-only edits never count as modifications.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .source import SourceUnit, parse

__all__ = [
    "AlignPair",
    "AlignedDiff",
    "levenshtein",
    "align_statements",
    "line_edit_distance",
]


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Edit distance (insert/delete/substitute, unit costs) between sequences."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        append = cur.append
        for j, y in enumerate(b, 1):
            append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


@lru_cache(maxsize=65536)
def _cached_char_distance(a: str, b: str) -> int:
    return levenshtein(a, b)


def _substitution_cost(a: str, b: str) -> float:
    if a == b:
        return 0.0
    denom = max(len(a), len(b), 1)
    return _cached_char_distance(a, b) / denom


@dataclass(frozen=True)
class AlignPair:
    """One aligned step: op is 'match', 'replace', 'insert' or 'delete'.

    ``buggy`` / ``fixed`` are statement indices into the respective units;
    the side an insert/delete lacks is None.
    """

    op: str
    buggy: int | None
    fixed: int | None


@dataclass(frozen=True)
class AlignedDiff:
    buggy: SourceUnit
    fixed: SourceUnit
    pairs: tuple[AlignPair, ...]
    modified: tuple[int, ...]          # fixed-side statements touched by replace/insert
    modified_vars: frozenset[str]
    modified_calls: frozenset[str]
    deletion_anchors: dict[int, tuple[int, ...]]  # fixed stmt -> deleted buggy stmts

    @property
    def identical(self) -> bool:
        return all(p.op == "match" for p in self.pairs)


def align_statements(buggy: SourceUnit | str, fixed: SourceUnit | str) -> AlignedDiff:
    from .source import extract_facts  # local import to keep module load light

    if isinstance(buggy, str):
        buggy = parse(buggy)
    if isinstance(fixed, str):
        fixed = parse(fixed)

    a = [s.normalized for s in buggy.statements]
    b = [s.normalized for s in fixed.statements]
    n, m = len(a), len(b)

    # cost[i][j]: min cost aligning a[:i] with b[:j]
    cost = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        cost[i][0] = float(i)
    for j in range(1, m + 1):
        cost[0][j] = float(j)
    for i in range(1, n + 1):
        row, prev_row = cost[i], cost[i - 1]
        ai = a[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                prev_row[j - 1] + _substitution_cost(ai, b[j - 1]),
                prev_row[j] + 1.0,
                row[j - 1] + 1.0,
            )

    # traceback, preferring diagonal steps for a deterministic alignment
    pairs: list[AlignPair] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            diag = cost[i - 1][j - 1] + _substitution_cost(a[i - 1], b[j - 1])
            if abs(cost[i][j] - diag) < 1e-12:
                op = "match" if a[i - 1] == b[j - 1] else "replace"
                pairs.append(AlignPair(op, i - 1, j - 1))
                i -= 1
                j -= 1
                continue
        if i > 0 and abs(cost[i][j] - (cost[i - 1][j] + 1.0)) < 1e-12:
            pairs.append(AlignPair("delete", i - 1, None))
            i -= 1
            continue
        pairs.append(AlignPair("insert", None, j - 1))
        j -= 1
    pairs.reverse()

    modified = tuple(
        p.fixed for p in pairs if p.op in ("replace", "insert") and p.fixed is not None
    )

    facts = extract_facts(fixed)
    mod_vars: set[str] = set()
    mod_calls: set[str] = set()
    for idx in modified:
        mod_vars |= facts.variables_by_statement.get(idx, frozenset())
        mod_calls |= facts.calls_by_statement.get(idx, frozenset())

    anchors: dict[int, list[int]] = {}
    for pos, p in enumerate(pairs):
        if p.op != "delete" or p.buggy is None:
            continue
        anchor = None
        for q in pairs[pos + 1:]:
            if q.fixed is not None:
                anchor = q.fixed
                break
        if anchor is None:
            for q in reversed(pairs[:pos]):
                if q.fixed is not None:
                    anchor = q.fixed
                    break
        if anchor is not None:
            anchors.setdefault(anchor, []).append(p.buggy)

    return AlignedDiff(
        buggy=buggy,
        fixed=fixed,
        pairs=tuple(pairs),
        modified=modified,
        modified_vars=frozenset(mod_vars),
        modified_calls=frozenset(mod_calls),
        deletion_anchors={k: tuple(v) for k, v in anchors.items()},
    )


def line_edit_distance(buggy_text: str, fixed_text: str) -> int:
    """Levenshtein distance over the sequences of whitespace-trimmed lines."""
    a = [ln.strip() for ln in buggy_text.splitlines()]
    b = [ln.strip() for ln in fixed_text.splitlines()]
    return levenshtein(a, b)
