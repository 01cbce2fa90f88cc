#!/usr/bin/env python3
"""Generate a small demo submission archive plus problem metadata.

Lays out ``<dest>/archive`` in the ``problem/student/timestamp.c`` shape
with a ``verdicts.json`` manifest, a ``<dest>/meta`` directory of problem
JSON files, and a ``<dest>/bench`` directory of ``*.buggy.c``/``*.fixed.c``
pairs — everything needed to walk the CLI end to end:

    python3 scripts/make_demo_archive.py demo/
    repairkit dataset demo/archive --out corpus.jsonl
    repairkit triage demo/archive/sum/alice/100.c --meta demo/meta/sum.json
    repairkit bench demo/bench
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

SUM_OK = """\
#include <stdio.h>
int main() {
    int a, b;
    scanf("%d %d", &a, &b);
    printf("%d\\n", a + b);
    return 0;
}
"""

MAX_OK = """\
#include <stdio.h>
int main() {
    int a, b;
    scanf("%d %d", &a, &b);
    int best = a;
    if (b > best) {
        best = b;
    }
    printf("%d\\n", best);
    return 0;
}
"""

SUBMISSIONS = [
    # (problem, student, timestamp, verdict, code)
    ("sum", "alice", "100", "WA", SUM_OK.replace("a + b", "a - b")),
    ("sum", "alice", "200", "OK", SUM_OK),
    ("sum", "bob", "150", "PE", SUM_OK.replace('"%d\\n"', '"%d \\n"')),
    ("sum", "bob", "260", "OK", SUM_OK),
    ("max", "alice", "300", "WA", MAX_OK.replace("b > best", "b < best")),
    ("max", "alice", "420", "AC", MAX_OK),
    ("max", "carol", "500", "TLE",
     MAX_OK.replace("int best = a;", "int best = a;\n    while (a) { }")),
    ("max", "carol", "640", "OK", MAX_OK),
]

PROBLEMS = {
    "sum": {
        "problem_id": "sum",
        "description": "Read two integers and print their sum.",
        "io_format": "stdin: two integers; stdout: one integer and a newline",
        "example_ios": [{"in": "1 2\n", "out": "3\n"}],
        "tests": [{"in": "3 4\n", "expected": "7\n"},
                  {"in": "-2 9\n", "expected": "7\n"}],
    },
    "max": {
        "problem_id": "max",
        "description": "Read two integers and print the larger one.",
        "io_format": "stdin: two integers; stdout: one integer and a newline",
        "example_ios": [{"in": "1 2\n", "out": "2\n"}],
        "tests": [{"in": "5 3\n", "expected": "5\n"},
                  {"in": "-7 -2\n", "expected": "-2\n"}],
    },
}


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dest", help="directory to create the demo tree in")
    args = ap.parse_args(argv)

    dest = Path(args.dest)
    archive = dest / "archive"
    manifest: dict[str, str] = {}
    for problem, student, ts, verdict, code in SUBMISSIONS:
        rel = f"{problem}/{student}/{ts}.c"
        path = archive / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(code)
        manifest[rel] = verdict
    (archive / "verdicts.json").write_text(json.dumps(manifest, indent=2) + "\n")

    meta_dir = dest / "meta"
    meta_dir.mkdir(parents=True, exist_ok=True)
    for name, meta in PROBLEMS.items():
        (meta_dir / f"{name}.json").write_text(json.dumps(meta, indent=2) + "\n")

    bench = dest / "bench"
    bench.mkdir(parents=True, exist_ok=True)
    for problem, student, ts, verdict, code in SUBMISSIONS:
        if verdict in ("WA", "PE", "TLE"):
            fixed = next(c for p, s, t, v, c in SUBMISSIONS
                         if p == problem and s == student and v in ("OK", "AC"))
            stem = f"{problem}-{student}"
            (bench / f"{stem}.buggy.c").write_text(code)
            (bench / f"{stem}.fixed.c").write_text(fixed)

    print(f"demo tree at {dest}: {len(SUBMISSIONS)} submissions, "
          f"{len(PROBLEMS)} problems")
    return 0


if __name__ == "__main__":
    sys.exit(main())
