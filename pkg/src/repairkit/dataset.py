"""Build repair corpora out of submission archives.

An archive is either a directory tree ``problem_id/student_id/<timestamp>.c``
with a ``verdicts.json`` manifest at the root, or a single JSONL file whose
lines carry ``problem_id``, ``student_id``, ``timestamp``, ``verdict`` and
``code``.  Wrong submissions pair with the same student's earliest later
accepted one; pairs that differ too much are dropped as restructuring rather
than repair.
"""

from __future__ import annotations

import json
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from zlib import crc32

from .diffs import line_edit_distance
from .errors import RepairKitError
from .mask import MaskConfig, build_mask
from .source import parse

__all__ = [
    "Submission",
    "RepairPair",
    "ACCEPTED_VERDICTS",
    "load_archive",
    "pair_submissions",
    "filter_pairs",
    "pair_seed",
    "pair_to_record",
    "build_records",
    "export_corpus",
    "corpus_stats",
]

log = logging.getLogger(__name__)

ACCEPTED_VERDICTS = frozenset({"OK", "AC", "ACCEPTED"})


@dataclass(frozen=True)
class Submission:
    problem_id: str
    student_id: str
    timestamp: str
    verdict: str
    code: str

    @property
    def accepted(self) -> bool:
        return self.verdict.upper() in ACCEPTED_VERDICTS


@dataclass(frozen=True)
class RepairPair:
    pair_id: str
    problem_id: str
    student_id: str
    buggy: Submission
    fixed: Submission

    @property
    def led(self) -> int:
        return line_edit_distance(self.buggy.code, self.fixed.code)


def _timestamp_key(sub: Submission) -> tuple[int, str] | tuple[int, int, str]:
    # numeric timestamps sort numerically, everything else lexically
    try:
        return (0, int(sub.timestamp), sub.timestamp)
    except ValueError:
        return (1, sub.timestamp)


def _load_jsonl(path: Path) -> list[Submission]:
    subs = []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
            subs.append(Submission(
                problem_id=str(rec["problem_id"]),
                student_id=str(rec["student_id"]),
                timestamp=str(rec["timestamp"]),
                verdict=str(rec["verdict"]),
                code=rec["code"],
            ))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise RepairKitError(f"{path}:{lineno}: bad submission record: {exc}") from exc
    return subs


def _load_tree(root: Path) -> list[Submission]:
    manifest_path = root / "verdicts.json"
    if not manifest_path.is_file():
        raise RepairKitError(f"{root}: missing verdicts.json manifest")
    manifest = json.loads(manifest_path.read_text())
    if not isinstance(manifest, dict):
        raise RepairKitError(f"{manifest_path}: manifest must map paths to verdicts")
    subs = []
    seen = set()
    for src in sorted(root.rglob("*.c")):
        rel = src.relative_to(root).as_posix()
        parts = rel.split("/")
        if len(parts) != 3:
            raise RepairKitError(f"{root}: expected problem/student/timestamp.c, got {rel}")
        if rel not in manifest:
            raise RepairKitError(f"{manifest_path}: no verdict for {rel}")
        seen.add(rel)
        subs.append(Submission(
            problem_id=parts[0],
            student_id=parts[1],
            timestamp=Path(parts[2]).stem,
            verdict=str(manifest[rel]),
            code=src.read_text(),
        ))
    missing = set(manifest) - seen
    if missing:
        raise RepairKitError(f"{manifest_path}: verdicts for missing files: {sorted(missing)[:3]}")
    return subs


def load_archive(path: str | Path) -> list[Submission]:
    p = Path(path)
    if p.is_dir():
        return _load_tree(p)
    if p.is_file():
        return _load_jsonl(p)
    raise RepairKitError(f"{path}: no such archive")


def pair_submissions(submissions: list[Submission]) -> list[RepairPair]:
    """Each wrong attempt pairs with the earliest later accepted attempt."""
    groups: dict[tuple[str, str], list[Submission]] = {}
    for sub in submissions:
        groups.setdefault((sub.problem_id, sub.student_id), []).append(sub)
    pairs = []
    for key in sorted(groups):
        history = sorted(groups[key], key=_timestamp_key)
        for i, sub in enumerate(history):
            if sub.accepted:
                continue
            fixed = next((s for s in history[i + 1:] if s.accepted), None)
            if fixed is None:
                continue
            pair_id = f"{sub.problem_id}/{sub.student_id}/{sub.timestamp}"
            pairs.append(RepairPair(
                pair_id=pair_id,
                problem_id=sub.problem_id,
                student_id=sub.student_id,
                buggy=sub,
                fixed=fixed,
            ))
    return pairs


def filter_pairs(pairs: list[RepairPair], max_led: int = 10) -> list[RepairPair]:
    """Drop pairs whose line edit distance exceeds ``max_led``."""
    kept = []
    for pair in pairs:
        led = pair.led
        if led > max_led:
            log.info("dropping %s: LED %d > %d, restructuring rather than repair",
                     pair.pair_id, led, max_led)
            continue
        kept.append(pair)
    return kept


def pair_seed(global_seed: int, pair_id: str) -> int:
    return global_seed ^ crc32(pair_id.encode())


def pair_to_record(pair: RepairPair, config: MaskConfig) -> dict:
    """One corpus record: the pair plus its mask under ``config``.

    The record's seed is derived from the config seed and the pair id so a
    corpus is reproducible record-by-record.
    """
    seed = pair_seed(config.rng_seed, pair.pair_id)
    cfg = MaskConfig(
        strategy=config.strategy,
        sigma=config.sigma,
        rng_seed=seed,
        dist_granularity=config.dist_granularity,
        expansion_aggregation=config.expansion_aggregation,
        loss_level=config.loss_level,
    )
    buggy_unit = parse(pair.buggy.code)
    fixed_unit = parse(pair.fixed.code)
    mask = build_mask(buggy_unit, fixed_unit, cfg)
    statements = []
    for i, stmt in enumerate(fixed_unit.statements):
        statements.append({
            "text": stmt.text,
            "weight_raw": mask.raw[i],
            "k": None if mask.normalized is None else mask.normalized[i],
        })
    return {
        "pair_id": pair.pair_id,
        "problem_id": pair.problem_id,
        "buggy_code": pair.buggy.code,
        "fixed_code": pair.fixed.code,
        "strategy": cfg.strategy,
        "sigma": cfg.sigma,
        "seed": seed,
        "statements": statements,
        "token_k": None if mask.token_k is None else list(mask.token_k),
        "flags": sorted(mask.flags),
    }


def build_records(pairs: list[RepairPair], config: MaskConfig | None = None,
                  jobs: int = 1) -> list[dict]:
    """Corpus records for ``pairs``, sorted by pair id."""
    config = config or MaskConfig()
    ordered = sorted(pairs, key=lambda p: p.pair_id)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda p: pair_to_record(p, config), ordered))
    return [pair_to_record(p, config) for p in ordered]


def export_corpus(pairs: list[RepairPair], out_path: str | Path,
                  config: MaskConfig | None = None, jobs: int = 1) -> int:
    """Write one JSONL record per pair, sorted by pair id. Returns the count."""
    records = build_records(pairs, config, jobs)
    out = Path(out_path)
    with out.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return len(records)


def corpus_stats(pairs: list[RepairPair]) -> dict:
    """Summary numbers for a paired corpus (buggy side)."""
    if not pairs:
        return {"pairs": 0}
    lines = [len(p.buggy.code.splitlines()) for p in pairs]
    tokens = [len(parse(p.buggy.code).code_tokens()) for p in pairs]
    verdicts: dict[str, int] = {}
    for p in pairs:
        verdicts[p.buggy.verdict] = verdicts.get(p.buggy.verdict, 0) + 1
    return {
        "pairs": len(pairs),
        "problems": len({p.problem_id for p in pairs}),
        "students": len({(p.problem_id, p.student_id) for p in pairs}),
        "avg_lines": statistics.fmean(lines),
        "median_lines": statistics.median(lines),
        "avg_tokens": statistics.fmean(tokens),
        "median_tokens": statistics.median(tokens),
        "verdicts": dict(sorted(verdicts.items())),
    }
