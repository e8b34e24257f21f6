"""Line-delimited record formats shared by the CLI stages.

Every interchange file is JSON-lines with sorted keys, so identical
inputs and seeds reproduce identical bytes. Malformed lines are counted
and skipped with a warning, never a crash.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator

from .data import Post
from .decode import CandidatePool, SamplingConfig

log = logging.getLogger("titlegen")


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dump_json(row) + "\n")
            count += 1
    return count


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


@dataclass
class ReadStats:
    read: int = 0
    skipped: int = 0


def read_jsonl(path: str | Path, stats: ReadStats | None = None) -> Iterator[dict]:
    """Yield one dict per well-formed line; count and skip the rest."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                if not isinstance(row, dict):
                    raise ValueError("record is not an object")
            except ValueError as exc:
                if stats is not None:
                    stats.skipped += 1
                log.warning("%s:%d: skipping malformed record (%s)", path, lineno, exc)
                continue
            if stats is not None:
                stats.read += 1
            yield row


# -- posts ----------------------------------------------------------------

_POST_FIELDS = {
    "id",
    "title",
    "code_snippets",
    "created_at",
    "is_closed",
    "has_accepted_answer",
    "votes",
    "language",
}


def post_to_dict(post: Post) -> dict:
    return {
        "id": post.id,
        "title": post.title,
        "code_snippets": list(post.code_snippets),
        "created_at": post.created_at.isoformat(),
        "is_closed": post.is_closed,
        "has_accepted_answer": post.has_accepted_answer,
        "votes": post.votes,
        "language": post.language,
    }


def post_from_dict(row: dict) -> Post:
    missing = _POST_FIELDS - row.keys()
    if missing:
        raise ValueError(f"missing fields: {sorted(missing)}")
    snippets = row["code_snippets"]
    if not isinstance(snippets, list) or not all(isinstance(s, str) for s in snippets):
        raise ValueError("code_snippets must be a list of strings")
    return Post(
        id=int(row["id"]),
        title=str(row["title"]),
        code_snippets=list(snippets),
        created_at=datetime.fromisoformat(row["created_at"]),
        is_closed=bool(row["is_closed"]),
        has_accepted_answer=bool(row["has_accepted_answer"]),
        votes=int(row["votes"]),
        language=str(row["language"]),
    )


def read_posts(path: str | Path, stats: ReadStats | None = None) -> Iterator[Post]:
    """Posts from a JSONL file; malformed rows are counted and skipped."""
    own = stats if stats is not None else ReadStats()
    for row in read_jsonl(path, own):
        try:
            yield post_from_dict(row)
        except (ValueError, TypeError) as exc:
            own.read -= 1
            own.skipped += 1
            log.warning("%s: skipping malformed post record (%s)", path, exc)


# -- candidate pools -------------------------------------------------------

def pool_to_dict(pool: CandidatePool) -> dict:
    cfg = pool.config
    return {
        "input": list(pool.input),
        "candidates": [list(c) for c in pool.candidates],
        "candidate_strings": [" ".join(c) for c in pool.candidates],
        "config": {
            "top_p": cfg.top_p,
            "temperature": cfg.temperature,
            "num_samples": cfg.num_samples,
            "max_length": cfg.max_length,
            "seed": cfg.seed,
        },
        "meta": dict(pool.meta),
    }


def pool_from_dict(row: dict) -> CandidatePool:
    cfg = row["config"]
    return CandidatePool(
        input=list(row["input"]),
        candidates=[list(c) for c in row["candidates"]],
        config=SamplingConfig(
            top_p=cfg["top_p"],
            temperature=cfg["temperature"],
            num_samples=cfg["num_samples"],
            max_length=cfg["max_length"],
            seed=cfg["seed"],
        ),
        meta=dict(row.get("meta", {})),
    )


# -- selections -------------------------------------------------------------

def selection_to_dict(
    meta: dict,
    titles: list[str],
    strategy: str,
    indices: list[int] | None = None,
    diagnostics: dict | None = None,
) -> dict:
    row = {"titles": titles, "strategy": strategy}
    for key in ("id", "reference", "language"):
        if key in meta:
            row[key] = meta[key]
    if indices is not None:
        row["indices"] = indices
    if diagnostics is not None:
        row["diagnostics"] = diagnostics
    return row
