"""Command-line pipeline: prepare -> train-lm -> generate -> rank ->
evaluate, plus the retrieval baseline and the strategy comparison.

Stages communicate through files, so externally generated candidate
pools can enter at the ``rank`` step. Every subcommand is deterministic
given its flags and seed: rerunning with identical inputs reproduces
identical bytes.

Flag values resolve in order: command line, then ``--config`` JSON file,
then the TITLEGEN_SEED environment variable (seed only), then built-in
defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import data, decode, metrics, rank, records, retrieve
from .lm import NGramLM, train_ngram_lm
from .text import Vocabulary, tokenize

log = logging.getLogger("titlegen")

DEFAULTS = {
    "seed": 0,
    # Contexts only reach the code region when order >= 4 (the [NEXT] and
    # start markers occupy two slots), so 4 is the smallest order whose
    # titles actually condition on the input.
    "order": 4,
    "code_limit": 512,
    "title_limit": 48,
    "top_p": 0.8,
    "temperature": 1.0,
    "num_samples": 200,
    "max_length": 48,
    "beam_size": 20,
    "k": 3,
    "k_sweep": "1,3,5",
    "val_count": 5000,
    "test_count": 5000,
    "fraction": 0.1,
}


class _Resolver:
    """Applies the CLI > config file > environment > builtin precedence."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = {}
        if getattr(args, "config", None):
            path = Path(args.config)
            if not path.is_file():
                raise FileNotFoundError(f"config file not found: {path}")
            loaded = json.loads(path.read_text(encoding="utf-8"))
            if not isinstance(loaded, dict):
                raise ValueError(f"config file must hold a JSON object: {path}")
            self.config = loaded

    def get(self, name: str, cast=None):
        value = getattr(self.args, name, None)
        if value is None:
            value = self.config.get(name)
        if value is None and name == "seed":
            env = os.environ.get("TITLEGEN_SEED")
            if env is not None:
                value = env
        if value is None:
            value = DEFAULTS[name]
        return cast(value) if cast is not None else value


def _require_files(*paths: str) -> None:
    for p in paths:
        if not Path(p).is_file():
            raise FileNotFoundError(f"input file not found: {p}")


def _parse_sweep(raw) -> list[int]:
    if isinstance(raw, str):
        parts = [p for p in raw.replace(",", " ").split() if p]
        values = [int(p) for p in parts]
    else:
        values = [int(v) for v in raw]
    if not values or any(v < 1 for v in values):
        raise ValueError(f"k sweep must be positive integers, got {raw!r}")
    return sorted(set(values))


def _post_meta(post: data.Post) -> dict:
    return {"id": post.id, "reference": post.title, "language": post.language}


def _code_tokens(post: data.Post, limit: int) -> list[str]:
    return tokenize(data.concat_snippets(post.code_snippets))[:limit]


# -- subcommands ------------------------------------------------------------

def cmd_prepare(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    _require_files(args.input)
    seed = res.get("seed", int)
    spec = data.SplitSpec(
        val_count=res.get("val_count", int),
        test_count=res.get("test_count", int),
        fraction=res.get("fraction", float),
    )
    stats = records.ReadStats()
    posts = list(data.filter_posts(records.read_posts(args.input, stats)))
    if not posts:
        raise ValueError("no posts survive filtering")
    train, validation, test = data.chronological_split(posts, spec, seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    splits = {"train": train, "validation": validation, "test": test}
    languages = sorted({p.language for p in posts})
    manifest: dict = {
        "seed": seed,
        "records_read": stats.read,
        "records_skipped": stats.skipped,
        "filtered_posts": len(posts),
        "languages": {},
    }
    for name, split in splits.items():
        records.write_jsonl(out_dir / f"{name}.jsonl", map(records.post_to_dict, split))
    for lang in languages:
        lang_dir = out_dir / lang
        lang_dir.mkdir(exist_ok=True)
        counts = {}
        for name, split in splits.items():
            rows = [p for p in split if p.language == lang]
            records.write_jsonl(lang_dir / f"{name}.jsonl", map(records.post_to_dict, rows))
            counts[name] = len(rows)
        counts["filtered"] = sum(counts.values())
        manifest["languages"][lang] = counts
    manifest["totals"] = {name: len(split) for name, split in splits.items()}
    records.write_json(out_dir / "manifest.json", manifest)
    log.info("prepare: %d train / %d validation / %d test", len(train), len(validation), len(test))
    return 0


def cmd_train_lm(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    _require_files(args.train)
    order = res.get("order", int)
    code_limit = res.get("code_limit", int)
    title_limit = res.get("title_limit", int)
    vocab = Vocabulary()
    pairs = []
    for post in records.read_posts(args.train):
        code = vocab.encode(_code_tokens(post, code_limit), grow=True)
        title = vocab.encode(tokenize(post.title)[:title_limit], grow=True)
        pairs.append((code, title))
    model = train_ngram_lm(pairs, order=order, vocab=vocab)
    model.save(args.out)
    log.info("train-lm: order=%d vocab=%d pairs=%d", order, len(vocab), len(pairs))
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    _require_files(args.model, args.input)
    model = NGramLM.load(args.model)
    seed = res.get("seed", int)
    code_limit = res.get("code_limit", int)
    max_length = res.get("max_length", int)
    posts = list(records.read_posts(args.input))
    if args.limit is not None:
        posts = posts[: args.limit]
    pools = []
    for pos, post in enumerate(posts):
        code = model.vocabulary.encode(_code_tokens(post, code_limit))
        row_seed = (seed + pos) % 2**64
        if args.strategy == "beam":
            beam_size = res.get("beam_size", int)
            seqs = decode.beam_search(
                model, code, beam_size=beam_size, k=beam_size, max_length=max_length
            )
            pool = decode.CandidatePool(
                input=model.vocabulary.decode(code),
                candidates=[model.vocabulary.decode(s) for s in seqs],
                config=decode.SamplingConfig(
                    top_p=1.0,
                    temperature=1.0,
                    num_samples=max(1, len(seqs)),
                    max_length=max_length,
                    seed=row_seed,
                ),
            )
        else:
            config = decode.SamplingConfig(
                top_p=res.get("top_p", float),
                temperature=res.get("temperature", float),
                num_samples=res.get("num_samples", int),
                max_length=max_length,
                seed=row_seed,
            )
            pool = decode.decode_candidates(model, code, config)
        pool.meta = _post_meta(post)
        pools.append(pool)
    records.write_jsonl(args.out, map(records.pool_to_dict, pools))
    log.info("generate: %d pools (%s)", len(pools), args.strategy)
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    _require_files(args.pools)
    k = res.get("k", int)
    short = 0
    rows = []
    for raw in records.read_jsonl(args.pools):
        pool = records.pool_from_dict(raw)
        if args.strategy == "rns":
            indices = list(range(min(k, len(pool.candidates))))
            diagnostics = None
        else:
            sel = rank.maximal_marginal_select(
                pool, rank.RankingConfig(k=k, dedup=not args.no_dedup)
            )
            indices = sel.indices
            diagnostics = {
                "initial_consistency": sel.initial_consistency,
                "marginals": sel.marginals,
            }
        if len(indices) < k:
            short += 1
        titles = [" ".join(pool.candidates[i]) for i in indices]
        rows.append(
            records.selection_to_dict(
                pool.meta, titles, args.strategy, indices=indices, diagnostics=diagnostics
            )
        )
    if short:
        log.warning("rank: %d pools had fewer than k=%d distinct candidates", short, k)
    records.write_jsonl(args.out, rows)
    log.info("rank: %d selections (%s, k=%d)", len(rows), args.strategy, k)
    return 0


def cmd_retrieve(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    _require_files(args.input)
    k = res.get("k", int)
    code_limit = res.get("code_limit", int)
    if args.index:
        _require_files(args.index)
        index = retrieve.BM25Index.load(args.index)
    else:
        if not args.train:
            raise ValueError("either --index or --train is required")
        _require_files(args.train)
        docs = [
            (post.id, _code_tokens(post, code_limit), post.title)
            for post in records.read_posts(args.train)
        ]
        index = retrieve.build_index(docs)
    if args.index_out:
        index.save(args.index_out)
    rows = []
    for post in records.read_posts(args.input):
        hits = retrieve.query(index, _code_tokens(post, code_limit), k)
        row = records.selection_to_dict(_post_meta(post), [t for t, _ in hits], "bm25")
        row["scores"] = [s for _, s in hits]
        rows.append(row)
    records.write_jsonl(args.out, rows)
    log.info("retrieve: %d queries against %d docs", len(rows), index.num_docs)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    _require_files(args.selections)
    sweep = _parse_sweep(res.get("k_sweep"))
    references = {}
    if args.references:
        _require_files(args.references)
        references = {p.id: p.title for p in records.read_posts(args.references)}
    examples = []
    for row in records.read_jsonl(args.selections):
        ref = row.get("reference")
        if ref is None:
            ref = references.get(row.get("id"))
        if ref is None:
            raise ValueError(
                f"no reference for selection id={row.get('id')!r}; pass --references"
            )
        examples.append(
            {
                "id": row.get("id"),
                "language": row.get("language"),
                "candidates": [tokenize(t) for t in row["titles"]],
                "reference": tokenize(ref),
            }
        )
    if not examples:
        raise ValueError("no selections to evaluate")
    report: dict = {
        "k_sweep": sweep,
        "num_examples": len(examples),
        "aggregate": {},
        "per_example": {},
    }
    by_language: dict[str, list] = {}
    if args.group_by_language:
        for ex in examples:
            by_language.setdefault(ex["language"] or "unknown", []).append(ex)
        report["by_language"] = {}
    for k in sweep:
        rep = metrics.build_report(
            [(ex["candidates"], ex["reference"]) for ex in examples],
            k,
            ids=[ex["id"] for ex in examples],
        )
        report["aggregate"][str(k)] = rep.means
        report["per_example"][str(k)] = rep.per_example
        if args.group_by_language:
            for lang, group in sorted(by_language.items()):
                lang_rep = metrics.build_report(
                    [(ex["candidates"], ex["reference"]) for ex in group], k
                )
                report["by_language"].setdefault(lang, {})[str(k)] = lang_rep.means
    records.write_json(args.out, report)
    log.info("evaluate: %d examples, k sweep %s", len(examples), sweep)
    return 0


def cmd_compare_strategies(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    _require_files(args.model, args.input)
    model = NGramLM.load(args.model)
    seed = res.get("seed", int)
    sweep = _parse_sweep(res.get("k_sweep"))
    kmax = sweep[-1]
    num_samples = res.get("num_samples", int)
    beam_size = res.get("beam_size", int)
    max_length = res.get("max_length", int)
    code_limit = res.get("code_limit", int)
    posts = list(records.read_posts(args.input))
    if args.limit is not None:
        posts = posts[: args.limit]
    if not posts:
        raise ValueError("no input posts")

    selections: dict[str, list[list[list[str]]]] = {"bs": [], "rns": [], "mmns": []}
    refs = []
    for pos, post in enumerate(posts):
        code = model.vocabulary.encode(_code_tokens(post, code_limit))
        refs.append(tokenize(post.title))
        config = decode.SamplingConfig(
            top_p=res.get("top_p", float),
            temperature=res.get("temperature", float),
            num_samples=num_samples,
            max_length=max_length,
            seed=(seed + pos) % 2**64,
        )
        pool = decode.decode_candidates(model, code, config)
        beam_k = min(beam_size, kmax)
        beams = decode.beam_search(
            model, code, beam_size=beam_size, k=beam_k, max_length=max_length
        )
        sel = rank.maximal_marginal_select(pool, rank.RankingConfig(k=kmax, dedup=True))
        selections["bs"].append([model.vocabulary.decode(s) for s in beams])
        selections["rns"].append(pool.candidates[:kmax])
        selections["mmns"].append([pool.candidates[i] for i in sel.indices])

    report: dict = {
        "k_sweep": sweep,
        "num_inputs": len(posts),
        "num_samples": num_samples,
        "beam_size": beam_size,
        "seed": seed,
        "metrics": {name: {s: {} for s in selections} for name in metrics.METRICS},
        "diversity": {s: {} for s in selections},
    }
    for strategy, rows in selections.items():
        for k in sweep:
            rep = metrics.build_report([(cands, ref) for cands, ref in zip(rows, refs)], k)
            for name in metrics.METRICS:
                report["metrics"][name][strategy][str(k)] = rep.means[name]
            diversity = [rank.mean_pairwise_relevance(cands[:k]) for cands in rows]
            report["diversity"][strategy][str(k)] = sum(diversity) / len(diversity)
    records.write_json(args.out, report)
    log.info("compare-strategies: %d inputs, k sweep %s", len(posts), sweep)
    return 0


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="titlegen",
        description="Diverse multi-candidate title generation and selection pipeline.",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file supplying flag defaults")
        p.add_argument("--seed", type=int, help="run seed (default: TITLEGEN_SEED or 0)")

    p = sub.add_parser("prepare", help="filter raw posts and write chronological splits")
    common(p)
    p.add_argument("--input", required=True, help="raw posts JSONL")
    p.add_argument("--out-dir", required=True, help="directory for split files + manifest")
    p.add_argument("--val-count", type=int, help="validation posts per language")
    p.add_argument("--test-count", type=int, help="test posts per language")
    p.add_argument("--fraction", type=float, help="val/test fraction for small languages")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train-lm", help="train the n-gram generator on a split")
    common(p)
    p.add_argument("--train", required=True, help="training posts JSONL")
    p.add_argument("--out", required=True, help="output model JSON path")
    p.add_argument("--order", type=int, help="n-gram order")
    p.add_argument("--code-limit", type=int, help="max code tokens per post")
    p.add_argument("--title-limit", type=int, help="max title tokens per post")
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("generate", help="sample candidate pools for input posts")
    common(p)
    p.add_argument("--model", required=True, help="model JSON from train-lm")
    p.add_argument("--input", required=True, help="input posts JSONL")
    p.add_argument("--out", required=True, help="output pools JSONL")
    p.add_argument("--strategy", choices=("sample", "beam"), default="sample")
    p.add_argument("--top-p", type=float, dest="top_p", help="nucleus threshold")
    p.add_argument("--temperature", type=float, help="softmax temperature")
    p.add_argument("--num-samples", type=int, dest="num_samples", help="candidates per input")
    p.add_argument("--max-length", type=int, dest="max_length", help="max title tokens")
    p.add_argument("--beam-size", type=int, dest="beam_size", help="beam width for --strategy beam")
    p.add_argument("--code-limit", type=int, help="max code tokens per post")
    p.add_argument("--limit", type=int, help="only process the first N inputs")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("rank", help="select K titles from each candidate pool")
    common(p)
    p.add_argument("--pools", required=True, help="pools JSONL from generate")
    p.add_argument("--out", required=True, help="output selections JSONL")
    p.add_argument("--k", type=int, help="titles to select per input")
    p.add_argument("--strategy", choices=("mmns", "rns"), default="mmns")
    p.add_argument("--no-dedup", action="store_true", help="keep exact duplicates eligible")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("retrieve", help="BM25 baseline: retrieve titles for input posts")
    common(p)
    p.add_argument("--input", required=True, help="query posts JSONL")
    p.add_argument("--out", required=True, help="output selections JSONL")
    p.add_argument("--train", help="training posts JSONL to index")
    p.add_argument("--index", help="load a saved index instead of building")
    p.add_argument("--index-out", help="save the built index here")
    p.add_argument("--k", type=int, help="titles to retrieve per query")
    p.add_argument("--code-limit", type=int, help="max code tokens per document/query")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("evaluate", help="score selections against references")
    common(p)
    p.add_argument("--selections", required=True, help="selections JSONL")
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--k-sweep", dest="k_sweep", help="comma-separated K values, e.g. 1,3,5")
    p.add_argument("--references", help="posts JSONL to join references by id")
    p.add_argument(
        "--group-by-language", action="store_true", help="add per-language aggregate tables"
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser(
        "compare-strategies", help="run BS vs RNS vs MMNS over a K sweep on one input set"
    )
    common(p)
    p.add_argument("--model", required=True, help="model JSON from train-lm")
    p.add_argument("--input", required=True, help="input posts JSONL")
    p.add_argument("--out", required=True, help="output report JSON")
    p.add_argument("--k-sweep", dest="k_sweep", help="comma-separated K values")
    p.add_argument("--top-p", type=float, dest="top_p", help="nucleus threshold")
    p.add_argument("--temperature", type=float, help="softmax temperature")
    p.add_argument("--num-samples", type=int, dest="num_samples", help="candidates per input")
    p.add_argument("--max-length", type=int, dest="max_length", help="max title tokens")
    p.add_argument("--beam-size", type=int, dest="beam_size", help="beam width for the BS arm")
    p.add_argument("--code-limit", type=int, help="max code tokens per post")
    p.add_argument("--limit", type=int, help="only process the first N inputs")
    p.set_defaults(func=cmd_compare_strategies)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"titlegen {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
