import json
from types import SimpleNamespace

import pytest

from titlegen import records
from titlegen.cli import main as cli_main

from .conftest import write_raw_corpus


def run(*argv):
    assert cli_main([str(a) for a in argv]) == 0


def fails(*argv):
    return cli_main([str(a) for a in argv]) == 1


def read_rows(path):
    return list(records.read_jsonl(path))


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One full prepare -> train-lm -> generate -> rank -> evaluate run."""
    mp = pytest.MonkeyPatch()
    mp.delenv("TITLEGEN_SEED", raising=False)
    root = tmp_path_factory.mktemp("pipeline")
    raw = root / "raw.jsonl"
    write_raw_corpus(raw)
    splits = root / "splits"
    run(
        "prepare", "--input", raw, "--out-dir", splits,
        "--val-count", 15, "--test-count", 15,
    )
    model = root / "model.json"
    run("train-lm", "--train", splits / "train.jsonl", "--out", model)
    pools = root / "pools.jsonl"
    run(
        "generate", "--model", model, "--input", splits / "test.jsonl",
        "--out", pools, "--limit", 8, "--num-samples", 30,
        "--max-length", 12, "--temperature", "0.5",
    )
    selections = root / "mmns.jsonl"
    run("rank", "--pools", pools, "--out", selections)
    report = root / "report.json"
    run("evaluate", "--selections", selections, "--out", report)
    yield SimpleNamespace(
        root=root, raw=raw, splits=splits, model=model,
        pools=pools, selections=selections, report=report,
    )
    mp.undo()


class TestPrepare:
    def test_manifest_matches_files(self, pipeline):
        manifest = json.loads((pipeline.splits / "manifest.json").read_text())
        assert manifest["seed"] == 0
        assert manifest["records_skipped"] == 0
        for name in ("train", "validation", "test"):
            rows = read_rows(pipeline.splits / f"{name}.jsonl")
            assert len(rows) == manifest["totals"][name]
            per_lang = sum(
                manifest["languages"][lang][name] for lang in manifest["languages"]
            )
            assert per_lang == len(rows)
        assert set(manifest["languages"]) == {"python", "java"}

    def test_split_sizes(self, pipeline):
        manifest = json.loads((pipeline.splits / "manifest.json").read_text())
        for lang in ("python", "java"):
            assert manifest["languages"][lang]["validation"] == 15
            assert manifest["languages"][lang]["test"] == 15

    def test_chronological_boundary(self, pipeline):
        train = list(records.read_posts(pipeline.splits / "train.jsonl"))
        held = list(records.read_posts(pipeline.splits / "validation.jsonl"))
        held += list(records.read_posts(pipeline.splits / "test.jsonl"))
        for lang in ("python", "java"):
            newest = max(p.created_at for p in train if p.language == lang)
            assert all(p.created_at >= newest for p in held if p.language == lang)

    def test_language_subdirs(self, pipeline):
        rows = read_rows(pipeline.splits / "python" / "test.jsonl")
        assert rows and all(r["language"] == "python" for r in rows)

    def test_rerun_is_byte_identical(self, pipeline, tmp_path):
        out = tmp_path / "again"
        run(
            "prepare", "--input", pipeline.raw, "--out-dir", out,
            "--val-count", 15, "--test-count", 15,
        )
        for rel in ("train.jsonl", "validation.jsonl", "test.jsonl", "manifest.json"):
            assert (out / rel).read_bytes() == (pipeline.splits / rel).read_bytes()

    def test_missing_input_fails_without_output(self, tmp_path):
        out = tmp_path / "nope"
        assert fails("prepare", "--input", tmp_path / "absent.jsonl", "--out-dir", out)
        assert not out.exists()


class TestTrainLm:
    def test_model_loads_and_generates(self, pipeline):
        from titlegen import NGramLM, SamplingConfig, decode_candidates

        model = NGramLM.load(pipeline.model)
        assert model.order == 4
        code = model.vocabulary.encode(["fn", "call", "k0"])
        pool = decode_candidates(model, code, SamplingConfig(num_samples=3, seed=1))
        assert len(pool.candidates) == 3

    def test_missing_train_fails(self, tmp_path):
        assert fails(
            "train-lm", "--train", tmp_path / "absent.jsonl", "--out", tmp_path / "m.json"
        )
        assert not (tmp_path / "m.json").exists()


class TestGenerate:
    def test_pool_rows(self, pipeline):
        rows = read_rows(pipeline.pools)
        assert len(rows) == 8
        for pos, row in enumerate(rows):
            assert row["config"]["top_p"] == 0.8  # builtin default
            assert row["config"]["num_samples"] == 30
            assert row["config"]["seed"] == pos  # run seed + input position
            assert len(row["candidates"]) == 30
            assert all(len(c) <= 12 for c in row["candidates"])
            assert {"id", "reference", "language"} <= row["meta"].keys()

    def test_rerun_is_byte_identical(self, pipeline, tmp_path):
        out = tmp_path / "pools.jsonl"
        run(
            "generate", "--model", pipeline.model,
            "--input", pipeline.splits / "test.jsonl", "--out", out,
            "--limit", 8, "--num-samples", 30,
            "--max-length", 12, "--temperature", "0.5",
        )
        assert out.read_bytes() == pipeline.pools.read_bytes()

    def test_defaults_applied_when_flags_omitted(self, pipeline, tmp_path):
        out = tmp_path / "one.jsonl"
        run(
            "generate", "--model", pipeline.model,
            "--input", pipeline.splits / "test.jsonl", "--out", out, "--limit", 1,
        )
        (row,) = read_rows(out)
        assert row["config"]["num_samples"] == 200
        assert row["config"]["max_length"] == 48
        assert len(row["candidates"]) == 200

    def test_beam_strategy(self, pipeline, tmp_path):
        out = tmp_path / "beam.jsonl"
        run(
            "generate", "--model", pipeline.model,
            "--input", pipeline.splits / "test.jsonl", "--out", out,
            "--limit", 2, "--strategy", "beam", "--beam-size", 5,
            "--max-length", 12,
        )
        rows = read_rows(out)
        assert len(rows) == 2
        for row in rows:
            strings = row["candidate_strings"]
            assert 1 <= len(strings) <= 5
            assert len(set(strings)) == len(strings)  # beams are distinct
            assert row["config"]["top_p"] == 1.0

    def test_missing_model_fails(self, pipeline, tmp_path):
        out = tmp_path / "x.jsonl"
        assert fails(
            "generate", "--model", tmp_path / "absent.json",
            "--input", pipeline.splits / "test.jsonl", "--out", out,
        )
        assert not out.exists()


class TestRank:
    def test_mmns_rows(self, pipeline):
        rows = read_rows(pipeline.selections)
        assert len(rows) == 8
        for row in rows:
            assert row["strategy"] == "mmns"
            assert 1 <= len(row["titles"]) <= 3
            assert len(row["indices"]) == len(row["titles"])
            assert "initial_consistency" in row["diagnostics"]
            assert {"id", "reference", "language"} <= row.keys()

    def test_titles_come_from_pool(self, pipeline):
        pools = {r["meta"]["id"]: r for r in read_rows(pipeline.pools)}
        for row in read_rows(pipeline.selections):
            pool = pools[row["id"]]
            for idx, title in zip(row["indices"], row["titles"]):
                assert pool["candidate_strings"][idx] == title

    def test_rns_takes_pool_prefix(self, pipeline, tmp_path):
        out = tmp_path / "rns.jsonl"
        run("rank", "--pools", pipeline.pools, "--out", out, "--strategy", "rns", "--k", 3)
        pools = read_rows(pipeline.pools)
        for pool, row in zip(pools, read_rows(out)):
            assert row["strategy"] == "rns"
            assert row["indices"] == [0, 1, 2]
            assert row["titles"] == pool["candidate_strings"][:3]

    def test_rerun_is_byte_identical(self, pipeline, tmp_path):
        out = tmp_path / "again.jsonl"
        run("rank", "--pools", pipeline.pools, "--out", out)
        assert out.read_bytes() == pipeline.selections.read_bytes()


class TestEvaluate:
    def test_report_shape(self, pipeline):
        report = json.loads(pipeline.report.read_text())
        assert report["k_sweep"] == [1, 3, 5]
        assert report["num_examples"] == 8
        for k in ("1", "3", "5"):
            assert set(report["aggregate"][k]) == {"bleus4", "rouge1", "rouge2", "rougeL"}
            assert len(report["per_example"][k]) == 8

    def test_aggregate_monotone_in_k(self, pipeline):
        report = json.loads(pipeline.report.read_text())
        for name in ("bleus4", "rouge1", "rouge2", "rougeL"):
            values = [report["aggregate"][k][name] for k in ("1", "3", "5")]
            assert values[0] <= values[1] + 1e-9
            assert values[1] <= values[2] + 1e-9

    def test_group_by_language(self, pipeline, tmp_path):
        out = tmp_path / "by-lang.json"
        run(
            "evaluate", "--selections", pipeline.selections, "--out", out,
            "--group-by-language",
        )
        report = json.loads(out.read_text())
        assert set(report["by_language"]) <= {"python", "java"}
        for tables in report["by_language"].values():
            assert set(tables) == {"1", "3", "5"}

    def test_references_joined_by_id(self, pipeline, tmp_path):
        stripped = tmp_path / "no-ref.jsonl"
        rows = read_rows(pipeline.selections)
        for row in rows:
            del row["reference"]
        records.write_jsonl(stripped, rows)
        out = tmp_path / "joined.json"
        run(
            "evaluate", "--selections", stripped, "--out", out,
            "--references", pipeline.splits / "test.jsonl",
        )
        assert json.loads(out.read_text()) == json.loads(pipeline.report.read_text())

    def test_missing_reference_fails(self, pipeline, tmp_path):
        bad = tmp_path / "bad.jsonl"
        records.write_jsonl(bad, [{"titles": ["a b"], "id": 123456}])
        out = tmp_path / "r.json"
        assert fails("evaluate", "--selections", bad, "--out", out)
        assert not out.exists()

    def test_bad_sweep_fails(self, pipeline, tmp_path):
        assert fails(
            "evaluate", "--selections", pipeline.selections,
            "--out", tmp_path / "r.json", "--k-sweep", "0,3",
        )

    def test_sweep_sorted_and_deduped(self, pipeline, tmp_path):
        out = tmp_path / "r.json"
        run(
            "evaluate", "--selections", pipeline.selections, "--out", out,
            "--k-sweep", "5,1,5,3",
        )
        assert json.loads(out.read_text())["k_sweep"] == [1, 3, 5]


class TestRetrieve:
    def test_build_query_and_roundtrip(self, pipeline, tmp_path):
        out = tmp_path / "bm25.jsonl"
        index_path = tmp_path / "index.json"
        run(
            "retrieve", "--input", pipeline.splits / "test.jsonl",
            "--train", pipeline.splits / "train.jsonl",
            "--out", out, "--index-out", index_path, "--k", 3,
        )
        rows = read_rows(out)
        assert len(rows) == 30  # both languages' test posts
        for row in rows:
            assert row["strategy"] == "bm25"
            assert len(row["titles"]) == len(row["scores"]) <= 3
            assert row["scores"] == sorted(row["scores"], reverse=True)
        again = tmp_path / "bm25-again.jsonl"
        run(
            "retrieve", "--input", pipeline.splits / "test.jsonl",
            "--index", index_path, "--out", again, "--k", 3,
        )
        assert again.read_bytes() == out.read_bytes()

    def test_requires_train_or_index(self, pipeline, tmp_path):
        assert fails(
            "retrieve", "--input", pipeline.splits / "test.jsonl",
            "--out", tmp_path / "x.jsonl",
        )


class TestCompareStrategies:
    def test_report_shape(self, pipeline, tmp_path):
        out = tmp_path / "compare.json"
        run(
            "compare-strategies", "--model", pipeline.model,
            "--input", pipeline.splits / "test.jsonl", "--out", out,
            "--limit", 4, "--num-samples", 20, "--max-length", 12,
            "--temperature", "0.5", "--beam-size", 5, "--k-sweep", "1,3",
        )
        report = json.loads(out.read_text())
        assert report["k_sweep"] == [1, 3]
        assert report["num_inputs"] == 4
        for name in ("bleus4", "rouge1", "rouge2", "rougeL"):
            for strategy in ("bs", "rns", "mmns"):
                table = report["metrics"][name][strategy]
                assert set(table) == {"1", "3"}
                assert table["1"] <= table["3"] + 1e-9
        for strategy in ("bs", "rns", "mmns"):
            assert set(report["diversity"][strategy]) == {"1", "3"}
            assert report["diversity"][strategy]["1"] == 0.0  # single title


class TestPrecedence:
    def test_config_file_supplies_defaults(self, pipeline, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"k": 1}), encoding="utf-8")
        out = tmp_path / "k1.jsonl"
        run("rank", "--pools", pipeline.pools, "--out", out, "--config", cfg)
        assert all(len(r["titles"]) == 1 for r in read_rows(out))

    def test_cli_beats_config(self, pipeline, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"k": 1}), encoding="utf-8")
        out = tmp_path / "k2.jsonl"
        run("rank", "--pools", pipeline.pools, "--out", out, "--config", cfg, "--k", 2)
        assert all(len(r["titles"]) == 2 for r in read_rows(out))

    def test_env_seed_used_when_unset(self, pipeline, tmp_path, monkeypatch):
        monkeypatch.setenv("TITLEGEN_SEED", "99")
        out = tmp_path / "env"
        run(
            "prepare", "--input", pipeline.raw, "--out-dir", out,
            "--val-count", 15, "--test-count", 15,
        )
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 99

    def test_cli_seed_beats_env(self, pipeline, tmp_path, monkeypatch):
        monkeypatch.setenv("TITLEGEN_SEED", "99")
        out = tmp_path / "cli"
        run(
            "prepare", "--input", pipeline.raw, "--out-dir", out, "--seed", 7,
            "--val-count", 15, "--test-count", 15,
        )
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 7

    def test_missing_config_fails(self, pipeline, tmp_path):
        assert fails(
            "rank", "--pools", pipeline.pools, "--out", tmp_path / "x.jsonl",
            "--config", tmp_path / "absent.json",
        )
