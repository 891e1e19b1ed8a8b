"""Command-line pipeline: exit codes, artifacts, overrides, determinism."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from triplex.cli import main
from triplex.prompting import PromptVariant


def out_dir_of(config_path: Path) -> Path:
    return Path(json.loads(config_path.read_text(encoding="utf-8"))["output_dir"])


# ---------------------------------------------------------------------------
# configuration errors
# ---------------------------------------------------------------------------


def test_missing_config_file_is_fatal(tmp_path, capsys):
    rc = main(["ingest", "--config", str(tmp_path / "absent.json")])
    assert rc == 2
    assert "config file not found" in capsys.readouterr().err


def test_invalid_json_config_is_fatal(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["ingest", "--config", str(bad)]) == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_missing_corpus_dir_is_fatal_and_names_the_path(config_file, tmp_path, capsys):
    missing = tmp_path / "no-corpus-here"
    config = config_file(corpus={"source_dir": str(missing)})
    assert main(["ingest", "--config", str(config)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_unknown_variant_is_rejected_listing_choices(config_file, capsys):
    config = config_file()
    with pytest.raises(SystemExit) as excinfo:
        main(["extract", "--config", str(config), "--variant", "two-shot"])
    assert excinfo.value.code == 2
    stderr = capsys.readouterr().err
    assert "two-shot" in stderr
    for name in ("zero-shot", "one-shot", "few-shot", "negative-examples"):
        assert name in stderr


def test_extract_before_ingest_is_fatal(config_file, capsys):
    config = config_file()
    assert main(["extract", "--config", str(config)]) == 2
    assert "corpus cache not found" in capsys.readouterr().err


def test_eval_without_runs_is_fatal(config_file, capsys):
    config = config_file()
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["eval", "--config", str(config)]) == 2
    assert "no runs found" in capsys.readouterr().err


def test_report_before_eval_is_fatal(config_file, capsys):
    config = config_file()
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["extract", "--config", str(config), "--variant", "zero-shot"]) == 0
    assert main(["report", "--config", str(config)]) == 2
    assert "eval report not found" in capsys.readouterr().err


def test_sample_rejects_all_variants(config_file, capsys):
    config = config_file()
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["extract", "--config", str(config)]) == 0
    assert main(["sample", "--config", str(config), "--variant", "all"]) == 2
    assert "single --variant" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


def test_ingest_writes_corpus_cache(config_file, capsys):
    config = config_file()
    assert main(["ingest", "--config", str(config)]) == 0
    stdout = capsys.readouterr().out
    assert "3 documents, 0 load errors" in stdout
    cache = out_dir_of(config) / "corpus.jsonl"
    assert cache.is_file()
    assert len(cache.read_text(encoding="utf-8").splitlines()) == 3


def test_ingest_rerun_is_byte_identical(config_file):
    config = config_file()
    cache = out_dir_of(config) / "corpus.jsonl"
    assert main(["ingest", "--config", str(config)]) == 0
    first = cache.read_bytes()
    assert main(["ingest", "--config", str(config)]) == 0
    assert cache.read_bytes() == first


def test_ingest_with_unparseable_file_partially_succeeds(
    config_file, corpus_with_errors_dir, capsys
):
    config = config_file(corpus={"source_dir": str(corpus_with_errors_dir)})
    rc = main(["ingest", "--config", str(config)])
    captured = capsys.readouterr()
    assert rc == 1
    assert "2 documents, 1 load errors" in captured.out
    assert "truncated.xml" in captured.err
    assert (out_dir_of(config) / "corpus.jsonl").is_file()


# ---------------------------------------------------------------------------
# extract / eval / report / sample
# ---------------------------------------------------------------------------


def test_extract_single_variant_writes_one_run(config_file):
    config = config_file()
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["extract", "--config", str(config), "--variant", "few-shot"]) == 0
    runs = out_dir_of(config) / "runs"
    assert sorted(p.name for p in runs.glob("*.jsonl")) == ["few-shot.jsonl"]
    assert (runs / "few-shot.stats.json").is_file()


def test_extract_all_variants_writes_four_runs(config_file):
    config = config_file()
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["extract", "--config", str(config), "--variant", "all"]) == 0
    runs = out_dir_of(config) / "runs"
    assert sorted(p.name for p in runs.glob("*.jsonl")) == sorted(
        f"{v.value}.jsonl" for v in PromptVariant
    )


def test_eval_report_structure(config_file):
    config = config_file()
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["extract", "--config", str(config)]) == 0
    assert main(["eval", "--config", str(config)]) == 0
    report = json.loads((out_dir_of(config) / "eval_report.json").read_text(encoding="utf-8"))
    header = report["header"]
    assert header["recall_denominator"] == "full gold set size"
    assert header["embedding_model"] == "mock (hashed character trigrams)"
    assert header["gold_size"] == 100
    assert header["seed"] == 42
    assert header["semantic_threshold"] == 0.75
    assert set(report["variants"]) == {v.value for v in PromptVariant}
    for entry in report["variants"].values():
        for mode in ("exact", "partial", "semantic"):
            for key in ("precision", "recall", "f1", "pairs"):
                assert key in entry[mode]
        assert 0.0 <= entry["redundancy"] <= 1.0
        assert 0.0 <= entry["jsd_to_gold"] <= 1.0
        assert 0.0 <= entry["coverage"] <= 1.0
        assert entry["n_predicted"] >= 0


def test_report_writes_bundle(config_file):
    config = config_file()
    for command in (["ingest"], ["extract"], ["eval"], ["report"]):
        assert main(command + ["--config", str(config)]) == 0
    report_dir = out_dir_of(config) / "report"
    names = sorted(p.name for p in report_dir.iterdir())
    assert names == [
        "freq_few-shot.svg",
        "freq_negative-examples.svg",
        "freq_one-shot.svg",
        "freq_zero-shot.svg",
        "heatmap.svg",
        "metrics.csv",
        "metrics.txt",
        "report.json",
    ]


def test_sample_is_deterministic_and_capped(config_file):
    config = config_file(eval={"sample_size": 10})
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["extract", "--config", str(config), "--variant", "zero-shot"]) == 0
    assert main(["sample", "--config", str(config), "--variant", "zero-shot"]) == 0
    sample_path = out_dir_of(config) / "annotation_sample.csv"
    first = sample_path.read_bytes()
    rows = first.decode("utf-8").strip().splitlines()
    assert len(rows) == 11  # header + sample_size rows (run has >10 triples)
    assert main(["sample", "--config", str(config), "--variant", "zero-shot"]) == 0
    assert sample_path.read_bytes() == first


def test_sample_missing_run_is_fatal(config_file, capsys):
    config = config_file()
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["sample", "--config", str(config), "--variant", "few-shot"]) == 2
    assert "run file not found" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# run-all and overrides
# ---------------------------------------------------------------------------


def test_run_all_produces_full_artifact_tree(config_file):
    config = config_file()
    assert main(["run-all", "--config", str(config)]) == 0
    out = out_dir_of(config)
    assert (out / "corpus.jsonl").is_file()
    assert len(list((out / "runs").glob("*.jsonl"))) == 4
    assert (out / "eval_report.json").is_file()
    assert len(list((out / "report").iterdir())) == 8


def test_run_all_propagates_partial_failures(config_file, corpus_with_errors_dir):
    config = config_file(corpus={"source_dir": str(corpus_with_errors_dir)})
    assert main(["run-all", "--config", str(config)]) == 1


def test_seed_override_changes_results_and_is_recorded(config_file, tmp_path):
    config = config_file()
    out_a, out_b, out_c = (str(tmp_path / name) for name in ("a", "b", "c"))
    assert main(["run-all", "--config", str(config), "--out", out_a]) == 0
    assert main(["run-all", "--config", str(config), "--out", out_b, "--seed", "7"]) == 0
    assert main(["run-all", "--config", str(config), "--out", out_c, "--seed", "7"]) == 0
    report_b = json.loads((Path(out_b) / "eval_report.json").read_text(encoding="utf-8"))
    assert report_b["header"]["seed"] == 7
    run = "runs/zero-shot.jsonl"
    assert (Path(out_a) / run).read_bytes() != (Path(out_b) / run).read_bytes()
    assert (Path(out_b) / run).read_bytes() == (Path(out_c) / run).read_bytes()


def test_out_override_redirects_artifacts(config_file, tmp_path):
    config = config_file()
    override = tmp_path / "elsewhere"
    assert main(["ingest", "--config", str(config), "--out", str(override)]) == 0
    assert (override / "corpus.jsonl").is_file()
    assert not (out_dir_of(config) / "corpus.jsonl").exists()


def test_artifacts_contain_no_absolute_output_paths(config_file):
    config = config_file()
    assert main(["run-all", "--config", str(config)]) == 0
    out = out_dir_of(config)
    for path in sorted(out.rglob("*")):
        if path.is_file():
            assert str(out).encode("utf-8") not in path.read_bytes(), path
