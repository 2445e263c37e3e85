import json
import subprocess
import sys

import pytest

from dupescan.cli import main
from dupescan.config import CONFIG_ENV, PipelineConfig
from dupescan.lsh import ConfigurationError

from conftest import rec


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--size", "200", "--near-duplicate-rate", "0.2",
                 "--simultaneous-rate", "0.02", "--bad-transfer-rate", "0.2",
                 "--published-duplicates", "2", "--seed", "3",
                 "--out", str(d / "c.jsonl"), "--truth", str(d / "t.json")]) == 0
    return d / "c.jsonl"


@pytest.fixture(autouse=True)
def no_env_config(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def test_synth_writes_truth(corpus_file):
    truth = json.loads((corpus_file.parent / "t.json").read_text())
    assert truth["duplicate_relationships"] == 40
    assert len(corpus_file.read_text().splitlines()) == 200


@pytest.mark.parametrize("argv, check", [
    (["pairs"], lambda t: t.startswith("id_a,id_b,jaccard,estimated\n") and t.count("\n") > 30),
    (["pairs", "--format", "jsonl"], lambda t: "jaccard" in t),
    (["simultaneous"], lambda t: t.count("\n") >= 2),
    (["published-dups"], lambda t: t.count("\n") == 2),
    (["journeys", "--format", "dot"], lambda t: t.startswith("digraph journeys {") and "color=red" in t),
    (["journeys"], lambda t: "bad_transfer_steps" in t),
    (["stats", "--format", "json"], lambda t: json.loads(t)["total_manuscripts"] == 200),
    (["stats"], lambda t: "manuscripts" in t),
    (["recommend", "--from-journal", "J0001", "--min-support", "0"], lambda t: "J0001" in t),
])
def test_report_subcommands(corpus_file, tmp_path, argv, check):
    out = tmp_path / "o.txt"
    assert main(argv[:1] + [str(corpus_file)] + argv[1:] + ["-o", str(out)]) == 0
    assert check(out.read_text())


def test_ingest_and_query_snapshot(corpus_file, tmp_path, capsys):
    snap = tmp_path / "i.snap"
    assert main(["ingest", str(corpus_file), "--snapshot", str(snap)]) == 0
    assert "200 records loaded" in capsys.readouterr().out
    first = json.loads(corpus_file.read_text().splitlines()[0])
    first["id"] = "PROBE"
    probes = tmp_path / "p.jsonl"
    probes.write_text(json.dumps(first) + "\n")
    out = tmp_path / "hits.jsonl"
    assert main(["query", str(probes), "--snapshot", str(snap), "-o", str(out)]) == 0
    hits = [json.loads(x) for x in out.read_text().splitlines()]
    assert hits and all(h["probe"] == "PROBE" for h in hits)
    assert any(h["jaccard"] == 1.0 for h in hits)


def test_run_writes_directory(corpus_file, tmp_path, capsys):
    assert main(["run", str(corpus_file), "--out-dir", str(tmp_path / "o"), "--threads", "2"]) == 0
    assert (tmp_path / "o" / "manifest.json").exists()
    assert "outputs written" in capsys.readouterr().out


def test_exit_code_validation(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({"id": "x"}) + "\n")
    assert main(["ingest", str(bad)]) == 1
    assert main(["pairs", str(tmp_path / "missing.jsonl")]) == 1
    dup = tmp_path / "dup.jsonl"
    line = json.dumps(rec("A", "J1", "2020-01-01").to_dict())
    dup.write_text(line + "\n" + line + "\n")
    assert main(["pairs", str(dup)]) == 1
    assert main(["pairs", str(dup), "--skip-duplicate-ids"]) == 0
    snap = tmp_path / "junk.snap"
    snap.write_bytes(b"junk")
    assert main(["query", str(bad), "--snapshot", str(snap)]) == 1


def test_exit_code_config(corpus_file, tmp_path, monkeypatch, capsys):
    assert main(["pairs", str(corpus_file), "--bands", "10"]) == 2
    assert main(["pairs", str(corpus_file), "--threshold", "1.5"]) == 2
    assert main(["synth", "--size", "10", "--near-duplicate-rate", "2", "--out", str(tmp_path / "a"),
                 "--truth", str(tmp_path / "b")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["pairs", str(corpus_file), "--rows", "eight"])
    assert info.value.code == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    assert main(["pairs", str(corpus_file)]) == 2


def test_env_config_and_flag_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"threshold": 0.5, "bands": 32, "rows": 4}))
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    c = PipelineConfig.load({"threshold": 0.9, "seed": None})
    assert (c.threshold, c.bands, c.rows) == (0.9, 32, 4)
    assert c.seed == PipelineConfig().seed
    with pytest.raises(ConfigurationError):
        PipelineConfig.load({"rows": 8})


def test_env_threshold_changes_cli_output(corpus_file, tmp_path, monkeypatch):
    strict, loose = tmp_path / "s.csv", tmp_path / "l.csv"
    assert main(["pairs", str(corpus_file), "-o", str(strict)]) == 0
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"threshold": 0.99}))
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    assert main(["pairs", str(corpus_file), "-o", str(loose)]) == 0
    assert len(loose.read_text().splitlines()) < len(strict.read_text().splitlines())
    assert main(["pairs", str(corpus_file), "--threshold", "0.8", "-o", str(loose)]) == 0
    assert loose.read_text() == strict.read_text()


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "dupescan", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "synth" in out.stdout
