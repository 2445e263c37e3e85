import json
from itertools import combinations

import pytest

from dupescan.shingling import exact_jaccard, shingle
from dupescan.synth import InfeasibleSpecError, SynthSpec, generate_synthetic


def test_all_rates_zero():
    sc = generate_synthetic(SynthSpec(size=100, seed=1))
    assert len(sc.records) == 100
    t = sc.truth
    assert t["duplicate_pairs"] == [] and t["simultaneous_pairs"] == [] and t["bad_transfers"] == []
    assert t["duplicate_relationships"] == 0


def test_planted_duplicate_bookkeeping():
    sc = generate_synthetic(SynthSpec(size=1000, near_duplicate_rate=0.25, seed=2))
    assert sc.truth["duplicate_relationships"] == 250
    assert len(sc.truth["earlier_duplicate_ids"]) == 250
    assert sc.truth["transfers"] == 250
    sizes = [len(c["members"]) for c in sc.truth["clusters"]]
    assert sum(m - 1 for m in sizes) == 250
    assert len({r.id for r in sc.records}) == 1000


def test_same_seed_same_files(tmp_path):
    spec = SynthSpec(size=300, near_duplicate_rate=0.2, simultaneous_rate=0.02,
                     bad_transfer_rate=0.05, published_duplicates=2, seed=9)
    a, b = generate_synthetic(spec), generate_synthetic(spec)
    a.write(tmp_path / "a.jsonl", tmp_path / "a.json")
    b.write(tmp_path / "b.jsonl", tmp_path / "b.json")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    c = generate_synthetic(SynthSpec(**{**spec.__dict__, "seed": 10}))
    assert c.to_jsonl() != a.to_jsonl()


def test_planted_pairs_are_above_threshold_and_structured():
    spec = SynthSpec(size=400, near_duplicate_rate=0.25, simultaneous_rate=0.05,
                     bad_transfer_rate=0.1, published_duplicates=5, seed=4)
    sc = generate_synthetic(spec)
    by_id = {r.id: r for r in sc.records}
    sets = {r.id: shingle(r) for r in sc.records}
    for a, b in sc.truth["duplicate_pairs"]:
        assert exact_jaccard(sets[a], sets[b]) >= spec.threshold
    assert len(sc.truth["published_duplicate_pairs"]) == 5
    for a, b in sc.truth["simultaneous_pairs"]:
        ra, rb = sorted((by_id[a], by_id[b]), key=lambda r: r.submitted_at)
        assert ra.journal_id != rb.journal_id and rb.submitted_at <= ra.decided_at
    for bt in sc.truth["bad_transfers"]:
        members = sc.truth["clusters"][bt["cluster"]]["members"]
        journals = [by_id[m].journal_id for m in members]
        assert journals[0] == journals[2] != journals[1]
    rates = sc.truth["rates"]
    assert rates["simultaneous_manuscript_fraction"] == 0.05
    assert rates["earlier_duplicate_fraction"] == 0.25


def test_unrelated_records_stay_apart():
    sc = generate_synthetic(SynthSpec(size=150, seed=3))
    sets = [shingle(r) for r in sc.records]
    assert max(exact_jaccard(a, b) for a, b in combinations(sets, 2)) < 0.1


@pytest.mark.parametrize("spec", [
    SynthSpec(size=100, near_duplicate_rate=0.2, replace_fraction=0.2),
    SynthSpec(size=100, near_duplicate_rate=0.01, simultaneous_rate=0.2),
    SynthSpec(size=100, near_duplicate_rate=0.9),
    SynthSpec(size=100, near_duplicate_rate=1.5),
    SynthSpec(size=100, journals=2),
])
def test_infeasible_specs_fail_before_emission(spec):
    with pytest.raises(InfeasibleSpecError):
        generate_synthetic(spec)


def test_truth_is_json_serializable():
    sc = generate_synthetic(SynthSpec(size=50, near_duplicate_rate=0.2, seed=0))
    assert json.loads(sc.truth_json())["spec"]["size"] == 50
