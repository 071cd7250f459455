from __future__ import annotations

import json

import pytest

from guideline_verifier.cli import AXIOMS_ENV, main


def test_relate_complete_redundancy(reference_path, capsys):
    assert main(["relate", str(reference_path), "ref-comp-a", "ref-comp-b"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "complete_redundancy"


def test_relate_json(reference_path, capsys):
    assert main(["relate", str(reference_path), "ref-local-a", "ref-local-b", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["label"] == "local_conflict"
    assert payload["evidence"]["witness_model"]["HAS(cond.symptomatic_hypotension)"] is True


def test_validate_ok(reference_path, capsys):
    assert main(["validate", str(reference_path), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out) == {"valid": True, "predicates": 11, "rules": 10, "axioms": 1}


def test_validate_malformed_is_line_anchored(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "meta": {},\n  "predicates": [\n    {"id": "x", "operator": "HAS", "entity": "cond.x"},\n  ]\n}\n')
    assert main(["validate", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "bad.json" in err and "line 5" in err


def test_validate_schema_error_is_line_anchored(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(
        '{\n  "predicates": [\n    {"id": "x", "operator": "HAS", "entity": "cond.x"}\n  ],\n'
        '  "rules": [\n    {"id": "r", "condition": "x", "action": [{"subject": "med.y", "permission": "NOPE"}],\n'
        '     "source": "G"}\n  ]\n}\n'
    )
    assert main(["validate", str(bad)]) == 1
    assert "line 6" in capsys.readouterr().err


def test_missing_file_names_path(capsys):
    assert main(["validate", "/no/such/doc.json"]) == 1
    assert "/no/such/doc.json" in capsys.readouterr().err


def test_usage_errors(capsys, reference_path):
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["relate", str(reference_path)]) == 2
    assert main(["scan", str(reference_path), "--format", "xml"]) == 2
    assert main(["scan", str(reference_path), "--bands", "64", "--rows", "4"]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_rule_is_an_error(reference_path, capsys):
    assert main(["relate", str(reference_path), "ref-comp-a", "nope"]) == 1
    assert "nope" in capsys.readouterr().err


def test_gen_noise_k_range(tmp_path, reference_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"sample_id": "1", "rule_a": "ref-comp-a", "rule_b": "ref-comp-b", "label": "complete_redundancy"}\n')
    assert main(["bench", "gen-noise", str(reference_path), str(gold), "--k", "9", "--seed", "1"]) == 2
    assert main(["bench", "gen-noise", str(reference_path), str(gold), "--k", "-1", "--seed", "1"]) == 2
    # every reference rule has an edge, so no isolated rules are available
    assert main(["bench", "gen-noise", str(reference_path), str(gold), "--k", "1", "--seed", "1"]) == 1
    assert main(["bench", "gen-noise", str(reference_path), str(gold), "--k", "0", "--seed", "1", "-o", str(tmp_path / "n.json")]) == 0


def test_bench_pipeline(tmp_path, capsys):
    doc, gold = tmp_path / "doc.json", tmp_path / "gold.jsonl"
    noise, preds = tmp_path / "noise.json", tmp_path / "preds.csv"
    assert main(["bench", "gen-synthetic", str(doc), str(gold)]) == 0
    assert main(["bench", "gen-noise", str(doc), str(gold), "--k", "4", "--seed", "2", "-o", str(noise)]) == 0
    assert main(["bench", "run", str(doc), str(noise), "-o", str(preds)]) == 0
    assert main(["bench", "score", str(gold), str(preds), "--format", "json"]) == 0
    table = json.loads(capsys.readouterr().out)
    assert table["n"] == 226
    for row in [*table["per_class"].values(), *table["coarse"].values()]:
        assert row["precision"] == row["recall"] == row["f1"] == 1.0
    assert main(["bench", "score", str(gold), str(preds)]) == 0
    text = capsys.readouterr().out
    assert "conflict" in text and "1.000" in text


def test_bench_score_bad_predictions(tmp_path, capsys):
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"sample_id": "1", "rule_a": "a", "rule_b": "b", "label": "none"}\n')
    preds = tmp_path / "p.csv"
    preds.write_text("sample_id,label\n1,kinda_conflict\n")
    assert main(["bench", "score", str(gold), str(preds)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_export_smtlib_all_queries(reference_path, capsys):
    assert main(["export", "smtlib", str(reference_path), "ref-impl-a", "ref-impl-b"]) == 0
    out = capsys.readouterr().out
    assert out.count("(check-sat)") == 3
    # the fixture axiom mentions an enum, which is exported as an Int
    assert out.count("(set-logic QF_LIRA)") == 3
    for q in ("forward", "backward", "overlap"):
        assert f"; query {q}:" in out
    assert main(["export", "smtlib", str(reference_path), "ref-impl-a", "ref-impl-b", "--no-axioms", "--query", "overlap"]) == 0
    out = capsys.readouterr().out
    assert out.count("(check-sat)") == 1 and "(set-logic QF_LRA)" in out


def test_graph_command(reference_path, capsys):
    assert main(["graph", str(reference_path), "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["edges"]) == 5 and payload["isolated"] == []
    assert set(payload["degrees"].values()) == {1}


def test_axioms_from_env(tmp_path, reference_path, capsys, monkeypatch):
    raw = json.loads(reference_path.read_text())
    raw["axioms"] = []
    doc = tmp_path / "doc.json"
    doc.write_text(json.dumps(raw))
    assert main(["relate", str(doc), "ref-cont-a", "ref-cont-b"]) == 0
    assert capsys.readouterr().out.startswith("none")
    axioms = tmp_path / "axioms.json"
    axioms.write_text(json.dumps({"axioms": [{"if": "has_ckd", "then": "cv_risk_high"}]}))
    monkeypatch.setenv(AXIOMS_ENV, str(axioms))
    assert main(["relate", str(doc), "ref-cont-a", "ref-cont-b"]) == 0
    assert capsys.readouterr().out.startswith("contained_redundancy")
    # explicit flag wins over the environment
    empty = tmp_path / "empty.json"
    empty.write_text("[]")
    assert main(["relate", str(doc), "ref-cont-a", "ref-cont-b", "--axioms", str(empty)]) == 0
    assert capsys.readouterr().out.startswith("none")


def test_bad_axiom_file(tmp_path, reference_path, capsys):
    axioms = tmp_path / "axioms.json"
    axioms.write_text(json.dumps([{"if": "no_such_predicate", "then": "has_ckd"}]))
    assert main(["validate", str(reference_path), "--axioms", str(axioms)]) == 1
    assert "extra_axioms[0]" in capsys.readouterr().err


@pytest.mark.parametrize("fmt", ["json", "text"])
def test_scan_output_file(tmp_path, reference_path, fmt):
    out = tmp_path / f"report.{fmt}"
    assert main(["scan", str(reference_path), "--format", fmt, "-o", str(out)]) == 0
    assert out.stat().st_size > 0
