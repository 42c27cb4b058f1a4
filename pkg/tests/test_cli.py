"""Command-line pipeline: ingest -> extract -> train -> evaluate -> serve."""

import io
import json
import os

import numpy as np
import pytest

from ragate.cli import main, read_features_tsv, write_features_tsv
from ragate.features import default_schema

RARE = [("Q1", "zork"), ("Q2", "quux blim"), ("Q3", "vexal"), ("Q4", "prindle vast")]
POPULAR = [("Q5", "london"), ("Q6", "paris"), ("Q7", "blue whale"), ("Q8", "mount tall")]

TEMPLATES = [
    "what is the capital of {a}",
    "how many people live in {a}",
    "who founded {a}",
    "when was {a} established",
    "is {a} bigger than a pond",
]


def build_world(root):
    """A small planted-rule corpus: rare entities need retrieval."""
    root.mkdir(parents=True, exist_ok=True)

    def tsv(name, header, rows):
        path = root / name
        lines = [header] + [("\t".join(str(c) for c in row)) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    entities = [(kg, alias, False) for kg, alias in RARE] + [(kg, alias, True) for kg, alias in POPULAR]
    tsv("triples.tsv", "kg_id\tsubject_count\tobject_count", [(kg, 500 if pop else 2, 300 if pop else 1) for kg, _, pop in entities])
    tsv("pageviews.tsv", "kg_id\tviews", [(kg, 100000 if pop else 10) for kg, _, pop in entities])
    tsv("knowledgability.tsv", "kg_id\tscore", [(kg, 95 if pop else 5) for kg, _, pop in entities])
    tsv("gazetteer.tsv", "alias\tkg_id", [(alias, kg) for kg, alias, _ in entities])

    freq_rows = []
    for kg, alias, pop in entities:
        for word in alias.split():
            freq_rows.append((word, 5000 if pop else 3))
    for word in ("what", "is", "the", "capital", "of", "how", "many", "people", "live",
                 "in", "who", "founded", "when", "was", "established", "bigger", "than",
                 "a", "pond"):
        freq_rows.append((word, 800))
    freq_rows.append(("__total__", 1_000_000))
    tsv("frequency.tsv", "term\tcount", freq_rows)

    records = []
    for i in range(60):
        kg, alias, popular = entities[i % len(entities)]
        question = TEMPLATES[i % len(TEMPLATES)].format(a=alias)
        gold = f"fact {i}"
        records.append(
            {
                "id": f"q{i:03d}",
                "question": question,
                "gold_answers": [gold],
                "answer_without_retrieval": gold if popular else "i do not know",
                "answer_with_retrieval": gold,
                "contexts": [f"notes about {alias} say {gold}", "unrelated filler text"],
            }
        )
    dataset = root / "dataset.jsonl"
    dataset.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")

    (root / "grids.yaml").write_text(
        "logreg:\n  C: [1.0]\n  max_iter: [300]\ndtree:\n  max_depth: [3]\n", encoding="utf-8"
    )

    (root / "config.yaml").write_text(
        "\n".join(
            [
                "stores:",
                "  triples: triples.tsv",
                "  pageviews: pageviews.tsv",
                "  frequency: frequency.tsv",
                "  knowledgability: knowledgability.tsv",
                "gazetteer: gazetteer.tsv",
                "models:",
                "  qtype: builtin",
                "  complexity: builtin",
                "grids: grids.yaml",
                "seed: 3",
                "threshold: 0.5",
                "val_size: 24",
                "importance_repeats: 2",
                "cost_model:",
                "  default: {pflops_per_llm_call: 0.0181}",
                "  methods:",
                "    gate: {pflops_feature_pipeline: 0.00002}",
                "references:",
                "  - {method: flare, in_accuracy: 0.42, lm_calls: 2.0, retrieval_calls: 1.0, mean_pflops: 0.09}",
                "",
            ]
        ),
        encoding="utf-8",
    )
    return root


@pytest.fixture(scope="module")
def world(tmp_path_factory):
    root = build_world(tmp_path_factory.mktemp("world"))
    cfg = str(root / "config.yaml")
    dataset = str(root / "dataset.jsonl")
    out = root / "out"
    assert main(["extract", "--config", cfg, "--dataset", dataset, "--out", str(out)]) == 0
    features = str(out / "features.tsv")
    assert main(["train", "--config", cfg, "--dataset", dataset, "--features", features, "--out", str(out)]) == 0
    return {"root": root, "config": cfg, "dataset": dataset, "out": out, "features": features,
            "model": str(out / "model.json")}


# ---------------------------------------------------------------------------
# Feature table format
# ---------------------------------------------------------------------------


class TestFeaturesTsv:
    def test_round_trip(self, tmp_path):
        schema = default_schema()
        rng = np.random.default_rng(0)
        matrix = np.abs(rng.normal(size=(3, len(schema))))
        # keep unit-interval and simplex groups honest is not required here:
        # the table format is schema-agnostic and stores raw floats
        path = tmp_path / "f.tsv"
        write_features_tsv(path, ["a", "b", "c"], schema, matrix)
        ids, entries, loaded = read_features_tsv(path)
        assert ids == ["a", "b", "c"]
        assert entries == schema.entries
        assert np.array_equal(loaded, matrix)

    def test_missing_groups_comment_defaults(self, tmp_path):
        path = tmp_path / "f.tsv"
        path.write_text("id\tx\ty\nr0\t1.0\t2.0\n", encoding="utf-8")
        ids, entries, matrix = read_features_tsv(path)
        assert entries == (("x", "feature"), ("y", "feature"))
        assert matrix.tolist() == [[1.0, 2.0]]

    def test_header_must_lead_with_id(self, tmp_path):
        path = tmp_path / "f.tsv"
        path.write_text("name\tx\nr0\t1.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match=r"f\.tsv:1"):
            read_features_tsv(path)

    def test_ragged_row_rejected_with_line(self, tmp_path):
        path = tmp_path / "f.tsv"
        path.write_text("id\tx\ty\nr0\t1.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match=r"f\.tsv:2"):
            read_features_tsv(path)

    def test_bad_float_rejected_with_line(self, tmp_path):
        path = tmp_path / "f.tsv"
        path.write_text("id\tx\nr0\tabc\n", encoding="utf-8")
        with pytest.raises(ValueError, match=r"f\.tsv:2"):
            read_features_tsv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "f.tsv"
        path.write_text("# only a comment\n", encoding="utf-8")
        with pytest.raises(ValueError, match="no header"):
            read_features_tsv(path)

    def test_group_count_mismatch_rejected(self, tmp_path):
        path = tmp_path / "f.tsv"
        path.write_text("# groups: g1\nid\tx\ty\nr0\t1.0\t2.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="groups comment"):
            read_features_tsv(path)

    def test_floats_round_trip_exactly(self, tmp_path):
        schema = default_schema(groups=("graph",))
        values = np.array([[0.1, 1 / 3, np.pi, np.e, 1e-300, 123456.789]])
        path = tmp_path / "f.tsv"
        write_features_tsv(path, ["r"], schema, values)
        _, _, loaded = read_features_tsv(path)
        assert np.array_equal(loaded, values)


# ---------------------------------------------------------------------------
# Subcommands on the planted-rule world
# ---------------------------------------------------------------------------


class TestIngest:
    def test_reports_store_sizes(self, world, capsys):
        assert main(["ingest", "--config", world["config"]]) == 0
        out = capsys.readouterr().out
        assert "triples: 8 entities" in out
        assert "pageviews: 8 entities" in out
        assert "total tokens 1000000" in out
        assert "knowledgability: 8 entities" in out
        assert "gazetteer: 8 aliases" in out

    def test_missing_config_fails(self, tmp_path, capsys):
        rc = main(["ingest", "--config", str(tmp_path / "nope.yaml")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestExtract:
    def test_writes_full_table(self, world):
        ids, entries, matrix = read_features_tsv(world["features"])
        assert len(ids) == 60
        assert matrix.shape == (60, 28)
        assert entries == default_schema().entries

    def test_deterministic_bytes(self, world, tmp_path, capsys):
        rc = main(["extract", "--config", world["config"], "--dataset", world["dataset"], "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "features.tsv").read_bytes() == open(world["features"], "rb").read()

    def test_missing_dataset_fails(self, world, capsys):
        rc = main(["extract", "--config", world["config"], "--dataset", "/no/such.jsonl", "--out", "/tmp"])
        assert rc == 1
        assert "/no/such.jsonl" in capsys.readouterr().err


class TestTrain:
    def test_artifacts_exist(self, world):
        assert os.path.exists(world["model"])
        report = (world["out"] / "training_report.md").read_text(encoding="utf-8")
        assert "master seed: 3" in report
        assert "per-setting seeds: [3, 4, 5]" in report
        assert "validation rows: 24" in report
        assert "| logreg |" in report and "| dtree |" in report

    def test_model_mentions_two_families(self, world):
        payload = json.loads(open(world["model"], encoding="utf-8").read())
        assert payload["kind"] == "retrieval-gate"
        assert len(payload["members"]) == 2
        assert len(payload["feature_names"]) == 28

    def test_retrain_same_seed_is_byte_identical(self, world, tmp_path, capsys):
        rc = main(
            ["train", "--config", world["config"], "--dataset", world["dataset"],
             "--features", world["features"], "--out", str(tmp_path), "--seed", "3"]
        )
        assert rc == 0
        assert (tmp_path / "model.json").read_bytes() == open(world["model"], "rb").read()

    def test_seed_flag_changes_split(self, world, tmp_path, capsys):
        rc = main(
            ["train", "--config", world["config"], "--dataset", world["dataset"],
             "--features", world["features"], "--out", str(tmp_path), "--seed", "99"]
        )
        assert rc == 0
        report = (tmp_path / "training_report.md").read_text(encoding="utf-8")
        assert "master seed: 99" in report

    def test_features_for_missing_ids_fail(self, world, tmp_path, capsys):
        ids, entries, matrix = read_features_tsv(world["features"])
        schema = default_schema()
        trimmed = tmp_path / "short.tsv"
        write_features_tsv(trimmed, ids[:50], schema, matrix[:50])
        rc = main(
            ["train", "--config", world["config"], "--dataset", world["dataset"],
             "--features", str(trimmed), "--out", str(tmp_path)]
        )
        assert rc == 1
        assert "q050" in capsys.readouterr().err


class TestEvaluate:
    def _run(self, world, out, extra=()):
        return main(
            ["evaluate", "--config", world["config"], "--dataset", world["dataset"],
             "--features", world["features"], "--model", world["model"], "--out", str(out), *extra]
        )

    def test_emits_reports_and_analyses(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path) == 0
        stdout = capsys.readouterr().out
        assert "| Method | InAcc (%) |" in stdout
        for name in ("gate", "never_rag", "always_rag", "ideal"):
            assert name in stdout
        for artifact in ("report.md", "report.csv", "importance.csv", "correlation.csv", "run_meta.json"):
            assert (tmp_path / artifact).exists()

    def test_csv_format_flag(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path, ("--format", "csv")) == 0
        stdout = capsys.readouterr().out
        assert stdout.startswith("method,in_accuracy,lm_calls,retrieval_calls,mean_pflops\n")

    def test_gate_cost_entry_applies(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path) == 0
        rows = (tmp_path / "report.csv").read_text(encoding="utf-8").splitlines()
        gate_row = next(r for r in rows if r.startswith("gate,"))
        assert gate_row.split(",")[4] == repr(0.0181 + 0.00002)
        never_row = next(r for r in rows if r.startswith("never_rag,"))
        assert never_row.split(",")[4] == repr(0.0181)

    def test_include_references(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path, ("--include-references",)) == 0
        assert "flare" in capsys.readouterr().out

    def test_references_absent_by_default(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path) == 0
        assert "flare" not in capsys.readouterr().out

    def test_threshold_zero_matches_always_rag_quality(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path, ("--threshold", "0.0")) == 0
        rows = (tmp_path / "report.csv").read_text(encoding="utf-8").splitlines()
        gate = next(r for r in rows if r.startswith("gate,")).split(",")
        always = next(r for r in rows if r.startswith("always_rag,")).split(",")
        assert gate[1] == always[1]  # in_accuracy
        assert gate[3] == always[3] == "1.0"  # retrieval_calls

    def test_importance_covers_every_feature(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path) == 0
        lines = (tmp_path / "importance.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "feature,score"
        assert len(lines) == 1 + 28
        scores = [float(line.split(",")[1]) for line in lines[1:]]
        assert scores == sorted(scores, reverse=True)
        assert {line.split(",")[0] for line in lines[1:]} == set(default_schema().names)

    def test_correlation_square_with_label(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path) == 0
        lines = (tmp_path / "correlation.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0].split(",")[1:] == list(default_schema().names) + ["label"]
        assert len(lines) == 1 + 29
        values = [float(v) for v in lines[1].split(",")[1:]]
        assert all(0.0 <= v <= 1.0 for v in values)

    def test_run_meta_records_inputs(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path) == 0
        meta = json.loads((tmp_path / "run_meta.json").read_text(encoding="utf-8"))
        assert meta["seed"] == 3
        assert meta["threshold"] == 0.5
        assert meta["dataset"]["records"] == 60
        assert len(meta["dataset"]["sha256"]) == 64
        assert set(meta["stores"]) == {"triples", "pageviews", "frequency", "knowledgability"}
        assert meta["cost_model"]["methods"]["gate"]["pflops_feature_pipeline"] == 0.00002
        assert len(meta["schema"]) == 28

    def test_rerun_is_byte_identical(self, world, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self._run(world, a) == 0
        assert self._run(world, b) == 0
        for name in ("report.md", "report.csv", "importance.csv", "correlation.csv", "run_meta.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_feature_row_order_is_irrelevant(self, world, tmp_path, capsys):
        ids, entries, matrix = read_features_tsv(world["features"])
        order = np.random.default_rng(1).permutation(len(ids))
        shuffled = tmp_path / "shuffled.tsv"
        write_features_tsv(shuffled, [ids[i] for i in order], default_schema(), matrix[order])
        out_a, out_b = tmp_path / "orig", tmp_path / "shuf"
        assert self._run(world, out_a) == 0
        rc = main(
            ["evaluate", "--config", world["config"], "--dataset", world["dataset"],
             "--features", str(shuffled), "--model", world["model"], "--out", str(out_b)]
        )
        assert rc == 0
        for name in ("report.csv", "importance.csv", "correlation.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    def test_gate_beats_baselines_on_planted_world(self, world, tmp_path, capsys):
        assert self._run(world, tmp_path) == 0
        rows = (tmp_path / "report.csv").read_text(encoding="utf-8").splitlines()
        table = {r.split(",")[0]: [float(v) for v in r.split(",")[1:]] for r in rows[1:]}
        assert table["gate"][0] >= max(table["never_rag"][0], table["always_rag"][0])
        assert table["ideal"][0] >= table["gate"][0]

    def test_wrong_schema_fails(self, world, tmp_path, capsys):
        ids, entries, matrix = read_features_tsv(world["features"])
        schema = default_schema(include_context_length=False)
        narrowed = tmp_path / "narrow.tsv"
        write_features_tsv(narrowed, ids, schema, matrix[:, :27])
        rc = main(
            ["evaluate", "--config", world["config"], "--dataset", world["dataset"],
             "--features", str(narrowed), "--model", world["model"], "--out", str(tmp_path)]
        )
        assert rc == 1
        assert "schema" in capsys.readouterr().err


class TestServe:
    def _serve(self, world, payload, monkeypatch, capsys, extra=()):
        monkeypatch.setattr("sys.stdin", io.StringIO(payload))
        rc = main(["serve", "--config", world["config"], "--model", world["model"], *extra])
        assert rc == 0
        out = capsys.readouterr().out.strip()
        return [json.loads(line) for line in out.splitlines()] if out else []

    def test_scores_requests(self, world, monkeypatch, capsys):
        payload = (
            '{"id": "a", "question": "what is the capital of zork"}\n'
            "\n"
            '{"id": "b", "question": "what is the capital of london"}\n'
        )
        responses = self._serve(world, payload, monkeypatch, capsys)
        assert [r["id"] for r in responses] == ["a", "b"]
        for r in responses:
            assert isinstance(r["retrieve"], bool)
            assert 0.0 <= r["score"] <= 1.0
            assert set(r["features"]) == {
                "graph", "popularity", "frequency", "knowledgability", "qtype", "complexity", "context",
            }
        assert responses[0]["retrieve"] is True  # rare entity
        assert responses[1]["retrieve"] is False  # popular entity

    def test_malformed_lines_report_errors(self, world, monkeypatch, capsys):
        payload = (
            "{nope\n"
            '{"question": 5}\n'
            '["not", "an", "object"]\n'
            '{"question": "ok", "feature_overrides": {"context_length": true}}\n'
        )
        responses = self._serve(world, payload, monkeypatch, capsys)
        assert [r["error"]["line"] for r in responses] == [1, 2, 3, 4]
        assert "invalid JSON" in responses[0]["error"]["reason"]
        assert "question" in responses[1]["error"]["reason"]
        assert "object" in responses[2]["error"]["reason"]
        assert "number" in responses[3]["error"]["reason"]

    def test_override_enters_the_vector(self, world, monkeypatch, capsys):
        payload = '{"question": "who founded paris", "feature_overrides": {"context_relevance_max": 0.5}}\n'
        (response,) = self._serve(world, payload, monkeypatch, capsys)
        assert response["features"]["context"]["context_relevance_max"] == 0.5

    def test_unknown_override_is_an_error_line(self, world, monkeypatch, capsys):
        payload = '{"question": "who founded paris", "feature_overrides": {"bogus_feature": 1.0}}\n'
        (response,) = self._serve(world, payload, monkeypatch, capsys)
        assert "bogus_feature" in response["error"]["reason"]

    def test_default_id_is_line_number(self, world, monkeypatch, capsys):
        payload = '\n{"question": "who founded paris"}\n'
        (response,) = self._serve(world, payload, monkeypatch, capsys)
        assert response["id"] == "line-2"

    def test_threshold_flag(self, world, monkeypatch, capsys):
        payload = '{"id": "a", "question": "what is the capital of london"}\n'
        (low,) = self._serve(world, payload, monkeypatch, capsys, extra=("--threshold", "0.0"))
        assert low["retrieve"] is True

    def test_responses_are_deterministic(self, world, monkeypatch, capsys):
        payload = '{"id": "a", "question": "how many people live in quux blim"}\n'
        (first,) = self._serve(world, payload, monkeypatch, capsys)
        (second,) = self._serve(world, payload, monkeypatch, capsys)
        assert first == second
