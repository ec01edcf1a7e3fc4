from __future__ import annotations

import json

import pytest

from cybersick.cli import main
from cybersick.data import parse_sessions
from cybersick.evaluation import ExperimentGrid


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "corpus.jsonl"
    code = main(["synth", "--games", "race:3,flight:3", "--seed", "7", "--out", str(path)])
    assert code == 0
    return path


def test_synth_writes_corpus_and_sidecar(corpus_path):
    # the latent-risk sidecar rides along by default
    sessions = parse_sessions(corpus_path.read_bytes())
    assert len(sessions) == 6
    sidecar = (corpus_path.parent / (corpus_path.name + ".risk.csv")).read_text()
    assert sidecar.splitlines()[0] == "session_id,timestamp,risk,latent_level"
    assert len(sidecar.strip().splitlines()) == 1 + sum(len(s.frames) for s in sessions)


def test_synth_deterministic(tmp_path, corpus_path):
    again = tmp_path / "again.jsonl"
    assert main(["synth", "--games", "race:3,flight:3", "--seed", "7", "--out", str(again)]) == 0
    assert again.read_bytes() == corpus_path.read_bytes()


def test_ingest_reports_and_converts(tmp_path, corpus_path, capsys):
    assert main(["ingest", "--data", str(corpus_path)]) == 0
    out = capsys.readouterr().out
    assert "sessions: 6" in out

    csv_path = tmp_path / "flat.csv"
    assert main(["ingest", "--data", str(corpus_path), "--out", str(csv_path), "--to", "csv"]) == 0
    recovered = parse_sessions(csv_path.read_bytes(), fmt="csv")
    assert len(recovered) == 6


def test_train_predict_round_trip(tmp_path, corpus_path, capsys):
    model_path = tmp_path / "model.cst"
    assert main(
        [
            "train", "--data", str(corpus_path), "--learner", "tree",
            "--scenario", "C", "--scheme", "binary", "--seed", "3",
            "--out", str(model_path),
        ]
    ) == 0
    assert model_path.read_bytes().startswith(b"csmodel 1\nkind tree\n")

    pred_path = tmp_path / "predictions.csv"
    assert main(
        ["predict", "--model", str(model_path), "--data", str(corpus_path), "--out", str(pred_path)]
    ) == 0
    lines = pred_path.read_text().strip().splitlines()
    assert lines[0] == "session_id,timestamp,predicted_class,p_0,p_1"
    sessions = parse_sessions(corpus_path.read_bytes())
    assert len(lines) - 1 == sum(len(s.frames) for s in sessions)


def test_train_attach_ranking(tmp_path, corpus_path):
    model_path = tmp_path / "ranked.cst"
    assert main(
        [
            "train", "--data", str(corpus_path), "--learner", "stump",
            "--scheme", "binary", "--attach-ranking", "--out", str(model_path),
        ]
    ) == 0
    assert b"\nranking " in model_path.read_bytes()


def test_eval_grid_json(tmp_path, corpus_path, capsys):
    grid_path = tmp_path / "grid.json"
    assert main(
        [
            "eval", "--data", str(corpus_path), "--learners", "stump,tree",
            "--k", "3", "--seed", "7", "--out", str(grid_path),
        ]
    ) == 0
    grid = ExperimentGrid.from_dict(json.loads(grid_path.read_text()))
    assert len(grid.reports) == 3 * 2 * 2
    out = capsys.readouterr().out
    assert "binary classification" in out
    assert "%" in out


def test_eval_determinism(tmp_path, corpus_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["eval", "--data", str(corpus_path), "--learners", "stump", "--k", "3", "--seed", "9"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_rank_outputs_full_table(tmp_path, corpus_path, capsys):
    out_path = tmp_path / "ranking.json"
    assert main(
        [
            "rank", "--data", str(corpus_path), "--learner", "stump",
            "--scenario", "A", "--scheme", "binary", "--out", str(out_path),
        ]
    ) == 0
    obj = json.loads(out_path.read_text())
    assert len(obj["entries"]) == 34
    table = capsys.readouterr().out
    assert "baseline accuracy" in table


def test_advise_from_ranking(tmp_path, corpus_path, capsys):
    ranking_path = tmp_path / "ranking.json"
    main(["rank", "--data", str(corpus_path), "--learner", "stump", "--out", str(ranking_path)])
    capsys.readouterr()
    assert main(
        ["advise", "--ranking", str(ranking_path), "--probs", "0.2,0.8", "--top", "5"]
    ) == 0
    suggestions = json.loads(capsys.readouterr().out)
    assert isinstance(suggestions, list)


def test_advise_explicit_causes(capsys):
    assert main(["advise", "--causes", "Exposure", "--probs", "0.2,0.8"]) == 0
    suggestions = json.loads(capsys.readouterr().out)
    assert suggestions == [
        {"cause": "Exposure", "strategies": ["Interval"], "evidence": []}
    ]


def test_advise_matrix_export(tmp_path):
    out = tmp_path / "matrix.csv"
    assert main(["advise", "--export-matrix", str(out)]) == 0
    assert out.read_text().startswith("strategy,Locomotion")


def test_viz_writes_svg_and_csv(tmp_path, corpus_path):
    svg = tmp_path / "heat.svg"
    csv = tmp_path / "heat.csv"
    assert main(
        ["viz", "--data", str(corpus_path), "--out", str(svg), "--csv", str(csv),
         "--resolution", "32x32"]
    ) == 0
    assert svg.read_bytes().startswith(b"<svg")
    assert csv.read_text().splitlines()[1].startswith("ix,iz,")


def test_viz_facet(tmp_path, corpus_path):
    base = tmp_path / "facet"
    assert main(
        ["viz", "--data", str(corpus_path), "--out", str(base), "--facet", "gender"]
    ) == 0
    import glob

    assert glob.glob(str(base) + ".*.svg")


def test_missing_input_is_runtime_error(tmp_path, capsys):
    code = main(["ingest", "--data", str(tmp_path / "nope.jsonl")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--bogus"])
    assert exc.value.code == 2
