"""Command-line entry points; thin orchestration over the library modules.

Every stochastic subcommand takes --seed; exit code 0 on success, 1 with a
one-line diagnostic on runtime failure, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import advisor, data, evaluation, heatmap, simulate, trees
from .records import encode_frame_vector
from .registry import Game, LabelScheme, Scenario
from .server import ScoringService, serve_forever


def _parse_counts(games: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for part in games.split(","):
        name, _, value = part.partition(":")
        game = Game(name.strip())
        counts[game.value] = int(value)
    return counts


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _write(path: str, payload: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(payload)
        return
    with open(path, "wb") as fh:
        fh.write(payload)


def _load_sessions(args) -> list:
    return data.parse_sessions(_read(args.data), fmt=args.format)


def _dataset_for(args, sessions) -> data.Dataset:
    return data.build_dataset(sessions, LabelScheme(args.scheme), Scenario(args.scenario))


def cmd_synth(args) -> int:
    params = simulate.SimParams(
        risk_weights=tuple(float(w) for w in args.weights.split(",")),
        report_prob=args.report_prob,
    )
    counts = _parse_counts(args.games if args.games else args.rows)
    unit = "sessions" if args.games else "rows"
    sessions, traces = simulate.generate_corpus(counts, seed=args.seed, params=params, unit=unit)
    if args.format == "jsonl":
        _write(args.out, data.sessions_to_jsonl(sessions))
    else:
        dataset = data.assemble_features(sessions, LabelScheme(args.scheme))
        _write(args.out, data.dataset_to_csv(dataset))
    risk_out = args.risk_out or (args.out + ".risk.csv" if args.out != "-" else None)
    if risk_out:
        _write(risk_out, simulate.risk_trace_csv(sessions, traces))
    print(f"wrote {len(sessions)} sessions ({sum(len(s.frames) for s in sessions)} frames) to {args.out}")
    return 0


def cmd_ingest(args) -> int:
    sessions = _load_sessions(args)
    frames = sum(len(s.frames) for s in sessions)
    reports = sum(
        1 for s in sessions for f in s.frames if f.reported_discomfort is not None
    )
    print(f"sessions: {len(sessions)}  frames: {frames}  reports: {reports}")
    if args.out:
        if args.to == "jsonl":
            _write(args.out, data.sessions_to_jsonl(sessions))
        else:
            dataset = data.assemble_features(sessions, LabelScheme(args.scheme))
            _write(args.out, data.dataset_to_csv(dataset))
        print(f"rewrote as {args.to} to {args.out}")
    return 0


def cmd_train(args) -> int:
    sessions = _load_sessions(args)
    dataset = _dataset_for(args, sessions)
    model = trees.make_learner(args.learner, seed=args.seed, n_classes=dataset.scheme.n_classes)
    model.fit(dataset.X, dataset.y)
    ranking = None
    if args.attach_ranking:
        ranking = evaluation.rank_attributes(args.learner, dataset, seed=args.seed)
    trees.save_model(model, args.out, ranking=ranking)
    print(f"trained {args.learner} on {dataset.n_rows} rows -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    sessions = _load_sessions(args)
    learners = tuple(name.strip() for name in args.learners.split(","))
    scenarios = tuple(Scenario(s) for s in args.scenarios.split(","))
    schemes = tuple(LabelScheme(s) for s in args.schemes.split(","))
    grid = evaluation.run_experiment_grid(
        sessions, learners, k=args.k, seed=args.seed, scenarios=scenarios, schemes=schemes
    )
    if args.out:
        _write(args.out, grid.to_json())
    for table in heatmap.emit_grid_tables(grid, scenarios=scenarios).values():
        print(table)
    return 0


def cmd_rank(args) -> int:
    sessions = _load_sessions(args)
    dataset = _dataset_for(args, sessions)
    ranking = evaluation.rank_attributes(args.learner, dataset, seed=args.seed)
    if args.out:
        _write(args.out, json.dumps(ranking.to_dict(), separators=(",", ":")).encode("utf-8"))
    print(f"baseline accuracy: {ranking.baseline_accuracy:.4f}")
    print(f"{'rank':>4}  {'attribute':<22} {'acc w/o':>8} {'impact':>8}")
    for i, entry in enumerate(ranking.entries, start=1):
        print(f"{i:>4}  {entry.name:<22} {entry.accuracy_without:>8.4f} {entry.impact:>+8.4f}")
    return 0


def cmd_predict(args) -> int:
    model, _ = trees.load_model(args.model)
    sessions = _load_sessions(args)
    lines = ["session_id,timestamp,predicted_class," + ",".join(f"p_{i}" for i in range(model.n_classes_))]
    for session in sessions:
        for frame in session.frames:
            vector = encode_frame_vector(session.profile, session.pre_questionnaire, session.config, frame)
            dist = trees.predict_distribution(model, vector)
            predicted = int(np.argmax(dist))
            lines.append(
                f"{session.session_id},{frame.timestamp!r},{predicted},"
                + ",".join(repr(float(p)) for p in dist)
            )
    payload = ("\n".join(lines) + "\n").encode("utf-8")
    _write(args.out, payload)
    if args.out != "-":
        print(f"wrote {len(lines) - 1} predictions to {args.out}")
    return 0


def cmd_advise(args) -> int:
    if args.export_matrix:
        _write(args.export_matrix, advisor.builtin_matrix().to_csv())
        print(f"wrote cause/strategy matrix to {args.export_matrix}")
        return 0
    cause_map = advisor.load_cause_map(args.mapping) if args.mapping else None
    if args.ranking:
        obj = json.loads(_read(args.ranking))
        ranking = evaluation.AttributeRanking(
            baseline_accuracy=float(obj["baseline_accuracy"]),
            entries=tuple(
                evaluation.RankEntry(e["name"], float(e["accuracy_without"]), float(e["impact"]))
                for e in obj["entries"]
            ),
        )
        causes = advisor.infer_causes(ranking, None, top_n=args.top, cause_map=cause_map)
    else:
        causes = [advisor.cause_from_label(label) for label in args.causes.split(",")]
    distribution = [float(p) for p in args.probs.split(",")]
    suggestions = advisor.advise(distribution, causes, threshold=args.threshold)
    print(json.dumps([s.to_dict() for s in suggestions], indent=2))
    return 0


def cmd_viz(args) -> int:
    sessions = _load_sessions(args)
    resolution = tuple(int(v) for v in args.resolution.split("x"))
    if args.facet:
        grids = heatmap.facet_by(sessions, args.facet, resolution=resolution)
        for value, grid in grids.items():
            suffix = f".{value}"
            _write(args.out + suffix + ".svg", heatmap.export_heat_svg(grid))
            if args.csv:
                _write(args.csv + suffix + ".csv", heatmap.export_heat_csv(grid))
            print(f"{args.facet}={value}: {grid.total_count} reports")
        return 0
    grid = heatmap.aggregate_track_heat(sessions, resolution=resolution)
    _write(args.out, heatmap.export_heat_svg(grid))
    if args.csv:
        _write(args.csv, heatmap.export_heat_csv(grid))
    print(f"aggregated {grid.total_count} reports into {args.out}")
    return 0


def cmd_serve(args) -> int:
    model, ranking = trees.load_model(args.model)
    cause_map = advisor.load_cause_map(args.mapping) if args.mapping else None
    service = ScoringService(
        model, ranking=ranking, cause_map=cause_map, threshold=args.threshold, top_n=args.top
    )
    print(f"serving {args.model} on {args.host}:{args.port}")
    serve_forever(service, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cybersick", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic session corpus")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--games", help="sessions per game, e.g. race:20,flight:27")
    group.add_argument("--rows", help="target rows per game, e.g. race:3993,flight:5397")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--risk-out", help="sidecar CSV of the latent risk trace (default: <out>.risk.csv)")
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--scheme", choices=["binary", "quarterly"], default="quarterly",
                   help="label scheme for csv output")
    p.add_argument("--weights", default="0.4,0.3,0.2,0.1",
                   help="risk weights time,rotation,acceleration,profile")
    p.add_argument("--report-prob", type=float, default=0.15)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse, validate, and optionally convert sessions")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--out")
    p.add_argument("--to", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--scheme", choices=["binary", "quarterly"], default="quarterly")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a learner and persist the model")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--learner", choices=trees.LEARNER_NAMES, default="forest")
    p.add_argument("--scenario", choices=["A", "B", "C"], default="C")
    p.add_argument("--scheme", choices=["binary", "quarterly"], default="binary")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--attach-ranking", action="store_true",
                   help="embed a leave-one-attribute-out ranking in the model file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="cross-validated scenario x scheme x learner grid")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--learners", default="stump,tree,pruned,forest")
    p.add_argument("--scenarios", default="A,B,C")
    p.add_argument("--schemes", default="binary,quarterly")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rank", help="leave-one-attribute-out attribute ranking")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--learner", choices=trees.LEARNER_NAMES, default="forest")
    p.add_argument("--scenario", choices=["A", "B", "C"], default="A")
    p.add_argument("--scheme", choices=["binary", "quarterly"], default="binary")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("predict", help="score sessions with a persisted model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("advise", help="mitigation suggestions for a prediction")
    p.add_argument("--probs", default="0.0,1.0", help="comma-separated class probabilities")
    p.add_argument("--ranking", help="ranking JSON produced by `rank --out`")
    p.add_argument("--causes", default="", help="explicit cause labels, comma-separated")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--mapping", help="attribute=Cause config overriding the built-in map")
    p.add_argument("--export-matrix", help="write the cause/strategy matrix CSV and exit")
    p.set_defaults(func=cmd_advise)

    p = sub.add_parser("viz", help="discomfort heatmap exports")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--csv", help="also write the grid CSV here")
    p.add_argument("--facet", help="profile attribute to facet by (e.g. gender)")
    p.add_argument("--resolution", default="64x64")
    p.set_defaults(func=cmd_viz)

    p = sub.add_parser("serve", help="line-delimited JSON scoring server")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=9000)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--mapping")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
