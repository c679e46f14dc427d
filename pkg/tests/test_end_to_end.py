import json
from pathlib import Path

from daxt import cli
from daxt.events import generate_synthetic_corpus, write_spadl_csv
from daxt.utils import read_csv_frame


def _tree(root: Path):
    return {path.relative_to(root).as_posix(): path.read_bytes() for path in sorted(root.rglob("*")) if path.is_file()}


def _run_all(out: Path, *extra: str) -> int:
    return cli.main(["run-all", "--synth-games", "20", "--seed", "7", "--epochs", "10", "--out", str(out), "--quiet", *extra])


def test_run_all_is_reproducible(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"

    assert _run_all(first) == 0
    assert _run_all(second) == 0
    assert _tree(first) == _tree(second)

    for name in (
        "events/events.csv",
        "xt/surface.csv",
        "datasets/training.csv",
        "model/model.json",
        "valuation/valued_actions.csv",
        "scoring/scores.csv",
        "validation/tests.csv",
        "figures/interception_top_player.svg",
        "figures/tackle_top_player.svg",
        "reports/report.txt",
        "MANIFEST.json",
    ):
        assert (first / name).is_file(), name

    manifest = json.loads((first / "MANIFEST.json").read_text(encoding="utf-8"))
    assert {"synth", "xt", "datasets", "train", "value", "score", "validate", "render", "report"} <= set(manifest["commands"])
    assert "out" not in manifest["commands"]["train"]["config"]

    report = json.loads((first / "reports" / "report.json").read_text(encoding="utf-8"))
    assert report["model"]["a"] == 2
    assert report["surface"]["iterations_used"] >= 1


def test_sweep_row_counts_fall_with_a(tmp_path):
    out = tmp_path / "run"
    common = ["--synth-games", "20", "--seed", "7", "--epochs", "2", "--out", str(out), "--quiet"]
    assert cli.main(["synth", *common]) == 0
    assert cli.main(["xt", *common]) == 0
    assert cli.main(["sweep-a", *common]) == 0

    frame = read_csv_frame(out / "sweep" / "sweep_a.csv")
    assert frame["a"].tolist() == [1, 2, 3]
    rows = frame["training_rows"].tolist()
    assert rows[0] > rows[1] > rows[2] > 0


def test_ingested_events_run_through(tmp_path):
    events = write_spadl_csv(generate_synthetic_corpus(6, seed=3), tmp_path / "events.csv")
    out = tmp_path / "run"

    assert _run_all(out, "--input", str(events), "--min-interceptions", "1", "--min-tackles", "1") == 0
    assert read_csv_frame(out / "events" / "events.csv").shape[0] > 0
    assert (out / "scoring" / "scores.csv").is_file()


def test_missing_artifact_exits_with_io_code(tmp_path):
    assert cli.main(["train", "--out", str(tmp_path / "empty"), "--quiet"]) == 2


def test_bad_configuration_exits_with_contract_code(tmp_path):
    assert cli.main(["xt", "--a", "0", "--out", str(tmp_path / "run"), "--quiet"]) == 1


def test_missing_input_file_exits_with_io_code(tmp_path):
    assert cli.main(["ingest", "--input", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "run"), "--quiet"]) == 2


def test_value_writes_benchmark_tables(tmp_path):
    out = tmp_path / "run"
    assert _run_all(out) == 0
    stats = read_csv_frame(out / "valuation" / "player_stats.csv", dtype={"player_id": str})
    reference = stats.sort_values(["interception_count", "player_id"], ascending=[False, True]).iloc[0]

    common = ["--seed", "7", "--epochs", "10", "--out", str(out), "--quiet"]
    assert cli.main(["value", *common, "--benchmark", reference["player_id"], "--tolerance", "3"]) == 0

    table = read_csv_frame(out / "valuation" / "benchmark_interceptions.csv", dtype={"player_id": str})
    assert table.columns.tolist() == ["player_id", "player_name", "count", "average", "market_value"]
    assert reference["player_id"] in table["player_id"].tolist()
    assert (abs(table["count"] - int(reference["interception_count"])) <= 3).all()
    assert table["average"].tolist() == sorted(table["average"].tolist(), reverse=True)
    assert (out / "valuation" / "benchmark_tackles.csv").is_file()

    manifest = json.loads((out / "MANIFEST.json").read_text(encoding="utf-8"))
    assert "valuation/benchmark_interceptions.csv" in manifest["commands"]["value"]["outputs"]
    assert cli.main(["value", *common, "--benchmark", "nobody"]) == 1
