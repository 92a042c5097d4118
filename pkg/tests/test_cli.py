import datetime as dt
import io
import json

import pytest

from conftest import make_snapshot
from tornadet import cli
from tornadet.classifiers import load_model
from tornadet.ingestion import (
    CatalogEntry,
    read_dataset,
    serialize_event_catalog,
    snapshot_to_document,
    write_snapshot,
)
from tornadet.schema import Label
from tornadet.synth import SynthSpec, generate, write_synthetic


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    train = generate(SynthSpec(seed=11, n_tornado=20, n_null=20))
    test = generate(SynthSpec(seed=12, n_tornado=8, n_null=8, start_date=dt.date(2017, 1, 1)))
    write_synthetic(train, root / "train")
    write_synthetic(test, root / "test")
    rc = cli.main(
        [
            "build-dataset",
            "--catalog", str(root / "train" / "catalog.csv"),
            "--catalog", str(root / "test" / "catalog.csv"),
            "--snapshots", str(root / "train" / "snapshots"),
            "--snapshots", str(root / "test" / "snapshots"),
            "--out", str(root / "all.json"),
        ]
    )
    assert rc == 0
    return root


@pytest.fixture(scope="module")
def model_path(synth_dir):
    out = synth_dir / "nb.json"
    assert cli.main(["train", "--dataset", str(synth_dir / "all.json"), "--kind", "gaussian_nb", "--test-year", "2017", "--out", str(out)]) == 0
    return out


# -- synth -------------------------------------------------------------------


def test_synth_writes_windows(tmp_path, capsys):
    rc = cli.main(["synth", "--out", str(tmp_path / "s"), "--seed", "7", "--tornado", "5", "--null", "5", "--separation", "3"])
    assert rc == 0
    assert len(read_dataset(tmp_path / "s" / "dataset.json")) == 10
    assert (tmp_path / "s" / "catalog.csv").is_file() and (tmp_path / "s" / "oracle.json").is_file()
    assert "wrote 10 windows" in capsys.readouterr().out


def test_synth_repeat_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["synth", "--out", str(tmp_path / name), "--seed", "3", "--tornado", "2", "--null", "3"]) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["synth", "--out", "x", "--separation", "-1"],
        ["synth", "--out", "x", "--window-days", "6"],
        ["synth", "--out", "x", "--tornado", "0", "--null", "0"],
        ["synth", "--tornado", "1"],
        ["synth", "--out", "x", "--start-date", "2017-13-01"],
        ["nonsense"],
        [],
    ],
)
def test_usage_errors_exit_2(argv, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == 2
    assert capsys.readouterr().err


# -- build-dataset -----------------------------------------------------------


def _mini_catalog(tmp_path, null_gap):
    snaps = tmp_path / "snaps"
    snaps.mkdir()
    t = dt.date(2017, 5, 20)
    entries = [
        CatalogEntry("t1", t, 37.0, -97.0, Label.TORNADO),
        CatalogEntry("n1", t + dt.timedelta(days=null_gap), 37.5, -97.5, Label.NULL_EVENT),
        CatalogEntry("n2", t + dt.timedelta(days=40), 38.0, -98.0, Label.NULL_EVENT),
    ]
    for e in entries:
        for lag in range(1, 6):
            write_snapshot(make_snapshot(date=e.date - dt.timedelta(days=lag), region_id="N35W100"), snaps)
    (tmp_path / "cat.csv").write_bytes(serialize_event_catalog(entries))
    return tmp_path / "cat.csv", snaps


@pytest.mark.parametrize("gap,n_windows,filtered", [(9, 2, 1), (10, 3, 0), (25, 3, 0)])
def test_build_dataset_gap_rule(tmp_path, capsys, gap, n_windows, filtered):
    cat, snaps = _mini_catalog(tmp_path, gap)
    rc = cli.main(["build-dataset", "--catalog", str(cat), "--snapshots", str(snaps), "--out", str(tmp_path / "d.json"), "--min-gap-days", "10"])
    assert rc == 0
    assert len(read_dataset(tmp_path / "d.json")) == n_windows
    assert f"{filtered} filtered by the 10-day gap rule" in capsys.readouterr().out


def test_build_dataset_missing_dir(tmp_path):
    cat, _ = _mini_catalog(tmp_path, 30)
    assert cli.main(["build-dataset", "--catalog", str(cat), "--snapshots", str(tmp_path / "nope"), "--out", str(tmp_path / "d.json")]) == 2


def test_build_dataset_no_windows(tmp_path):
    cat, _ = _mini_catalog(tmp_path, 30)
    (tmp_path / "empty").mkdir()
    rc = cli.main(["build-dataset", "--catalog", str(cat), "--snapshots", str(tmp_path / "empty"), "--out", str(tmp_path / "d.json")])
    assert rc == 1


def test_build_dataset_features_csv(tmp_path):
    cat, snaps = _mini_catalog(tmp_path, 30)
    rc = cli.main(["build-dataset", "--catalog", str(cat), "--snapshots", str(snaps), "--out", str(tmp_path / "d.json"), "--window-days", "2", "--features-csv", str(tmp_path / "f.csv")])
    assert rc == 0
    header = (tmp_path / "f.csv").read_text().splitlines()[0].split(",")
    assert len(header) == 2 + 2 * 56


# -- train / evaluate / ablate -----------------------------------------------


def test_train_is_deterministic(synth_dir, tmp_path):
    blobs = []
    for name in ("a.json", "b.json"):
        argv = ["train", "--dataset", str(synth_dir / "all.json"), "--kind", "random_forest", "--trees", "5", "--seed", "1", "--out", str(tmp_path / name)]
        assert cli.main(argv) == 0
        blobs.append((tmp_path / name).read_bytes())
    assert blobs[0] == blobs[1]
    assert load_model(tmp_path / "a.json").spec.kind == "random_forest"


def test_train_single_class_exits_1(tmp_path, capsys):
    cli.main(["synth", "--out", str(tmp_path / "s"), "--tornado", "4", "--null", "0"])
    rc = cli.main(["train", "--dataset", str(tmp_path / "s" / "dataset.json"), "--kind", "knn", "--out", str(tmp_path / "m.json")])
    assert rc == 1
    assert "SingleClassError" in capsys.readouterr().err


def test_evaluate_saved_model(synth_dir, model_path, tmp_path, capsys):
    rc = cli.main(["evaluate", "--dataset", str(synth_dir / "all.json"), "--model", str(model_path), "--out-json", str(tmp_path / "r.json")])
    assert rc == 0
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["metadata"]["test_year"] == 2017 and doc["metadata"]["n_test"] == 16
    c = doc["cells"][0]["counts"]
    assert c["tp"] + c["fp"] + c["tn"] + c["fn"] == 16
    assert "Gaussian Classifier" in capsys.readouterr().out


def test_evaluate_empty_test_year(synth_dir, model_path):
    assert cli.main(["evaluate", "--dataset", str(synth_dir / "all.json"), "--model", str(model_path), "--test-year", "2016"]) == 1


def test_evaluate_needs_model_or_kind(synth_dir):
    assert cli.main(["evaluate", "--dataset", str(synth_dir / "all.json")]) == 2
    assert cli.main(["evaluate", "--dataset", str(synth_dir / "all.json"), "--model", "m", "--kind", "knn"]) == 2


def test_ablate_table_shape(synth_dir, tmp_path, capsys):
    rc = cli.main(["ablate", "--dataset", str(synth_dir / "all.json"), "--trees", "5", "--rounds", "5", "--epochs", "2", "--out-json", str(tmp_path / "a.json")])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    rows = lines[4:10]
    assert len(rows) == 6 and all(len(r.split()) >= 10 for r in rows)
    doc = json.loads((tmp_path / "a.json").read_text())
    assert len(doc["cells"]) == 30
    assert all(sum(c["counts"].values()) == 16 for c in doc["cells"])


# -- config files ------------------------------------------------------------


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# synth defaults\nseed = 9\ntornado = 2\nnull=1  # trailing comment\nout = " + str(tmp_path / "cfg") + "\n")
    args = cli.parse_args(["synth", "--config", str(cfg), "--seed", "4"])
    assert (args.seed, args.tornado, args.null) == (4, 2, 1)
    assert args.out == str(tmp_path / "cfg")
    assert cli.parse_args(["synth", "--out", "x"]).seed == 0


@pytest.mark.parametrize("text", ["colour = red\n", "seed = -3\n", "just a line\n", "kind = magic\n"])
def test_bad_config_is_usage_error(tmp_path, text):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(text)
    assert cli.main(["train", "--config", str(cfg), "--dataset", "d", "--out", "o"]) == 2


def test_config_supplies_required_option(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("min-gap-days = 3\ncatalog = a.csv, b.csv\nsnapshots = s\nout = d.json\n")
    args = cli.parse_args(["build-dataset", "--config", str(cfg)])
    assert args.min_gap_days == 3 and args.catalog == ["a.csv", "b.csv"]


# -- monitor -----------------------------------------------------------------


def test_monitor_directory(synth_dir, model_path, capsys):
    assert cli.main(["monitor", "--model", str(model_path), str(synth_dir / "test" / "snapshots")]) == 0
    out = capsys.readouterr()
    records = [json.loads(line) for line in out.out.splitlines()]
    assert len(records) == 16
    assert set(records[0]) == {"region_id", "target_date", "probability", "alert", "model_id", "window_days"}
    assert "16 alert records emitted, 0 snapshots skipped" in out.err


def test_monitor_stdin_json_and_bad_lines(model_path, capsys):
    lines = []
    for i in range(5):
        snap = make_snapshot(date=dt.date(2017, 5, 1) + dt.timedelta(days=i))
        lines.append(json.dumps(snapshot_to_document(snap)))
        if i == 2:
            lines.append('{"not": "a snapshot"}')
            lines.append("/no/such/file.json")
    args = cli.parse_args(["monitor", "--model", str(model_path)])
    out = io.StringIO()
    assert cli.cmd_monitor(args, stdin=io.StringIO("\n".join(lines) + "\n"), stdout=out) == 0
    records = [json.loads(x) for x in out.getvalue().splitlines()]
    assert [r["target_date"] for r in records] == ["2017-05-06"]
    err = capsys.readouterr().err
    assert err.count("skipped") == 3 and "1 alert records emitted, 2 snapshots skipped" in err


def test_monitor_window_mismatch_exits_1(synth_dir, model_path):
    assert cli.main(["monitor", "--model", str(model_path), "--window-days", "2", str(synth_dir / "test" / "snapshots")]) == 1


def test_monitor_missing_model_exits_2(tmp_path):
    assert cli.main(["monitor", "--model", str(tmp_path / "none.json")]) == 2


def test_help_lists_every_subcommand(capsys):
    assert cli.main(["--help"]) == 0
    out = capsys.readouterr().out
    for name in ("synth", "build-dataset", "train", "evaluate", "ablate", "monitor"):
        assert name in out
