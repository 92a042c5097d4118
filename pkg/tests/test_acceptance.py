"""Acceptance criteria, each at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line; the lines are repeated in the
terminal summary so they survive output capture.
"""

import datetime as dt
import io
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ACCEPTANCE_LINES
from metric_fixtures import METRIC_FIXTURES
from tornadet import cli
from tornadet.classifiers import KINDS, ModelSpec, decide, fit, load_model, predict_proba, predict_proba_batch, serialize_model
from tornadet.evaluation import ConfusionCounts, far, pod, split_by_year
from tornadet.features import build_feature_vector, feature_matrix, split_quadrants
from tornadet.ingestion import CatalogEntry, read_dataset, select_negatives, tornado_dates_by_region
from tornadet.schema import GRID_SHAPE, VARIABLE_KEYS, EventWindow, GridSnapshot, Label
from tornadet.synth import SynthSpec, generate, write_synthetic

README = Path(__file__).resolve().parents[1] / "README.md"


def verdict(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# -- limitation is documented ------------------------------------------------


def test_published_numbers_limitation_documented():
    text = README.read_text(encoding="utf-8") if README.is_file() else ""
    ok = all(s in text for s in ("0.84", "0.06", "cannot be reproduced", "Random Forest"))
    verdict("published-result limitation", ok, "README states the 5-day Random Forest POD 0.84 / FAR 0.06 cannot be reproduced")


# -- metric exactness --------------------------------------------------------


def test_metric_exactness():
    def same(expected, got):
        return math.isnan(got) if expected is None else got == expected

    hits = 0
    for tp, fp, tn, fn, e_pod, e_far in METRIC_FIXTURES:
        c = ConfusionCounts(tp, fp, tn, fn)
        hits += same(e_pod, pod(c)) and same(e_far, far(c))
    verdict("metric exactness", hits == len(METRIC_FIXTURES) == 20, f"{hits}/{len(METRIC_FIXTURES)} fixtures exact")


# -- featurizer oracle -------------------------------------------------------


def two_pass(cells):
    n = len(cells)
    mean = sum(cells) / n
    return mean, math.sqrt(sum((c - mean) ** 2 for c in cells) / n)


def quadrant_cells(layer):
    """Brute-force membership by cell coordinates."""
    out = {"NW": [], "NE": [], "SW": [], "SE": []}
    for r in range(19):
        for c in range(19):
            out[("N" if r < 10 else "S") + ("W" if c < 10 else "E")].append(float(layer[r, c]))
    return [out[q] for q in ("NW", "NE", "SW", "SE")]


def test_featurizer_oracle():
    rng = np.random.default_rng(2024)
    n_layers = 1000
    worst = 0.0
    sizes_ok = True
    partition_ok = True
    for start in range(0, n_layers, 7):
        keys = VARIABLE_KEYS[: min(7, n_layers - start)]
        layers = {}
        for k in VARIABLE_KEYS:
            # scale and offset vary per layer so cancellation is exercised
            scale, offset = 10.0 ** rng.uniform(-4, 3), rng.uniform(-1, 1) * 10.0 ** rng.uniform(0, 3)
            vals = offset + scale * rng.standard_normal(GRID_SHAPE)
            layers[k] = np.abs(vals) if k not in ("wind_u", "wind_v") else vals
            if k == "cloud_cover":
                layers[k] = rng.uniform(0, 1, GRID_SHAPE)
        snap = GridSnapshot("N35W100", dt.date(2017, 5, 1), 35.0, -100.0, 0.25, layers)
        fv = build_feature_vector(EventWindow("x", Label.TORNADO, dt.date(2017, 5, 2), (snap,))).values
        for v, key in enumerate(VARIABLE_KEYS):
            if key not in keys:
                continue
            quads = split_quadrants(layers[key])
            sizes_ok &= [q.size for q in quads.values()] == [100, 90, 90, 81]
            joined = sorted(np.concatenate(list(quads.values())).tolist())
            partition_ok &= joined == sorted(layers[key].ravel().tolist())
            for q, cells in enumerate(quadrant_cells(layers[key])):
                for s, expected in enumerate(two_pass(cells)):
                    got = fv[v * 8 + q * 2 + s]
                    denom = max(abs(expected), abs(got))
                    if denom:
                        worst = max(worst, abs(got - expected) / denom)
    ok = worst <= 1e-12 and sizes_ok and partition_ok
    verdict("featurizer oracle", ok, f"{n_layers} layers, worst relative error {worst:.2e}, sizes 100/90/90/81, partition covers 361 cells")


# -- classifier oracles ------------------------------------------------------


def test_classifier_oracles():
    details = []

    # k-NN against exhaustive search on 100 queries
    rng = np.random.default_rng(5)
    X = rng.normal(size=(150, 6))
    y = (X[:, 0] + rng.normal(size=150) > 0).astype(np.int8)
    m = fit(ModelSpec("knn"), X, y)
    train = (X - m.standardizer.mean) / m.standardizer.scale
    Q = rng.normal(size=(100, 6))
    knn_hits = 0
    for q, p in zip(Q, predict_proba_batch(m, Q)):
        z = (q - m.standardizer.mean) / m.standardizer.scale
        dists = sorted((sum((z[j] - row[j]) ** 2 for j in range(6)), i) for i, row in enumerate(train))
        knn_hits += p == sum(int(y[i]) for _, i in dists[:5]) / 5
    details.append(f"kNN {knn_hits}/100 exact")

    # Gaussian NB on the 1-feature fixture, means 1 and 5, unit variance
    nb = fit(ModelSpec("gaussian_nb"), [[0.0], [2.0], [4.0], [6.0]], [0, 0, 1, 1])
    nb_err = 0.0
    for x in (-3.0, 0.0, 1.0, 2.5, 3.0, 4.5, 7.0):
        g0 = math.exp(-((x - 1.0) ** 2) / 2)
        g1 = math.exp(-((x - 5.0) ** 2) / 2)
        nb_err = max(nb_err, abs(predict_proba(nb, [x]) - g1 / (g0 + g1)))
    details.append(f"NB max error {nb_err:.1e}")

    # unlimited-depth tree fits consistent data exactly
    tree_fails = 0
    for seed in range(20):
        r = np.random.default_rng(seed)
        n = int(r.integers(20, 201))
        Xt = np.round(r.normal(size=(n, 4)), 1)
        yt = (r.random(n) < 0.5).astype(np.int8)
        seen, keep = {}, []
        for i, row in enumerate(map(tuple, Xt)):
            if seen.setdefault(row, yt[i]) == yt[i]:
                keep.append(i)
        Xt, yt = Xt[keep], yt[keep]
        tree = fit(ModelSpec("decision_tree", seed=seed), Xt, yt)
        tree_fails += not np.array_equal(decide(predict_proba_batch(tree, Xt)), yt)
    details.append(f"tree training error 0 on {20 - tree_fails}/20 seeds")

    # AdaBoost training error under the product bound
    bound_fails = 0
    for seed in range(5):
        r = np.random.default_rng(100 + seed)
        Xa = r.normal(size=(80, 3))
        ya = ((Xa[:, 0] + 0.8 * r.normal(size=80)) > 0).astype(np.int8)
        ab = fit(ModelSpec("adaboost", {"rounds": 25}), Xa, ya)
        eps = ab.params["error"]
        bound = float(np.prod(2 * np.sqrt(eps * (1 - eps))))
        bound_fails += float(np.mean(decide(predict_proba_batch(ab, Xa)) != ya)) > bound
    details.append(f"AdaBoost bound held on {5 - bound_fails}/5 fixtures")

    ok = knn_hits == 100 and nb_err <= 1e-9 and tree_fails == 0 and bound_fails == 0
    verdict("classifier oracles", ok, "; ".join(details))


# -- synthetic end to end ----------------------------------------------------


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """synth -> build-dataset -> train -> evaluate through the command line."""
    root = tmp_path_factory.mktemp("e2e")
    t0 = time.perf_counter()
    steps = [
        ["synth", "--out", str(root / "train"), "--seed", "7", "--tornado", "500", "--null", "500", "--separation", "3", "--window-days", "5"],
        ["synth", "--out", str(root / "test"), "--seed", "8", "--tornado", "250", "--null", "250", "--separation", "3", "--window-days", "5", "--start-date", "2017-01-01"],
        [
            "build-dataset",
            "--catalog", str(root / "train" / "catalog.csv"),
            "--catalog", str(root / "test" / "catalog.csv"),
            "--snapshots", str(root / "train" / "snapshots"),
            "--snapshots", str(root / "test" / "snapshots"),
            "--out", str(root / "dataset.json"),
        ],
        ["train", "--dataset", str(root / "dataset.json"), "--kind", "random_forest", "--seed", "1", "--test-year", "2017", "--out", str(root / "rf.json")],
        ["evaluate", "--dataset", str(root / "dataset.json"), "--model", str(root / "rf.json"), "--test-year", "2017", "--out-json", str(root / "report.json")],
    ]
    codes = [cli.main(argv) for argv in steps]
    return root, codes, time.perf_counter() - t0


def test_synthetic_end_to_end(pipeline):
    root, codes, elapsed = pipeline
    cell = json.loads((root / "report.json").read_text())["cells"][0] if all(c == 0 for c in codes) else None
    p = cell["pod"] if cell else math.nan
    f = cell["far"] if cell else math.nan
    ok = cell is not None and p >= 0.95 and f <= 0.05 and elapsed < 120.0
    verdict("synthetic end to end", ok, f"RF POD {p:.3f} FAR {f:.3f}, pipeline {elapsed:.1f}s (exit codes {codes})")


# -- window ablation ---------------------------------------------------------


def test_window_ablation(tmp_path):
    write_synthetic(generate(SynthSpec(seed=31, n_tornado=60, n_null=60)), tmp_path / "train")
    write_synthetic(generate(SynthSpec(seed=32, n_tornado=25, n_null=25, start_date=dt.date(2017, 1, 1))), tmp_path / "test")
    rc = cli.main(
        [
            "build-dataset",
            "--catalog", str(tmp_path / "train" / "catalog.csv"),
            "--catalog", str(tmp_path / "test" / "catalog.csv"),
            "--snapshots", str(tmp_path / "train" / "snapshots"),
            "--snapshots", str(tmp_path / "test" / "snapshots"),
            "--out", str(tmp_path / "d.json"),
        ]
    )
    outputs = []
    for run in ("a", "b"):
        rc |= cli.main(
            [
                "ablate", "--dataset", str(tmp_path / "d.json"), "--seed", "3",
                "--out-json", str(tmp_path / f"{run}.json"), "--out-table", str(tmp_path / f"{run}.txt"),
            ]
        )
        outputs.append(((tmp_path / f"{run}.json").read_bytes(), (tmp_path / f"{run}.txt").read_bytes()))
    doc = json.loads(outputs[0][0])
    lines = outputs[0][1].decode().splitlines()
    day_cols = [h.strip() for h in lines[1].split("|")[1:]]
    rows = [line.split("|") for line in lines[4:-1]]
    names = [r[0].strip() for r in rows]
    shape_ok = day_cols == ["5 Days", "4 Days", "3 Days", "2 Days", "1 Day"] and lines[2].count("POD") == 5
    shape_ok &= names == ["Gaussian Classifier", "Decision Tree", "Random Forest", "SVM", "K-nearest Neighbors Classifier", "AdaBoost Classifier"]
    shape_ok &= all(len(r) == 6 and all(len(cell.split()) == 2 for cell in r[1:]) for r in rows)
    counts_ok = len(doc["cells"]) == 30 and all(sum(c["counts"].values()) == 50 for c in doc["cells"])
    same = outputs[0] == outputs[1]
    ok = rc == 0 and shape_ok and counts_ok and same
    verdict("window ablation", ok, f"6x5 table {shape_ok}, cell counts sum to 50 {counts_ok}, byte-identical reruns {same}")


# -- stream / batch equivalence ----------------------------------------------


def test_stream_batch_equivalence(pipeline, capsys):
    root, codes, _ = pipeline
    model = load_model(root / "rf.json")
    _, test = split_by_year(read_dataset(root / "dataset.json"), 2017)
    batch = predict_proba_batch(model, feature_matrix(test.windows))
    expected = {(w.region_id, w.target_date.isoformat()): p for w, p in zip(test.windows, batch)}
    out = io.StringIO()
    args = cli.parse_args(["monitor", "--model", str(root / "rf.json"), str(root / "test" / "snapshots")])
    rc = cli.cmd_monitor(args, stdout=out)
    records = [json.loads(line) for line in out.getvalue().splitlines()]
    mismatches = sum(r["probability"] != expected.get((r["region_id"], r["target_date"])) for r in records)
    ok = rc == 0 and len(records) == len(test) and mismatches == 0
    verdict("stream/batch equivalence", ok, f"{len(records)} alert records, {mismatches} differ from batch")


# -- negative sampling -------------------------------------------------------

REGIONS = ["N35W100", "N40W100", "N35W95"]
ORIGINS = {"N35W100": (35.0, -100.0), "N40W100": (40.0, -100.0), "N35W95": (35.0, -95.0)}


def entry(i, region, day, label):
    lat0, lon0 = ORIGINS[region]
    return CatalogEntry(f"e{i}", dt.date(2010, 1, 1) + dt.timedelta(days=day), lat0 + 1.0, lon0 + 1.0, label)


catalogs = st.lists(st.tuples(st.sampled_from(REGIONS), st.integers(0, 120), st.booleans()), max_size=40)

_property_failures = []


@settings(max_examples=300)
@given(rows=catalogs, gap=st.integers(0, 20))
def _negative_sampling_property(rows, gap):
    entries = [entry(i, r, d, Label.TORNADO if t else Label.NULL_EVENT) for i, (r, d, t) in enumerate(rows)]
    tornadoes = tornado_dates_by_region(entries)
    nulls = [e for e in entries if e.label is Label.NULL_EVENT]
    kept = select_negatives(nulls, tornadoes, gap)
    for e in kept:
        if any(abs((e.date - t).days) < gap for t in tornadoes.get(e.region_id, ())):
            _property_failures.append(e)
    for e in nulls:
        if e not in kept and all(abs((e.date - t).days) >= gap for t in tornadoes.get(e.region_id, ())):
            _property_failures.append(e)


def test_negative_sampling_rule():
    _property_failures.clear()
    _negative_sampling_property()
    t = entry(0, "N35W100", 50, Label.TORNADO)
    n9 = entry(1, "N35W100", 59, Label.NULL_EVENT)
    n10 = entry(2, "N35W100", 60, Label.NULL_EVENT)
    n10_before = entry(3, "N35W100", 40, Label.NULL_EVENT)
    other_region = entry(4, "N40W100", 51, Label.NULL_EVENT)
    kept = select_negatives([n9, n10, n10_before, other_region], tornado_dates_by_region([t]), 10)
    boundary_ok = kept == [n10, n10_before, other_region]
    ok = not _property_failures and boundary_ok
    verdict("negative sampling", ok, f"300 random catalogs with {len(_property_failures)} violations; gap 9 excluded, gap 10 kept {boundary_ok}")


# -- determinism -------------------------------------------------------------


def test_determinism():
    d = generate(SynthSpec(seed=41, n_tornado=40, n_null=40)).dataset
    X, y = feature_matrix(d.windows), d.labels()
    stable = []
    for kind in KINDS:
        spec = ModelSpec(kind, {"n_trees": 20} if kind == "random_forest" else {}, seed=5)
        stable.append(serialize_model(fit(spec, X, y)) == serialize_model(fit(spec, X, y)))
    rf = ModelSpec("random_forest", {"n_trees": 20}, seed=5)
    serial = serialize_model(fit(rf, X, y, n_jobs=1))
    parallel = [serialize_model(fit(rf, X, y, n_jobs=4)) for _ in range(2)]
    parallel_ok = parallel[0] == parallel[1] == serial
    ok = all(stable) and parallel_ok
    verdict("determinism", ok, f"{sum(stable)}/{len(KINDS)} kinds byte-identical on refit; parallel forest equals serial {parallel_ok}")
