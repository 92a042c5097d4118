import datetime as dt
import math

import numpy as np
import pytest

from tornadet.classifiers import ModelSpec, decide, fit, predict_proba_batch
from tornadet.features import feature_matrix
from tornadet.ingestion import region_id_for, select_negatives, tornado_dates_by_region
from tornadet.schema import Label, validate_snapshot, validate_window
from tornadet.synth import (
    SynthSpec,
    _label_sequence,
    generate,
    make_oracle,
    oracle_decide,
    oracle_score,
    write_synthetic,
)


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_same_spec_gives_identical_files(tmp_path):
    spec = SynthSpec(seed=5, n_tornado=6, n_null=5)
    write_synthetic(generate(spec), tmp_path / "a")
    write_synthetic(generate(spec), tmp_path / "b")
    a, b = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
    assert a == b and "dataset.json" in a and "catalog.csv" in a
    assert len([k for k in a if k.startswith("snapshots/")]) == 11 * 5


def test_different_seeds_differ():
    a = generate(SynthSpec(seed=1, n_tornado=1, n_null=0)).dataset.windows[0]
    b = generate(SynthSpec(seed=2, n_tornado=1, n_null=0)).dataset.windows[0]
    assert not np.array_equal(a.snapshots[0].values, b.snapshots[0].values)


def test_label_counts_and_snapshot_validity(small_synth):
    d = small_synth[0].dataset
    assert int(d.labels().sum()) == 30 and len(d) == 60
    for w in d.windows:
        validate_window(w)
        for s in w.snapshots:
            validate_snapshot(s)


@pytest.mark.parametrize("n_t,n_n", [(1, 0), (0, 1), (5, 2), (2, 5), (7, 7)])
def test_label_sequence_balance(n_t, n_n):
    seq = _label_sequence(n_t, n_n)
    assert seq.count(Label.TORNADO) == n_t and seq.count(Label.NULL_EVENT) == n_n


def test_catalog_matches_windows(small_synth):
    r = small_synth[0]
    for e, w in zip(r.catalog, r.dataset.windows):
        assert (e.event_id, e.date, e.label) == (w.event_id, w.target_date, w.label)
        assert e.region_id == w.region_id == region_id_for(e.lat, e.lon)


def test_null_events_sit_exactly_ten_days_from_tornadoes():
    r = generate(SynthSpec(seed=9, n_tornado=40, n_null=40, regions=((35.0, -100.0), (40.0, -95.0))))
    tornadoes = tornado_dates_by_region(r.catalog)
    nulls = [e for e in r.catalog if e.label is Label.NULL_EVENT]
    gaps = [min(abs((e.date - t).days) for t in tornadoes[e.region_id]) for e in nulls]
    assert min(gaps) == 10
    assert select_negatives(nulls, tornadoes, 10) == nulls
    # one day stricter and the boundary nulls drop out
    assert len(select_negatives(nulls, tornadoes, 11)) < len(nulls)


def test_same_class_neighbours_nine_days_apart():
    r = generate(SynthSpec(seed=2, n_tornado=6, n_null=6, regions=((35.0, -100.0),)))
    steps = {(a.label is b.label, (b.date - a.date).days) for a, b in zip(r.catalog, r.catalog[1:])}
    assert steps == {(True, 9), (False, 10)}


def test_first_target_leaves_room_for_window():
    spec = SynthSpec(seed=0, n_tornado=1, n_null=1, start_date=dt.date(2000, 1, 1))
    w = generate(spec).dataset.windows[0]
    assert w.snapshots[0].date == dt.date(2000, 1, 1)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"separation": -1.0},
        {"separation": math.nan},
        {"window_days": 0},
        {"window_days": 6},
        {"n_tornado": 0, "n_null": 0},
        {"n_tornado": -1},
        {"seed": -1},
        {"seed": 2**64},
        {"seed": True},
        {"regions": ()},
    ],
)
def test_invalid_spec(kwargs):
    with pytest.raises(ValueError):
        SynthSpec(**kwargs)


# -- oracle ------------------------------------------------------------------


def test_bayes_error_sep5_below_bound():
    o = make_oracle(SynthSpec(separation=5.0))
    assert o.bayes_error() < 1e-4


def test_bayes_error_closed_form_equal_priors():
    o = make_oracle(SynthSpec(separation=3.0))
    delta = o.mahalanobis()
    expected = 0.5 * math.erfc(delta / 2 / math.sqrt(2))
    assert o.bayes_error() == pytest.approx(expected, rel=1e-12)


def test_bayes_error_grows_as_window_shrinks():
    o = make_oracle(SynthSpec(separation=3.0))
    errs = [o.bayes_error(d) for d in (5, 4, 3, 2, 1)]
    assert errs == sorted(errs)


def test_separation_zero_is_chance():
    o = make_oracle(SynthSpec(separation=0.0))
    assert o.mahalanobis() == 0.0 and o.bayes_error() == 0.5


def test_oracle_sep0_equal_priors_says_null():
    r = generate(SynthSpec(seed=4, n_tornado=5, n_null=5, separation=0.0))
    for w in r.dataset.windows:
        assert oracle_score(r.oracle, w) == 0.0
        assert oracle_decide(r.oracle, w) is Label.NULL_EVENT


def test_oracle_sep0_unequal_priors_follows_prior():
    r = generate(SynthSpec(seed=4, n_tornado=6, n_null=3, separation=0.0))
    assert all(oracle_decide(r.oracle, w) is Label.TORNADO for w in r.dataset.windows)


def test_oracle_agreement_sep5():
    r = generate(SynthSpec(seed=21, n_tornado=500, n_null=500, separation=5.0))
    agree = sum(oracle_decide(r.oracle, w) is w.label for w in r.dataset.windows)
    assert agree / 1000 >= 0.999


def test_oracle_score_is_log_odds_of_offset_window():
    # a window that sits exactly on the tornado class mean scores +delta^2/2
    spec = SynthSpec(seed=0, n_tornado=1, n_null=1, separation=2.0)
    r = generate(spec)
    o = r.oracle
    w = r.dataset.windows[0]
    base = np.array(o.base)[:, None, None]
    scale = np.array(o.scale)[:, None, None]
    sign = np.array(o.sign, dtype=float)[:, None, None]
    snaps = []
    for j, s in enumerate(w.snapshots):
        lag = w.days - j
        vals = np.broadcast_to(base + scale * 0.5 * spec.separation * o.lag_weight(lag) * sign, (7, 19, 19))
        snaps.append(type(s).from_array(s.region_id, s.date, s.lat0, s.lon0, vals))
    mean_window = type(w)(w.event_id, w.label, w.target_date, tuple(snaps))
    assert oracle_score(o, mean_window) == pytest.approx(o.mahalanobis() ** 2 / 2, rel=1e-9)


@pytest.mark.slow
def test_random_forest_at_chance_when_classes_coincide():
    accuracies = []
    for seed in range(5):
        d = generate(SynthSpec(seed=100 + seed, n_tornado=500, n_null=500, separation=0.0)).dataset
        idx = np.random.default_rng(seed).permutation(len(d))
        X, y = feature_matrix(d.windows), d.labels()
        tr, te = idx[:500], idx[500:]
        m = fit(ModelSpec("random_forest", {"n_trees": 50}, seed=seed), X[tr], y[tr])
        pred = decide(predict_proba_batch(m, X[te]))
        accuracies.append(float(np.mean(pred == y[te])))
    assert all(0.4 <= a <= 0.6 for a in accuracies), accuracies
