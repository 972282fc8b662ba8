from __future__ import annotations
import json

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import snap
from config import settings
from Services import pews
from Services.errors import ConfigError, SelectionError
from Services.pews import PewsBaseline, PewsTable, item_subscore, pews_score, pews_scores, select_cutoff


@pytest.fixture(scope="module")
def table() -> PewsTable:
    return PewsTable.load(settings.pews_table_path)


def _normal(**overrides):
    """Niño de 5 años con todos los ítems en banda normal."""
    values = dict(hr=90, sbp=100, dbp=60, rr=25, o2=98, age=5)
    values.update(overrides)
    return snap(**values)


# ------------------------------------------------------
#   Tabla
# ------------------------------------------------------

def test_default_table_shape(table):
    assert [item.name for item in table.items] == ["HR", "sBP", "RR", "O2"]
    assert table.max_score == 14
    assert len(table.item("O2").age_bands) == 1


def test_table_load_errors(tmp_path):
    raw = json.loads(settings.pews_table_path.read_text(encoding="utf-8"))

    gap = json.loads(json.dumps(raw))
    gap["items"][0]["age_bands"][0]["intervals"][1]["lo"] = 85
    (tmp_path / "gap.json").write_text(json.dumps(gap))
    with pytest.raises(ConfigError):
        PewsTable.load(tmp_path / "gap.json")

    overlap = json.loads(json.dumps(raw))
    overlap["items"][2]["age_bands"][1]["intervals"][0]["hi"] = 17
    (tmp_path / "overlap.json").write_text(json.dumps(overlap))
    with pytest.raises(ConfigError):
        PewsTable.load(tmp_path / "overlap.json")

    short = json.loads(json.dumps(raw))
    short["items"][1]["age_bands"][-1]["hi_years"] = 18
    (tmp_path / "short.json").write_text(json.dumps(short))
    with pytest.raises(ConfigError):
        PewsTable.load(tmp_path / "short.json")

    (tmp_path / "broken.json").write_text("{items: ")
    with pytest.raises(ConfigError):
        PewsTable.load(tmp_path / "broken.json")
    with pytest.raises(ConfigError):
        PewsTable.load(tmp_path / "missing.json")


def test_subscores_valley_shaped(table):
    # cada banda: no creciente hasta el tramo normal, luego no decreciente
    for item in table.items:
        for band in item.age_bands:
            lo, hi = band.intervals[0].lo, band.intervals[-1].hi
            scores = [band.subscore(v) for v in np.arange(lo, hi, 0.5)]
            bottom = int(np.argmin(scores))
            assert all(b <= a for a, b in zip(scores[:bottom + 1], scores[1:bottom + 1]))
            assert all(b >= a for a, b in zip(scores[bottom:], scores[bottom + 1:]))
            assert min(scores) == 0


# ------------------------------------------------------
#   Scoring
# ------------------------------------------------------

def test_item_subscore(table):
    assert item_subscore(table, "HR", 90, 5.0) == 0
    assert item_subscore(table, "HR", None, 5.0) == 0
    assert item_subscore(table, "HR", float("nan"), 5.0) == 0
    # más allá del último límite: sub-score máximo de HR
    assert item_subscore(table, "HR", 450, 5.0) == 4
    assert item_subscore(table, "HR", 300, 0.1) == 4
    assert item_subscore(table, "O2", 88, 12.0) == 2


def test_pews_score_is_additive(table):
    assert pews_score(table, _normal()) == 0
    assert pews_score(table, snap(age=5)) == 0
    assert pews_score(table, _normal(hr=115, rr=45)) == 3


def test_removing_a_value_never_increases_score(table):
    rng = np.random.default_rng(4)
    for _ in range(200):
        x = snap(
            hr=float(rng.uniform(30, 220)),
            sbp=float(rng.uniform(40, 180)),
            dbp=30.0,
            rr=float(rng.uniform(5, 90)),
            o2=float(rng.uniform(80, 100)),
            age=float(rng.uniform(0.1, 19.9)),
        )
        total = pews_score(table, x)
        assert total >= 0
        for field in ("hr", "rr", "o2"):
            reduced = x.model_copy(update={field: None})
            assert pews_score(table, reduced) <= total


# ------------------------------------------------------
#   Punto de corte
# ------------------------------------------------------

def _sweep_cutoff(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == -1]
    best = None
    for c in range(max(scores) + 2):
        sens = sum(s >= c for s in pos) / len(pos)
        specificity = sum(s < c for s in neg) / len(neg)
        key = (abs(sens - specificity), -sens, c)
        if best is None or key < best:
            best = key
    return best[2]


def _random_train(rng, n):
    labels = rng.choice([-1, 1], size=n)
    labels[0], labels[1] = 1, -1
    return [
        snap(
            int(y),
            patient_id=str(i),
            hr=float(rng.uniform(40, 200)) if rng.random() > 0.2 else None,
            rr=float(rng.uniform(8, 80)) if rng.random() > 0.2 else None,
            o2=float(rng.uniform(85, 100)) if rng.random() > 0.2 else None,
            age=float(rng.uniform(0.1, 19.9)),
        )
        for i, y in enumerate(labels)
    ]


def test_select_cutoff_matches_sweep(table):
    rng = np.random.default_rng(17)
    for _ in range(100):
        train = _random_train(rng, int(rng.integers(2, 40)))
        scores = pews_scores(table, train).tolist()
        labels = [s.label for s in train]
        assert select_cutoff(table, train) == _sweep_cutoff(scores, labels)


def test_select_cutoff_separable(table):
    train = [_normal(hr=115, rr=45).model_copy(update={"label": 1, "patient_id": str(i)}) for i in range(3)]
    train += [_normal().model_copy(update={"label": -1, "patient_id": f"n{i}"}) for i in range(3)]
    assert select_cutoff(table, train) == 1


def test_select_cutoff_identical_scores(table):
    train = [_normal().model_copy(update={"label": y, "patient_id": str(i)}) for i, y in enumerate([1, 1, 1, -1, -1, -1])]
    cutoff = select_cutoff(table, train)
    assert cutoff == 0


def test_select_cutoff_requires_both_classes(table):
    train = [_normal().model_copy(update={"label": 1, "patient_id": str(i)}) for i in range(3)]
    with pytest.raises(SelectionError):
        select_cutoff(table, train)


def test_classify(table):
    baseline = PewsBaseline(table=table, cutoff=3)
    assert pews.classify(baseline, _normal(hr=115, rr=45)) == 1
    assert pews.classify(baseline, _normal(rr=45)) == -1
    always = baseline.model_copy(update={"cutoff": 0})
    assert pews.classify(always, _normal()) == 1
    with pytest.raises(ValidationError):
        PewsBaseline(table=table, cutoff=-1)
