from __future__ import annotations
import math
from datetime import timedelta

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import T0, encounter, event, snap
from Services.dataset import (
    DEFAULT_AGE_BINS,
    AgeBins,
    Encounter,
    FeatureSnapshot,
    Vital,
    VitalEvent,
    age_bin,
    build_cohort,
    derive_features,
    extract_snapshot,
    kfold,
    read_encounters_csv,
    read_events_csv,
    read_snapshots_csv,
    split_train_test,
    to_matrix,
    write_events_csv,
    write_encounters_csv,
    write_snapshots_csv,
)
from Services.errors import DataError, InputError, RangeError, SplitError


# ------------------------------------------------------
#   derive_features
# ------------------------------------------------------

def test_derive_features_arithmetic():
    s = derive_features(hr=120, o2=None, rr=None, temp=None, dbp=60, sbp=100, age=3)
    assert s.pp == 40
    assert s.map == pytest.approx(73.3333333, abs=1e-6)
    assert s.si == pytest.approx(1.2)
    assert s.label is None


def test_derived_features_missing_when_inputs_missing():
    s = derive_features(hr=120, o2=97, rr=30, temp=37, dbp=None, sbp=100, age=3)
    assert s.pp is None and s.map is None
    assert s.si == pytest.approx(1.2)

    s = derive_features(hr=None, o2=None, rr=None, temp=None, dbp=60, sbp=100, age=3)
    assert s.si is None and s.pp == 40


def test_shock_index_missing_when_sbp_zero():
    s = derive_features(hr=100, o2=None, rr=None, temp=None, dbp=0, sbp=0, age=3)
    assert s.si is None
    assert s.pp == 0


def test_derive_features_errors():
    with pytest.raises(InputError):
        derive_features(hr=float("nan"), o2=None, rr=None, temp=None, dbp=None, sbp=None, age=3)
    with pytest.raises(InputError):
        derive_features(hr=None, o2=None, rr=float("inf"), temp=None, dbp=None, sbp=None, age=3)
    with pytest.raises(RangeError):
        derive_features(hr=None, o2=None, rr=None, temp=None, dbp=None, sbp=None, age=20.0)
    with pytest.raises(RangeError):
        derive_features(hr=None, o2=None, rr=None, temp=None, dbp=None, sbp=None, age=0.05)


def test_snapshot_rejects_inconsistent_pulse_pressure():
    with pytest.raises(ValidationError):
        FeatureSnapshot(age=3, dbp=60, sbp=100, pp=10, map=73.3)
    with pytest.raises(ValidationError):
        FeatureSnapshot(age=3, hr=90)


def test_vector_uses_nan_for_missing():
    v = snap(hr=100, age=2).vector()
    assert v.shape == (10,)
    assert v[0] == 100 and v[6] == 2
    assert np.isnan(v[1]) and np.isnan(v[9])


# ------------------------------------------------------
#   Age bins
# ------------------------------------------------------

def test_default_age_bins_partition():
    bins = DEFAULT_AGE_BINS.bins
    assert len(bins) == 17
    assert bins[0] == (0.0, 0.25)
    assert bins[4] == (1.0, 2.5)
    assert bins[-1] == (19.0, 20.0)
    assert all(hi == next_lo for (_, hi), (next_lo, _) in zip(bins, bins[1:]))


@pytest.mark.parametrize(
    "age,expected",
    [(1 / 12, 0), (0.25, 1), (0.99, 3), (1.0, 4), (2.49, 4), (2.5, 5), (19.99, 16)],
)
def test_age_bin(age, expected):
    assert age_bin(age) == expected


def test_every_age_maps_to_one_bin():
    for age in np.arange(1 / 12, 20, 0.05):
        i = age_bin(float(age))
        lo, hi = DEFAULT_AGE_BINS.bins[i]
        assert lo <= age < hi


def test_age_bins_reject_gap():
    with pytest.raises(ValidationError):
        AgeBins(bins=((0.0, 1.0), (2.0, 20.0)))
    with pytest.raises(ValidationError):
        AgeBins(bins=((0.0, 1.0), (1.0, 19.0)))


# ------------------------------------------------------
#   Domain types
# ------------------------------------------------------

def test_vital_event_invariants():
    with pytest.raises(ValidationError):
        event("E1", 0, Vital.O2, 101)
    with pytest.raises(ValidationError):
        VitalEvent(encounter_id="E1", patient_id="P1", time="not-a-time", vital="HR", value=80)


def test_encounter_invariants():
    with pytest.raises(ValidationError):
        Encounter(encounter_id="E1", patient_id="P1", age=5, transferred=True)
    with pytest.raises(ValidationError):
        encounter("E1", age=0.01)
    enc = encounter("E1", events=(event("E1", 3, Vital.HR, 90), event("E1", 1, Vital.HR, 80)))
    assert [ev.value for ev in enc.events] == [80, 90]


# ------------------------------------------------------
#   Snapshots
# ------------------------------------------------------

def test_extract_snapshot_takes_last_value_in_window():
    enc = encounter(
        "E1",
        events=(
            event("E1", 0.0, Vital.HR, 70),    # fuera de la ventana [2, 8]
            event("E1", 2.0, Vital.HR, 80),    # borde inicial incluido
            event("E1", 5.0, Vital.HR, 90),
            event("E1", 6.0, Vital.SBP, 100),
            event("E1", 6.5, Vital.DBP, 60),
            event("E1", 8.0, Vital.RR, 30),    # borde final incluido
            event("E1", 9.0, Vital.HR, 200),   # posterior
        ),
    )
    s = extract_snapshot(enc, T0 + timedelta(hours=8), window_hours=6)
    assert s.hr == 90 and s.sbp == 100 and s.dbp == 60 and s.rr == 30
    assert s.o2 is None and s.temp is None
    assert s.pp == 40 and s.si == pytest.approx(0.9)
    assert s.label == -1 and s.encounter_id == "E1"


def test_extract_snapshot_empty_window():
    enc = encounter("E1", events=(event("E1", 0.0, Vital.HR, 70),))
    s = extract_snapshot(enc, T0 + timedelta(hours=20), window_hours=6)
    assert s.features() == (None,) * 6 + (5.0,) + (None,) * 3
    s = extract_snapshot(enc, None)
    assert s.hr is None and s.age == 5.0


def _cohort_encounters(n_pos=3, n_neg=5):
    encs = []
    for i in range(n_pos):
        eid = f"T{i}"
        encs.append(
            encounter(
                eid,
                transfer_hours=20,
                events=(event(eid, 15, Vital.HR, 150), event(eid, 19, Vital.HR, 190)),
            )
        )
    for i in range(n_neg):
        eid = f"N{i}"
        encs.append(encounter(eid, age=1 + i, events=(event(eid, 1, Vital.HR, 90), event(eid, 30, Vital.HR, 95))))
    return encs


def test_build_cohort_is_balanced():
    cohort = build_cohort(_cohort_encounters(), seed=1)
    labels = [s.label for s in cohort]
    assert len(cohort) == 6
    assert labels.count(1) == 3 and labels.count(-1) == 3
    negatives = [s.encounter_id for s in cohort if s.label == -1]
    assert len(set(negatives)) == 3


def test_positive_window_ends_before_transfer():
    cohort = build_cohort(_cohort_encounters(), seed=1)
    for s in cohort:
        if s.label == 1:
            # el evento a T-1h cae después del fin de ventana (T-2h)
            assert s.hr == 150


def test_build_cohort_is_deterministic():
    a = build_cohort(_cohort_encounters(), seed=5)
    b = build_cohort(_cohort_encounters(), seed=5)
    assert [s.model_dump() for s in a] == [s.model_dump() for s in b]


def test_build_cohort_errors():
    with pytest.raises(DataError):
        build_cohort(_cohort_encounters(n_pos=0), seed=1)
    with pytest.raises(DataError):
        build_cohort(_cohort_encounters(n_pos=3, n_neg=2), seed=1)


def test_build_cohort_age_matched():
    encs = [
        encounter("T0", age=0.5, transfer_hours=10, events=(event("T0", 5, Vital.HR, 150),)),
        encounter("T1", age=15.0, transfer_hours=10, events=(event("T1", 5, Vital.HR, 150),)),
        encounter("N0", age=0.55, events=(event("N0", 5, Vital.HR, 90),)),
        encounter("N1", age=15.2, events=(event("N1", 5, Vital.HR, 90),)),
        encounter("N2", age=8.0, events=(event("N2", 5, Vital.HR, 90),)),
        encounter("N3", age=3.0, events=(event("N3", 5, Vital.HR, 90),)),
    ]
    for seed in range(10):
        cohort = build_cohort(encs, seed=seed, match_age=True)
        assert sorted(s.encounter_id for s in cohort if s.label == -1) == ["N0", "N1"]


# ------------------------------------------------------
#   Splits
# ------------------------------------------------------

def test_split_train_test_hygiene(small_cohort):
    n_pos = sum(1 for s in small_cohort if s.label == 1)
    n_neg = len(small_cohort) - n_pos
    for seed in range(50):
        train, test = split_train_test(small_cohort, 0.2, seed)
        assert len(train) + len(test) == len(small_cohort)
        assert not {s.patient_id for s in train} & {s.patient_id for s in test}
        test_pos = sum(1 for s in test if s.label == 1)
        assert abs(test_pos - 0.2 * n_pos) <= 1
        assert abs((len(test) - test_pos) - 0.2 * n_neg) <= 1


def test_split_train_test_errors(four_patients):
    with pytest.raises(SplitError):
        split_train_test(four_patients, 0.0)
    same_patient = [s.model_copy(update={"patient_id": "x"}) for s in four_patients]
    with pytest.raises(SplitError):
        split_train_test(same_patient, 0.5)


def test_split_small_cohort_low_fraction_keeps_one_per_class():
    cohort = [snap(1, patient_id=f"p{i}", hr=140 + i) for i in range(3)]
    cohort += [snap(-1, patient_id=f"n{i}", hr=90 + i) for i in range(3)]
    for seed in range(10):
        train, test = split_train_test(cohort, 0.1, seed)
        assert sorted(s.label for s in test) == [-1, 1]
        assert len(train) == 4
        assert not {s.patient_id for s in train} & {s.patient_id for s in test}


def test_kfold_hygiene(small_cohort):
    for seed in range(50):
        folds = kfold(small_cohort, k=10, seed=seed)
        assert len(folds) == 10
        seen = []
        for train, valid in folds:
            assert not {s.patient_id for s in train} & {s.patient_id for s in valid}
            seen.extend(s.encounter_id for s in valid)
        assert sorted(seen) == sorted(s.encounter_id for s in small_cohort)


def test_kfold_two_folds_on_four_patients(four_patients):
    folds = kfold(four_patients, k=2, seed=0)
    for train, valid in folds:
        assert len(valid) == 2 and len(train) == 2
        assert sorted(s.label for s in valid) == [-1, 1]


def test_kfold_errors(four_patients):
    with pytest.raises(SplitError):
        kfold(four_patients, k=1)
    with pytest.raises(SplitError):
        kfold(four_patients, k=5)


def test_to_matrix_shape(four_patients):
    X = to_matrix(four_patients)
    assert X.shape == (4, 10)
    assert to_matrix([]).shape == (0, 10)


# ------------------------------------------------------
#   CSV
# ------------------------------------------------------

def test_events_csv_reports_line_of_bad_timestamp(tmp_path):
    path = tmp_path / "events.csv"
    path.write_text(
        "encounter_id,patient_id,time,vital,value\n"
        "E1,P1,2020-01-01T00:00:00Z,HR,90\n"
        "E1,P1,2020-01-01T01:00:00Z,HR,91\n"
        "E1,P1,yesterday,HR,92\n"
    )
    with pytest.raises(DataError) as info:
        read_events_csv(path)
    assert info.value.line == 4
    assert "4" in str(info.value)


def test_csv_missing_column(tmp_path):
    path = tmp_path / "events.csv"
    path.write_text("encounter_id,time,vital,value\nE1,2020-01-01T00:00:00Z,HR,90\n")
    with pytest.raises(DataError):
        read_events_csv(path)


def test_encounter_csv_round_trip(tmp_path):
    encs = _cohort_encounters(n_pos=1, n_neg=1)
    write_events_csv(encs, tmp_path / "events.csv")
    write_encounters_csv(encs, tmp_path / "encounters.csv")
    loaded = read_encounters_csv(tmp_path / "encounters.csv", tmp_path / "events.csv")
    assert [e.model_dump() for e in loaded] == [e.model_dump() for e in encs]


def test_snapshot_csv_keeps_missing_cells_empty(tmp_path):
    snaps = [snap(1, patient_id="a", hr=120, age=3), snap(-1, patient_id="b", sbp=100, dbp=60, age=0.5)]
    path = tmp_path / "snaps.csv"
    write_snapshots_csv(snaps, path)
    header, first = path.read_text().splitlines()[:2]
    assert header == "hr,o2,rr,temp,dbp,sbp,age,pp,map,si,label,encounter_id,patient_id"
    cells = first.split(",")
    assert float(cells[0]) == 120 and float(cells[6]) == 3
    assert cells[1:6] == [""] * 5 and cells[7:10] == [""] * 3
    loaded = read_snapshots_csv(path)
    assert loaded[0].o2 is None and loaded[1].pp == 40
    assert [s.label for s in loaded] == [1, -1]
    assert math.isclose(loaded[1].map, snaps[1].map)
