from __future__ import annotations
from datetime import datetime, timedelta, timezone
from typing import List, Optional

import numpy as np
import pytest

from Services.dataset import Encounter, FeatureSnapshot, Vital, VitalEvent, build_cohort, derive_features
from Services.synth import SynthConfig, generate

T0 = datetime(2020, 3, 1, 8, 0, tzinfo=timezone.utc)


def snap(
    label: Optional[int] = None,
    *,
    patient_id: Optional[str] = None,
    age: float = 5.0,
    **vitals,
) -> FeatureSnapshot:
    """Snapshot con derivadas consistentes; vitales no dados quedan faltantes."""
    values = {name: vitals.get(name) for name in ("hr", "o2", "rr", "temp", "dbp", "sbp")}
    base = derive_features(**values, age=age)
    return base.model_copy(update={"label": label, "patient_id": patient_id, "encounter_id": patient_id})


def event(encounter_id: str, hours: float, vital: Vital, value: float, patient_id: str = "P1") -> VitalEvent:
    return VitalEvent(
        encounter_id=encounter_id,
        patient_id=patient_id,
        time=T0 + timedelta(hours=hours),
        vital=vital,
        value=value,
    )


def encounter(
    encounter_id: str,
    *,
    patient_id: Optional[str] = None,
    age: float = 5.0,
    transfer_hours: Optional[float] = None,
    events: tuple = (),
) -> Encounter:
    return Encounter(
        encounter_id=encounter_id,
        patient_id=patient_id or f"P-{encounter_id}",
        age=age,
        transferred=transfer_hours is not None,
        transfer_time=T0 + timedelta(hours=transfer_hours) if transfer_hours is not None else None,
        events=events,
    )


def random_table(rng: np.random.Generator, n_rows: int, missing: float = 0.2) -> np.ndarray:
    """Tabla aleatoria de 10 columnas con edad siempre presente y valores repetidos."""
    X = rng.integers(0, 6, size=(n_rows, 10)).astype(float)
    X[:, 6] = rng.choice([0.1, 0.6, 2.0, 5.0, 13.0], size=n_rows)
    holes = rng.random((n_rows, 10)) < missing
    holes[:, 6] = False
    X[holes] = np.nan
    return X


@pytest.fixture(scope="session")
def small_cohort() -> List[FeatureSnapshot]:
    config = SynthConfig(n_encounters=600, transfer_prevalence=0.3, seed=3)
    return build_cohort(generate(config), seed=3)


@pytest.fixture
def four_patients() -> List[FeatureSnapshot]:
    return [
        snap(1, patient_id="a", hr=150, sbp=80, dbp=50, age=3),
        snap(1, patient_id="b", hr=140, sbp=85, dbp=55, age=6),
        snap(-1, patient_id="c", hr=100, sbp=105, dbp=65, age=3),
        snap(-1, patient_id="d", hr=95, sbp=110, dbp=70, age=6),
    ]
