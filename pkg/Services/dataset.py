# Services/dataset.py
"""
Servicio de datos: de eventos de signos vitales a snapshots de features.

Operaciones:
- Derivar features (presión de pulso, PAM aproximada, shock index)
- Asignar grupos de edad
- Extraer el snapshot de la última medición dentro de una ventana
- Construir la cohorte balanceada (traslado / no traslado)
- Particiones train/test y k-fold disjuntas por paciente
- Lectura y escritura de los CSV de eventos, encuentros y snapshots
"""
from __future__ import annotations
import bisect
import logging
import math
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from Services.errors import DataError, InputError, RangeError, SplitError

logger = logging.getLogger(__name__)


MIN_AGE_YEARS = 1.0 / 12.0
MAX_AGE_YEARS = 20.0

FEATURE_NAMES: Tuple[str, ...] = ("hr", "o2", "rr", "temp", "dbp", "sbp", "age", "pp", "map", "si")
AGE_INDEX = FEATURE_NAMES.index("age")
N_FEATURES = len(FEATURE_NAMES)
SNAPSHOT_COLUMNS: Tuple[str, ...] = FEATURE_NAMES + ("label", "encounter_id", "patient_id")

EVENT_COLUMNS = ("encounter_id", "patient_id", "time", "vital", "value")
ENCOUNTER_COLUMNS = ("encounter_id", "patient_id", "age_years", "transferred", "transfer_time")


# ------------------------------------------------------
#   MODELOS
# ------------------------------------------------------

class Vital(str, Enum):
    HR = "HR"
    O2 = "O2"
    RR = "RR"
    TEMP = "Temp"
    DBP = "dBP"
    SBP = "sBP"


# vital -> nombre del campo en FeatureSnapshot
VITAL_FIELDS: Dict[Vital, str] = {
    Vital.HR: "hr",
    Vital.O2: "o2",
    Vital.RR: "rr",
    Vital.TEMP: "temp",
    Vital.DBP: "dbp",
    Vital.SBP: "sbp",
}


def _as_utc(value: datetime) -> datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


class VitalEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    encounter_id: str
    patient_id: str
    time: datetime
    vital: Vital
    value: float

    @field_validator("time")
    @classmethod
    def ensure_utc(cls, v: datetime) -> datetime:
        return _as_utc(v)

    @model_validator(mode="after")
    def check_value(self) -> "VitalEvent":
        if not math.isfinite(self.value):
            raise ValueError(f"valor no finito para {self.vital.value}")
        if self.vital is Vital.O2 and not 0.0 <= self.value <= 100.0:
            raise ValueError(f"saturación O2 fuera de [0, 100]: {self.value}")
        return self


class Encounter(BaseModel):
    model_config = ConfigDict(frozen=True)

    encounter_id: str
    patient_id: str
    age: float
    transferred: bool
    transfer_time: Optional[datetime] = None
    events: Tuple[VitalEvent, ...] = ()

    @field_validator("transfer_time")
    @classmethod
    def ensure_utc(cls, v: Optional[datetime]) -> Optional[datetime]:
        return _as_utc(v) if v is not None else None

    @field_validator("events")
    @classmethod
    def sort_events(cls, v: Tuple[VitalEvent, ...]) -> Tuple[VitalEvent, ...]:
        return tuple(sorted(v, key=lambda ev: ev.time))

    @model_validator(mode="after")
    def check_invariants(self) -> "Encounter":
        if not MIN_AGE_YEARS <= self.age < MAX_AGE_YEARS:
            raise ValueError(f"edad fuera de la cohorte [1/12, 20): {self.age}")
        if self.transferred != (self.transfer_time is not None):
            raise ValueError("transfer_time debe existir si y solo si transferred")
        return self

    @property
    def first_time(self) -> Optional[datetime]:
        return self.events[0].time if self.events else None

    @property
    def last_time(self) -> Optional[datetime]:
        return self.events[-1].time if self.events else None


class FeatureSnapshot(BaseModel):
    """Una instancia: 10 features (None = faltante), etiqueta e identificadores."""

    model_config = ConfigDict(frozen=True)

    hr: Optional[float] = None
    o2: Optional[float] = None
    rr: Optional[float] = None
    temp: Optional[float] = None
    dbp: Optional[float] = None
    sbp: Optional[float] = None
    age: float
    pp: Optional[float] = None
    map: Optional[float] = None
    si: Optional[float] = None
    label: Optional[Literal[1, -1]] = None
    encounter_id: Optional[str] = None
    patient_id: Optional[str] = None

    @model_validator(mode="after")
    def check_derived(self) -> "FeatureSnapshot":
        bp_present = self.sbp is not None and self.dbp is not None
        if (self.pp is not None) != bp_present or (self.map is not None) != bp_present:
            raise ValueError("pp/map presentes si y solo si sbp y dbp presentes")
        si_present = self.hr is not None and self.sbp is not None and self.sbp != 0
        if (self.si is not None) != si_present:
            raise ValueError("si presente si y solo si hr y sbp (no cero) presentes")
        if bp_present and not math.isclose(self.pp, self.sbp - self.dbp, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError("pp debe ser sbp - dbp")
        return self

    def features(self) -> Tuple[Optional[float], ...]:
        return tuple(getattr(self, name) for name in FEATURE_NAMES)

    def vector(self) -> np.ndarray:
        """Vector de 10 features con NaN como marcador de faltante."""
        return np.array([np.nan if v is None else v for v in self.features()], dtype=float)


def _default_age_bins() -> Tuple[Tuple[float, float], ...]:
    # trimestres durante el primer año, luego tramos de 1.5 años; el último se trunca en 20
    edges = [0.0, 0.25, 0.5, 0.75, 1.0]
    while edges[-1] + 1.5 < MAX_AGE_YEARS:
        edges.append(edges[-1] + 1.5)
    edges.append(MAX_AGE_YEARS)
    return tuple(zip(edges[:-1], edges[1:]))


class AgeBins(BaseModel):
    model_config = ConfigDict(frozen=True)

    bins: Tuple[Tuple[float, float], ...] = Field(default_factory=_default_age_bins)

    @field_validator("bins")
    @classmethod
    def check_partition(cls, v: Tuple[Tuple[float, float], ...]) -> Tuple[Tuple[float, float], ...]:
        if not v:
            raise ValueError("se requiere al menos un grupo de edad")
        if v[0][0] != 0.0 or v[-1][1] != MAX_AGE_YEARS:
            raise ValueError("los grupos de edad deben cubrir [0, 20)")
        for (lo, hi), (next_lo, _) in zip(v, v[1:]):
            if hi != next_lo:
                raise ValueError(f"grupos de edad no contiguos en {hi}")
        if any(lo >= hi for lo, hi in v):
            raise ValueError("cada grupo de edad debe cumplir lo < hi")
        return v

    def __len__(self) -> int:
        return len(self.bins)

    @property
    def lower_edges(self) -> List[float]:
        return [lo for lo, _ in self.bins]


# ------------------------------------------------------
#   FEATURES
# ------------------------------------------------------

def derive_features(
    hr: Optional[float],
    o2: Optional[float],
    rr: Optional[float],
    temp: Optional[float],
    dbp: Optional[float],
    sbp: Optional[float],
    age: float,
) -> FeatureSnapshot:
    """
    Construye un snapshot sin etiqueta a partir de los seis signos vitales.

    Args:
        hr, o2, rr, temp, dbp, sbp: valores medidos (None = faltante)
        age: edad en años, dentro de [1/12, 20)

    Returns:
        FeatureSnapshot con pp = sBP - dBP, map = (2/3)dBP + (1/3)sBP
        y si = HR / sBP; cada derivada falta si falta alguna entrada.
    """
    vitals = {"hr": hr, "o2": o2, "rr": rr, "temp": temp, "dbp": dbp, "sbp": sbp}
    for name, value in vitals.items():
        if value is not None and not math.isfinite(value):
            raise InputError(f"valor no finito para {name}: {value}")
    if age is None or not math.isfinite(age):
        raise InputError(f"edad no finita: {age}")
    if not MIN_AGE_YEARS <= age < MAX_AGE_YEARS:
        raise RangeError(f"edad fuera de la cohorte [1/12, 20): {age}")

    pp = map_ = si = None
    if sbp is not None and dbp is not None:
        pp = sbp - dbp
        map_ = (2.0 * dbp + sbp) / 3.0
    if hr is not None and sbp is not None and sbp != 0:
        si = hr / sbp

    return FeatureSnapshot(**vitals, age=age, pp=pp, map=map_, si=si)


def age_bin(age: float, bins: Optional[AgeBins] = None) -> int:
    """Índice i tal que bins[i].lo <= age < bins[i].hi."""
    bins = bins or DEFAULT_AGE_BINS
    if not 0.0 <= age < MAX_AGE_YEARS:
        raise RangeError(f"edad fuera de [0, 20): {age}")
    return bisect.bisect_right(bins.lower_edges, age) - 1


def age_bin_indices(ages: np.ndarray, bins: Optional[AgeBins] = None) -> np.ndarray:
    """Versión vectorizada de `age_bin` (sin chequeo de rango)."""
    bins = bins or DEFAULT_AGE_BINS
    edges = np.asarray(bins.lower_edges, dtype=float)
    idx = np.searchsorted(edges, ages, side="right") - 1
    return np.clip(idx, 0, len(bins) - 1)


DEFAULT_AGE_BINS = AgeBins()


# ------------------------------------------------------
#   SNAPSHOTS / COHORTE
# ------------------------------------------------------

def extract_snapshot(
    encounter: Encounter,
    window_end: Optional[datetime],
    window_hours: float = 6.0,
) -> FeatureSnapshot:
    """
    Snapshot con el último valor de cada vital en [window_end - window_hours, window_end].
    Una ventana vacía produce un snapshot con todo faltante salvo la edad.
    """
    last: Dict[Vital, float] = {}
    if window_end is not None:
        window_end = _as_utc(window_end)
        start = window_end - timedelta(hours=window_hours)
        for event in encounter.events:
            if event.time < start:
                continue
            if event.time > window_end:
                break
            last[event.vital] = event.value

    snapshot = derive_features(
        **{field: last.get(vital) for vital, field in VITAL_FIELDS.items()},
        age=encounter.age,
    )
    return snapshot.model_copy(
        update={
            "label": 1 if encounter.transferred else -1,
            "encounter_id": encounter.encounter_id,
            "patient_id": encounter.patient_id,
        }
    )


def positive_window_end(encounter: Encounter, lead_hours: float = 2.0) -> datetime:
    """Fin de la ventana de un traslado: T - lead_hours."""
    return encounter.transfer_time - timedelta(hours=lead_hours)


def negative_window_end(
    encounter: Encounter,
    rng: np.random.Generator,
    window_hours: float = 6.0,
) -> Optional[datetime]:
    """
    Fin de una ventana aleatoria de `window_hours` dentro del rango de eventos.
    Si la estancia es más corta que la ventana se usa la estancia completa.
    """
    first, last = encounter.first_time, encounter.last_time
    if first is None:
        return None
    span = (last - first).total_seconds()
    window = window_hours * 3600.0
    if span <= window:
        return last
    offset = rng.uniform(0.0, span - window)
    return first + timedelta(seconds=offset + window)


def _sample_age_matched(
    positives: Sequence[Encounter],
    negatives: Sequence[Encounter],
    rng: np.random.Generator,
    bins: AgeBins,
) -> List[Encounter]:
    pools: Dict[int, List[int]] = {}
    for i, enc in enumerate(negatives):
        pools.setdefault(age_bin(enc.age, bins), []).append(i)
    used = set()
    chosen: List[Encounter] = []
    for enc in positives:
        pool = [i for i in pools.get(age_bin(enc.age, bins), []) if i not in used]
        if not pool:
            logger.warning("Sin negativo del mismo grupo de edad para %s; se usa cualquiera", enc.encounter_id)
            pool = [i for i in range(len(negatives)) if i not in used]
        pick = pool[int(rng.integers(len(pool)))]
        used.add(pick)
        chosen.append(negatives[pick])
    return chosen


def build_cohort(
    encounters: Sequence[Encounter],
    seed: int,
    *,
    window_hours: float = 6.0,
    lead_hours: float = 2.0,
    match_age: bool = False,
    bins: Optional[AgeBins] = None,
) -> List[FeatureSnapshot]:
    """
    Construye la cohorte balanceada.

    Args:
        encounters: encuentros con sus eventos
        seed: semilla del muestreo de negativos y de sus ventanas
        window_hours: largo de la ventana de observación
        lead_hours: horas entre el fin de la ventana positiva y el traslado
        match_age: muestrear negativos dentro del mismo grupo de edad
        bins: grupos de edad para `match_age`

    Returns:
        Un snapshot por traslado y el mismo número de snapshots de encuentros
        sin traslado distintos, muestreados sin reemplazo.
    """
    positives = [enc for enc in encounters if enc.transferred]
    negatives = [enc for enc in encounters if not enc.transferred]
    if not positives:
        raise DataError("la cohorte no contiene encuentros con traslado")
    if len(negatives) < len(positives):
        raise DataError(
            f"hay {len(negatives)} encuentros sin traslado para {len(positives)} traslados"
        )

    rng = np.random.default_rng(seed)
    if match_age:
        chosen = _sample_age_matched(positives, negatives, rng, bins or DEFAULT_AGE_BINS)
    else:
        picks = rng.choice(len(negatives), size=len(positives), replace=False)
        chosen = [negatives[int(i)] for i in picks]

    cohort = [
        extract_snapshot(enc, positive_window_end(enc, lead_hours), window_hours)
        for enc in positives
    ]
    for enc in chosen:
        cohort.append(extract_snapshot(enc, negative_window_end(enc, rng, window_hours), window_hours))

    logger.info("Cohorte construida: %d traslados, %d controles", len(positives), len(chosen))
    return cohort


# ------------------------------------------------------
#   PARTICIONES
# ------------------------------------------------------

def _patient_groups(cohort: Sequence[FeatureSnapshot]) -> Dict[str, List[int]]:
    groups: Dict[str, List[int]] = {}
    for i, snap in enumerate(cohort):
        key = snap.patient_id if snap.patient_id is not None else f"__row{i}"
        groups.setdefault(key, []).append(i)
    return groups


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _class_target(test_fraction: float, count: int) -> int:
    target = _round_half_up(test_fraction * count)
    return max(target, 1) if count >= 2 else target


def split_train_test(
    cohort: Sequence[FeatureSnapshot],
    test_fraction: float = 0.2,
    seed: int = 0,
) -> Tuple[List[FeatureSnapshot], List[FeatureSnapshot]]:
    """
    Partición estratificada y disjunta por paciente.

    Los pacientes se recorren en orden aleatorio (semilla) y pasan completos a test
    mientras ninguna clase supere su cuota; el resto queda en train. Una clase con
    al menos dos instancias tiene cuota mínima de 1.
    """
    if not 0.0 < test_fraction < 1.0:
        raise SplitError(f"test_fraction debe estar en (0, 1): {test_fraction}")
    groups = _patient_groups(cohort)
    if len(groups) < 2:
        raise SplitError("se necesitan al menos dos pacientes para separar train/test")

    n_pos = sum(1 for s in cohort if s.label == 1)
    n_neg = len(cohort) - n_pos
    target_pos = _class_target(test_fraction, n_pos)
    target_neg = _class_target(test_fraction, n_neg)

    rng = np.random.default_rng(seed)
    keys = list(groups)
    test_keys = set()
    test_pos = test_neg = 0
    for gi in rng.permutation(len(keys)):
        members = groups[keys[gi]]
        pos = sum(1 for i in members if cohort[i].label == 1)
        neg = len(members) - pos
        if test_pos + pos <= target_pos and test_neg + neg <= target_neg:
            test_keys.add(keys[gi])
            test_pos += pos
            test_neg += neg

    test_rows = {i for key in test_keys for i in groups[key]}
    train = [s for i, s in enumerate(cohort) if i not in test_rows]
    test = [s for i, s in enumerate(cohort) if i in test_rows]
    if not train or not test:
        raise SplitError("la partición dejó train o test vacío")

    logger.info(
        "Split train/test: %d/%d (test: %d traslados, %d controles)",
        len(train), len(test), test_pos, test_neg,
    )
    return train, test


def kfold(
    cohort: Sequence[FeatureSnapshot],
    k: int = 10,
    seed: int = 0,
) -> List[Tuple[List[FeatureSnapshot], List[FeatureSnapshot]]]:
    """
    k pares (train, validación) disjuntos por paciente y estratificados.

    Los grupos de paciente se intercalan por clase y cada uno va al fold más
    pequeño; empates al fold con menos instancias de su clase, luego al de menor índice.
    """
    if k < 2:
        raise SplitError(f"k debe ser al menos 2: {k}")
    if len(cohort) < k:
        raise SplitError(f"la cohorte ({len(cohort)}) es menor que k={k}")
    groups = _patient_groups(cohort)
    if k > len(groups):
        raise SplitError(f"k={k} supera el número de pacientes ({len(groups)})")

    rng = np.random.default_rng(seed)
    pos_groups, neg_groups = [], []
    for members in groups.values():
        pos = sum(1 for i in members if cohort[i].label == 1)
        (pos_groups if 2 * pos >= len(members) else neg_groups).append(members)
    pos_groups = [pos_groups[i] for i in rng.permutation(len(pos_groups))]
    neg_groups = [neg_groups[i] for i in rng.permutation(len(neg_groups))]

    ordered: List[Tuple[int, List[int]]] = []
    for i in range(max(len(pos_groups), len(neg_groups))):
        if i < len(pos_groups):
            ordered.append((1, pos_groups[i]))
        if i < len(neg_groups):
            ordered.append((-1, neg_groups[i]))

    sizes = [0] * k
    class_counts = {1: [0] * k, -1: [0] * k}
    assignment = [0] * len(cohort)
    for label, members in ordered:
        fold = min(range(k), key=lambda f: (sizes[f], class_counts[label][f], f))
        sizes[fold] += len(members)
        for i in members:
            assignment[i] = fold
            class_counts[1 if cohort[i].label == 1 else -1][fold] += 1

    folds = []
    for fold in range(k):
        train = [s for i, s in enumerate(cohort) if assignment[i] != fold]
        valid = [s for i, s in enumerate(cohort) if assignment[i] == fold]
        folds.append((train, valid))
    logger.debug("k-fold (k=%d): tamaños %s", k, sizes)
    return folds


# ------------------------------------------------------
#   MATRICES
# ------------------------------------------------------

def to_matrix(snapshots: Sequence[FeatureSnapshot]) -> np.ndarray:
    """Matriz (n, 10) con NaN como faltante."""
    if not snapshots:
        return np.empty((0, N_FEATURES), dtype=float)
    return np.vstack([snap.vector() for snap in snapshots])


def labels_array(snapshots: Sequence[FeatureSnapshot]) -> np.ndarray:
    """Etiquetas +1/-1; falla si algún snapshot no tiene etiqueta."""
    labels = [snap.label for snap in snapshots]
    if any(label is None for label in labels):
        raise DataError("hay snapshots sin etiqueta")
    return np.asarray(labels, dtype=int)


# ------------------------------------------------------
#   CSV
# ------------------------------------------------------

def _read_csv(path: Path | str, columns: Sequence[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: CSV ilegible ({exc})") from exc
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: faltan columnas {', '.join(missing)}", line=1)
    return frame


def _optional_float(raw: str, *, line: int, column: str) -> Optional[float]:
    raw = raw.strip()
    if raw == "":
        return None
    try:
        return float(raw)
    except ValueError:
        raise DataError(f"valor no numérico en '{column}': {raw!r}", line=line) from None


def _format_time(value: datetime) -> str:
    return _as_utc(value).isoformat().replace("+00:00", "Z")


def read_events_csv(path: Path | str) -> Dict[str, List[VitalEvent]]:
    """Lee el CSV de eventos agrupado por encounter_id (líneas numeradas desde 1 = header)."""
    frame = _read_csv(path, EVENT_COLUMNS)
    grouped: Dict[str, List[VitalEvent]] = {}
    for offset, row in enumerate(frame[list(EVENT_COLUMNS)].itertuples(index=False)):
        line = offset + 2
        try:
            event = VitalEvent(
                encounter_id=row.encounter_id,
                patient_id=row.patient_id,
                time=row.time,
                vital=row.vital,
                value=row.value,
            )
        except ValidationError as exc:
            raise DataError(_validation_message(exc), line=line) from None
        grouped.setdefault(event.encounter_id, []).append(event)
    logger.info("Leídos %d eventos de %s", len(frame), path)
    return grouped


def read_encounters_csv(encounters_path: Path | str, events_path: Path | str) -> List[Encounter]:
    """Une el CSV de encuentros con sus eventos."""
    events = read_events_csv(events_path)
    frame = _read_csv(encounters_path, ENCOUNTER_COLUMNS)
    encounters: List[Encounter] = []
    for offset, row in enumerate(frame[list(ENCOUNTER_COLUMNS)].itertuples(index=False)):
        line = offset + 2
        try:
            encounters.append(
                Encounter(
                    encounter_id=row.encounter_id,
                    patient_id=row.patient_id,
                    age=row.age_years,
                    transferred=row.transferred,
                    transfer_time=row.transfer_time.strip() or None,
                    events=tuple(events.pop(row.encounter_id, [])),
                )
            )
        except ValidationError as exc:
            raise DataError(_validation_message(exc), line=line) from None
    if events:
        logger.warning("%d encuentros con eventos no figuran en %s; se ignoran", len(events), encounters_path)
    logger.info("Leídos %d encuentros de %s", len(encounters), encounters_path)
    return encounters


def _validation_message(exc: ValidationError) -> str:
    first = exc.errors()[0]
    where = ".".join(str(part) for part in first.get("loc", ())) or "fila"
    return f"{where}: {first.get('msg', 'valor inválido')}"


def write_events_csv(encounters: Sequence[Encounter], path: Path | str) -> None:
    rows = [
        (ev.encounter_id, ev.patient_id, _format_time(ev.time), ev.vital.value, ev.value)
        for enc in encounters
        for ev in enc.events
    ]
    pd.DataFrame(rows, columns=list(EVENT_COLUMNS)).to_csv(path, index=False)


def write_encounters_csv(encounters: Sequence[Encounter], path: Path | str) -> None:
    rows = [
        (
            enc.encounter_id,
            enc.patient_id,
            enc.age,
            "true" if enc.transferred else "false",
            _format_time(enc.transfer_time) if enc.transfer_time is not None else "",
        )
        for enc in encounters
    ]
    pd.DataFrame(rows, columns=list(ENCOUNTER_COLUMNS)).to_csv(path, index=False)


def write_snapshots_csv(snapshots: Sequence[FeatureSnapshot], path: Path | str) -> None:
    """Una fila por instancia; celda vacía = faltante."""
    def cell(value):
        return "" if value is None else value

    rows = [
        [cell(v) for v in snap.features()]
        + [cell(snap.label), cell(snap.encounter_id), cell(snap.patient_id)]
        for snap in snapshots
    ]
    frame = pd.DataFrame(rows, columns=list(SNAPSHOT_COLUMNS), dtype=object)
    frame.to_csv(path, index=False)


def read_snapshots_csv(path: Path | str) -> List[FeatureSnapshot]:
    frame = _read_csv(path, SNAPSHOT_COLUMNS)
    snapshots: List[FeatureSnapshot] = []
    for offset, row in enumerate(frame[list(SNAPSHOT_COLUMNS)].itertuples(index=False)):
        line = offset + 2
        values = {
            name: _optional_float(getattr(row, name), line=line, column=name)
            for name in FEATURE_NAMES
        }
        label = row.label.strip()
        try:
            snapshots.append(
                FeatureSnapshot(
                    **values,
                    label=int(float(label)) if label else None,
                    encounter_id=row.encounter_id or None,
                    patient_id=row.patient_id or None,
                )
            )
        except (ValidationError, ValueError) as exc:
            message = _validation_message(exc) if isinstance(exc, ValidationError) else str(exc)
            raise DataError(message, line=line) from None
    logger.info("Leídos %d snapshots de %s", len(snapshots), path)
    return snapshots
