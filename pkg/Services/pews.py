# Services/pews.py
"""
Bedside PEWS modificado (HR, sBP, RR, saturación O2).

Se eliminan los ítems de llenado capilar, esfuerzo respiratorio y
oxigenoterapia porque no forman parte de los signos vitales registrados.
La tabla de sub-scores se carga desde JSON (configs/pews_bedside.json).
"""
from __future__ import annotations
import bisect
import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from Services.dataset import MAX_AGE_YEARS, FeatureSnapshot, labels_array
from Services.errors import ConfigError
from Services.metrics import balanced_threshold

logger = logging.getLogger(__name__)

MODEL_VERSION = 1

# ítem de la tabla -> campo del snapshot
ITEM_FIELDS: Dict[str, str] = {"HR": "hr", "sBP": "sbp", "RR": "rr", "O2": "o2"}


# ------------------------------------------------------
#   TABLA
# ------------------------------------------------------

class PewsInterval(BaseModel):
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float
    score: int = Field(..., ge=0)


class PewsAgeBand(BaseModel):
    model_config = ConfigDict(frozen=True)

    lo_years: float
    hi_years: float
    intervals: Tuple[PewsInterval, ...]

    @model_validator(mode="after")
    def check_intervals(self) -> "PewsAgeBand":
        if self.lo_years >= self.hi_years:
            raise ValueError(f"grupo de edad vacío [{self.lo_years}, {self.hi_years})")
        _check_partition(
            [(iv.lo, iv.hi) for iv in self.intervals],
            f"intervalos del grupo [{self.lo_years}, {self.hi_years})",
        )
        return self

    def subscore(self, value: float) -> int:
        # fuera del rango plausible se usa el intervalo extremo
        idx = bisect.bisect_right([iv.lo for iv in self.intervals], value) - 1
        return self.intervals[max(idx, 0)].score

    @property
    def max_score(self) -> int:
        return max(iv.score for iv in self.intervals)


class PewsItem(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Literal["HR", "sBP", "RR", "O2"]
    age_bands: Tuple[PewsAgeBand, ...]

    @model_validator(mode="after")
    def check_bands(self) -> "PewsItem":
        spans = [(band.lo_years, band.hi_years) for band in self.age_bands]
        _check_partition(spans, f"grupos de edad de {self.name}")
        if spans[0][0] > 0.0 or spans[-1][1] < MAX_AGE_YEARS:
            raise ValueError(f"los grupos de edad de {self.name} deben cubrir [0, 20)")
        return self

    def band_for(self, age: float) -> PewsAgeBand:
        idx = bisect.bisect_right([band.lo_years for band in self.age_bands], age) - 1
        return self.age_bands[min(max(idx, 0), len(self.age_bands) - 1)]

    @property
    def max_score(self) -> int:
        return max(band.max_score for band in self.age_bands)


class PewsTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    items: Tuple[PewsItem, ...]

    @field_validator("items")
    @classmethod
    def unique_items(cls, v: Tuple[PewsItem, ...]) -> Tuple[PewsItem, ...]:
        names = [item.name for item in v]
        if len(set(names)) != len(names):
            raise ValueError("ítems PEWS repetidos")
        if not names:
            raise ValueError("la tabla PEWS no tiene ítems")
        return v

    def item(self, name: str) -> Optional[PewsItem]:
        for item in self.items:
            if item.name == name:
                return item
        return None

    @property
    def max_score(self) -> int:
        return sum(item.max_score for item in self.items)

    @classmethod
    def load(cls, path: Path | str) -> "PewsTable":
        """Carga y valida la tabla; cualquier hueco o solapamiento es ConfigError."""
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"tabla PEWS no encontrada: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"tabla PEWS con JSON inválido ({path}): {exc}") from exc
        try:
            table = cls.model_validate(raw)
        except ValidationError as exc:
            first = exc.errors()[0]
            raise ConfigError(f"tabla PEWS inválida ({path}): {first.get('msg')}") from exc
        logger.debug("Tabla PEWS cargada de %s (%d ítems)", path, len(table.items))
        return table


def _check_partition(spans: List[Tuple[float, float]], what: str) -> None:
    if not spans:
        raise ValueError(f"{what}: lista vacía")
    for lo, hi in spans:
        if lo >= hi:
            raise ValueError(f"{what}: intervalo vacío [{lo}, {hi})")
    for (_, hi), (next_lo, _) in zip(spans, spans[1:]):
        if next_lo > hi:
            raise ValueError(f"{what}: hueco entre {hi} y {next_lo}")
        if next_lo < hi:
            raise ValueError(f"{what}: solapamiento en [{next_lo}, {hi})")


class PewsBaseline(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["pews"] = "pews"
    version: int = MODEL_VERSION
    table: PewsTable
    cutoff: int = Field(..., ge=0)


# ------------------------------------------------------
#   SCORING
# ------------------------------------------------------

def item_subscore(table: PewsTable, item: str, value: Optional[float], age: float) -> int:
    """Sub-score del ítem para su grupo de edad; un valor faltante suma 0."""
    if value is None or np.isnan(value):
        return 0
    entry = table.item(item)
    if entry is None:
        return 0
    return entry.band_for(age).subscore(value)


def pews_score(table: PewsTable, x: FeatureSnapshot) -> int:
    return sum(
        item_subscore(table, item.name, getattr(x, ITEM_FIELDS[item.name]), x.age)
        for item in table.items
    )


def pews_scores(table: PewsTable, snapshots: Sequence[FeatureSnapshot]) -> np.ndarray:
    return np.array([pews_score(table, x) for x in snapshots], dtype=int)


def select_cutoff(table: PewsTable, train: Sequence[FeatureSnapshot]) -> int:
    """
    Punto de corte entero que mejor equilibra sensibilidad y especificidad.

    Barre c = 0..max(score)+1 con la regla "traslado si score >= c"; empates hacia
    mayor sensibilidad y luego menor c.

    Raises:
        SelectionError: si train tiene una sola clase
    """
    scores = pews_scores(table, train)
    top = int(scores.max()) if scores.size else 0
    cutoff = int(balanced_threshold(scores, labels_array(train), list(range(top + 2))))
    logger.info("PEWS: punto de corte %d (scores entre 0 y %d)", cutoff, top)
    return cutoff


def fit(table: PewsTable, train: Sequence[FeatureSnapshot]) -> PewsBaseline:
    return PewsBaseline(table=table, cutoff=select_cutoff(table, train))


def classify(baseline: PewsBaseline, x: FeatureSnapshot) -> int:
    return 1 if pews_score(baseline.table, x) >= baseline.cutoff else -1
