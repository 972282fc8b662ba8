# Services/synth.py
"""
Generador de cohortes sintéticas de encuentros pediátricos.

Cada encuentro tiene rondas de medición que llegan como un proceso de Poisson;
en cada ronda cada signo vital se registra o falta según su probabilidad de
missingness. Los encuentros con traslado derivan sus vitales (en unidades de
desviación estándar) durante las últimas horas antes del traslado y se miden
con más frecuencia en ese tramo.
"""
from __future__ import annotations
import bisect
import logging
import math
from datetime import datetime, timedelta, timezone
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from Services.dataset import MAX_AGE_YEARS, MIN_AGE_YEARS, Encounter, Vital, VitalEvent
from Services.errors import ConfigError

logger = logging.getLogger(__name__)

BASE_TIME = datetime(2015, 1, 1, tzinfo=timezone.utc)
VITAL_ORDER: Tuple[Vital, ...] = tuple(Vital)
SECONDS_PER_YEAR = 365 * 24 * 3600

# grupos de edad de las normas: <3m, 3-12m, 1-4a, 4-12a, 12-20a
DEFAULT_AGE_EDGES: Tuple[float, ...] = (0.0, 0.25, 1.0, 4.0, 12.0, MAX_AGE_YEARS)

# decimales con que se registra cada vital
VITAL_DECIMALS: Dict[Vital, int] = {
    Vital.HR: 0,
    Vital.O2: 0,
    Vital.RR: 0,
    Vital.TEMP: 1,
    Vital.DBP: 0,
    Vital.SBP: 0,
}


# ------------------------------------------------------
#   CONFIGURACIÓN
# ------------------------------------------------------

class VitalNorm(BaseModel):
    """Media y desviación estándar por grupo de edad."""

    model_config = ConfigDict(frozen=True)

    means: Tuple[float, ...]
    sds: Tuple[float, ...]

    @model_validator(mode="after")
    def check_lengths(self) -> "VitalNorm":
        if len(self.means) != len(self.sds):
            raise ValueError("means y sds deben tener el mismo largo")
        if any(sd <= 0 for sd in self.sds):
            raise ValueError("las desviaciones estándar deben ser positivas")
        return self


def _default_norms() -> Dict[Vital, VitalNorm]:
    return {
        Vital.HR: VitalNorm(means=(140, 130, 110, 90, 78), sds=(15, 14, 14, 12, 11)),
        Vital.O2: VitalNorm(means=(97.5,) * 5, sds=(1.5,) * 5),
        Vital.RR: VitalNorm(means=(45, 38, 28, 22, 16), sds=(8, 7, 5, 4, 3)),
        Vital.TEMP: VitalNorm(means=(37.0,) * 5, sds=(0.4,) * 5),
        Vital.DBP: VitalNorm(means=(42, 52, 58, 62, 68), sds=(6, 7, 7, 7, 8)),
        Vital.SBP: VitalNorm(means=(72, 90, 98, 105, 115), sds=(8, 9, 9, 10, 11)),
    }


def _default_drift() -> Dict[Vital, float]:
    return {
        Vital.HR: 1.5,
        Vital.O2: -1.5,
        Vital.RR: 1.5,
        Vital.TEMP: 0.8,
        Vital.DBP: -0.8,
        Vital.SBP: -1.0,
    }


def _default_missingness() -> Dict[Vital, float]:
    return {
        Vital.HR: 0.05,
        Vital.O2: 0.10,
        Vital.RR: 0.10,
        Vital.TEMP: 0.30,
        Vital.DBP: 0.15,
        Vital.SBP: 0.15,
    }


def _default_bounds() -> Dict[Vital, Tuple[float, float]]:
    return {
        Vital.HR: (20.0, 300.0),
        Vital.O2: (50.0, 100.0),
        Vital.RR: (4.0, 120.0),
        Vital.TEMP: (32.0, 43.0),
        Vital.DBP: (15.0, 150.0),
        Vital.SBP: (30.0, 250.0),
    }


class SynthConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_encounters: int = Field(1000, ge=1)
    transfer_prevalence: float = Field(0.026, gt=0.0, lt=1.0)
    age_edges: Tuple[float, ...] = DEFAULT_AGE_EDGES
    norms: Dict[Vital, VitalNorm] = Field(default_factory=_default_norms)
    drift_effects: Dict[Vital, float] = Field(default_factory=_default_drift)
    drift_hours: float = Field(8.0, gt=0.0)
    measurement_rate: float = Field(0.5, gt=0.0)   # rondas por hora
    monitoring_effect: float = Field(1.0, ge=0.0)  # aumento relativo de la tasa antes del traslado
    missingness: Dict[Vital, float] = Field(default_factory=_default_missingness)
    bounds: Dict[Vital, Tuple[float, float]] = Field(default_factory=_default_bounds)
    stay_hours: Tuple[float, float] = (12.0, 96.0)
    infant_fraction: float = Field(0.2, ge=0.0, le=1.0)
    repeat_patient_fraction: float = Field(0.1, ge=0.0, le=1.0)
    patient_offset_sd: float = Field(0.5, ge=0.0)
    measurement_noise_sd: float = Field(0.7, ge=0.0)
    facility_shift: Dict[Vital, float] = Field(default_factory=dict)
    seed: int = Field(7, ge=0)

    @field_validator("missingness")
    @classmethod
    def check_probabilities(cls, v: Dict[Vital, float]) -> Dict[Vital, float]:
        for vital, p in v.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"missingness de {vital.value} fuera de [0, 1]: {p}")
        return v

    @field_validator("age_edges")
    @classmethod
    def check_edges(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(v) < 2 or v[0] != 0.0 or v[-1] != MAX_AGE_YEARS:
            raise ValueError("age_edges debe ir de 0 a 20")
        if any(a >= b for a, b in zip(v, v[1:])):
            raise ValueError("age_edges debe ser estrictamente creciente")
        return v

    @field_validator("stay_hours")
    @classmethod
    def check_stay(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if not 0.0 < v[0] <= v[1]:
            raise ValueError("stay_hours debe cumplir 0 < min <= max")
        return v

    @model_validator(mode="after")
    def check_tables(self) -> "SynthConfig":
        n_bands = len(self.age_edges) - 1
        for vital in VITAL_ORDER:
            norm = self.norms.get(vital)
            if norm is None or len(norm.means) != n_bands:
                raise ValueError(f"norms de {vital.value} debe tener {n_bands} grupos de edad")
            if vital not in self.missingness:
                raise ValueError(f"falta la missingness de {vital.value}")
            lo, hi = self.bounds.get(vital, (0.0, -1.0))
            if lo >= hi:
                raise ValueError(f"bounds de {vital.value} inválidos")
        return self

    @classmethod
    def build(cls, **kwargs) -> "SynthConfig":
        """Como el constructor, pero traduce los errores de validación a ConfigError."""
        try:
            return cls(**kwargs)
        except ValidationError as exc:
            first = exc.errors()[0]
            field = ".".join(str(part) for part in first.get("loc", ())) or "config"
            raise ConfigError(f"SynthConfig inválida: {field}: {first.get('msg')}") from exc

    @property
    def n_transferred(self) -> int:
        return int(math.floor(self.n_encounters * self.transfer_prevalence + 0.5))

    def without_signal(self) -> "SynthConfig":
        """Misma cohorte sin deriva ni monitoreo intensificado (caso nulo)."""
        return self.model_copy(
            update={
                "drift_effects": {vital: 0.0 for vital in VITAL_ORDER},
                "monitoring_effect": 0.0,
            }
        )

    def band_index(self, age: float) -> int:
        return min(bisect.bisect_right(self.age_edges, age) - 1, len(self.age_edges) - 2)


# ------------------------------------------------------
#   GENERACIÓN
# ------------------------------------------------------

def _poisson_times(rng: np.random.Generator, rate: float, start: float, end: float) -> List[float]:
    times: List[float] = []
    t = start
    while True:
        t += rng.exponential(1.0 / rate)
        if t >= end:
            return times
        times.append(t)


def _round_times(config: SynthConfig, rng: np.random.Generator, stay: float, transferred: bool) -> List[float]:
    if not transferred:
        return _poisson_times(rng, config.measurement_rate, 0.0, stay)
    boost_start = max(0.0, stay - config.drift_hours)
    boosted_rate = config.measurement_rate * (1.0 + config.monitoring_effect)
    return (
        _poisson_times(rng, config.measurement_rate, 0.0, boost_start)
        + _poisson_times(rng, boosted_rate, boost_start, stay)
    )


def _draw_age(config: SynthConfig, rng: np.random.Generator) -> float:
    if rng.random() < config.infant_fraction:
        return float(rng.uniform(MIN_AGE_YEARS, 1.0))
    return float(rng.uniform(1.0, MAX_AGE_YEARS))


def _generate_encounter(
    config: SynthConfig,
    rng: np.random.Generator,
    *,
    encounter_id: str,
    patient_id: str,
    age: float,
    transferred: bool,
) -> Encounter:
    admit = BASE_TIME + timedelta(seconds=int(rng.integers(0, SECONDS_PER_YEAR)))
    stay = float(rng.uniform(*config.stay_hours))
    band = config.band_index(age)
    offsets = {
        vital: rng.normal(0.0, config.patient_offset_sd) + config.facility_shift.get(vital, 0.0)
        for vital in VITAL_ORDER
    }

    events: List[VitalEvent] = []
    for t in _round_times(config, rng, stay, transferred):
        when = admit + timedelta(seconds=int(t * 3600.0))
        # fracción de la deriva alcanzada: 0 al inicio del tramo, 1 en el traslado
        drift = max(0.0, 1.0 - (stay - t) / config.drift_hours) if transferred else 0.0
        for vital in VITAL_ORDER:
            if rng.random() < config.missingness[vital]:
                continue
            norm = config.norms[vital]
            z = offsets[vital] + rng.normal(0.0, config.measurement_noise_sd)
            z += config.drift_effects.get(vital, 0.0) * drift
            lo, hi = config.bounds[vital]
            value = round(float(np.clip(norm.means[band] + norm.sds[band] * z, lo, hi)), VITAL_DECIMALS[vital])
            events.append(
                VitalEvent(
                    encounter_id=encounter_id,
                    patient_id=patient_id,
                    time=when,
                    vital=vital,
                    value=value,
                )
            )

    return Encounter(
        encounter_id=encounter_id,
        patient_id=patient_id,
        age=age,
        transferred=transferred,
        transfer_time=admit + timedelta(seconds=int(stay * 3600.0)) if transferred else None,
        events=tuple(events),
    )


def generate(config: SynthConfig) -> List[Encounter]:
    """
    Genera `n_encounters` encuentros; floor(n * prevalencia + 0.5) con traslado.

    Determinista dada la semilla: la asignación de traslados y pacientes usa un
    generador maestro y cada encuentro recibe su propio generador derivado.

    Args:
        config: SynthConfig validada

    Returns:
        Lista de Encounter en orden de encounter_id
    """
    master_seq, encounter_seq = np.random.SeedSequence(config.seed).spawn(2)
    master = np.random.default_rng(master_seq)
    n = config.n_encounters

    transferred = np.zeros(n, dtype=bool)
    transferred[master.choice(n, size=config.n_transferred, replace=False)] = True

    patients: List[Tuple[str, float]] = []
    encounters: List[Encounter] = []
    for i, child in enumerate(encounter_seq.spawn(n)):
        if patients and master.random() < config.repeat_patient_fraction:
            patient_id, age = patients[int(master.integers(len(patients)))]
        else:
            patient_id, age = f"P{len(patients):06d}", _draw_age(config, master)
            patients.append((patient_id, age))
        encounters.append(
            _generate_encounter(
                config,
                np.random.default_rng(child),
                encounter_id=f"E{i:06d}",
                patient_id=patient_id,
                age=age,
                transferred=bool(transferred[i]),
            )
        )

    n_events = sum(len(enc.events) for enc in encounters)
    logger.info(
        "Cohorte sintética: %d encuentros (%d traslados, %d pacientes), %d eventos",
        n, config.n_transferred, len(patients), n_events,
    )
    return encounters
