# Services/ada_abstain.py
"""
AdaBoost con abstención sobre decision stumps restringidos a un grupo de edad.

Cada stump compara una feature contra un umbral dentro de un grupo de edad y
vota +1 / -1; se abstiene (0) si la feature falta o si la edad cae fuera de
su grupo. Los stumps sobre la propia edad no tienen grupo (ALL_AGES).
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.special import expit

from Services.dataset import (
    AGE_INDEX,
    N_FEATURES,
    AgeBins,
    FeatureSnapshot,
    age_bin_indices,
    labels_array,
    to_matrix,
)
from Services.errors import TrainingError

logger = logging.getLogger(__name__)

ALL_AGES = -1
TIE_TOLERANCE = 1e-12
MODEL_VERSION = 1


# ------------------------------------------------------
#   MODELOS
# ------------------------------------------------------

class Stump(BaseModel):
    model_config = ConfigDict(frozen=True)

    feature: int = Field(..., ge=0, lt=N_FEATURES)
    bin: int = Field(..., ge=ALL_AGES)
    threshold: float
    polarity: Literal[1, -1]

    @field_validator("threshold")
    @classmethod
    def finite_threshold(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("el umbral debe ser finito")
        return v

    @model_validator(mode="after")
    def check_scope(self) -> "Stump":
        if self.feature == AGE_INDEX and self.bin != ALL_AGES:
            raise ValueError("los stumps de edad no se restringen a un grupo")
        if self.feature != AGE_INDEX and self.bin == ALL_AGES:
            raise ValueError("solo los stumps de edad usan ALL_AGES")
        return self


class WeightedStump(Stump):
    alpha: float

    @field_validator("alpha")
    @classmethod
    def positive_alpha(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError("alpha debe ser finito y positivo")
        return v


class AdaModel(BaseModel):
    """Lista ordenada de stumps ponderados; `rounds` es el m pedido (puede cortar antes)."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["ada"] = "ada"
    version: int = MODEL_VERSION
    age_bins: AgeBins = Field(default_factory=AgeBins)
    rounds: int = 0
    stumps: Tuple[WeightedStump, ...] = ()


# ------------------------------------------------------
#   VOTOS / PREDICCIÓN
# ------------------------------------------------------

def _votes(stump: Stump, X: np.ndarray, bin_idx: np.ndarray) -> np.ndarray:
    values = X[:, stump.feature]
    in_scope = ~np.isnan(values)
    if stump.bin != ALL_AGES:
        in_scope &= bin_idx == stump.bin
    side = np.where(values >= stump.threshold, 1, -1) * stump.polarity
    return np.where(in_scope, side, 0)


def stump_vote(stump: Stump, x: FeatureSnapshot, *, bins: Optional[AgeBins] = None) -> int:
    """+1 / -1 según umbral y polaridad; 0 si la feature falta o la edad está fuera del grupo."""
    X = x.vector()[None, :]
    bin_idx = age_bin_indices(X[:, AGE_INDEX], bins)
    return int(_votes(stump, X, bin_idx)[0])


def predict_margins(model: AdaModel, X: np.ndarray) -> np.ndarray:
    """F(x) = sum_t alpha_t * h_t(x) para cada fila de X."""
    margins = np.zeros(X.shape[0], dtype=float)
    if X.shape[0] == 0:
        return margins
    bin_idx = age_bin_indices(X[:, AGE_INDEX], model.age_bins)
    for stump in model.stumps:
        margins += stump.alpha * _votes(stump, X, bin_idx)
    return margins


def predict_margin(model: AdaModel, x: FeatureSnapshot) -> float:
    return float(predict_margins(model, x.vector()[None, :])[0])


def predict_probas(model: AdaModel, X: np.ndarray) -> np.ndarray:
    return expit(2.0 * predict_margins(model, X))


def predict_proba(model: AdaModel, x: FeatureSnapshot) -> float:
    """sigma(2 F(x)); 0.5 con margen nulo."""
    return float(predict_probas(model, x.vector()[None, :])[0])


# ------------------------------------------------------
#   BÚSQUEDA DE STUMPS
# ------------------------------------------------------

@dataclass(frozen=True)
class _Scope:
    """Instancias de una (feature, grupo) ordenadas por valor, con sus umbrales candidatos."""

    feature: int
    bin: int
    rows: np.ndarray         # índices de fila ordenados por valor
    starts: np.ndarray       # posición de inicio de cada umbral candidato en `rows`
    thresholds: np.ndarray   # mínimo observado, luego puntos medios


class StumpSearchIndex:
    """
    Índice precomputado para la búsqueda exhaustiva de stumps.

    El orden de los valores no cambia entre rondas; solo los pesos. Cada ronda
    se reduce a sumas acumuladas sobre los índices ya ordenados.
    """

    def __init__(self, X: np.ndarray, bins: AgeBins) -> None:
        self._X = X
        self._bins = bins
        self._bin_idx = age_bin_indices(X[:, AGE_INDEX], bins) if len(X) else np.empty(0, dtype=int)
        self._scopes: List[_Scope] = []
        for feature in range(X.shape[1]):
            present = ~np.isnan(X[:, feature])
            scope_bins = [ALL_AGES] if feature == AGE_INDEX else range(len(bins))
            for b in scope_bins:
                mask = present if b == ALL_AGES else present & (self._bin_idx == b)
                rows = np.nonzero(mask)[0]
                if rows.size == 0:
                    continue
                rows = rows[np.argsort(X[rows, feature], kind="stable")]
                values = X[rows, feature]
                changes = np.nonzero(values[1:] != values[:-1])[0] + 1
                starts = np.concatenate(([0], changes))
                thresholds = np.concatenate(([values[0]], (values[changes - 1] + values[changes]) / 2.0))
                self._scopes.append(_Scope(feature, b, rows, starts, thresholds))

    @property
    def bin_indices(self) -> np.ndarray:
        return self._bin_idx

    @property
    def empty(self) -> bool:
        return not self._scopes

    def best(self, y: np.ndarray, w: np.ndarray) -> Optional[Tuple[Stump, float, float]]:
        """Stump de menor Z con alpha > 0, o None si ninguno mejora."""
        n = len(y)
        eps = 1.0 / (2.0 * n)
        total = float(w.sum())
        w_pos = np.where(y == 1, w, 0.0)
        w_neg = np.where(y == 1, 0.0, w)

        evaluated = []
        z_min = math.inf
        for scope in self._scopes:
            cum_pos = np.concatenate(([0.0], np.cumsum(w_pos[scope.rows])))
            cum_neg = np.concatenate(([0.0], np.cumsum(w_neg[scope.rows])))
            scope_pos, scope_neg = cum_pos[-1], cum_neg[-1]
            below_pos, below_neg = cum_pos[scope.starts], cum_neg[scope.starts]
            above_pos, above_neg = scope_pos - below_pos, scope_neg - below_neg
            w_zero = total - (scope_pos + scope_neg)

            # columna 0: polaridad +1, columna 1: polaridad -1
            correct = np.column_stack((above_pos + below_neg, above_neg + below_pos))
            wrong = np.column_stack((above_neg + below_pos, above_pos + below_neg))
            z = w_zero + 2.0 * np.sqrt(correct * wrong)
            z = np.where(correct - wrong > TIE_TOLERANCE, z, np.inf).ravel()
            evaluated.append((scope, z, correct.ravel(), wrong.ravel()))
            if z.size:
                z_min = min(z_min, float(z.min()))

        if not math.isfinite(z_min):
            return None

        for scope, z, correct, wrong in evaluated:
            hits = np.nonzero(z <= z_min + TIE_TOLERANCE)[0]
            if hits.size == 0:
                continue
            pick = int(hits[0])
            stump = Stump(
                feature=scope.feature,
                bin=scope.bin,
                threshold=float(scope.thresholds[pick // 2]),
                polarity=1 if pick % 2 == 0 else -1,
            )
            alpha = 0.5 * math.log((correct[pick] + eps) / (wrong[pick] + eps))
            return stump, float(z[pick]), alpha
        return None

    def votes(self, stump: Stump) -> np.ndarray:
        return _votes(stump, self._X, self._bin_idx)


def best_stump_matrix(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    bins: Optional[AgeBins] = None,
) -> Optional[Tuple[Stump, float, float]]:
    """
    Búsqueda exhaustiva sobre (feature, grupo, umbral, polaridad).

    Minimiza Z = W0 + 2*sqrt(W+ * W-) entre los candidatos con W+ > W-;
    alpha = 0.5 * ln((W+ + eps) / (W- + eps)) con eps = 1/(2n).
    Empates: menor feature, menor grupo, menor umbral, polaridad +1.
    """
    if len(y) != len(w) or len(y) != X.shape[0]:
        raise TrainingError("datos y pesos con longitudes distintas")
    index = StumpSearchIndex(X, bins or AgeBins())
    if index.empty:
        raise TrainingError("todas las features faltan en todas las instancias")
    return index.best(np.asarray(y), np.asarray(w, dtype=float))


def best_stump(
    data: Sequence[FeatureSnapshot],
    w: Sequence[float],
    bins: Optional[AgeBins] = None,
) -> Optional[Tuple[Stump, float, float]]:
    return best_stump_matrix(to_matrix(data), labels_array(data), np.asarray(w, dtype=float), bins)


# ------------------------------------------------------
#   ENTRENAMIENTO
# ------------------------------------------------------

def fit_matrix(
    X: np.ndarray,
    y: np.ndarray,
    *,
    m: int = 100,
    bins: Optional[AgeBins] = None,
) -> AdaModel:
    bins = bins or AgeBins()
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        raise TrainingError("el entrenamiento requiere ambas clases")

    n = len(y)
    index = StumpSearchIndex(X, bins)
    if index.empty:
        raise TrainingError("todas las features faltan en todas las instancias")

    w = np.full(n, 1.0 / n)
    stumps: List[WeightedStump] = []
    for t in range(m):
        found = index.best(y, w)
        if found is None:
            logger.warning("Sin stump con Z < 1 en la ronda %d; se detiene el entrenamiento", t + 1)
            break
        stump, z, alpha = found
        w = w * np.exp(-alpha * y * index.votes(stump))
        w /= w.sum()
        stumps.append(WeightedStump(**stump.model_dump(), alpha=alpha))
        logger.debug(
            "Ronda %d: feature=%d bin=%d tau=%.4f pol=%+d Z=%.6f alpha=%.4f",
            t + 1, stump.feature, stump.bin, stump.threshold, stump.polarity, z, alpha,
        )

    logger.info("AdaBoost-abstain: %d/%d stumps ajustados", len(stumps), m)
    return AdaModel(age_bins=bins, rounds=m, stumps=tuple(stumps))


def fit(
    train: Sequence[FeatureSnapshot],
    m: int = 100,
    bins: Optional[AgeBins] = None,
    seed: int = 0,
) -> AdaModel:
    """
    Ajusta m rondas de AdaBoost-abstain.

    Args:
        train: snapshots etiquetados con ambas clases
        m: número de rondas
        bins: grupos de edad de los stumps
        seed: no se usa; la búsqueda es exhaustiva y determinista

    Returns:
        AdaModel con a lo sumo m stumps (corta antes si ningún stump tiene Z < 1)
    """
    return fit_matrix(to_matrix(train), labels_array(train), m=m, bins=bins)
