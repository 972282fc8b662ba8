# Services/ensemble.py
"""
Ensemble de los dos modelos de boosting: promedio simple de probabilidades.
"""
from __future__ import annotations
import logging
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from Services import ada_abstain, gbt
from Services.ada_abstain import AdaModel
from Services.gbt import GbtModel, GbtParams
from Services.dataset import AgeBins, FeatureSnapshot, labels_array, to_matrix
from Services.metrics import balanced_threshold

logger = logging.getLogger(__name__)

MODEL_VERSION = 1


class EnsembleModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["ensemble"] = "ensemble"
    version: int = MODEL_VERSION
    ada: AdaModel
    gbt: GbtModel
    decision_threshold: float = Field(0.5, gt=0.0, lt=1.0)


def fit(
    train: Sequence[FeatureSnapshot],
    *,
    ada_rounds: int = 100,
    gbt_params: Optional[GbtParams] = None,
    bins: Optional[AgeBins] = None,
    decision_threshold: float = 0.5,
) -> EnsembleModel:
    """
    Ajusta AdaBoost-abstain y GBT sobre el mismo conjunto y los combina.

    Args:
        train: snapshots etiquetados
        ada_rounds: rondas de AdaBoost
        gbt_params: hiperparámetros del GBT (ya elegidos, p. ej. por random search)
        bins: grupos de edad de los stumps
        decision_threshold: umbral de clasificación del promedio
    """
    X, y = to_matrix(train), labels_array(train)
    ada_model = ada_abstain.fit_matrix(X, y, m=ada_rounds, bins=bins)
    gbt_model = gbt.fit_matrix(X, y, gbt_params or GbtParams())
    return EnsembleModel(ada=ada_model, gbt=gbt_model, decision_threshold=decision_threshold)


def predict_probas(ens: EnsembleModel, X: np.ndarray) -> np.ndarray:
    return (ada_abstain.predict_probas(ens.ada, X) + gbt.predict_probas(ens.gbt, X)) / 2.0


def predict_proba(ens: EnsembleModel, x: FeatureSnapshot) -> float:
    """(p_ada + p_gbt) / 2"""
    return float(predict_probas(ens, x.vector()[None, :])[0])


def classify(ens: EnsembleModel, x: FeatureSnapshot, threshold: Optional[float] = None) -> int:
    """+1 si la probabilidad alcanza el umbral (empate = traslado)."""
    cut = ens.decision_threshold if threshold is None else threshold
    return 1 if predict_proba(ens, x) >= cut else -1


def tune_threshold(ens: EnsembleModel, train: Sequence[FeatureSnapshot]) -> EnsembleModel:
    """
    Reemplaza el umbral 0.5 por el que equilibra sensibilidad y especificidad en train.

    Los candidatos son las probabilidades observadas en train (ascendentes), así que el
    umbral elegido queda dentro de (0, 1).
    """
    probas = predict_probas(ens, to_matrix(train))
    candidates = np.unique(probas)
    candidates = candidates[(candidates > 0.0) & (candidates < 1.0)]
    threshold = float(balanced_threshold(probas, labels_array(train), candidates))
    logger.info("Umbral del ensemble ajustado: %.4f", threshold)
    return ens.model_copy(update={"decision_threshold": threshold})
