# Services/metrics.py
"""
Métricas de evaluación: matriz de confusión, ROC / AUROC y validación cruzada.
"""
from __future__ import annotations
import logging
import math
from pathlib import Path
from typing import Callable, List, NamedTuple, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator
from scipy.stats import rankdata

from Services.dataset import FeatureSnapshot, kfold, labels_array
from Services.errors import InputError, MetricError, SelectionError

logger = logging.getLogger(__name__)

# trainer(train, fold_seed) -> scorer(snapshots) -> scores
Scorer = Callable[[Sequence[FeatureSnapshot]], np.ndarray]
Trainer = Callable[[Sequence[FeatureSnapshot], int], Scorer]


# ------------------------------------------------------
#   MODELOS
# ------------------------------------------------------

class RocPoint(NamedTuple):
    fpr: float
    tpr: float
    threshold: float  # inf para el punto inicial (0, 0)


class EvalReport(BaseModel):
    tp: int = Field(..., ge=0)
    fp: int = Field(..., ge=0)
    tn: int = Field(..., ge=0)
    fn: int = Field(..., ge=0)
    accuracy: float = Field(..., ge=0.0, le=1.0)
    sensitivity: float = Field(..., ge=0.0, le=1.0)
    specificity: float = Field(..., ge=0.0, le=1.0)
    auroc: float = Field(..., ge=0.0, le=1.0)
    threshold: float
    roc: List[Tuple[float, float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_roc(self) -> "EvalReport":
        if self.roc:
            if tuple(self.roc[0]) != (0.0, 0.0) or tuple(self.roc[-1]) != (1.0, 1.0):
                raise ValueError("la curva ROC debe ir de (0,0) a (1,1)")
        return self


# ------------------------------------------------------
#   CONFUSIÓN
# ------------------------------------------------------

def _as_labels(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size and not np.isin(arr, (1, -1)).all():
        raise InputError(f"{name} deben ser +1 / -1")
    return arr


def confusion(labels: Sequence[int], predictions: Sequence[int]) -> Tuple[int, int, int, int]:
    """
    Cuenta (tp, fp, tn, fn) con +1 (traslado) como clase positiva.

    Raises:
        InputError: entradas vacías o de distinta longitud
    """
    y = _as_labels(labels, "labels")
    p = _as_labels(predictions, "predictions")
    if y.size == 0:
        raise InputError("confusion requiere al menos una instancia")
    if y.size != p.size:
        raise InputError(f"longitudes distintas: {y.size} etiquetas, {p.size} predicciones")
    tp = int(np.sum((y == 1) & (p == 1)))
    fp = int(np.sum((y == -1) & (p == 1)))
    tn = int(np.sum((y == -1) & (p == -1)))
    fn = int(np.sum((y == 1) & (p == -1)))
    return tp, fp, tn, fn


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


# ------------------------------------------------------
#   ROC / AUROC
# ------------------------------------------------------

def _class_split(scores, labels) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=float)
    y = _as_labels(labels, "labels")
    if s.size != y.size:
        raise InputError(f"longitudes distintas: {s.size} scores, {y.size} etiquetas")
    if not np.isfinite(s).all():
        raise InputError("los scores deben ser finitos")
    if not (y == 1).any() or not (y == -1).any():
        raise MetricError("AUROC indefinido: se requieren ambas clases")
    return s, y


def auroc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Estadístico de Mann-Whitney normalizado; los empates cuentan 1/2."""
    s, y = _class_split(scores, labels)
    ranks = rankdata(s, method="average")
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    u = float(ranks[y == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def roc_points(scores: Sequence[float], labels: Sequence[int]) -> List[RocPoint]:
    """
    Curva ROC barriendo los umbrales únicos de mayor a menor (regla score >= umbral).

    Returns:
        Puntos desde (0, 0) hasta (1, 1), ambos ejes no decrecientes
    """
    s, y = _class_split(scores, labels)
    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    tps = np.cumsum(y_sorted == 1)
    fps = np.cumsum(y_sorted == -1)
    # último índice de cada grupo de scores iguales
    ends = np.concatenate((np.nonzero(s_sorted[1:] != s_sorted[:-1])[0], [s.size - 1]))
    n_pos, n_neg = int(tps[-1]), int(fps[-1])

    points = [RocPoint(0.0, 0.0, math.inf)]
    for i in ends:
        points.append(RocPoint(float(fps[i] / n_neg), float(tps[i] / n_pos), float(s_sorted[i])))
    return points


def roc_area(points: Sequence[RocPoint]) -> float:
    """Área trapezoidal bajo la curva ROC."""
    fpr = np.array([p[0] for p in points], dtype=float)
    tpr = np.array([p[1] for p in points], dtype=float)
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


# ------------------------------------------------------
#   REPORTE
# ------------------------------------------------------

def evaluate(scores: Sequence[float], labels: Sequence[int], threshold: float = 0.5) -> EvalReport:
    """
    Reporte completo para un conjunto de test ya puntuado.

    Args:
        scores: probabilidad (o score PEWS) por instancia
        labels: etiquetas +1 / -1
        threshold: se predice traslado si score >= threshold
    """
    s = np.asarray(scores, dtype=float)
    predictions = np.where(s >= threshold, 1, -1)
    tp, fp, tn, fn = confusion(labels, predictions)
    points = roc_points(s, labels)
    return EvalReport(
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        accuracy=_ratio(tp + tn, tp + fp + tn + fn),
        sensitivity=_ratio(tp, tp + fn),
        specificity=_ratio(tn, tn + fp),
        auroc=auroc(s, labels),
        threshold=threshold,
        roc=[(p.fpr, p.tpr) for p in points],
    )


def balanced_threshold(
    scores: Sequence[float],
    labels: Sequence[int],
    candidates: Sequence[float],
) -> float:
    """
    Candidato c que minimiza |sensibilidad - especificidad| de la regla score >= c.

    Empates: mayor sensibilidad, luego el primer candidato en el orden dado.

    Raises:
        SelectionError: si falta alguna de las dos clases
    """
    s = np.asarray(scores, dtype=float)
    y = _as_labels(labels, "labels")
    n_pos, n_neg = int(np.sum(y == 1)), int(np.sum(y == -1))
    if n_pos == 0 or n_neg == 0:
        raise SelectionError("la selección del punto de corte requiere ambas clases")
    if not len(candidates):
        raise SelectionError("no hay candidatos de punto de corte")

    best_key, best = None, None
    for i, c in enumerate(candidates):
        flagged = s >= c
        sensitivity = int(np.sum(flagged & (y == 1))) / n_pos
        specificity = int(np.sum(~flagged & (y == -1))) / n_neg
        key = (abs(sensitivity - specificity), -sensitivity, i)
        if best_key is None or key < best_key:
            best_key, best = key, c
    return best


def write_roc_csv(points: Sequence[RocPoint], path: Path | str) -> None:
    frame = pd.DataFrame([tuple(p) for p in points], columns=["fpr", "tpr", "threshold"])
    frame.to_csv(path, index=False)


def write_report_json(report: EvalReport, path: Path | str) -> None:
    Path(path).write_text(report.model_dump_json(indent=2), encoding="utf-8")


# ------------------------------------------------------
#   VALIDACIÓN CRUZADA
# ------------------------------------------------------

def derive_seed(seed: int, index: int) -> int:
    """Semilla hija determinista para (seed, índice)."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def cross_validate(
    trainer: Trainer,
    cohort: Sequence[FeatureSnapshot],
    k: int = 10,
    seed: int = 0,
) -> Tuple[List[float], float]:
    """
    Validación cruzada k-fold disjunta por paciente.

    Args:
        trainer: función (train, fold_seed) -> scorer; el scorer devuelve scores por snapshot
        cohort: snapshots etiquetados
        k: número de folds
        seed: semilla de los folds; cada fold recibe la suya de (seed, índice)

    Returns:
        (AUROC por fold, media). Un fold de validación con una sola clase se
        omite con un warning.
    """
    fold_scores: List[float] = []
    for i, (train, valid) in enumerate(kfold(cohort, k=k, seed=seed)):
        scorer = trainer(train, derive_seed(seed, i))
        labels = labels_array(valid)
        try:
            fold_scores.append(auroc(scorer(valid), labels))
        except MetricError:
            logger.warning("Fold %d sin ambas clases en validación; se omite", i)
    if not fold_scores:
        raise MetricError("ningún fold de validación contiene ambas clases")
    mean = float(np.mean(fold_scores))
    logger.debug("CV %d-fold: %s (media %.4f)", k, ["%.4f" % v for v in fold_scores], mean)
    return fold_scores, mean

