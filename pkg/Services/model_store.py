# Services/model_store.py
"""
Persistencia JSON de los cuatro tipos de modelo y adaptador de scoring común.
"""
from __future__ import annotations
import logging
from pathlib import Path
from typing import Annotated, Sequence, Union

import numpy as np
from pydantic import Field, TypeAdapter, ValidationError

from Services import ada_abstain, ensemble, gbt, pews
from Services.ada_abstain import AdaModel
from Services.dataset import FeatureSnapshot, to_matrix
from Services.ensemble import EnsembleModel
from Services.errors import DataError, InputError
from Services.gbt import GbtModel
from Services.pews import PewsBaseline

logger = logging.getLogger(__name__)

Model = Annotated[
    Union[AdaModel, GbtModel, EnsembleModel, PewsBaseline],
    Field(discriminator="kind"),
]
_MODEL_ADAPTER: TypeAdapter = TypeAdapter(Model)


def save_model(model: Model, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(), encoding="utf-8")
    logger.info("Modelo '%s' guardado en %s", model.kind, path)


def load_model(path: Path | str) -> Model:
    """
    Lee un documento de modelo y lo despacha según su campo `kind`.

    Raises:
        InputError: el archivo no existe
        DataError: JSON inválido o documento que no valida
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise InputError(f"archivo de modelo no encontrado: {path}") from exc
    try:
        model = _MODEL_ADAPTER.validate_json(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ())) or "documento"
        raise DataError(f"{path}: modelo inválido en {where}: {first.get('msg')}") from exc
    logger.debug("Modelo '%s' cargado de %s", model.kind, path)
    return model


class ModelScorer:
    """
    Interfaz común de predicción para cualquier tipo de modelo.

    `scores` devuelve probabilidades (ada, gbt, ensemble) o el score PEWS entero;
    `threshold` es el umbral de decisión correspondiente (0.5, el del ensemble o
    el punto de corte PEWS).
    """

    def __init__(self, model: Model) -> None:
        self.model = model

    @property
    def kind(self) -> str:
        return self.model.kind

    @property
    def threshold(self) -> float:
        if isinstance(self.model, EnsembleModel):
            return self.model.decision_threshold
        if isinstance(self.model, PewsBaseline):
            return float(self.model.cutoff)
        return 0.5

    def scores(self, snapshots: Sequence[FeatureSnapshot]) -> np.ndarray:
        if isinstance(self.model, PewsBaseline):
            return pews.pews_scores(self.model.table, snapshots).astype(float)
        X = to_matrix(snapshots)
        if isinstance(self.model, AdaModel):
            return ada_abstain.predict_probas(self.model, X)
        if isinstance(self.model, GbtModel):
            return gbt.predict_probas(self.model, X)
        return ensemble.predict_probas(self.model, X)

    def predictions(self, snapshots: Sequence[FeatureSnapshot]) -> np.ndarray:
        return np.where(self.scores(snapshots) >= self.threshold, 1, -1)
