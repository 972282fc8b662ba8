# Commands/train_command.py
"""
`train`: ajusta ada | gbt | ensemble | pews y escribe el modelo en JSON.
"""
from __future__ import annotations
import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from config import settings
from Commands.run_config import RunConfig
from Services import ada_abstain, ensemble, gbt, pews
from Services.dataset import FeatureSnapshot, read_snapshots_csv
from Services.errors import ConfigError
from Services.gbt import GbtParams, SearchSpace
from Services.metrics import Scorer, cross_validate
from Services.model_store import Model, ModelScorer, save_model
from Services.pews import PewsTable

logger = logging.getLogger(__name__)

MODEL_KINDS = ("ada", "gbt", "ensemble", "pews")
SEARCH_KEYS = ("trials", "jobs")


def add_parser(subparsers, parents: List[argparse.ArgumentParser]) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "train",
        parents=parents,
        help="Entrena un modelo y lo guarda como JSON",
    )
    parser.add_argument("--model", choices=MODEL_KINDS, required=True, help="tipo de modelo")
    parser.add_argument("--train", type=Path, default=None, help="CSV de snapshots (default <out>/train.csv)")
    parser.add_argument("--model-file", type=Path, default=None,
                        help="ruta del modelo (default <out>/model_<tipo>.json)")
    parser.add_argument("--rounds", dest="ada_rounds", type=int, default=None,
                        help=f"rondas de AdaBoost (default {settings.ADA_ROUNDS})")
    parser.add_argument("--trees", type=int, default=None, help=f"árboles GBT (default {settings.GBT_NUM_TREES})")
    parser.add_argument("--max-depth", type=int, default=None,
                        help=f"profundidad máxima GBT (default {settings.GBT_MAX_DEPTH})")
    parser.add_argument("--learning-rate", type=float, default=None,
                        help=f"learning rate GBT (default {settings.GBT_LEARNING_RATE})")
    parser.add_argument("--search", nargs="?", const="", default=None, metavar="trials=N[,jobs=J]",
                        help=f"random search de hiperparámetros GBT (default trials={settings.SEARCH_TRIALS})")
    parser.add_argument("--cv", action="store_true", help="imprime el AUROC medio de validación cruzada")
    parser.add_argument("--folds", type=int, default=None, help=f"folds de CV (default {settings.CV_FOLDS})")
    parser.add_argument("--tune-threshold", action="store_true",
                        help="ensemble: ajusta el umbral equilibrando sensibilidad y especificidad en train")
    parser.add_argument("--pews-table", type=Path, default=None, help="tabla PEWS JSON")
    parser.set_defaults(handler=run)
    return parser


def parse_search(raw_search: Optional[str]) -> Optional[Dict[str, int]]:
    """'trials=50,jobs=2' -> {'trials': 50, 'jobs': 2}; None si no hay búsqueda."""
    if raw_search is None:
        return None
    parsed = {"trials": settings.SEARCH_TRIALS, "jobs": settings.SEARCH_N_JOBS}
    for part in filter(None, (p.strip() for p in raw_search.split(","))):
        key, _, raw = part.partition("=")
        if key not in SEARCH_KEYS:
            raise ConfigError(f"--search: clave desconocida {key!r} (válidas: {', '.join(SEARCH_KEYS)})")
        try:
            parsed[key] = int(raw)
        except ValueError:
            raise ConfigError(f"--search: valor no entero para {key}: {raw!r}") from None
    if parsed["trials"] < 1:
        raise ConfigError("--search: trials debe ser >= 1")
    return parsed


# ------------------------------------------------------
#   ENTRENAMIENTO
# ------------------------------------------------------

def _choose_gbt_params(config: RunConfig, train: Sequence[FeatureSnapshot], search: Optional[Dict[str, int]]) -> GbtParams:
    if search is None:
        return config.gbt_params
    params = gbt.random_search(
        train,
        SearchSpace(**settings.search_ranges()),
        folds=config.folds,
        trials=search["trials"],
        seed=config.seed,
        base=config.gbt_params,
        n_jobs=search["jobs"],
    )
    logger.info("Hiperparámetros elegidos: %s", params.model_dump())
    return params


def fit_model(
    kind: str,
    train: Sequence[FeatureSnapshot],
    config: RunConfig,
    *,
    gbt_params: Optional[GbtParams] = None,
    table: Optional[PewsTable] = None,
) -> Model:
    if kind == "ada":
        return ada_abstain.fit(train, m=config.ada_rounds)
    if kind == "gbt":
        return gbt.fit(train, gbt_params or config.gbt_params)
    if kind == "ensemble":
        return ensemble.fit(
            train,
            ada_rounds=config.ada_rounds,
            gbt_params=gbt_params or config.gbt_params,
            decision_threshold=settings.ENSEMBLE_THRESHOLD,
        )
    return pews.fit(table or PewsTable.load(config.pews_table), train)


class _CvTrainer:
    """Entrenador para `cross_validate` con la misma configuración que el modelo final."""

    def __init__(self, kind: str, config: RunConfig, gbt_params: GbtParams, table: Optional[PewsTable]) -> None:
        self.kind = kind
        self.config = config
        self.gbt_params = gbt_params
        self.table = table

    def __call__(self, train: Sequence[FeatureSnapshot], seed: int) -> Scorer:
        params = self.gbt_params.model_copy(update={"seed": seed})
        model = fit_model(self.kind, train, self.config, gbt_params=params, table=self.table)
        return ModelScorer(model).scores


def run(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    config = config.model_copy(update={"train": config.train or config.out / "train.csv"})
    config.require("train")
    search = parse_search(args.search)
    if args.tune_threshold and config.model != "ensemble":
        raise ConfigError("--tune-threshold solo aplica a --model ensemble")

    train = read_snapshots_csv(config.train)
    table = PewsTable.load(config.pews_table) if config.model == "pews" else None
    gbt_params = config.gbt_params
    if config.model in ("gbt", "ensemble"):
        gbt_params = _choose_gbt_params(config, train, search)

    if args.cv:
        fold_scores, mean = cross_validate(
            _CvTrainer(config.model, config, gbt_params, table), train, k=config.folds, seed=config.seed
        )
        print(f"CV {config.folds}-fold AUROC medio: {mean:.4f} (folds: {', '.join(f'{s:.3f}' for s in fold_scores)})")

    model = fit_model(config.model, train, config, gbt_params=gbt_params, table=table)
    if args.tune_threshold:
        model = ensemble.tune_threshold(model, train)

    path = config.model_file or config.output(f"model_{config.model}.json")
    save_model(model, path)
    print(f"modelo {config.model} entrenado con {len(train)} snapshots -> {path}")
    if isinstance(model, pews.PewsBaseline):
        print(f"punto de corte PEWS: {model.cutoff}")
    return 0
