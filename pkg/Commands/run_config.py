# Commands/run_config.py
"""
Configuración de una ejecución de la CLI: flags ya parseados y validados.
"""
from __future__ import annotations
import argparse
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from config import settings
from Services.errors import ConfigError, InputError
from Services.gbt import GbtParams

ModelKind = Literal["ada", "gbt", "ensemble", "pews"]


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    seed: int = Field(settings.SEED, ge=0)
    out: Path = Path(settings.OUTPUT_DIR)

    # entradas
    events: Optional[Path] = None
    encounters: Optional[Path] = None
    train: Optional[Path] = None
    test: Optional[Path] = None
    model_file: Optional[Path] = None
    pews_table: Path = settings.pews_table_path

    # modelo / validación
    model: Optional[ModelKind] = None
    test_fraction: float = Field(settings.TEST_FRACTION, gt=0.0, lt=1.0)
    folds: int = Field(settings.CV_FOLDS, ge=2)
    window_hours: float = Field(settings.WINDOW_HOURS, ge=0.0)
    lead_hours: float = Field(settings.TRANSFER_LEAD_HOURS, ge=0.0)
    ada_rounds: int = Field(settings.ADA_ROUNDS, ge=0)
    gbt_params: GbtParams = Field(default_factory=GbtParams)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """Construye la config a partir del Namespace; flags ausentes usan settings."""
        values = {k: v for k, v in vars(args).items() if v is not None and k in cls.model_fields}
        try:
            values["gbt_params"] = GbtParams(
                num_trees=_first(getattr(args, "trees", None), settings.GBT_NUM_TREES),
                max_depth=_first(getattr(args, "max_depth", None), settings.GBT_MAX_DEPTH),
                learning_rate=_first(getattr(args, "learning_rate", None), settings.GBT_LEARNING_RATE),
                reg_lambda=settings.GBT_LAMBDA,
                gamma=settings.GBT_GAMMA,
                min_child_weight=settings.GBT_MIN_CHILD_WEIGHT,
                colsample=settings.GBT_COLSAMPLE,
                seed=values.get("seed", settings.SEED),
            )
            return cls(**values)
        except ValidationError as exc:
            first = exc.errors()[0]
            field = ".".join(str(part) for part in first.get("loc", ())) or "argumentos"
            raise ConfigError(f"parámetro inválido {field}: {first.get('msg')}") from exc

    def require(self, *fields: str) -> None:
        """Verifica que las rutas de entrada existan."""
        for name in fields:
            path = getattr(self, name)
            if path is None:
                raise InputError(f"falta la ruta --{name.replace('_', '-')}")
            if not Path(path).exists():
                raise InputError(f"no existe {name}: {path}")

    def output(self, filename: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / filename


def _first(value, default):
    return default if value is None else value
