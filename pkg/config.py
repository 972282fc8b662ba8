# config.py — Configuración central del toolkit PICU-boost
import logging
from pathlib import Path
from typing import Annotated, List
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, NoDecode, SettingsConfigDict
from functools import lru_cache

logger = logging.getLogger(__name__)

BASE_DIR = Path(__file__).resolve().parent


class Settings(BaseSettings):
    # ---------------------------
    # GENERAL
    # ---------------------------
    DEBUG: bool = Field(default=False)
    SEED: int = Field(default=7)
    OUTPUT_DIR: str = Field(default="out")

    # ---------------------------
    # VENTANAS DE OBSERVACIÓN
    # ---------------------------
    WINDOW_HOURS: float = Field(default=6.0)
    TRANSFER_LEAD_HOURS: float = Field(default=2.0)  # ventana positiva termina T - 2h

    # ---------------------------
    # PARTICIÓN / VALIDACIÓN CRUZADA
    # ---------------------------
    TEST_FRACTION: float = Field(default=0.2)
    CV_FOLDS: int = Field(default=10)

    # ---------------------------
    # ADABOOST-ABSTAIN
    # ---------------------------
    ADA_ROUNDS: int = Field(default=100)

    # ---------------------------
    # GRADIENT TREE BOOSTING
    # ---------------------------
    GBT_NUM_TREES: int = Field(default=16)
    GBT_MAX_DEPTH: int = Field(default=3)
    GBT_LEARNING_RATE: float = Field(default=0.3)
    GBT_LAMBDA: float = Field(default=1.0)
    GBT_GAMMA: float = Field(default=0.0)
    GBT_MIN_CHILD_WEIGHT: float = Field(default=1.0)
    GBT_COLSAMPLE: float = Field(default=1.0)

    # ---------------------------
    # RANDOM SEARCH (rangos "lo,hi")
    # ---------------------------
    SEARCH_TRIALS: int = Field(default=20)
    SEARCH_N_JOBS: int = Field(default=1)
    SEARCH_LAMBDA_RANGE: Annotated[List[float], NoDecode] = Field(default=[0.0, 5.0])
    SEARCH_GAMMA_RANGE: Annotated[List[float], NoDecode] = Field(default=[0.0, 2.0])
    SEARCH_MIN_CHILD_WEIGHT_RANGE: Annotated[List[float], NoDecode] = Field(default=[0.0, 5.0])
    SEARCH_COLSAMPLE_RANGE: Annotated[List[float], NoDecode] = Field(default=[0.5, 1.0])
    SEARCH_MAX_DEPTH_RANGE: Annotated[List[float], NoDecode] = Field(default=[2, 5])
    SEARCH_LEARNING_RATE_RANGE: Annotated[List[float], NoDecode] = Field(default=[0.05, 0.5])

    # ---------------------------
    # ENSEMBLE / PEWS
    # ---------------------------
    ENSEMBLE_THRESHOLD: float = Field(default=0.5)
    PEWS_TABLE_PATH: str = Field(default=str(BASE_DIR / "configs" / "pews_bedside.json"))

    # ---------------------------
    # COHORTE SINTÉTICA
    # ---------------------------
    SYNTH_N_ENCOUNTERS: int = Field(default=1000)
    SYNTH_PREVALENCE: float = Field(default=0.026)  # tasa de traslado del sitio de referencia

    # ---------------------------
    # CONFIG
    # ---------------------------
    model_config = SettingsConfigDict(
        env_prefix="PICU_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # ---------------------------
    # VALIDACIONES (Pydantic v2)
    # ---------------------------
    @field_validator(
        "SEARCH_LAMBDA_RANGE",
        "SEARCH_GAMMA_RANGE",
        "SEARCH_MIN_CHILD_WEIGHT_RANGE",
        "SEARCH_COLSAMPLE_RANGE",
        "SEARCH_MAX_DEPTH_RANGE",
        "SEARCH_LEARNING_RATE_RANGE",
        mode="before",
    )
    @classmethod
    def parse_range(cls, v):
        """Permitir rangos como string "lo,hi" o lista."""
        if isinstance(v, str):
            return [float(part.strip()) for part in v.split(",")]
        return v

    @field_validator("TEST_FRACTION")
    @classmethod
    def validate_test_fraction(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("TEST_FRACTION debe estar en (0, 1)")
        return v

    @field_validator("CV_FOLDS")
    @classmethod
    def validate_folds(cls, v):
        if v < 2:
            raise ValueError("CV_FOLDS debe ser al menos 2")
        return v

    @field_validator("ENSEMBLE_THRESHOLD")
    @classmethod
    def validate_threshold(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("ENSEMBLE_THRESHOLD debe estar en (0, 1)")
        return v

    @field_validator("WINDOW_HOURS", "TRANSFER_LEAD_HOURS")
    @classmethod
    def validate_hours(cls, v):
        if v < 0:
            raise ValueError("las horas de ventana no pueden ser negativas")
        return v

    @field_validator("ADA_ROUNDS", "GBT_NUM_TREES", "SEARCH_TRIALS", "SEARCH_N_JOBS")
    @classmethod
    def validate_counts(cls, v):
        if v < 0:
            raise ValueError("los contadores no pueden ser negativos")
        return v

    # ---------------------------
    # PROPIEDADES ÚTILES
    # ---------------------------
    @property
    def pews_table_path(self) -> Path:
        """Ruta de la tabla PEWS; relativa al repo si no es absoluta."""
        path = Path(self.PEWS_TABLE_PATH)
        return path if path.is_absolute() else BASE_DIR / path

    def search_ranges(self) -> dict:
        """Retorna el espacio de búsqueda listo para `SearchSpace`."""
        return {
            "reg_lambda": tuple(self.SEARCH_LAMBDA_RANGE),
            "gamma": tuple(self.SEARCH_GAMMA_RANGE),
            "min_child_weight": tuple(self.SEARCH_MIN_CHILD_WEIGHT_RANGE),
            "colsample": tuple(self.SEARCH_COLSAMPLE_RANGE),
            "max_depth": tuple(int(round(v)) for v in self.SEARCH_MAX_DEPTH_RANGE),
            "learning_rate": tuple(self.SEARCH_LEARNING_RATE_RANGE),
        }


# ---------------------------
# Singleton de settings (caché)
# ---------------------------
@lru_cache()
def get_settings() -> Settings:
    """
    Obtiene la instancia singleton de Settings.
    Usa caché para evitar recargar el .env en cada llamada.
    """
    return Settings()


# Export directo
settings = get_settings()


# ---------------------------
# Validación al inicio
# ---------------------------
def validate_settings(current: Settings | None = None) -> None:
    """
    Valida restricciones entre campos que los validadores individuales no ven.
    Llama esto al arrancar la CLI.
    """
    current = current or settings
    problems = []

    for name in (
        "SEARCH_LAMBDA_RANGE",
        "SEARCH_GAMMA_RANGE",
        "SEARCH_MIN_CHILD_WEIGHT_RANGE",
        "SEARCH_COLSAMPLE_RANGE",
        "SEARCH_MAX_DEPTH_RANGE",
        "SEARCH_LEARNING_RATE_RANGE",
    ):
        bounds = getattr(current, name)
        if len(bounds) != 2 or bounds[0] > bounds[1]:
            problems.append(f"{name} debe ser 'lo,hi' con lo <= hi")

    if not current.pews_table_path.exists():
        problems.append(f"PEWS_TABLE_PATH no existe: {current.pews_table_path}")

    if problems:
        raise ValueError("Configuración inválida: " + "; ".join(problems))

    logger.debug("Configuración validada correctamente")
    logger.debug("   - Seed: %d", current.SEED)
    logger.debug("   - Ventana: %.1fh (lead %.1fh)", current.WINDOW_HOURS, current.TRANSFER_LEAD_HOURS)
    logger.debug("   - Tabla PEWS: %s", current.pews_table_path)
