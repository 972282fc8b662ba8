# Services/errors.py
"""
Jerarquía de errores del toolkit.

Cada error lleva su `exit_code` para que la CLI lo traduzca directamente
al código de salida del proceso (1 = uso/configuración, 2 = datos).
"""
from __future__ import annotations


class PicuError(Exception):
    """Error base; `exit_code` es el código de salida que usa la CLI."""

    exit_code: int = 2

    def __init__(self, message: str, *, exit_code: int | None = None) -> None:
        super().__init__(message)
        if exit_code is not None:
            self.exit_code = exit_code


class ConfigError(PicuError):
    """Configuración inválida (settings, SynthConfig, tabla PEWS)."""

    exit_code = 1


class InputError(PicuError):
    """Valor de entrada no finito o con longitud inconsistente."""


class RangeError(PicuError):
    """Valor fuera del rango de la cohorte (p. ej. edad >= 20)."""


class DataError(PicuError):
    """Datos insuficientes o filas CSV mal formadas."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        if line is not None:
            message = f"línea {line}: {message}"
        super().__init__(message)
        self.line = line


class SplitError(PicuError):
    """Partición imposible (un solo paciente, k inválido...)."""


class TrainingError(PicuError):
    """El conjunto de entrenamiento no permite ajustar el modelo."""


class MetricError(PicuError):
    """Métrica indefinida (p. ej. AUROC con una sola clase)."""


class SelectionError(PicuError):
    """Selección de punto de corte imposible."""
