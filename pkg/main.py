"""
Punto de entrada de la CLI de picu-boost.

Subcomandos:
- synth: cohorte sintética (events.csv + encounters.csv)
- prep: snapshots balanceados y partición train/test
- train: AdaBoost-abstain, GBT, ensemble o PEWS modificado
- eval: métricas, reporte JSON y curva ROC
- timeline: score del modelo en cada medición

Códigos de salida: 0 éxito, 1 uso/configuración, 2 datos.
"""

from __future__ import annotations
import argparse
import logging
import sys
from typing import List, Optional

from config import settings, validate_settings
from Commands import eval_command, prep_command, synth_command, timeline_command, train_command
from Services.errors import PicuError


# Configure global logging
logging.basicConfig(
    level=logging.DEBUG if settings.DEBUG else logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)

logger = logging.getLogger(__name__)

COMMANDS = (synth_command, prep_command, train_command, eval_command, timeline_command)


class CliParser(argparse.ArgumentParser):
    """ArgumentParser que sale con código 1 ante errores de uso."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def add_global_flags(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--seed", type=int, default=default,
                        help=f"semilla de toda la aleatoriedad (default {settings.SEED})")
    parser.add_argument("--out", default=default,
                        help=f"directorio de salida (default {settings.OUTPUT_DIR})")


def build_parser() -> CliParser:
    parser = CliParser(
        prog="picu-boost",
        description="Predicción de traslado a UCI pediátrica con boosting y PEWS modificado",
    )
    add_global_flags(parser, None)

    # también después del subcomando; SUPPRESS evita pisar el valor dado antes
    common = argparse.ArgumentParser(add_help=False)
    add_global_flags(common, argparse.SUPPRESS)

    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)
    for command in COMMANDS:
        command.add_parser(subparsers, [common])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        validate_settings()
    except ValueError as e:
        logger.error("Configuration validation failed: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return 1

    logger.debug("Comando '%s' con %s", args.command, vars(args))
    try:
        return args.handler(args)
    except PicuError as exc:
        logger.error("%s falló: %s", args.command, exc)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception:
        logger.exception("Error inesperado en %s", args.command)
        raise


if __name__ == "__main__":
    sys.exit(main())
