# Commands/synth_command.py
"""
`synth`: genera una cohorte sintética y escribe events.csv y encounters.csv.
"""
from __future__ import annotations
import argparse
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

from config import settings
from Commands.run_config import RunConfig
from Services.dataset import Vital, write_encounters_csv, write_events_csv
from Services.errors import ConfigError
from Services.synth import SynthConfig, generate

logger = logging.getLogger(__name__)

EVENTS_FILE = "events.csv"
ENCOUNTERS_FILE = "encounters.csv"


def add_parser(subparsers, parents: List[argparse.ArgumentParser]) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "synth",
        parents=parents,
        help="Genera encuentros sintéticos (events.csv + encounters.csv)",
    )
    parser.add_argument("--n", type=int, default=None,
                        help=f"número de encuentros (default {settings.SYNTH_N_ENCOUNTERS})")
    parser.add_argument("--prevalence", type=float, default=None,
                        help=f"prevalencia de traslado en (0, 1) (default {settings.SYNTH_PREVALENCE})")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON con campos de SynthConfig; los flags tienen prioridad")
    parser.add_argument("--no-signal", action="store_true",
                        help="anula la deriva y el monitoreo intensificado (caso nulo)")
    parser.add_argument("--facility-shift", action="append", default=[], metavar="VITAL=SD",
                        help="desplaza la media de un vital en SDs (repetible), p. ej. HR=0.5")
    parser.set_defaults(handler=run)
    return parser


def parse_facility_shift(items: List[str]) -> Dict[str, float]:
    shift: Dict[str, float] = {}
    for item in items:
        name, _, raw = item.partition("=")
        try:
            shift[Vital(name.strip()).value] = float(raw)
        except ValueError:
            raise ConfigError(f"--facility-shift inválido: {item!r} (se espera VITAL=SD)") from None
    return shift


def build_config(args: argparse.Namespace, seed: int) -> SynthConfig:
    fields: Dict[str, object] = {}
    if args.config is not None:
        try:
            fields.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"no se pudo leer {args.config}: {exc}") from exc
    fields["n_encounters"] = args.n if args.n is not None else fields.get("n_encounters", settings.SYNTH_N_ENCOUNTERS)
    fields["transfer_prevalence"] = (
        args.prevalence if args.prevalence is not None
        else fields.get("transfer_prevalence", settings.SYNTH_PREVALENCE)
    )
    fields["seed"] = seed
    if args.facility_shift:
        fields["facility_shift"] = parse_facility_shift(args.facility_shift)

    config = SynthConfig.build(**fields)
    return config.without_signal() if args.no_signal else config


def run(args: argparse.Namespace) -> int:
    run_config = RunConfig.from_args(args)
    config = build_config(args, run_config.seed)
    encounters = generate(config)

    events_path = run_config.output(EVENTS_FILE)
    encounters_path = run_config.output(ENCOUNTERS_FILE)
    write_events_csv(encounters, events_path)
    write_encounters_csv(encounters, encounters_path)
    logger.info("Escritos %s y %s", events_path, encounters_path)

    n_events = sum(len(enc.events) for enc in encounters)
    print(f"{len(encounters)} encuentros ({config.n_transferred} traslados), {n_events} eventos -> {run_config.out}")
    return 0
