# Commands/prep_command.py
"""
`prep`: construye la cohorte balanceada de snapshots y la particiona.
"""
from __future__ import annotations
import argparse
import logging
from pathlib import Path
from typing import List, Sequence

from config import settings
from Commands.run_config import RunConfig
from Services.dataset import (
    FeatureSnapshot,
    build_cohort,
    read_encounters_csv,
    split_train_test,
    write_snapshots_csv,
)

logger = logging.getLogger(__name__)


def add_parser(subparsers, parents: List[argparse.ArgumentParser]) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "prep",
        parents=parents,
        help="Extrae snapshots y escribe snapshots.csv, train.csv y test.csv",
    )
    parser.add_argument("--events", type=Path, default=None, help="CSV de eventos (default <out>/events.csv)")
    parser.add_argument("--encounters", type=Path, default=None,
                        help="CSV de encuentros (default <out>/encounters.csv)")
    parser.add_argument("--window-hours", type=float, default=None,
                        help=f"largo de la ventana de observación (default {settings.WINDOW_HOURS})")
    parser.add_argument("--lead-hours", type=float, default=None,
                        help=f"horas entre fin de ventana y traslado (default {settings.TRANSFER_LEAD_HOURS})")
    parser.add_argument("--test-fraction", type=float, default=None,
                        help=f"fracción de test (default {settings.TEST_FRACTION})")
    parser.add_argument("--match-age", action="store_true",
                        help="muestrea controles del mismo grupo de edad que cada traslado")
    parser.add_argument("--holdout", action="store_true",
                        help="cohorte externa: escribe todos los snapshots en holdout.csv sin partición")
    parser.set_defaults(handler=run)
    return parser


def _class_counts(snapshots: Sequence[FeatureSnapshot]) -> str:
    pos = sum(1 for s in snapshots if s.label == 1)
    return f"{pos} traslados / {len(snapshots) - pos} controles"


def run(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    config = config.model_copy(
        update={
            "events": config.events or config.out / "events.csv",
            "encounters": config.encounters or config.out / "encounters.csv",
        }
    )
    config.require("events", "encounters")

    encounters = read_encounters_csv(config.encounters, config.events)
    cohort = build_cohort(
        encounters,
        config.seed,
        window_hours=config.window_hours,
        lead_hours=config.lead_hours,
        match_age=args.match_age,
    )

    if args.holdout:
        path = config.output("holdout.csv")
        write_snapshots_csv(cohort, path)
        print(f"holdout: {len(cohort)} snapshots ({_class_counts(cohort)}) -> {path}")
        return 0

    write_snapshots_csv(cohort, config.output("snapshots.csv"))
    train, test = split_train_test(cohort, config.test_fraction, config.seed)
    write_snapshots_csv(train, config.output("train.csv"))
    write_snapshots_csv(test, config.output("test.csv"))
    logger.info("Snapshots escritos en %s", config.out)

    print(f"cohorte: {len(cohort)} snapshots ({_class_counts(cohort)})")
    print(f"train: {len(train)} ({_class_counts(train)}), test: {len(test)} ({_class_counts(test)})")
    return 0
