# Commands/timeline_command.py
"""
`timeline`: predicción del modelo cada vez que se registra una medición.

Para cada encuentro se recorre la ventana de observación (la misma que usa
`prep` para los traslados; las últimas horas de la estancia para el resto) y,
en cada evento, se construye el snapshot vigente a ese instante.
"""
from __future__ import annotations
import argparse
import logging
from datetime import datetime, timedelta
from pathlib import Path
from typing import List, Optional, Tuple

import pandas as pd

from config import settings
from Commands.run_config import RunConfig
from Services.dataset import Encounter, extract_snapshot, positive_window_end, read_encounters_csv
from Services.model_store import ModelScorer, load_model

logger = logging.getLogger(__name__)

TIMELINE_COLUMNS = ("encounter_id", "patient_id", "time", "vital", "value", "score")


def add_parser(subparsers, parents: List[argparse.ArgumentParser]) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "timeline",
        parents=parents,
        help="Score del modelo en cada evento de la ventana (timeline.csv)",
    )
    parser.add_argument("--model-file", type=Path, required=True, help="modelo JSON de `train`")
    parser.add_argument("--events", type=Path, default=None, help="CSV de eventos (default <out>/events.csv)")
    parser.add_argument("--encounters", type=Path, default=None,
                        help="CSV de encuentros (default <out>/encounters.csv)")
    parser.add_argument("--encounter-id", action="append", default=[], dest="encounter_ids",
                        help="encuentro a incluir (repetible; default todos)")
    parser.add_argument("--window-hours", type=float, default=None,
                        help=f"largo de la ventana (default {settings.WINDOW_HOURS})")
    parser.add_argument("--lead-hours", type=float, default=None,
                        help=f"horas entre fin de ventana y traslado (default {settings.TRANSFER_LEAD_HOURS})")
    parser.add_argument("--timeline", type=Path, default=None, help="ruta de salida (default <out>/timeline.csv)")
    parser.set_defaults(handler=run)
    return parser


def timeline_window(encounter: Encounter, window_hours: float, lead_hours: float) -> Optional[Tuple[datetime, datetime]]:
    """[inicio, fin] de la ventana; None si el encuentro no tiene eventos."""
    if encounter.transferred:
        end = positive_window_end(encounter, lead_hours)
    elif encounter.last_time is not None:
        end = encounter.last_time
    else:
        return None
    return end - timedelta(hours=window_hours), end


def encounter_timeline(
    encounter: Encounter,
    scorer: ModelScorer,
    *,
    window_hours: float,
    lead_hours: float,
) -> List[tuple]:
    window = timeline_window(encounter, window_hours, lead_hours)
    if window is None:
        return []
    start, end = window
    in_window = [ev for ev in encounter.events if start <= ev.time <= end]
    if not in_window:
        return []
    snapshots = [extract_snapshot(encounter, ev.time, window_hours) for ev in in_window]
    scores = scorer.scores(snapshots)
    return [
        (ev.encounter_id, ev.patient_id, ev.time.isoformat().replace("+00:00", "Z"), ev.vital.value, ev.value, float(s))
        for ev, s in zip(in_window, scores)
    ]


def run(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    config = config.model_copy(
        update={
            "events": config.events or config.out / "events.csv",
            "encounters": config.encounters or config.out / "encounters.csv",
        }
    )
    config.require("model_file", "events", "encounters")

    scorer = ModelScorer(load_model(config.model_file))
    encounters = read_encounters_csv(config.encounters, config.events)
    if args.encounter_ids:
        wanted = set(args.encounter_ids)
        encounters = [enc for enc in encounters if enc.encounter_id in wanted]
        missing = wanted - {enc.encounter_id for enc in encounters}
        if missing:
            logger.warning("Encuentros no encontrados: %s", ", ".join(sorted(missing)))

    rows: List[tuple] = []
    for encounter in encounters:
        rows.extend(
            encounter_timeline(
                encounter,
                scorer,
                window_hours=config.window_hours,
                lead_hours=config.lead_hours,
            )
        )

    path = args.timeline or config.output("timeline.csv")
    pd.DataFrame(rows, columns=list(TIMELINE_COLUMNS)).to_csv(path, index=False)
    print(f"timeline: {len(rows)} filas de {len(encounters)} encuentros -> {path}")
    return 0
