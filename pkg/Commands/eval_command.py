# Commands/eval_command.py
"""
`eval`: evalúa un modelo guardado sobre un CSV de snapshots.
"""
from __future__ import annotations
import argparse
import logging
from pathlib import Path
from typing import List

from Commands.run_config import RunConfig
from Services.dataset import labels_array, read_snapshots_csv
from Services.metrics import evaluate, roc_points, write_report_json, write_roc_csv
from Services.model_store import ModelScorer, load_model

logger = logging.getLogger(__name__)


def add_parser(subparsers, parents: List[argparse.ArgumentParser]) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(
        "eval",
        parents=parents,
        help="Evalúa un modelo: report.json (métricas) y roc.csv",
    )
    parser.add_argument("--model-file", type=Path, required=True, help="modelo JSON de `train`")
    parser.add_argument("--test", type=Path, default=None, help="CSV de snapshots (default <out>/test.csv)")
    parser.add_argument("--report", type=Path, default=None, help="ruta del reporte (default <out>/report.json)")
    parser.add_argument("--roc", type=Path, default=None, help="ruta de la curva ROC (default <out>/roc.csv)")
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    config = config.model_copy(update={"test": config.test or config.out / "test.csv"})
    config.require("model_file", "test")

    scorer = ModelScorer(load_model(config.model_file))
    test = read_snapshots_csv(config.test)
    labels = labels_array(test)
    scores = scorer.scores(test)

    report = evaluate(scores, labels, threshold=scorer.threshold)
    report_path = args.report or config.output("report.json")
    roc_path = args.roc or config.output("roc.csv")
    write_report_json(report, report_path)
    write_roc_csv(roc_points(scores, labels), roc_path)
    logger.info("Reporte en %s, ROC en %s", report_path, roc_path)

    print(
        f"{scorer.kind}: accuracy={report.accuracy:.4f} sensitivity={report.sensitivity:.4f} "
        f"specificity={report.specificity:.4f} AUROC={report.auroc:.4f} (umbral {scorer.threshold:g})"
    )
    return 0
