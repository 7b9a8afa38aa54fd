# cli.py
import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from .core.engine import EngineFacade
from .core.errors import EngineError
from .models.run_models import ModelSpec, RunConfig, RunOutput, VerifyTarget
from .storage.database_service import DatabaseService
from .storage.storage import AbstractStorage, InMemoryStorage, SqlStorage
from .utils.constants import (
    DEFAULT_DATABASE_URL,
    DEFAULT_LOG_LEVEL,
    DEFAULT_PRECISION,
    DEFAULT_SEED,
    SUITE_G_MAX,
    SUITE_K_MAX,
    SUITE_N_MAX,
    SUITE_R_MAX,
)

logger = logging.getLogger(__name__)

CSV_HEADER = ["g", "k", "value", "engine"]


def build_facade() -> EngineFacade:
    """Storage and defaults from the environment."""
    precision = int(os.getenv("HURWITZ_PRECISION", DEFAULT_PRECISION))
    seed = int(os.getenv("HURWITZ_SEED", DEFAULT_SEED))
    database = None
    storage: AbstractStorage
    if os.getenv("USE_DATABASE", "false").lower() == "true":
        db_url = os.getenv("HURWITZ_DATABASE_URL") or DEFAULT_DATABASE_URL
        logger.info("Using database %s for the number cache", db_url)
        database = DatabaseService(db_url)
        database.create_tables()
        storage = SqlStorage(database.get_session())
    else:
        logger.info("All cached numbers are in-memory")
        storage = InMemoryStorage()
    return EngineFacade(storage, precision=precision, seed=seed, database=database)


def render_json(output: RunOutput) -> str:
    return json.dumps(output.model_dump(mode="json", exclude_none=True), sort_keys=True, indent=2) + "\n"


def _csv_value(value) -> str:
    if isinstance(value, list):
        re, im = value
        return f"{re}{'' if im.startswith('-') else '+'}{im}i"
    return str(value)


def render_csv(output: RunOutput) -> str:
    """One row per (g; k; value; engine), parts of k joined by ';'."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in output.results:
        if record.target == "hurwitz":
            table = {record.key: record.value}
        elif record.target == "tr":
            table = record.values
        elif record.target == "wgn" and isinstance(record.value, dict):
            table = record.value
        else:
            continue
        for k in sorted(table, key=lambda key: tuple(int(p) for p in key.split(","))):
            writer.writerow([record.g, k.replace(",", ";"), _csv_value(table[k]), record.engine])
    return buffer.getvalue()


def load_config(path: str) -> RunConfig:
    text = Path(path).read_text()
    return RunConfig.model_validate_json(text)


def describe_validation(exc: ValidationError) -> str:
    lines = []
    for error in exc.errors():
        where = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"{where}: {error['msg']}")
    return "; ".join(lines)


def emit(output: RunOutput, fmt: str, out: Optional[str]) -> None:
    text = render_csv(output) if fmt == "csv" else render_json(output)
    if out:
        Path(out).write_text(text)
        logger.info("Results written to %s", out)
    else:
        sys.stdout.write(text)


def command_run(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except OSError as exc:
        logger.error("Cannot read %s: %s", args.config, exc)
        return 2
    except ValidationError as exc:
        logger.error("Invalid config: %s", describe_validation(exc))
        return 2
    facade = build_facade()
    output = facade.run(config)
    emit(output, args.format or config.output, args.out)
    return 1 if output.any_failed else 0


def command_suite(args: argparse.Namespace) -> int:
    config = RunConfig(
        model=ModelSpec(family="I", name="simple", P1=[0, 1], R1=[0, 1]),
        targets=[VerifyTarget(suite="full", g_max=SUITE_G_MAX, n_max=SUITE_N_MAX, r_max=SUITE_R_MAX,
                              k_max=SUITE_K_MAX)],
    )
    output = build_facade().run(config)
    emit(output, "json", args.out)
    failed = [r for r in output.reports if r.failed]
    for report in failed:
        logger.error("FAIL %s %s (g=%s, n=%s, r=%s, a=%s)", report.check, report.model, report.g, report.n,
                     report.r, report.a)
    return 1 if output.any_failed else 0


def command_db_info(args: argparse.Namespace) -> int:
    info = build_facade().database_info()
    sys.stdout.write(json.dumps(info, sort_keys=True, indent=2) + "\n")
    return 0 if info["status"] == "success" else 3


def command_db_reset(args: argparse.Namespace) -> int:
    info = build_facade().reset_database()
    sys.stdout.write(json.dumps(info, sort_keys=True, indent=2) + "\n")
    return 0 if info["status"] == "success" else 3


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="python -m src.cli",
                                     description="Weighted double Hurwitz numbers and topological recursion.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute the targets of a JSON run config")
    run.add_argument("config", help="path to the run config")
    run.add_argument("--out", help="output file, stdout when omitted")
    run.add_argument("--format", choices=["json", "csv"], help="overrides the config's output format")
    run.set_defaults(handler=command_run)
    suite = sub.add_parser("suite", help="run the curated verification suite")
    suite.add_argument("--out", help="output file, stdout when omitted")
    suite.set_defaults(handler=command_suite)
    sub.add_parser("db-info", help="row counts of the cache tables").set_defaults(handler=command_db_info)
    sub.add_parser("db-reset", help="drop and recreate the cache tables").set_defaults(handler=command_db_reset)
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(level=os.getenv("HURWITZ_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper(), stream=sys.stderr)
    args = parse_args(argv)
    try:
        return args.handler(args)
    except EngineError as exc:
        logger.error("%s: %s", type(exc).__name__, exc.detail)
        return exc.exit_code
    except Exception:
        logger.exception("Unexpected error in %s", args.command)
        return EngineError.exit_code


if __name__ == "__main__":
    sys.exit(main())
