import json
import logging
from datetime import datetime
from typing import Iterable, Optional

from maxlab.config import get_settings
from maxlab.errors import InputError
from maxlab.report.artifacts import to_plain
from .connection import (
    TABLE_MEASURE_ESTIMATES,
    TABLE_ORACLE_REPORTS,
    TABLE_RUNS,
    TABLE_SCAN_ROWS,
    create_store_engine,
    ensure_schema,
)
from .operations import get_by_query, insert_data, update_data

logger = logging.getLogger(__name__)

TIME_FORMAT = "%Y-%m-%d %H:%M:%S"


def _payload(record: dict) -> str:
    return json.dumps(to_plain(record), sort_keys=True)


def _measure_row(record: dict) -> dict:
    return {
        "kind": record.get("kind"),
        "center": json.dumps(to_plain(record.get("center"))),
        "radius": record.get("radius"),
        "method": record.get("method"),
        "log_value": to_plain(record.get("log_value")),
        "rel_stderr": record.get("rel_stderr"),
        "samples": record.get("samples"),
        "zero_hits": record.get("zero_hits"),
    }


def _oracle_row(record: dict) -> dict:
    return {
        "lemma": record["lemma"],
        "passed": record.get("passed"),
        "samples": record.get("samples"),
        "violations": record.get("violations"),
        "residual_max": record.get("residual_max"),
        "envelope_min": record.get("envelope_min"),
        "envelope_max": record.get("envelope_max"),
    }


def _scan_row(record: dict) -> dict:
    return {
        "scan": record["scan"],
        "family": record.get("family"),
        "size": record.get("size", record.get("s_or_N")),
        "log_value": to_plain(record.get("log_value", record.get("log_ratio"))),
        "growth": record.get("growth"),
        "seed": record.get("seed"),
        "policy": record.get("policy"),
    }


ROW_KINDS = {
    "measure": (TABLE_MEASURE_ESTIMATES, _measure_row),
    "oracle": (TABLE_ORACLE_REPORTS, _oracle_row),
    "scan": (TABLE_SCAN_ROWS, _scan_row),
}


class ResultStore:
    """
    Optional sqlite record of every run: one row in runs, then its measure
    estimates, oracle reports or scan rows. Failures are logged and never
    stop a run.
    """

    def __init__(self, path: str = None):
        outputs = get_settings().outputs
        self.path = path or outputs.database_path
        self.engine = None
        self.run_id = None

    def connect(self) -> bool:
        self.engine = create_store_engine(self.path)
        return self.engine is not None and ensure_schema(self.engine)

    def _ready(self) -> bool:
        if not self.engine:
            self.connect()
        if not self.engine:
            logger.warning("No result store connection available")
            return False
        return True

    def insert_run(self, command: str, spec: dict) -> Optional[int]:
        if not self._ready():
            return None
        row = {
            "command": command,
            "seed": spec.get("seed"),
            "spec": _payload(spec),
            "started_at": datetime.now().strftime(TIME_FORMAT),
        }
        self.run_id = insert_data(self.engine, TABLE_RUNS, row)
        if self.run_id is None:
            logger.warning("Failed to record run %s", command)
        return self.run_id

    def finish_run(self, exit_code: int) -> bool:
        if not self.run_id or not self._ready():
            return False
        data = {"exit_code": exit_code, "finished_at": datetime.now().strftime(TIME_FORMAT)}
        return update_data(self.engine, TABLE_RUNS, self.run_id, data)

    def insert_rows(self, kind: str, rows: Iterable[dict]) -> bool:
        """
        Store result records under the current run.

        Args:
            kind: "measure", "oracle" or "scan"
            rows: record dicts as written to the artifacts

        Returns:
            True when every row was inserted
        """
        if kind not in ROW_KINDS:
            raise InputError(f"Unknown result kind: {kind}")
        if not self.run_id:
            logger.warning("No run id. Call insert_run() first.")
            return False
        if not self._ready():
            return False

        table_name, columns = ROW_KINDS[kind]
        rows = list(rows)
        inserted = 0
        for record in rows:
            row = {"run_id": self.run_id, **to_plain(columns(record)), "payload": _payload(record)}
            if insert_data(self.engine, table_name, row) is not None:
                inserted += 1
        logger.info("Inserted %d/%d rows into %s", inserted, len(rows), table_name)
        return inserted == len(rows)

    def rows_for_run(self, kind: str, run_id: int = None):
        if kind not in ROW_KINDS:
            raise InputError(f"Unknown result kind: {kind}")
        table_name, _ = ROW_KINDS[kind]
        return get_by_query(
            self.engine,
            f"SELECT * FROM {table_name} WHERE run_id = :run_id ORDER BY id",
            {"run_id": run_id or self.run_id},
        )

    def close(self):
        if self.engine:
            self.engine.dispose()
