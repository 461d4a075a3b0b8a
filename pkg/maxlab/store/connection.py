import logging
from pathlib import Path

from sqlalchemy import Boolean, Column, Float, ForeignKey, Integer, MetaData, String, Table, Text, create_engine
from sqlalchemy.exc import SQLAlchemyError

logger = logging.getLogger(__name__)

TABLE_RUNS = "runs"
TABLE_MEASURE_ESTIMATES = "measure_estimates"
TABLE_ORACLE_REPORTS = "oracle_reports"
TABLE_SCAN_ROWS = "scan_rows"

metadata = MetaData()

Table(
    TABLE_RUNS,
    metadata,
    Column("id", Integer, primary_key=True, autoincrement=True),
    Column("command", String(64), nullable=False),
    Column("seed", Integer),
    Column("spec", Text),
    Column("exit_code", Integer),
    Column("started_at", String(19)),
    Column("finished_at", String(19)),
)

Table(
    TABLE_MEASURE_ESTIMATES,
    metadata,
    Column("id", Integer, primary_key=True, autoincrement=True),
    Column("run_id", Integer, ForeignKey(f"{TABLE_RUNS}.id")),
    Column("kind", String(8)),
    Column("center", Text),
    Column("radius", Float),
    Column("method", String(16)),
    Column("log_value", Float),
    Column("rel_stderr", Float),
    Column("samples", Integer),
    Column("zero_hits", Boolean),
    Column("payload", Text),
)

Table(
    TABLE_ORACLE_REPORTS,
    metadata,
    Column("id", Integer, primary_key=True, autoincrement=True),
    Column("run_id", Integer, ForeignKey(f"{TABLE_RUNS}.id")),
    Column("lemma", String(64), nullable=False),
    Column("passed", Boolean),
    Column("samples", Integer),
    Column("violations", Integer),
    Column("residual_max", Float),
    Column("envelope_min", Float),
    Column("envelope_max", Float),
    Column("payload", Text),
)

Table(
    TABLE_SCAN_ROWS,
    metadata,
    Column("id", Integer, primary_key=True, autoincrement=True),
    Column("run_id", Integer, ForeignKey(f"{TABLE_RUNS}.id")),
    Column("scan", String(32), nullable=False),
    Column("family", String(32)),
    Column("size", Float),
    Column("log_value", Float),
    Column("growth", Float),
    Column("seed", Integer),
    Column("policy", String(32)),
    Column("payload", Text),
)


def create_store_engine(path: str = None, config: dict = None):
    """
    Open (and create) the sqlite result store.

    Args:
        path: database file; ":memory:" keeps everything in memory
        config: optional dict with a "database_path" key, used when path is not given

    Returns:
        SQLAlchemy engine, or None when the database cannot be opened
    """
    try:
        if config:
            path = path or config.get("database_path")
        if not path:
            raise ValueError("Missing database path for the result store")

        if path == ":memory:":
            url = "sqlite://"
        else:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            url = f"sqlite:///{path}"
        engine = create_engine(url)

        with engine.connect():
            logger.info("connected to result store '%s'", path)
        return engine

    except SQLAlchemyError as e:
        logger.error("Result store connection failed: %s", e)
        return None

    except ValueError as e:
        logger.error("Configuration error: %s", e)
        return None


def ensure_schema(engine) -> bool:
    """Create the result tables when they are missing."""
    try:
        metadata.create_all(engine)
        return True
    except SQLAlchemyError as e:
        logger.error("Creating the result tables failed: %s", e)
        return False
