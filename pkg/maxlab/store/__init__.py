from .connection import (
    create_store_engine,
    ensure_schema,
    TABLE_RUNS,
    TABLE_MEASURE_ESTIMATES,
    TABLE_ORACLE_REPORTS,
    TABLE_SCAN_ROWS,
)
from .operations import insert_data, update_data, get_all, get_by_query
from .manager import ResultStore

__all__ = [
    "ResultStore",
    "create_store_engine",
    "ensure_schema",
    "insert_data",
    "update_data",
    "get_all",
    "get_by_query",
    "TABLE_RUNS",
    "TABLE_MEASURE_ESTIMATES",
    "TABLE_ORACLE_REPORTS",
    "TABLE_SCAN_ROWS",
]
