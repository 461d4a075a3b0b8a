import json
import math

import pytest

from maxlab.errors import InputError
from maxlab.oracle import rectangle_lemma_check
from maxlab.store import (
    TABLE_MEASURE_ESTIMATES,
    TABLE_RUNS,
    ResultStore,
    create_store_engine,
    ensure_schema,
    get_all,
    get_by_query,
    insert_data,
    update_data,
)


@pytest.fixture
def engine(tmp_path):
    engine = create_store_engine(str(tmp_path / "results" / "store.db"))
    assert engine is not None
    assert ensure_schema(engine)
    yield engine
    engine.dispose()


@pytest.fixture
def store(tmp_path):
    store = ResultStore(str(tmp_path / "store.db"))
    assert store.connect()
    yield store
    store.close()


class TestOperations:
    def test_insert_and_fetch(self, engine):
        run_id = insert_data(engine, TABLE_RUNS, {"command": "measure", "seed": 3, "spec": "{}"})
        assert run_id == 1
        rows = get_all(engine, TABLE_RUNS)
        assert len(rows) == 1
        assert rows[0]["command"] == "measure"

    def test_update(self, engine):
        run_id = insert_data(engine, TABLE_RUNS, {"command": "verify"})
        assert update_data(engine, TABLE_RUNS, run_id, {"exit_code": 1})
        assert get_all(engine, TABLE_RUNS)[0]["exit_code"] == 1
        assert not update_data(engine, TABLE_RUNS, run_id + 10, {"exit_code": 1})

    def test_query_with_params(self, engine):
        insert_data(engine, TABLE_RUNS, {"command": "scan", "seed": 1})
        insert_data(engine, TABLE_RUNS, {"command": "scan", "seed": 2})
        rows = get_by_query(engine, f"SELECT seed FROM {TABLE_RUNS} WHERE seed > :seed", {"seed": 1})
        assert rows == [{"seed": 2}]

    def test_errors_return_none(self, engine):
        assert insert_data(engine, "no_such_table", {"x": 1}) is None
        assert get_all(engine, "no_such_table") is None
        assert get_by_query(engine, "SELECT * FROM no_such_table") is None

    def test_missing_path(self):
        assert create_store_engine() is None
        assert create_store_engine(config={"database_path": ":memory:"}) is not None


class TestResultStore:
    def test_rows_need_a_run(self, store):
        assert not store.insert_rows("measure", [{"kind": "L1"}])

    def test_unknown_kind(self, store):
        store.insert_run("measure", {"seed": 1})
        with pytest.raises(InputError):
            store.insert_rows("plot", [])

    def test_run_lifecycle(self, store):
        run_id = store.insert_run("measure diamond", {"seed": 11, "kind": "L1"})
        assert run_id is not None
        assert store.finish_run(0)
        run = get_all(store.engine, TABLE_RUNS)[0]
        assert run["seed"] == 11
        assert run["exit_code"] == 0
        assert json.loads(run["spec"]) == {"kind": "L1", "seed": 11}

    def test_measure_rows(self, store):
        store.insert_run("measure", {"seed": 1})
        record = {"kind": "L1", "center": [3.0, 3.0], "radius": 2.0, "method": "quadrature",
                  "log_value": math.log(0.03596036), "rel_stderr": 0.0, "samples": 0, "zero_hits": False}
        assert store.insert_rows("measure", [record])
        row = get_all(store.engine, TABLE_MEASURE_ESTIMATES)[0]
        assert json.loads(row["center"]) == [3.0, 3.0]
        assert row["log_value"] == pytest.approx(record["log_value"])

    def test_oracle_rows(self, store):
        store.insert_run("verify rectangle-lemma", {"seed": 1})
        reports = [rectangle_lemma_check((1.0, 1.5), 1.5, seed=1), rectangle_lemma_check((1.0, 2.0, 0.5), 4.0, seed=2)]
        assert store.insert_rows("oracle", [r.to_dict() for r in reports])
        rows = store.rows_for_run("oracle")
        assert [r["lemma"] for r in rows] == [r.lemma for r in reports]
        assert all(r["passed"] for r in rows)

    def test_scan_rows_drop_non_finite(self, store):
        store.insert_run("counterexample diamond", {"seed": 1})
        records = [
            {"scan": "counterexample", "family": "diamond", "s_or_N": 8.0, "log_value": -math.inf, "growth": None},
            {"scan": "counterexample", "family": "diamond", "s_or_N": 16.0, "log_value": 0.5, "growth": None},
        ]
        assert store.insert_rows("scan", records)
        rows = store.rows_for_run("scan")
        assert rows[0]["log_value"] is None
        assert rows[1]["size"] == 16.0
