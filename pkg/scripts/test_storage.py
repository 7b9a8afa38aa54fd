# test_storage.py
import pytest
from sqlmodel import select

from src.core.errors import ConfigurationError
from src.models.database_models import HurwitzNumberRow
from src.models.run_models import CheckReport, Verdict
from src.storage.database_service import DatabaseService
from src.storage.storage import InMemoryStorage, SqlStorage, parts_key
from src.utils.clock_adapter import FixedClock


@pytest.fixture
def database():
    service = DatabaseService("sqlite://")
    assert service.create_tables()["status"] == "success"
    return service


@pytest.fixture
def clock():
    return FixedClock(start=1000)


@pytest.fixture
def sql_storage(database, clock):
    return SqlStorage(database.get_session(), clock=clock)


def report(check="xihat", verdict=Verdict.PASS, **kwargs) -> CheckReport:
    return CheckReport(check=check, model="m1", verdict=verdict, **kwargs)


def test_parts_key_sorts_descending():
    assert parts_key([1, 3, 2]) == "3,2,1"
    assert parts_key((2,)) == "2"


def test_in_memory_numbers_ignore_part_order():
    storage = InMemoryStorage()
    storage.save_number("m1", "exact", 0, [1, 2], "oracle", "1/2")
    assert storage.get_number("m1", "exact", 0, [2, 1]) == "1/2"
    assert storage.get_number("m1", "numeric:60", 0, [2, 1]) is None
    assert storage.get_number("m2", "exact", 0, [2, 1]) is None


def test_in_memory_reports_filter_by_check():
    storage = InMemoryStorage()
    storage.save_report("m1", report())
    storage.save_report("m1", report(check="projection_poles", verdict=Verdict.FAIL))
    assert len(storage.get_reports("m1")) == 2
    assert [r.verdict for r in storage.get_reports("m1", "projection_poles")] == [Verdict.FAIL]
    assert storage.get_reports("other") == []


def test_sql_number_round_trip(sql_storage):
    sql_storage.save_number("m1", "exact", 1, [2], "oracle", "1/12")
    sql_storage.save_number("m1", "numeric:40", 0, [2, 1], "trengine", ["0.5", "0"])
    assert sql_storage.get_number("m1", "exact", 1, [2]) == "1/12"
    assert sql_storage.get_number("m1", "numeric:40", 0, [1, 2]) == ["0.5", "0"]
    assert sql_storage.get_number("m1", "exact", 2, [2]) is None


def test_sql_save_number_upserts(sql_storage, database, clock):
    sql_storage.save_number("m1", "exact", 1, [2], "oracle", "1/12")
    clock.tick(5)
    sql_storage.save_number("m1", "exact", 1, [2], "closedform", "1/12")
    with database.get_session() as session:
        rows = session.exec(select(HurwitzNumberRow)).all()
    assert len(rows) == 1
    assert rows[0].engine == "closedform"
    assert rows[0].created_at == 1005


def test_sql_reports_keep_witness_and_order(sql_storage):
    sql_storage.save_report("m1", report(g=1, n=1, a=0, witness={"power": -2, "coefficient": "2"},
                                         verdict=Verdict.FAIL))
    sql_storage.save_report("m1", report(check="projection_odd", g=1, n=1))
    reports = sql_storage.get_reports("m1")
    assert [r.check for r in reports] == ["xihat", "projection_odd"]
    assert reports[0].witness == {"power": -2, "coefficient": "2"}
    assert reports[0].failed
    assert reports[1].witness == {}
    assert [r.check for r in sql_storage.get_reports("m1", "projection_odd")] == ["projection_odd"]


def test_database_info_counts_rows(sql_storage, database):
    sql_storage.save_number("m1", "exact", 0, [3], "oracle", "1/2")
    sql_storage.save_report("m1", report())
    info = database.get_database_info()
    assert info["status"] == "success"
    assert info["tables"]["hurwitz_numbers"]["record_count"] == 1
    assert info["tables"]["check_reports"]["record_count"] == 1


def test_reset_tables_empties_cache(sql_storage, database):
    sql_storage.save_number("m1", "exact", 0, [3], "oracle", "1/2")
    assert database.reset_tables()["status"] == "success"
    info = database.get_database_info()
    assert info["tables"]["hurwitz_numbers"]["record_count"] == 0


def test_database_service_needs_url():
    with pytest.raises(ConfigurationError):
        DatabaseService("")
