# storage.py
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Tuple
from src.models.database_models import CheckReportRow, HurwitzNumberRow
from src.models.run_models import CheckReport, Verdict
from src.utils.clock_adapter import SystemClock
from sqlmodel import Session, select
import logging

logger = logging.getLogger(__name__)

NumberKey = Tuple[str, str, int, Tuple[int, ...]]


def parts_key(k) -> str:
    return ",".join(str(part) for part in sorted(k, reverse=True))


class AbstractStorage(ABC):
    """Cache of computed Hurwitz numbers and verification reports, keyed by model fingerprint."""

    @abstractmethod
    def save_number(self, model_key: str, mode: str, g: int, k, engine: str, value: Any) -> None:
        pass
    @abstractmethod
    def get_number(self, model_key: str, mode: str, g: int, k) -> Optional[Any]:
        pass
    @abstractmethod
    def save_report(self, model_key: str, report: CheckReport) -> None:
        pass
    @abstractmethod
    def get_reports(self, model_key: str, check: Optional[str] = None) -> List[CheckReport]:
        pass

# ------------------------------------------------------------------
class InMemoryStorage(AbstractStorage):
    def __init__(self) -> None:
        self._numbers: Dict[NumberKey, Any] = {}
        self._reports: Dict[str, List[CheckReport]] = {}

    def save_number(self, model_key: str, mode: str, g: int, k, engine: str, value: Any) -> None:
        self._numbers[(model_key, mode, g, parts_key(k))] = value

    def get_number(self, model_key: str, mode: str, g: int, k) -> Optional[Any]:
        return self._numbers.get((model_key, mode, g, parts_key(k)))

    def save_report(self, model_key: str, report: CheckReport) -> None:
        self._reports.setdefault(model_key, []).append(report)

    def get_reports(self, model_key: str, check: Optional[str] = None) -> List[CheckReport]:
        return [r for r in self._reports.get(model_key, []) if check is None or r.check == check]

# ------------------------------------------------------------------
class SqlStorage(AbstractStorage):
    def __init__(self, session: Session, clock=None):
        self._session = session
        self._clock = clock or SystemClock()

    def _find(self, model_key: str, mode: str, g: int, k) -> Optional[HurwitzNumberRow]:
        statement = select(HurwitzNumberRow).where(
            HurwitzNumberRow.model_key == model_key,
            HurwitzNumberRow.mode == mode,
            HurwitzNumberRow.g == g,
            HurwitzNumberRow.k == parts_key(k),
        )
        return self._session.exec(statement).first()

    def save_number(self, model_key: str, mode: str, g: int, k, engine: str, value: Any) -> None:
        orm = self._find(model_key, mode, g, k)
        if orm is None:
            orm = HurwitzNumberRow(model_key=model_key, mode=mode, g=g, k=parts_key(k), engine=engine, value=value)
        else:
            orm.engine, orm.value = engine, value
        orm.created_at = self._clock.now()
        self._session.add(orm)
        self._session.commit()
        logger.debug("Stored h_{%d;%s} (%s)", g, parts_key(k), engine)

    def get_number(self, model_key: str, mode: str, g: int, k) -> Optional[Any]:
        orm = self._find(model_key, mode, g, k)
        return orm.value if orm else None

    def save_report(self, model_key: str, report: CheckReport) -> None:
        orm = CheckReportRow(
            model_key=model_key,
            check=report.check,
            g=report.g,
            n=report.n,
            r=report.r,
            a=report.a,
            verdict=report.verdict.value,
            reason=report.reason,
            witness=report.witness,
            created_at=self._clock.now(),
        )
        self._session.add(orm)
        self._session.commit()

    def get_reports(self, model_key: str, check: Optional[str] = None) -> List[CheckReport]:
        statement = select(CheckReportRow).where(CheckReportRow.model_key == model_key)
        if check is not None:
            statement = statement.where(CheckReportRow.check == check)
        orms = self._session.exec(statement.order_by(CheckReportRow.id)).all()
        return [
            CheckReport(
                check=orm.check, model=orm.model_key, g=orm.g, n=orm.n, r=orm.r, a=orm.a,
                verdict=Verdict(orm.verdict), reason=orm.reason, witness=orm.witness or {},
            )
            for orm in orms
        ]
