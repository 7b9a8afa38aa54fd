# database_service.py
from sqlmodel import SQLModel, create_engine, Session
from src.core.errors import ConfigurationError
from src.models.database_models import CheckReportRow, HurwitzNumberRow
from typing import Dict, Any
import logging

logger = logging.getLogger(__name__)

TABLES = ["hurwitz_numbers", "check_reports"]


class DatabaseService:
    def __init__(self, database_url: str = None):
        """
        Initialize the database service.

        Args:
            database_url: SQLAlchemy database URL, e.g. sqlite:///hurwitz_cache.db
        """
        if not database_url:
            raise ConfigurationError("no database url provided")
        options = {"echo": False}
        if not database_url.startswith("sqlite"):
            options.update(pool_pre_ping=True, pool_recycle=300)
        self.engine = create_engine(database_url, **options)
        self.database_url = database_url

    def create_tables(self) -> Dict[str, Any]:
        """
        Create the cache tables if they are missing.

        Returns:
            Dict with status and details about the operation
        """
        try:
            SQLModel.metadata.create_all(self.engine)
            return {
                "status": "success",
                "message": "All tables created successfully",
                "tables_created": TABLES,
                "database_url": self.database_url
            }
        except Exception as e:
            logger.error("Failed to create tables: %s", e)
            return {
                "status": "error",
                "message": f"Failed to create tables: {str(e)}",
                "error": str(e)
            }

    def reset_tables(self) -> Dict[str, Any]:
        """
        Drop all cache tables and recreate them.
        """
        try:
            SQLModel.metadata.drop_all(self.engine)
            SQLModel.metadata.create_all(self.engine)
            return {
                "status": "success",
                "message": "Database reset successfully - all tables dropped and recreated",
                "tables_reset": TABLES,
                "database_url": self.database_url
            }
        except Exception as e:
            logger.error("Failed to reset database: %s", e)
            return {
                "status": "error",
                "message": f"Failed to reset database: {str(e)}",
                "error": str(e)
            }

    def get_database_info(self) -> Dict[str, Any]:
        """
        Row counts of the cache tables.
        """
        try:
            with Session(self.engine) as session:
                number_count = session.query(HurwitzNumberRow).count()
                report_count = session.query(CheckReportRow).count()
                return {
                    "status": "success",
                    "database_url": self.database_url,
                    "tables": {
                        "hurwitz_numbers": {"exists": True, "record_count": number_count},
                        "check_reports": {"exists": True, "record_count": report_count},
                    }
                }
        except Exception as e:
            return {
                "status": "error",
                "message": f"Failed to get database info: {str(e)}",
                "error": str(e),
                "database_url": self.database_url
            }

    def get_session(self) -> Session:
        return Session(self.engine)
