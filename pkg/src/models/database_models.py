from typing import Any, Dict, Optional
from sqlalchemy import Column, JSON
from sqlmodel import SQLModel, Field, Index

class HurwitzNumberRow(SQLModel, table=True):
    """
    One cached weighted double Hurwitz number h_{g;k}.
    `model_key` is the model fingerprint, `mode` is "exact/<engine>" or "numeric:<digits>/<engine>".
    """
    __tablename__ = "hurwitz_numbers"

    id: Optional[int] = Field(default=None, primary_key=True)
    model_key: str = Field(index=True, nullable=False)
    mode: str = Field(nullable=False)
    g: int
    k: str = Field(description="Comma separated parts, weakly decreasing")
    engine: str
    value: Any = Field(sa_column=Column(JSON), description="rational string or [re, im] strings")
    created_at: int = Field(
        default=0,
        nullable=False,
        description="Integer timestamp when the value was stored"
    )

    __table_args__ = (
        Index("ix_hurwitz_lookup", "model_key", "mode", "g", "k", unique=True),
    )

class CheckReportRow(SQLModel, table=True):
    """
    Persists one verification report.
    """
    __tablename__ = "check_reports"

    id: Optional[int] = Field(default=None, primary_key=True)
    model_key: str = Field(index=True, nullable=False)
    check: str = Field(index=True)
    g: Optional[int] = None
    n: Optional[int] = None
    r: Optional[int] = None
    a: Optional[int] = None
    verdict: str
    reason: Optional[str] = None
    witness: Dict[str, Any] = Field(
        default_factory=dict,
        sa_column=Column(JSON),
        description="Failure witness or computed coefficients"
    )
    created_at: int = Field(default=0, nullable=False)
