# run_models.py
from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.errors import ConfigurationError
from src.core.model import HypergeometricModel
from src.core.scalars import is_decimal_literal

Scalar = Union[int, str]


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


# Pydantic models for the run configuration
class ModelSpec(BaseModel):
    """Model data; polynomials are coefficient lists, lowest degree first."""

    model_config = ConfigDict(extra="forbid")

    family: Literal["I", "II", "raw"]
    name: str = ""
    P1: Optional[List[Scalar]] = None
    P2: Optional[List[Scalar]] = None
    P3: Optional[List[Scalar]] = None
    R1: Optional[List[Scalar]] = None
    R2: Optional[List[Scalar]] = None
    R3: Optional[List[Scalar]] = None
    R4: Optional[List[Scalar]] = None
    alpha: Optional[Scalar] = None
    psi: Optional[List[Scalar]] = None
    psi_corrections: Optional[List[List[Scalar]]] = None
    y_corrections: Optional[List[Tuple[List[Scalar], List[Scalar]]]] = None

    @model_validator(mode="after")
    def check_family_fields(self) -> "ModelSpec":
        if self.family == "II" and self.alpha is None:
            raise ValueError("Family II needs alpha")
        if self.family == "raw" and self.psi is None:
            raise ValueError("a raw model needs psi")
        if self.family != "raw" and (self.psi or self.psi_corrections or self.y_corrections):
            raise ValueError("psi, psi_corrections and y_corrections belong to raw models")
        return self

    def scalars(self) -> List[Scalar]:
        out: List[Scalar] = []
        for name in ("P1", "P2", "P3", "R1", "R2", "R3", "R4", "psi"):
            out.extend(getattr(self, name) or [])
        if self.alpha is not None:
            out.append(self.alpha)
        for correction in self.psi_corrections or []:
            out.extend(correction)
        for num, den in self.y_corrections or []:
            out.extend(num + den)
        return out

    def uses_decimals(self) -> bool:
        return any(is_decimal_literal(v) for v in self.scalars())

    def to_model(self) -> HypergeometricModel:
        data = self.model_dump(exclude_none=True)
        family = data.pop("family")
        return HypergeometricModel(family, **data)

    @classmethod
    def from_model(cls, model: HypergeometricModel) -> "ModelSpec":
        data = {k: v for k, v in model.to_dict().items() if v not in (None, [])}
        if "y_corrections" in data:
            data["y_corrections"] = [tuple(pair) for pair in data["y_corrections"]]
        return cls(**data)


class ModeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["exact", "numeric"] = "exact"
    digits: int = Field(60, ge=30)


class HurwitzTarget(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["hurwitz"] = "hurwitz"
    g: int = Field(..., ge=0)
    k: List[int] = Field(..., min_length=1)
    engine: Literal["oracle", "closedform", "trengine"] = "oracle"

    @field_validator("k")
    @classmethod
    def positive_parts(cls, k: List[int]) -> List[int]:
        if any(part < 1 for part in k):
            raise ValueError("parts of k must be positive")
        return sorted(k, reverse=True)


class WgnTarget(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["wgn"] = "wgn"
    g: int = Field(..., ge=0)
    n: int = Field(..., ge=1)
    quantity: Literal["W", "H", "Wr"] = "W"
    r: int = Field(1, ge=0)
    method: Literal["closedform", "definitional", "explicit"] = "closedform"
    representation: Literal["rational", "pinned", "series"] = "series"
    k_max: int = Field(6, ge=1)


class TRTarget(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["tr"] = "tr"
    g_max: int = Field(..., ge=0)
    n_max: int = Field(..., ge=1)
    k_max: int = Field(5, ge=1)
    method: Literal["auto", "ceo", "be"] = "auto"


class VerifyTarget(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["verify"] = "verify"
    suite: Literal["model", "full"] = "model"
    g_max: int = Field(1, ge=0)
    n_max: int = Field(2, ge=1)
    r_max: int = Field(3, ge=1)
    k_max: int = Field(5, ge=1)


class QuasipolyTarget(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["quasipoly"] = "quasipoly"
    g: int = Field(..., ge=0)
    n: int = Field(..., ge=1)
    k_max: int = Field(6, ge=2)
    basis: Literal["xi", "xi_tilde"] = "xi"


Target = Annotated[
    Union[HurwitzTarget, WgnTarget, TRTarget, VerifyTarget, QuasipolyTarget], Field(discriminator="kind")
]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelSpec
    mode: ModeSpec = Field(default_factory=ModeSpec)
    targets: List[Target] = Field(default_factory=list)
    output: Literal["json", "csv"] = "json"
    seed: int = 2024
    record_timings: bool = False

    def build_model(self) -> HypergeometricModel:
        try:
            return self.model.to_model()
        except ConfigurationError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid model: {exc}") from exc

    @property
    def effective_mode(self) -> str:
        return "numeric" if self.model.uses_decimals() else self.mode.kind


# Check and result records
class CheckReport(BaseModel):
    check: str
    model: str
    g: Optional[int] = None
    n: Optional[int] = None
    r: Optional[int] = None
    a: Optional[int] = None
    verdict: Verdict
    reason: Optional[str] = None
    witness: Dict[str, Any] = Field(default_factory=dict)
    seconds: Optional[float] = None

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.FAIL

    def sort_key(self) -> Tuple:
        scope = tuple(-1 if v is None else v for v in (self.g, self.n, self.r, self.a))
        return (self.model, self.check) + scope


class ResultRecord(BaseModel):
    target: str
    key: str
    engine: str
    g: Optional[int] = None
    n: Optional[int] = None
    r: Optional[int] = None
    value: Any = None
    values: Optional[Dict[str, Any]] = None
    verdict: Optional[Verdict] = None


class RunOutput(BaseModel):
    meta: Dict[str, Any]
    results: List[ResultRecord] = Field(default_factory=list)
    reports: List[CheckReport] = Field(default_factory=list)

    @property
    def any_failed(self) -> bool:
        return any(r.failed for r in self.reports) or any(r.verdict is Verdict.FAIL for r in self.results)
