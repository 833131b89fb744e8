"""Request/response models shared by the HTTP service and the CLI client."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

VerifyTarget = Literal["prop15", "thm21", "lemma32", "thm33"]
WitnessId = Literal["32", "23"]


class CheckResult(BaseModel):
    name: str
    residual: float
    exact_zero: Optional[bool] = None
    passed: bool
    detail: Optional[str] = None


class MatrixRender(BaseModel):
    symbolic: list[list[str]]
    decimal: list[list[list[float]]]
    exact: list[list[dict[str, str]]]


class VerifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    target: VerifyTarget
    backend: Literal["exact", "cyclic"] = "exact"
    window: int = Field(default=8, ge=2, le=64)


class VerifyResponse(BaseModel):
    target: VerifyTarget
    backend: str
    window: Optional[int] = None
    envelope: Optional[float] = None
    passed: bool
    checks: list[CheckResult]
    matrices: dict[str, MatrixRender] = {}
    conventions: list[str]
    version: str


class EmbedCheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    length: int = Field(ge=1)
    exponent_bound: int = Field(ge=1)
    cap: int = Field(default=2_000_000, ge=1)


class EmbedCheckResponse(BaseModel):
    passed: bool
    length: int
    exponent_bound: int
    words_checked: int
    collisions: int
    power_lengths: list[int]
    lengths_strictly_increasing: bool
    version: str


class CertificateCheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    witness: WitnessId
    table: dict


class CertificateCheckResponse(BaseModel):
    witness: WitnessId
    table_field: str
    invariant_violations: list[str]
    components: dict[str, float]
    total_defect: float
    exact_zero: Optional[bool] = None
    conventions: list[str]
    version: str


class OptimizeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    witness: WitnessId
    dims: list[tuple[int, int]]
    restarts: int = Field(default=50, ge=1)
    seed: int = Field(default=42, ge=0)
    max_iters: Optional[int] = Field(default=None, ge=0)
    include_warm: bool = True


class RestartRow(BaseModel):
    restart: int
    seed: int
    kind: str
    iterations: int
    defect: float


class DimReport(BaseModel):
    witness: WitnessId
    dA: int
    dB: int
    restarts: int
    master_seed: int
    results: list[RestartRow]
    best_defect: float
    best_index: int
    wall_time_s: float
    checkpoint: Optional[str] = None


class OptimizeResponse(BaseModel):
    witness: WitnessId
    master_seed: int
    reports: list[DimReport]
    csv: str
    conventions: list[str]
    version: str


class WitnessResponse(BaseModel):
    witness: WitnessId
    n: int
    inputs: int
    outcomes: int
    targets: dict[str, MatrixRender]
    table: dict
    conventions: list[str]
    version: str


class MetaResponse(BaseModel):
    version: str
    conventions: list[str]
    commands: list[str]
