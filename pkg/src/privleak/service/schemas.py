"""Request/response models for the clustering session service."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..entropy import Algorithm, EntropyConfig, Symbol


class EntropyConfigModel(BaseModel):
    algorithm: Literal["shannon", "min"] = "shannon"
    symbol: Literal["bit", "octet"] = "octet"
    normalized: bool = True
    length_corrected: bool = True

    def to_config(self) -> EntropyConfig:
        return EntropyConfig(
            algorithm=Algorithm(self.algorithm),
            symbol=Symbol(self.symbol),
            normalized=self.normalized,
            length_corrected=self.length_corrected,
        )

    @classmethod
    def from_config(cls, config: EntropyConfig) -> "EntropyConfigModel":
        return cls(
            algorithm=config.algorithm.value,
            symbol=config.symbol.value,
            normalized=config.normalized,
            length_corrected=config.length_corrected,
        )


class CreateSessionRequest(BaseModel):
    rule_id: str
    k_init: int = Field(default=1, ge=1)
    config: EntropyConfigModel = EntropyConfigModel()
    seed: int = 0


class ComponentModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    median: float
    scale: float = Field(alias="lambda")
    beta: float
    deleted: bool


class MixtureModelOut(BaseModel):
    components: list[ComponentModel]
    mml: float
    iterations: int
    converged: bool


class HistogramModel(BaseModel):
    edges: list[float]
    counts: list[int]


class ComponentSigmaModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    index: int
    beta: float
    median: float
    scale: float = Field(alias="lambda")
    mean: float
    sigma_model: float
    sigma_normal: float
    sigma_laplace: float


class SigmaTablesModel(BaseModel):
    components: list[ComponentSigmaModel]
    rule_sigma_model: float
    rule_sigma_normal: float
    rule_sigma_laplace: float


class SessionStateModel(BaseModel):
    session_id: str
    rule_id: str
    state: Literal["iterating", "awaiting_edits", "finalized"]
    n_samples: int
    config: EntropyConfigModel
    histogram: HistogramModel
    model: MixtureModelOut
    sigma_tables: Optional[SigmaTablesModel] = None
    edits_since_convergence: int = 0


class CommandRequest(BaseModel):
    op: Literal["setcl", "delcl", "pickcl", "cont"]
    k: Optional[int] = None
    median: Optional[float] = None
    clusters: Optional[list[int]] = None
    x: Optional[float] = None


class SessionCreatedModel(BaseModel):
    session_id: str
    created: bool
    state: SessionStateModel


class RuleInfoModel(BaseModel):
    rule_id: str
    alarms: int


class RuleLeakageModel(BaseModel):
    rule_id: str
    alarms: int
    mean: float
    median: float
    sigma_normal: float
    sigma_laplace: float
    leakage_min: float
    leakage_max: float
    impact: float
    pi: float


class AggregateReportModel(BaseModel):
    sigma_all: float
    config: EntropyConfigModel
    rules: list[RuleLeakageModel]


class WhatIfRequest(BaseModel):
    remove: list[str] = []
    anonymize: list[str] = []
    table1: bool = False


class WhatIfResponse(BaseModel):
    old_sigma_all: float
    new_sigma_all: float
