from typing import List, Optional

from pydantic import BaseModel, Field, field_validator


class NetworkFile(BaseModel):
    arm_half_length: float = Field(1.0, gt=0)
    source: List[float]
    nodes: List[List[float]]

    @field_validator("source")
    @classmethod
    def _pair(cls, v):
        if len(v) != 2:
            raise ValueError("source must be [x, y]")
        return v

    @field_validator("nodes")
    @classmethod
    def _pairs(cls, v):
        for k, row in enumerate(v):
            if len(row) != 2:
                raise ValueError(f"node {k} must be [x, y]")
        return v


class GridFile(BaseModel):
    segments: List[List[float]]
    nodes: List[List[float]]      # [x, y, segment_index]
    source: int = Field(0, ge=0)

    @field_validator("segments")
    @classmethod
    def _segment_rows(cls, v):
        if not v:
            raise ValueError("at least one segment is required")
        for k, row in enumerate(v):
            if len(row) != 4:
                raise ValueError(f"segment {k} must be [x1, y1, x2, y2]")
        return v

    @field_validator("nodes")
    @classmethod
    def _node_rows(cls, v):
        for k, row in enumerate(v):
            if len(row) != 3 or float(row[2]) != int(row[2]):
                raise ValueError(f"node {k} must be [x, y, segment_index]")
        return v


class AssignmentFile(BaseModel):
    alpha: float = Field(2.0, ge=2.0, le=6.0)
    ranges: List[float]

    @field_validator("ranges")
    @classmethod
    def _non_negative(cls, v):
        if any(r < 0 for r in v):
            raise ValueError("ranges must be >= 0")
        return v


class PlannerReport(BaseModel):
    algo: str
    cost: float
    runtime: float
    iterations: Optional[int]
    delivered: bool


class VerifyReport(BaseModel):
    delivered: bool
    cost: float
    reached: int
    n_nodes: int
    rounds: int


class ExperimentConfigFile(BaseModel):
    topology: str = "cross-general"
    N: List[int] = [13]
    trials: int = Field(100, ge=1)
    alpha: float = Field(2.0, ge=2.0, le=6.0)
    seed: int = 0
    algorithms: Optional[List[str]] = None
    denominator: Optional[str] = None
    arm_half_length: float = Field(1.0, gt=0)
    grid_k: int = Field(2, ge=1)
    grid_side: float = Field(1.0, gt=0)
    budget: Optional[int] = None
    workers: Optional[int] = None
