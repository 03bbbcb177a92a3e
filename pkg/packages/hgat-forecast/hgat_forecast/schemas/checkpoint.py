from enum import Enum
from typing import List

from hgat_forecast.schemas.options import ModelOptions, Regime
from pydantic import BaseModel, Field

CHECKPOINT_SCHEMA_VERSION = "1.0"


class TensorKind(str, Enum):
    parameter = "parameter"
    buffer = "buffer"


class TensorEntry(BaseModel):
    name: str
    kind: TensorKind
    shape: List[int]
    dtype: str = Field(..., description="numpy dtype string, always little-endian")
    offset: int = Field(..., ge=0, description="Byte offset inside the blob")
    nbytes: int = Field(..., ge=0)


class CheckpointManifest(BaseModel):
    """JSON header of a checkpoint file, followed by the raw tensor blob."""

    schema_version: str = Field(CHECKPOINT_SCHEMA_VERSION)
    regime: Regime
    step: int = Field(..., ge=0)
    options: ModelOptions
    removed_relations: List[str] = []
    tensors: List[TensorEntry]
