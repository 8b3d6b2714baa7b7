"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str


class ConvertRequest(BaseModel):
    input_path: str
    adapter: str = "canonical"
    output_path: str


class ConvertResponse(BaseModel):
    written: str
    sentences: int
    opinions: int
    warnings: list[str] = Field(default_factory=list)
    text: str


class StatsRequest(BaseModel):
    paths: dict[str, str]  # split name -> corpus path


class StatsResponse(BaseModel):
    stats: dict[str, Any]
    overlap: Optional[dict[str, Any]] = None
    text: str


class RunRequest(BaseModel):
    spec_path: Optional[str] = None
    spec: Optional[dict[str, Any]] = None
    jobs: int = 1
    force: bool = False
    seeds: Optional[list[int]] = None  # overrides the spec's seed list


class RunResponse(BaseModel):
    executed: int
    cached: int
    failed: list[dict[str, Any]] = Field(default_factory=list)
    records: list[dict[str, Any]] = Field(default_factory=list)
    aggregates: list[dict[str, Any]] = Field(default_factory=list)
    output_dir: str
    text: str


class PredictRequest(BaseModel):
    model_path: str
    corpus_path: str
    output_path: str
    format: str = "json"
    embeddings: Optional[list[str]] = None  # file-backed provider paths
    source: Optional[dict[str, Any]] = None  # expression source spec


class PredictResponse(BaseModel):
    task: str
    written: str
    sentences: Optional[int] = None
    predictions: Optional[int] = None


class EvalRequest(BaseModel):
    gold_path: str
    pred_path: str


class EvalResponse(BaseModel):
    task: str
    report: dict[str, Any]


class ErrorResponse(BaseModel):
    detail: str
