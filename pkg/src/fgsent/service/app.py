"""HTTP service exposing the toolkit: convert, stats, run, predict, eval.

Error mapping: unknown names / unusable requests -> 400, missing files ->
404, data that parses but fails validation -> 422, anything unexpected ->
500. The CLI converts these to its exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..adapters import AdapterError, convert_file
from ..commands import (CommandError, convert_report_text, eval_command, predict_command,
                        stats_command)
from ..conll import ConllError
from ..corpus import CorpusError
from ..embeddings import EmbeddingError, FileBackedProvider
from ..evaluation import EvalError
from ..experiments import (ExperimentSpec, SpecError, render_aggregate_table, resolve_data_path,
                           run_sweep)
from ..lexicon import LexiconError
from ..model_io import ModelIOError
from ..tagscheme import TagError
from .schemas import (ConvertRequest, ConvertResponse, EvalRequest, EvalResponse,
                      HealthResponse, PredictRequest, PredictResponse, RunRequest,
                      RunResponse, StatsRequest, StatsResponse)

_USAGE_ERRORS = (AdapterError, CommandError, SpecError)
_VALIDATION_ERRORS = (CorpusError, ConllError, TagError, EvalError, EmbeddingError,
                      LexiconError, ModelIOError, ValueError)


def create_app() -> FastAPI:
    app = FastAPI(title="fgsent", version=__version__)

    @app.exception_handler(Exception)
    async def unexpected(request: Request, exc: Exception):
        return JSONResponse(status_code=500,
                            content={"detail": f"{type(exc).__name__}: {exc}"})

    @app.exception_handler(FileNotFoundError)
    async def missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError):
        status = 400 if isinstance(exc, _USAGE_ERRORS) else 422
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    async def health():
        return HealthResponse(version=__version__)

    @app.post("/convert", response_model=ConvertResponse)
    def convert(request: ConvertRequest):
        report = convert_file(resolve_data_path(request.input_path), request.adapter,
                              request.output_path)
        return ConvertResponse(written=request.output_path,
                               sentences=report.sentences, opinions=report.opinions,
                               warnings=report.warnings, text=convert_report_text(report))

    @app.post("/stats", response_model=StatsResponse)
    def stats(request: StatsRequest):
        return StatsResponse(**stats_command(request.paths))

    @app.post("/run", response_model=RunResponse)
    def run(request: RunRequest):
        if (request.spec_path is None) == (request.spec is None):
            raise CommandError("pass exactly one of spec_path or spec")
        if request.spec_path is not None:
            spec = ExperimentSpec.from_file(resolve_data_path(request.spec_path))
        else:
            spec = ExperimentSpec.from_dict(request.spec)
        if request.seeds:
            spec = ExperimentSpec.from_dict({**_spec_dict(spec), "seeds": request.seeds})
        result = run_sweep(spec, jobs=max(1, request.jobs), force=request.force)
        return RunResponse(executed=result.executed, cached=result.cached,
                           failed=result.failed, records=result.records,
                           aggregates=result.aggregates, output_dir=spec.output_dir,
                           text=render_aggregate_table(result.aggregates))

    @app.post("/predict", response_model=PredictResponse)
    def predict(request: PredictRequest):
        provider = None
        if request.embeddings:
            provider = FileBackedProvider([resolve_data_path(p) for p in request.embeddings])
        out = predict_command(request.model_path, request.corpus_path, request.output_path,
                              format=request.format, provider=provider, source=request.source)
        return PredictResponse(**out)

    @app.post("/eval", response_model=EvalResponse)
    def evaluate(request: EvalRequest):
        report = eval_command(request.gold_path, request.pred_path)
        return EvalResponse(task=report.pop("task"), report=report)

    return app


def _spec_dict(spec: ExperimentSpec) -> dict:
    """Back to the JSON shape, for field overrides."""
    data = {
        "task": spec.task,
        "data": {"train": spec.train_path, "test": spec.test_path},
        "modes": list(spec.modes),
        "sources": [s.to_dict() for s in spec.sources],
        "seeds": list(spec.seeds),
        "config": spec.config.to_dict(),
        "provider": spec.provider.to_dict(),
        "output_dir": spec.output_dir,
    }
    if spec.dev_path:
        data["data"]["dev"] = spec.dev_path
    if spec.schemes:
        data["schemes"] = [{"strategy": s.strategy, "task_mode": s.task_mode}
                           for s in spec.schemes]
    if spec.strategies:
        data["strategies"] = list(spec.strategies)
    return data
