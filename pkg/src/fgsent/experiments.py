"""Experiment matrix runner.

A spec file enumerates (schemes or strategies) x augment modes x expression
sources x seeds; each cell trains one model, evaluates it on the test
split, and persists a run record plus the model artifact under the output
directory. Completed cells are skipped on rerun (content-addressed by spec
cell + corpus digests) unless forced. Aggregation reports mean and sample
std across seeds, marking changes against the original-mode baseline.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .augment import AUGMENT_MODES
from .classifier import (POOLING_STRATEGIES, classification_examples, predict_polarity,
                         train_classifier)
from .config import TrainConfig
from .corpus import Corpus, parse_corpus
from .embeddings import FileBackedProvider, HashedStaticProvider
from .evaluation import aggregate_runs, macro_f1, token_f1
from .lexicon import load_lexicon, mark_expressions
from .model_io import load_model, save_model
from .tagger import TaggerModel, ensemble_union, predict_tags, train_tagger
from .tagscheme import Tag, TagScheme, decode, encode
from .augment import augmented_view

DATA_DIR_VAR = "FGS_DATA_DIR"


class SpecError(ValueError):
    pass


def resolve_data_path(path: str | Path) -> Path:
    """Absolute paths pass through; relative paths resolve against the
    current directory first, then $FGS_DATA_DIR."""
    path = Path(path)
    if path.is_absolute() or path.exists():
        return path
    root = os.environ.get(DATA_DIR_VAR)
    if root:
        candidate = Path(root) / path
        if candidate.exists():
            return candidate
    return path


def load_corpus_file(path: str | Path) -> Corpus:
    return parse_corpus(resolve_data_path(path).read_bytes())


@dataclass(frozen=True)
class ProviderSpec:
    kind: str = "hashed-static"
    dimension: int = 64
    seed: int = 0
    window: int = 1
    paths: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("hashed-static", "file-backed"):
            raise SpecError(f"unknown provider kind {self.kind!r}")
        if self.kind == "file-backed" and not self.paths:
            raise SpecError("file-backed provider needs at least one path")

    def build(self):
        if self.kind == "hashed-static":
            return HashedStaticProvider(dimension=self.dimension, seed=self.seed,
                                        window=self.window)
        return FileBackedProvider([resolve_data_path(p) for p in self.paths])

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dimension": self.dimension,
             "seed": self.seed, "window": self.window}
        if self.paths:
            d["paths"] = list(self.paths)
        return d

    @staticmethod
    def from_dict(data: dict) -> "ProviderSpec":
        data = dict(data)
        paths = tuple(data.pop("paths", ()))
        known = {"kind", "dimension", "seed", "window"}
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown provider fields: {sorted(unknown)}")
        return ProviderSpec(paths=paths, **data)


@dataclass(frozen=True)
class SourceSpec:
    """Where bracketed expression spans come from under expressions/full modes."""

    kind: str = "gold"
    paths: tuple[str, ...] = ()
    format: str = "plain"

    def __post_init__(self):
        if self.kind not in ("gold", "lexicon", "model", "ensemble"):
            raise SpecError(f"unknown expression source {self.kind!r}")
        if self.kind == "gold" and self.paths:
            raise SpecError("gold source takes no paths")
        if self.kind in ("lexicon", "model") and len(self.paths) != 1:
            raise SpecError(f"{self.kind} source needs exactly one path")
        if self.kind == "ensemble" and len(self.paths) < 1:
            raise SpecError("ensemble source needs at least one model path")

    @property
    def label(self) -> str:
        if self.kind == "gold":
            return "gold"
        if self.kind == "ensemble":
            return f"ensemble:{len(self.paths)}"
        return f"{self.kind}:{Path(self.paths[0]).stem}"

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "lexicon":
            d["path"] = self.paths[0]
            d["format"] = self.format
        elif self.kind == "model":
            d["path"] = self.paths[0]
        elif self.kind == "ensemble":
            d["paths"] = list(self.paths)
        return d

    @staticmethod
    def from_dict(data: dict) -> "SourceSpec":
        kind = data.get("kind", "gold")
        if "paths" in data:
            paths = tuple(data["paths"])
        elif "path" in data:
            paths = (data["path"],)
        else:
            paths = ()
        return SourceSpec(kind=kind, paths=paths, format=data.get("format", "plain"))

    def resolver(self, provider):
        """None for gold; otherwise a per-sentence callable producing
        (element, Span) pairs in original coordinates."""
        if self.kind == "gold":
            return None
        if self.kind == "lexicon":
            lex = load_lexicon(resolve_data_path(self.paths[0]), format=self.format)
            return lambda sentence: mark_expressions(sentence, lex)
        models = [load_model(resolve_data_path(p)) for p in self.paths]
        for path, model in zip(self.paths, models):
            if not isinstance(model, TaggerModel):
                raise SpecError(f"{path}: expression source must be a tagger model")
            if model.mode != "original":
                raise SpecError(f"{path}: expression source models must use mode "
                                f"'original', got {model.mode!r}")
            if "exp" not in model.scheme.elements:
                raise SpecError(f"{path}: model scheme {model.scheme} has no expression tags")

        def expressions(sentence):
            restricted = []
            for model in models:
                tagged = predict_tags(model, sentence, provider)
                labels = []
                for label in tagged.labels:
                    tag = Tag.parse(label)
                    if not tag.is_o and tag.element == "exp":
                        labels.append(f"{tag.position}-exp")
                    else:
                        labels.append("O")
                restricted.append(labels)
            merged = ensemble_union(restricted)
            return [("exp", span) for _el, span, _pol in decode(merged, TagScheme("Joint", "full"))]

        return expressions


def _as_scheme(raw) -> TagScheme:
    if isinstance(raw, TagScheme):
        return raw
    if isinstance(raw, str):
        return TagScheme(raw)
    if isinstance(raw, dict):
        return TagScheme(raw["strategy"], raw.get("task_mode", "targeted"))
    raise SpecError(f"cannot read scheme from {raw!r}")


@dataclass(frozen=True)
class ExperimentSpec:
    task: str
    train_path: str
    test_path: str
    dev_path: str | None = None
    schemes: tuple[TagScheme, ...] = ()
    strategies: tuple[str, ...] = ()
    modes: tuple[str, ...] = ("original",)
    sources: tuple[SourceSpec, ...] = (SourceSpec(),)
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    config: TrainConfig = TrainConfig()
    provider: ProviderSpec = ProviderSpec()
    output_dir: str = "runs"

    def __post_init__(self):
        if self.task not in ("extract", "classify"):
            raise SpecError(f"unknown task {self.task!r}")
        if self.task == "extract" and not self.schemes:
            raise SpecError("extract spec needs at least one scheme")
        if self.task == "classify" and not self.strategies:
            raise SpecError("classify spec needs at least one pooling strategy")
        for strategy in self.strategies:
            if strategy not in POOLING_STRATEGIES:
                raise SpecError(f"unknown pooling strategy {strategy!r}")
        if not self.modes:
            raise SpecError("no augment modes")
        for mode in self.modes:
            if mode not in AUGMENT_MODES:
                raise SpecError(f"unknown augment mode {mode!r}")
        if not self.seeds:
            raise SpecError("no seeds")
        if len(set(self.seeds)) != len(self.seeds):
            raise SpecError(f"seeds not distinct: {self.seeds}")
        if not self.sources:
            raise SpecError("no expression sources")

    def validate_paths(self) -> None:
        missing = []
        for path in self.data_paths():
            if not resolve_data_path(path).exists():
                missing.append(str(path))
        if missing:
            raise SpecError(f"missing files: {', '.join(missing)}")

    def data_paths(self) -> list[str]:
        paths = [self.train_path, self.test_path]
        if self.dev_path:
            paths.append(self.dev_path)
        for source in self.sources:
            paths.extend(source.paths)
        paths.extend(self.provider.paths)
        return paths

    @staticmethod
    def from_dict(data: dict) -> "ExperimentSpec":
        known = {"task", "data", "schemes", "strategies", "modes", "source", "sources",
                 "seeds", "config", "provider", "output_dir"}
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown spec fields: {sorted(unknown)}")
        try:
            paths = data["data"]
            task = data["task"]
        except KeyError as e:
            raise SpecError(f"spec is missing {e.args[0]!r}") from None
        if "train" not in paths or "test" not in paths:
            raise SpecError("spec data needs 'train' and 'test' paths")
        if "sources" in data:
            sources = tuple(SourceSpec.from_dict(s) for s in data["sources"])
        elif "source" in data:
            sources = (SourceSpec.from_dict(data["source"]),)
        else:
            sources = (SourceSpec(),)
        config = TrainConfig.from_dict(data.get("config", {}))
        return ExperimentSpec(
            task=task,
            train_path=paths["train"], test_path=paths["test"], dev_path=paths.get("dev"),
            schemes=tuple(_as_scheme(s) for s in data.get("schemes", ())),
            strategies=tuple(data.get("strategies", ())),
            modes=tuple(data.get("modes", ("original",))),
            sources=sources,
            seeds=tuple(data.get("seeds", (1, 2, 3, 4, 5))),
            config=config,
            provider=ProviderSpec.from_dict(data.get("provider", {})),
            output_dir=data.get("output_dir", "runs"),
        )

    @staticmethod
    def from_file(path: str | Path) -> "ExperimentSpec":
        raw = Path(path).read_text(encoding="utf-8")
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as e:
            raise SpecError(f"{path}: malformed JSON: {e}") from e
        return ExperimentSpec.from_dict(data)


@dataclass(frozen=True)
class Cell:
    task: str
    mode: str
    source: SourceSpec
    seed: int
    scheme: TagScheme | None = None
    strategy: str | None = None

    @property
    def group(self) -> tuple:
        """Everything but the seed; aggregation collapses over seeds."""
        if self.scheme is not None:
            head = f"{self.scheme.strategy}/{self.scheme.task_mode}"
        else:
            head = self.strategy
        return (head, self.mode, self.source.label)

    def describe(self) -> dict:
        d = {"task": self.task, "mode": self.mode, "source": self.source.to_dict(),
             "seed": self.seed}
        if self.scheme is not None:
            d["scheme"] = {"strategy": self.scheme.strategy, "task_mode": self.scheme.task_mode}
        if self.strategy is not None:
            d["strategy"] = self.strategy
        return d


def enumerate_cells(spec: ExperimentSpec) -> list[Cell]:
    cells = []
    heads = spec.schemes if spec.task == "extract" else spec.strategies
    for head in heads:
        for mode in spec.modes:
            for source in spec.sources:
                for seed in spec.seeds:
                    if spec.task == "extract":
                        cells.append(Cell(task=spec.task, mode=mode, source=source,
                                          seed=seed, scheme=head))
                    else:
                        cells.append(Cell(task=spec.task, mode=mode, source=source,
                                          seed=seed, strategy=head))
    return cells


_digest_cache: dict[tuple, str] = {}


def _file_digest(path: Path) -> str:
    stat = path.stat()
    key = (str(path), stat.st_mtime_ns, stat.st_size)
    if key not in _digest_cache:
        _digest_cache[key] = hashlib.sha256(path.read_bytes()).hexdigest()
    return _digest_cache[key]


def cell_hash(spec: ExperimentSpec, cell: Cell) -> str:
    """Content address of one run: the cell's own fields, the shared config
    and provider, and digests of every input file."""
    payload = {
        "cell": cell.describe(),
        "config": spec.config.replace(seed=cell.seed).to_dict(),
        "provider": spec.provider.to_dict(),
        "data": {name: _file_digest(resolve_data_path(p))
                 for name, p in (("train", spec.train_path), ("test", spec.test_path),
                                 ("dev", spec.dev_path)) if p},
        "source_files": {p: _file_digest(resolve_data_path(p)) for p in cell.source.paths},
        "provider_files": {p: _file_digest(resolve_data_path(p)) for p in spec.provider.paths},
    }
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Single-cell execution

def _gold_labels(sentence, scheme: TagScheme, mode: str, expression_source) -> list[str]:
    spans = expression_source(sentence) if callable(expression_source) else expression_source
    _aug, view = augmented_view(sentence, mode, expression_source=spans)
    return encode(view, scheme).labels()


def run_extract_cell(cell: Cell, corpora, provider, config: TrainConfig,
                     model_path: Path | None = None) -> dict:
    train, dev, test = corpora
    scheme = cell.scheme
    source = cell.source.resolver(provider)
    model = train_tagger(train, scheme, cell.mode, provider, config, dev=dev,
                         expression_source=source)
    gold_seqs, pred_seqs = [], []
    for sentence in test:
        spans = source(sentence) if callable(source) else source
        tagged = predict_tags(model, sentence, provider, expression_source=spans)
        gold_seqs.append(_gold_labels(sentence, scheme, cell.mode, spans))
        pred_seqs.append(tagged.labels)
    report = token_f1(gold_seqs, pred_seqs, scheme.elements)
    metrics = {}
    for element in scheme.elements:
        score = report[element]
        metrics[f"{element}_f1"] = score.f1
        metrics[f"{element}_precision"] = score.precision
        metrics[f"{element}_recall"] = score.recall
    if model_path is not None:
        save_model(model, model_path)
    return metrics


def run_classify_cell(cell: Cell, corpora, provider, config: TrainConfig,
                      model_path: Path | None = None) -> dict:
    train, dev, test = corpora
    source = cell.source.resolver(provider)
    train_examples = classification_examples(train)
    dev_examples = classification_examples(dev) if dev is not None else None
    test_examples = classification_examples(test)
    model = train_classifier(train_examples, cell.strategy, cell.mode, provider, config,
                             dev=dev_examples, expression_source=source)
    gold = [ex.polarity for ex in test_examples]
    pred = []
    for ex in test_examples:
        label, _scores = predict_polarity(model, ex.sentence, ex.target, provider,
                                          expression_source=source)
        pred.append(label)
    report = macro_f1(gold, pred)
    metrics = {"macro_f1": report.macro_f1, "accuracy": report.accuracy}
    for klass, score in report.classes.items():
        metrics[f"{klass}_f1"] = score.f1
    if model_path is not None:
        save_model(model, model_path)
    return metrics


# ---------------------------------------------------------------------------
# Sweep

@dataclass
class SweepResult:
    records: list[dict]
    executed: int
    cached: int
    failed: list[dict] = field(default_factory=list)
    aggregates: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"executed": self.executed, "cached": self.cached,
                "failed": self.failed, "records": self.records,
                "aggregates": self.aggregates}


def run_sweep(spec: ExperimentSpec, jobs: int = 1, force: bool = False,
              log=None) -> SweepResult:
    spec.validate_paths()
    out_dir = Path(spec.output_dir)
    runs_dir = out_dir / "runs"
    models_dir = out_dir / "models"
    runs_dir.mkdir(parents=True, exist_ok=True)
    models_dir.mkdir(parents=True, exist_ok=True)

    corpora = (load_corpus_file(spec.train_path),
               load_corpus_file(spec.dev_path) if spec.dev_path else None,
               load_corpus_file(spec.test_path))
    provider = spec.provider.build()
    cells = enumerate_cells(spec)

    def say(message: str) -> None:
        if log is not None:
            log(message)

    records: list[dict] = []
    failures: list[dict] = []
    executed = cached = 0

    def execute(cell: Cell) -> tuple[str, dict | None, dict | None]:
        digest = cell_hash(spec, cell)
        record_path = runs_dir / f"{digest}.json"
        if record_path.exists() and not force:
            return "cached", json.loads(record_path.read_text(encoding="utf-8")), None
        config = spec.config.replace(seed=cell.seed)
        model_path = models_dir / f"{digest}.fgsm"
        started = time.perf_counter()
        try:
            if cell.task == "extract":
                metrics = run_extract_cell(cell, corpora, provider, config, model_path)
            else:
                metrics = run_classify_cell(cell, corpora, provider, config, model_path)
        except Exception as e:  # cell failure must not sink the sweep
            return "failed", None, {**cell.describe(), "error": f"{type(e).__name__}: {e}"}
        record = {
            "spec_hash": digest,
            **cell.describe(),
            "metrics": metrics,
            "model_path": str(model_path),
            "wall_clock": time.perf_counter() - started,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        tmp = record_path.with_name(record_path.name + ".tmp")
        tmp.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, record_path)
        return "executed", record, None

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(execute, cells))
    else:
        outcomes = [execute(cell) for cell in cells]

    for cell, (status, record, failure) in zip(cells, outcomes):
        if status == "failed":
            failures.append(failure)
            say(f"FAILED {cell.group} seed={cell.seed}: {failure['error']}")
            continue
        records.append(record)
        if status == "cached":
            cached += 1
        else:
            executed += 1
            say(f"done {cell.group} seed={cell.seed}")

    result = SweepResult(records=records, executed=executed, cached=cached,
                         failed=failures)
    result.aggregates = aggregate_records(records)
    write_reports(out_dir, result)
    return result


def aggregate_records(records: list[dict]) -> list[dict]:
    """Collapse seeds: one row per (head, mode, source) with mean/std per
    metric, plus the delta of each mean against the original-mode baseline
    of the same head and source."""
    groups: dict[tuple, list[dict]] = {}
    for record in records:
        if "scheme" in record:
            head = f"{record['scheme']['strategy']}/{record['scheme']['task_mode']}"
        else:
            head = record["strategy"]
        source = record["source"]
        if source["kind"] == "gold":
            source_label = "gold"
        elif source["kind"] == "ensemble":
            source_label = f"ensemble:{len(source['paths'])}"
        else:
            source_label = f"{source['kind']}:{Path(source['path']).stem}"
        groups.setdefault((head, record["mode"], source_label), []).append(record)

    rows = []
    for (head, mode, source_label), members in sorted(groups.items()):
        metrics: dict[str, dict] = {}
        names = sorted({name for m in members for name in m["metrics"]})
        for name in names:
            agg = aggregate_runs([m["metrics"][name] for m in members if name in m["metrics"]])
            metrics[name] = agg.to_dict()
        rows.append({"head": head, "mode": mode, "source": source_label,
                     "seeds": sorted(m["seed"] for m in members), "metrics": metrics})

    baselines = {(r["head"], r["source"]): r for r in rows if r["mode"] == "original"}
    for row in rows:
        base = baselines.get((row["head"], row["source"]))
        if base is None or base is row:
            continue
        for name, agg in row["metrics"].items():
            if name in base["metrics"]:
                agg["delta"] = agg["mean"] - base["metrics"][name]["mean"]
    return rows


def render_aggregate_table(rows: list[dict]) -> str:
    """Aligned text, one row per group; metric cells are "mean (std)" on a
    0-100 scale with one decimal, +/- marking movement vs the original-mode
    baseline of the same head and source."""
    if not rows:
        return "(no runs)"
    names = sorted({name for row in rows for name in row["metrics"]})
    header = ["head", "mode", "source", "seeds"] + names
    table = [header]
    for row in rows:
        cells = [row["head"], row["mode"], row["source"], str(len(row["seeds"]))]
        for name in names:
            agg = row["metrics"].get(name)
            if agg is None:
                cells.append("-")
                continue
            text = f"{100 * agg['mean']:.1f} ({100 * agg['std']:.1f})"
            delta = agg.get("delta")
            if delta is not None:
                text += " +" if delta > 0 else (" -" if delta < 0 else " =")
            cells.append(text)
        table.append(cells)
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
                     for r in table)


def write_reports(out_dir: Path, result: SweepResult) -> None:
    (out_dir / "aggregate.json").write_text(
        json.dumps(result.aggregates, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out_dir / "table.txt").write_text(render_aggregate_table(result.aggregates) + "\n",
                                       encoding="utf-8")
    lines = ["head,mode,source,metric,mean,std,n"]
    for row in result.aggregates:
        for name, agg in sorted(row["metrics"].items()):
            lines.append(f"{row['head']},{row['mode']},{row['source']},{name},"
                         f"{agg['mean']!r},{agg['std']!r},{agg['n']}")
    (out_dir / "aggregate.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
