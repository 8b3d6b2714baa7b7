"""Command implementations behind the service endpoints: dataset statistics,
batch prediction to files, and evaluation of prediction files against gold."""

from __future__ import annotations

import json
from pathlib import Path

from .adapters import infer_scheme
from .classifier import ClassifierModel, predict_polarity
from .conll import from_conll, tagged_to_conll
from .corpus import Corpus, compute_overlap, compute_stats, render_overlap, render_stats
from .evaluation import EvalError, macro_f1, token_f1
from .experiments import SourceSpec, load_corpus_file, resolve_data_path
from .model_io import load_model
from .tagger import TaggerModel, original_spans, predict_tags
from .tagscheme import encode


class CommandError(ValueError):
    pass


# ---------------------------------------------------------------------------
# stats

def stats_command(paths: dict[str, str]) -> dict:
    """Per-split statistics; adds the target-overlap report when train, dev,
    and test are all present."""
    if not paths:
        raise CommandError("no corpus paths given")
    corpora = {name: load_corpus_file(path) for name, path in paths.items()}
    reports = {name: compute_stats(corpus) for name, corpus in corpora.items()}
    text = render_stats(reports)
    out: dict = {"stats": {name: report.to_dict() for name, report in reports.items()}}
    if {"train", "dev", "test"} <= set(corpora):
        overlap = compute_overlap(corpora["train"], corpora["dev"], corpora["test"])
        out["overlap"] = overlap.to_dict()
        text = text + "\n\n" + render_overlap(overlap)
    out["text"] = text
    return out


# ---------------------------------------------------------------------------
# predict

def _predict_extract(model: TaggerModel, corpus: Corpus, provider, source) -> tuple[list, list]:
    items, blocks = [], []
    for sentence in corpus:
        spans = source(sentence) if callable(source) else source
        tagged = predict_tags(model, sentence, provider, expression_source=spans)
        blocks.append((sentence.sent_id, list(tagged.aug.tokens), tagged.labels))
        spans_out = [{"element": element, "start": span.start, "end": span.end,
                      "polarity": polarity}
                     for element, span, polarity in original_spans(tagged, model.scheme)]
        items.append({"sent_id": sentence.sent_id, "spans": spans_out})
    return items, blocks


def _predict_classify(model: ClassifierModel, corpus: Corpus, provider, source) -> list:
    items = []
    for sentence in corpus:
        for op in sentence.opinions:
            spans = source(sentence) if callable(source) else source
            label, scores = predict_polarity(model, sentence, op.target, provider,
                                             expression_source=spans)
            items.append({"sent_id": sentence.sent_id,
                          "target": [[s.start, s.end] for s in op.target],
                          "polarity": label, "scores": scores})
    return items


def predict_command(model_path: str, corpus_path: str, output_path: str,
                    format: str = "json", provider=None, source: dict | None = None) -> dict:
    """Run a saved model over a corpus file and write predictions.

    Extraction writes CoNLL (augmented tokens, predicted tags) or JSON spans
    in original coordinates; classification writes JSON only. The provider
    defaults to hashed-static with the model's recorded dimension.
    """
    if format not in ("json", "conll"):
        raise CommandError(f"unknown output format {format!r}")
    model = load_model(resolve_data_path(model_path))
    corpus = load_corpus_file(corpus_path)
    if provider is None:
        if model.provider_kind != "hashed-static":
            raise CommandError(f"model was trained on {model.provider_kind} embeddings; "
                               "pass the matching provider (embedding files)")
        from .embeddings import HashedStaticProvider
        provider = HashedStaticProvider(dimension=model.dimension, **model.provider_params)
    if provider.dimension != model.dimension:
        raise CommandError(f"embedding dimension mismatch: model expects {model.dimension}, "
                           f"provider supplies {provider.dimension}")
    resolver = SourceSpec.from_dict(source).resolver(provider) if source else None

    output = Path(output_path)
    output.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(model, TaggerModel):
        items, blocks = _predict_extract(model, corpus, provider, resolver)
        if format == "conll":
            output.write_text(tagged_to_conll(blocks), encoding="utf-8")
        else:
            payload = {"task": "extract", "model": str(model_path), "items": items}
            output.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        return {"task": "extract", "sentences": len(corpus), "written": str(output)}

    if format == "conll":
        raise CommandError("classifier predictions have no CoNLL form; use --format json")
    items = _predict_classify(model, corpus, provider, resolver)
    payload = {"task": "classify", "model": str(model_path), "items": items}
    output.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return {"task": "classify", "predictions": len(items), "written": str(output)}


# ---------------------------------------------------------------------------
# eval

def _eval_extract_conll(gold: Corpus, pred_text: str) -> dict:
    blocks = from_conll(pred_text)
    by_id = {sent_id: (tokens, labels) for sent_id, tokens, labels in blocks}
    scheme = infer_scheme(label for _sid, _tokens, labels in blocks for label in labels)
    gold_seqs, pred_seqs = [], []
    for sentence in gold:
        if sentence.sent_id not in by_id:
            raise EvalError(f"sent_id {sentence.sent_id!r} missing from predictions")
        tokens, labels = by_id[sentence.sent_id]
        if len(tokens) != len(sentence.tokens):
            raise EvalError(f"sent_id {sentence.sent_id!r}: prediction has {len(tokens)} tokens, "
                            f"gold has {len(sentence.tokens)} (predictions must use mode original)")
        gold_seqs.append(encode(sentence, scheme).labels())
        pred_seqs.append(labels)
    report = token_f1(gold_seqs, pred_seqs, scheme.elements)
    return {"task": "extract",
            "scheme": {"strategy": scheme.strategy, "task_mode": scheme.task_mode},
            "elements": report.to_dict()}


def _eval_classify_json(gold: Corpus, payload: dict) -> dict:
    items = payload.get("items")
    if not isinstance(items, list):
        raise EvalError("prediction file has no 'items' list")
    predicted = {}
    for item in items:
        key = (item["sent_id"], tuple(tuple(pair) for pair in item["target"]))
        predicted[key] = item["polarity"]
    gold_labels, pred_labels = [], []
    for sentence in gold:
        for op in sentence.opinions:
            key = (sentence.sent_id, tuple((s.start, s.end) for s in op.target))
            if key not in predicted:
                raise EvalError(f"no prediction for sent_id {sentence.sent_id!r} "
                                f"target {key[1]}")
            gold_labels.append(op.polarity)
            pred_labels.append(predicted[key])
    report = macro_f1(gold_labels, pred_labels)
    return {"task": "classify", **report.to_dict()}


def eval_command(gold_path: str, pred_path: str) -> dict:
    """Score a prediction file (CoNLL tags or classify JSON) against a gold
    corpus; the task is recognized from the prediction file itself."""
    gold = load_corpus_file(gold_path)
    pred_file = resolve_data_path(pred_path)
    text = pred_file.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(text)
        if payload.get("task") == "extract":
            items = {item["sent_id"]: item["spans"] for item in payload.get("items", [])}
            return _eval_extract_json(gold, items)
        return _eval_classify_json(gold, payload)
    return _eval_extract_conll(gold, text)


def _eval_extract_json(gold: Corpus, items: dict) -> dict:
    """Span-list predictions in original coordinates, compared per token."""
    from .tagscheme import TAG_ELEMENTS

    elements = set()
    for spans in items.values():
        for span in spans:
            elements.add(span["element"])
    elements = tuple(e for e in TAG_ELEMENTS if e in elements) or ("targ",)

    gold_seqs, pred_seqs = [], []
    for sentence in gold:
        if sentence.sent_id not in items:
            raise EvalError(f"sent_id {sentence.sent_id!r} missing from predictions")
        n = len(sentence.tokens)
        gold_members = {e: [False] * n for e in elements}
        for op in sentence.opinions:
            for element, attr in (("holder", "holder"), ("targ", "target"), ("exp", "expression")):
                if element not in gold_members:
                    continue
                for span in getattr(op, attr):
                    for i in range(span.start, span.end):
                        gold_members[element][i] = True
        pred_members = {e: [False] * n for e in elements}
        for span in items[sentence.sent_id]:
            element = span["element"]
            if element not in pred_members:
                continue
            for i in range(span["start"], min(span["end"], n)):
                pred_members[element][i] = True
        # express memberships as pseudo-tag sequences for the shared scorer
        for e in elements:
            gold_seqs.append([f"B-{e}" if m else "O" for m in gold_members[e]])
            pred_seqs.append([f"B-{e}" if m else "O" for m in pred_members[e]])
    report = token_f1(gold_seqs, pred_seqs, elements)
    return {"task": "extract", "elements": report.to_dict()}


def convert_report_text(report) -> str:
    lines = [f"adapter: {report.adapter}",
             f"sentences: {report.sentences}",
             f"opinions: {report.opinions}"]
    for warning in report.warnings:
        lines.append(f"warning: {warning}")
    return "\n".join(lines)
