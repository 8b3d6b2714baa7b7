"""Command line client.

Every subcommand is a thin call into the HTTP service: with --server it
talks to a running instance, otherwise it mounts the app in-process. Exit
codes: 0 success, 1 usage error, 2 validation error, 3 runtime error.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx


def _call_service(server: str | None, path: str, payload: dict) -> tuple[int, dict]:
    if server:
        with httpx.Client(base_url=server, timeout=3600.0) as client:
            response = client.post(path, json=payload)
    else:
        from .service import create_app

        async def call():
            transport = httpx.ASGITransport(app=create_app(), raise_app_exceptions=False)
            async with httpx.AsyncClient(transport=transport, base_url="http://fgsent",
                                         timeout=3600.0) as client:
                return await client.post(path, json=payload)

        response = asyncio.run(call())
    try:
        body = response.json()
    except ValueError:
        body = {"detail": response.text or f"HTTP {response.status_code}"}
    return response.status_code, body


def _exit_code(status: int) -> int:
    if 200 <= status < 300:
        return 0
    if status == 400:
        return 1
    if status in (404, 422):
        return 2
    return 3


def _finish(ctx: click.Context, status: int, body: dict) -> None:
    code = _exit_code(status)
    if code != 0:
        click.echo(f"error: {body.get('detail', body)}", err=True)
        sys.exit(code)
    if ctx.obj["format"] == "json":
        body = {k: v for k, v in body.items() if k != "text"}
        click.echo(json.dumps(body, indent=2))
    else:
        text = body.get("text")
        click.echo(text if text is not None else json.dumps(body, indent=2))
    sys.exit(0)


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in-process.")
@click.option("--format", "output_format", type=click.Choice(["json", "text"]),
              default="text", show_default=True, help="Response rendering.")
@click.option("--seed", type=int, default=None, help="Override the spec's seed list (run).")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel cells during a sweep (run).")
@click.option("--force", is_flag=True, help="Re-execute cached sweep cells (run).")
@click.version_option()
@click.pass_context
def cli(ctx, server, output_format, seed, jobs, force):
    ctx.obj = {"server": server, "format": output_format,
               "seed": seed, "jobs": jobs, "force": force}


@cli.command()
@click.argument("input_path")
@click.argument("output_path")
@click.option("--adapter", default="canonical", show_default=True)
@click.pass_context
def convert(ctx, input_path, output_path, adapter):
    """Convert a source-format file to canonical corpus JSON."""
    status, body = _call_service(ctx.obj["server"], "/convert",
                                 {"input_path": input_path, "adapter": adapter,
                                  "output_path": output_path})
    _finish(ctx, status, body)


@cli.command()
@click.argument("paths", nargs=-1, required=True)
@click.pass_context
def stats(ctx, paths):
    """Dataset statistics. PATHS are corpus files, optionally as name=path
    (use train=/dev=/test= to get the target-overlap report)."""
    named = {}
    for raw in paths:
        if "=" in raw:
            name, _, path = raw.partition("=")
        else:
            name, path = Path(raw).stem, raw
        named[name] = path
    status, body = _call_service(ctx.obj["server"], "/stats", {"paths": named})
    _finish(ctx, status, body)


@cli.command()
@click.argument("spec_path")
@click.pass_context
def run(ctx, spec_path):
    """Run the experiment sweep described by a JSON spec file."""
    payload = {"spec_path": spec_path, "jobs": ctx.obj["jobs"], "force": ctx.obj["force"]}
    if ctx.obj["seed"] is not None:
        payload["seeds"] = [ctx.obj["seed"]]
    status, body = _call_service(ctx.obj["server"], "/run", payload)
    _finish(ctx, status, body)


@cli.command()
@click.argument("model_path")
@click.argument("corpus_path")
@click.argument("output_path")
@click.option("--embeddings", multiple=True, metavar="PATH",
              help="Embedding file(s) for models trained on file-backed vectors.")
@click.option("--source", default=None, metavar="JSON",
              help='Expression source, e.g. \'{"kind": "lexicon", "path": "lex.txt"}\'.')
@click.option("--output-format", type=click.Choice(["json", "conll"]), default="json",
              show_default=True, help="Prediction file format (extraction only for conll).")
@click.pass_context
def predict(ctx, model_path, corpus_path, output_path, embeddings, source, output_format):
    """Apply a saved model to a corpus and write predictions."""
    payload = {"model_path": model_path, "corpus_path": corpus_path,
               "output_path": output_path, "format": output_format}
    if embeddings:
        payload["embeddings"] = list(embeddings)
    if source:
        try:
            payload["source"] = json.loads(source)
        except json.JSONDecodeError as e:
            raise click.UsageError(f"--source is not valid JSON: {e}")
    status, body = _call_service(ctx.obj["server"], "/predict", payload)
    _finish(ctx, status, body)


@cli.command("eval")
@click.argument("gold_path")
@click.argument("pred_path")
@click.pass_context
def eval_cmd(ctx, gold_path, pred_path):
    """Score a prediction file against a gold corpus."""
    status, body = _call_service(ctx.obj["server"], "/eval",
                                 {"gold_path": gold_path, "pred_path": pred_path})
    _finish(ctx, status, body)


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


def main():
    try:
        cli(standalone_mode=False)
    except click.UsageError as e:
        e.show()
        sys.exit(1)
    except click.ClickException as e:
        e.show()
        sys.exit(1)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(130)


if __name__ == "__main__":
    main()
