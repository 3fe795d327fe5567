"""Command-line front door: a thin client over the service layer.

Every subcommand builds the same request models the HTTP API accepts and
dispatches them either in-process (default) or to a running server via
``--server URL``.  Exit codes: 0 success (verified), 1 verification
failure, 2 assembly failure, 3 bad input.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import sys
import time
from typing import Optional

import click

from .errors import AssemblyFailed, CycleCutError, InputError
from .graph import Graph, validate_regular
from .service import models as sm
from .service.app import do_decompose, do_generate, do_partition, do_verify
from .verification import brute_min_cycle_partition

log = logging.getLogger("cyclecut.cli")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_ASSEMBLY_FAILED = 2
EXIT_INPUT_ERROR = 3


def _setup_logging() -> None:
    level = os.environ.get("CYCLECUT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


class Client:
    """Dispatches request models in-process or to a remote server."""

    def __init__(self, server: Optional[str]):
        self.server = server.rstrip("/") if server else None

    def _post(self, route: str, payload: dict, response_model):
        import httpx

        resp = httpx.post(f"{self.server}{route}", json=payload, timeout=600.0)
        if resp.status_code >= 400:
            body = resp.json()
            raise AssemblyFailed(body.get("stage") or "remote", body.get("detail", resp.text)) \
                if resp.status_code == 422 else InputError(body.get("detail", resp.text))
        return response_model.model_validate(resp.json())

    def generate(self, req: sm.GenerateRequest) -> sm.GenerateResponse:
        if self.server:
            return self._post("/generate", req.model_dump(), sm.GenerateResponse)
        return do_generate(req)

    def decompose(self, req: sm.DecomposeRequest) -> sm.DecomposeResponse:
        if self.server:
            return self._post("/decompose", req.model_dump(), sm.DecomposeResponse)
        return do_decompose(req)

    def partition(self, req: sm.PartitionRequest) -> sm.PartitionResponse:
        if self.server:
            return self._post("/partition", req.model_dump(), sm.PartitionResponse)
        return do_partition(req)

    def verify(self, req: sm.VerifyRequest) -> sm.VerifyResponse:
        if self.server:
            return self._post("/verify", req.model_dump(), sm.VerifyResponse)
        return do_verify(req)


def _write_json(path: str, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def _load_graph(path: str) -> Graph:
    try:
        with open(path) as fh:
            return Graph.from_json_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read graph file {path}: {exc}") from exc


def _config_options(fn):
    opts = [
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--mode", type=click.Choice(["paper", "direct", "auto"]), default="auto",
                     show_default=True),
        click.option("--eta", type=float, default=None),
        click.option("--beta", type=float, default=None),
        click.option("--gamma", type=float, default=None),
        click.option("--zeta", type=float, default=None),
        click.option("--delta", type=float, default=None),
        click.option("--flow-deficit", type=float, default=0.9, show_default=True),
        click.option("--exact-count", is_flag=True, default=False),
        click.option("--threads", type=int, default=1, show_default=True),
        click.option("--max-retries", type=int, default=50, show_default=True),
        click.option("--xi", type=float, default=0.1, show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config_model(**kw) -> sm.ConfigModel:
    return sm.ConfigModel(
        seed=kw["seed"], mode=kw["mode"], eta=kw["eta"], beta=kw["beta"],
        gamma=kw["gamma"], zeta=kw["zeta"], delta=kw["delta"],
        flow_deficit=kw["flow_deficit"], exact_count=kw["exact_count"],
        threads=kw["threads"], max_retries=kw["max_retries"], xi=kw["xi"])


@click.group()
@click.option("--server", default=None, help="Base URL of a running cyclecut server; "
                                             "default runs in-process.")
@click.pass_context
def main(ctx, server):
    _setup_logging()
    ctx.obj = Client(server)


@main.command()
@click.argument("family", type=click.Choice(["clique-union", "biclique-union",
                                             "random-regular", "petersen"]))
@click.option("--sizes", default=None, help="Comma-separated clique sizes, e.g. 4,4")
@click.option("-k", type=int, default=None, help="Number of biclique blocks")
@click.option("-d", type=int, default=None, help="Degree (biclique side / random-regular)")
@click.option("-n", type=int, default=None, help="Vertex count (random-regular)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "-o", default="graph.json", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]), default="json",
              show_default=True)
@click.pass_obj
def generate(client: Client, family, sizes, k, d, n, seed, out, fmt):
    """Generate an instance family and write its graph file."""
    try:
        sizes_list = [int(s) for s in sizes.split(",")] if sizes else None
        resp = client.generate(sm.GenerateRequest(
            family=family, sizes=sizes_list, k=k, d=d, n=n, seed=seed))
    except (InputError, CycleCutError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    if fmt == "dot":
        with open(out, "w") as fh:
            fh.write(resp.graph.to_graph().to_dot() + "\n")
    else:
        _write_json(out, {"n": resp.n, "edges": [list(e) for e in resp.graph.edges]})
    click.echo(f"wrote {out}: n={resp.n}, d={resp.d}")


@main.command()
@click.argument("graph_file")
@click.option("--out", "-o", default="decomposition.json", show_default=True)
@_config_options
@click.pass_obj
def decompose(client: Client, graph_file, out, **kw):
    """Decompose a graph into clusters and write the result."""
    try:
        g = _load_graph(graph_file)
        resp = client.decompose(sm.DecomposeRequest(
            graph=sm.GraphModel.from_graph(g), config=_config_model(**kw)))
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    except CycleCutError as exc:
        click.echo(f"decomposition failed: {exc}", err=True)
        sys.exit(EXIT_ASSEMBLY_FAILED)
    _write_json(out, resp.decomposition)
    click.echo(f"wrote {out}: r={resp.r}, s={resp.s}")


@main.command()
@click.argument("graph_file")
@click.option("--paths", is_flag=True, default=False,
              help="Bipartite path partition instead of cycles.")
@click.option("--out", "-o", default="partition.json", show_default=True)
@_config_options
@click.pass_obj
def partition(client: Client, graph_file, paths, out, **kw):
    """Partition a regular graph into cycles (or paths with --paths)."""
    try:
        g = _load_graph(graph_file)
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    try:
        resp = client.partition(sm.PartitionRequest(
            graph=sm.GraphModel.from_graph(g), config=_config_model(**kw), paths=paths))
    except AssemblyFailed as exc:
        diagnostic = {"error": "assembly", "stage": exc.stage, "detail": exc.diagnostic}
        click.echo(json.dumps(diagnostic, sort_keys=True), err=True)
        sys.exit(EXIT_ASSEMBLY_FAILED)
    except InputError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    except CycleCutError as exc:
        click.echo(json.dumps({"error": "pipeline", "detail": str(exc)}), err=True)
        sys.exit(EXIT_ASSEMBLY_FAILED)
    _write_json(out, {"kind": resp.partition.kind,
                      "parts": [list(p) for p in resp.partition.parts]})
    s = resp.summary
    noun = "paths" if resp.partition.kind == "paths" else "cycles"
    click.echo(f"{s['parts']} {noun} (bound {s['l']}); r={s['r']}, s={s['s']}, "
               f"retries={s['retries']}, stage_ms={s['stage_ms']}")
    verify_resp = client.verify(sm.VerifyRequest(
        graph=sm.GraphModel.from_graph(g), partition=resp.partition,
        bipartite=paths))
    if not verify_resp.passed:
        click.echo("internal verification FAILED", err=True)
        sys.exit(EXIT_VERIFY_FAILED)
    click.echo(f"wrote {out}: verified")


@main.command()
@click.argument("graph_file")
@click.argument("partition_file")
@click.option("--paths", is_flag=True, default=False, help="Treat as bipartite path partition.")
@click.pass_obj
def verify(client: Client, graph_file, partition_file, paths):
    """Verify a partition file against a graph file; exit 0 iff valid."""
    try:
        g = _load_graph(graph_file)
        with open(partition_file) as fh:
            pdata = json.load(fh)
        pm = sm.PartitionModel(kind=pdata["kind"], parts=pdata["parts"])
    except (InputError, OSError, KeyError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    resp = client.verify(sm.VerifyRequest(
        graph=sm.GraphModel.from_graph(g), partition=pm,
        bipartite=paths or pm.kind == "paths"))
    click.echo(json.dumps(resp.report, sort_keys=True))
    sys.exit(EXIT_OK if resp.passed else EXIT_VERIFY_FAILED)


@main.command()
@click.argument("suite", type=click.Choice(["tight-families", "random-dense", "oracle-small"]))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "-o", default="bench.csv", show_default=True)
@click.pass_obj
def bench(client: Client, suite, seed, out):
    """Run a benchmark suite and write one CSV row per instance."""
    rows = []
    instances = []
    if suite == "tight-families":
        for k in range(1, 5):
            for m in (4, 6, 8):
                instances.append((f"clique-union-{k}x{m}",
                                  sm.GenerateRequest(family="clique-union", sizes=[m] * k,
                                                     seed=seed), False))
        for k in range(1, 4):
            for d in (2, 3, 4):
                instances.append((f"biclique-union-{k}x{d}",
                                  sm.GenerateRequest(family="biclique-union", k=k, d=d,
                                                     seed=seed), True))
    elif suite == "random-dense":
        for n in (20, 30, 40, 60):
            d = n // 2 if (n // 2) % 2 == 0 else n // 2 + 1
            for s in range(5):
                instances.append((f"random-{n}-{d}-s{s}",
                                  sm.GenerateRequest(family="random-regular", n=n, d=d,
                                                     seed=seed + s), False))
    else:
        for s in range(20):
            instances.append((f"cubic-12-s{s}",
                              sm.GenerateRequest(family="random-regular", n=12, d=3,
                                                 seed=seed + s), False))

    successes = 0
    for name, gen_req, paths in instances:
        gresp = client.generate(gen_req)
        g = gresp.graph.to_graph()
        info = validate_regular(g)
        l_bound = g.n // (2 * info.d) if paths else g.n // (info.d + 1)
        t0 = time.perf_counter()
        parts, verified, retries = "", False, 0
        try:
            presp = client.partition(sm.PartitionRequest(
                graph=gresp.graph, config=sm.ConfigModel(seed=seed), paths=paths))
            vresp = client.verify(sm.VerifyRequest(graph=gresp.graph,
                                                   partition=presp.partition,
                                                   bipartite=paths))
            parts = len(presp.partition.parts)
            verified = vresp.passed
            retries = presp.summary["retries"]
        except CycleCutError:
            parts = ""
        ms = (time.perf_counter() - t0) * 1000
        if suite == "oracle-small" and parts != "" and verified:
            k_min = brute_min_cycle_partition(g)
            if parts < k_min:
                verified = False
        successes += 1 if verified else 0
        rows.append({"instance": name, "n": g.n, "d": info.d, "l": l_bound,
                     "parts_emitted": parts, "verified": verified,
                     "wall_ms": round(ms, 1), "retries": retries})
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["instance", "n", "d", "l", "parts_emitted",
                                                "verified", "wall_ms", "retries"])
        writer.writeheader()
        writer.writerows(rows)
    click.echo(f"wrote {out}: {successes}/{len(rows)} verified")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8137, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("cyclecut.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
