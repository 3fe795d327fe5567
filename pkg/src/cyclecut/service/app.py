"""FastAPI service wrapping the partitioning pipeline.

Endpoints mirror the CLI subcommands: generate, decompose, partition,
verify.  Assembly failures surface as 422 with a stage-tagged diagnostic
body; malformed inputs as 400.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..assembler import partition_cycles, partition_paths_bipartite
from ..decomposer import decompose, default_ladder
from ..errors import AssemblyFailed, CycleCutError, InputError
from ..graph import (
    gen_bipartite_union,
    gen_clique_union,
    gen_petersen,
    gen_random_regular,
    validate_regular,
)
from ..verification import verify_cycle_partition, verify_path_partition
from .models import (
    DecomposeRequest,
    DecomposeResponse,
    GenerateRequest,
    GenerateResponse,
    GraphModel,
    PartitionModel,
    PartitionRequest,
    PartitionResponse,
    VerifyRequest,
    VerifyResponse,
)

log = logging.getLogger("cyclecut.service")

app = FastAPI(title="cyclecut", version=__version__)


def _error(status: int, error: str, detail: str, stage=None) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": error, "stage": stage, "detail": detail})


@app.exception_handler(InputError)
async def input_error_handler(_request, exc: InputError):
    return _error(400, "input", str(exc))


@app.exception_handler(AssemblyFailed)
async def assembly_error_handler(_request, exc: AssemblyFailed):
    return _error(422, "assembly", exc.diagnostic, stage=exc.stage)


@app.exception_handler(CycleCutError)
async def pipeline_error_handler(_request, exc: CycleCutError):
    return _error(422, "pipeline", str(exc))


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


def do_generate(req: GenerateRequest) -> GenerateResponse:
    if req.family == "clique-union":
        if not req.sizes:
            raise InputError("clique-union needs sizes")
        g = gen_clique_union(req.sizes)
    elif req.family == "biclique-union":
        if not req.k or not req.d:
            raise InputError("biclique-union needs k and d")
        g = gen_bipartite_union(req.k, req.d)
    elif req.family == "random-regular":
        if not req.n or req.d is None:
            raise InputError("random-regular needs n and d")
        g = gen_random_regular(req.n, req.d, req.seed)
    else:
        g = gen_petersen()
    info = validate_regular(g)
    return GenerateResponse(graph=GraphModel.from_graph(g), n=g.n, d=info.d)


@app.post("/generate", response_model=GenerateResponse)
def generate(req: GenerateRequest) -> GenerateResponse:
    return do_generate(req)


def do_decompose(req: DecomposeRequest) -> DecomposeResponse:
    g = req.graph.to_graph()
    info = validate_regular(g)
    config = req.config.to_run_config()
    ladder = default_ladder(info, **config.ladder_overrides())
    dec = decompose(g, info, ladder)
    return DecomposeResponse(decomposition=dec.to_json_dict(),
                             r=len(dec.clusters), s=dec.near_count)


@app.post("/decompose", response_model=DecomposeResponse)
def decompose_endpoint(req: DecomposeRequest) -> DecomposeResponse:
    return do_decompose(req)


def do_partition(req: PartitionRequest) -> PartitionResponse:
    g = req.graph.to_graph()
    config = req.config.to_run_config()
    if req.paths:
        partition, summary = partition_paths_bipartite(g, config)
    else:
        partition, summary = partition_cycles(g, config)
    data = partition.to_json_dict()
    return PartitionResponse(
        partition=PartitionModel(kind=data["kind"], parts=data["parts"]),
        summary=summary.to_json_dict())


@app.post("/partition", response_model=PartitionResponse)
def partition(req: PartitionRequest) -> PartitionResponse:
    return do_partition(req)


def do_verify(req: VerifyRequest) -> VerifyResponse:
    g = req.graph.to_graph()
    if req.partition.kind == "cycles":
        report = verify_cycle_partition(g, req.partition.parts)
    else:
        report = verify_path_partition(g, req.partition.parts, bipartite=req.bipartite)
    return VerifyResponse(passed=report.passed, report=report.to_json_dict())


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    return do_verify(req)
