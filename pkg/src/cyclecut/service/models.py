"""Pydantic request/response models for the HTTP service.

These mirror the on-disk JSON formats one-to-one, so files written by the
CLI can be posted to the service unchanged.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..config import RunConfig
from ..graph import Graph


class GraphModel(BaseModel):
    n: int = Field(ge=1)
    edges: list[tuple[int, int]]

    def to_graph(self) -> Graph:
        return Graph(self.n, self.edges)

    @classmethod
    def from_graph(cls, g: Graph) -> "GraphModel":
        return cls(n=g.n, edges=[tuple(e) for e in sorted(g.edges())])


class GenerateRequest(BaseModel):
    family: Literal["clique-union", "biclique-union", "random-regular", "petersen"]
    sizes: Optional[list[int]] = None      # clique-union
    k: Optional[int] = None                # biclique-union
    d: Optional[int] = None                # biclique-union / random-regular
    n: Optional[int] = None                # random-regular
    seed: int = 0


class GenerateResponse(BaseModel):
    graph: GraphModel
    n: int
    d: int


class ConfigModel(BaseModel):
    seed: int = 0
    mode: Literal["paper", "direct", "auto"] = "auto"
    eta: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    zeta: Optional[float] = None
    delta: Optional[float] = None
    flow_deficit: float = 0.9
    exact_count: bool = False
    threads: int = 1
    max_retries: int = 50
    xi: float = 0.1

    def to_run_config(self) -> RunConfig:
        return RunConfig(
            seed=self.seed, mode=self.mode, eta=self.eta, beta=self.beta,
            gamma=self.gamma, zeta=self.zeta, delta=self.delta,
            flow_deficit=self.flow_deficit, exact_count=self.exact_count,
            threads=self.threads, max_retries=self.max_retries, xi=self.xi)


class DecomposeRequest(BaseModel):
    graph: GraphModel
    config: ConfigModel = ConfigModel()


class DecomposeResponse(BaseModel):
    decomposition: dict
    r: int
    s: int


class PartitionRequest(BaseModel):
    graph: GraphModel
    config: ConfigModel = ConfigModel()
    paths: bool = False


class PartitionModel(BaseModel):
    kind: Literal["cycles", "paths"]
    parts: list[list[int]]


class PartitionResponse(BaseModel):
    partition: PartitionModel
    summary: dict


class VerifyRequest(BaseModel):
    graph: GraphModel
    partition: PartitionModel
    bipartite: bool = False


class VerifyResponse(BaseModel):
    passed: bool
    report: dict


class ErrorBody(BaseModel):
    error: str
    stage: Optional[str] = None
    detail: str
