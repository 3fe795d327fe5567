"""Run configuration shared by the assembler, the CLI and the HTTP service."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import InputError


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    mode: str = "auto"  # paper | direct | auto
    eta: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    zeta: Optional[float] = None
    delta: Optional[float] = None
    flow_deficit: float = 0.9
    exact_count: bool = False
    fmt: str = "json"  # json | dot
    threads: int = 1
    max_retries: int = 50
    assembly_retries: int = 6
    xi: float = 0.1
    exact_threshold: int = 20
    c_min: float = 0.1

    def __post_init__(self):
        for name in ("eta", "beta", "gamma", "zeta", "delta"):
            v = getattr(self, name)
            if v is not None and not 0 < v < 1:
                raise InputError(f"{name} must lie in (0,1), got {v}")
        if not 0 < self.flow_deficit < 1:
            raise InputError("flow_deficit must lie in (0,1)")
        if self.mode.lower() not in ("paper", "direct", "auto"):
            raise InputError(f"unknown mode {self.mode!r}")
        if self.fmt not in ("json", "dot"):
            raise InputError(f"unknown format {self.fmt!r}")
        if self.threads < 1 or self.max_retries < 1:
            raise InputError("threads and max_retries must be positive")

    def ladder_overrides(self) -> dict:
        return {name: getattr(self, name)
                for name in ("eta", "beta", "gamma", "zeta", "delta")
                if getattr(self, name) is not None}

    def flow_deficit_fraction(self) -> Fraction:
        return Fraction(self.flow_deficit).limit_denominator(10**9)
