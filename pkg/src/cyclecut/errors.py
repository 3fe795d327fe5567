"""Exception hierarchy for the cyclecut pipeline.

Every stage raises a dedicated subclass so callers can react per stage
(retry, fall back, or surface a diagnostic) instead of parsing messages.
"""

from __future__ import annotations


class CycleCutError(Exception):
    """Base class for all cyclecut errors."""


class InputError(CycleCutError):
    """Malformed user input (bad file, bad parameters)."""


# -- graph construction / generators ----------------------------------------

class NotRegular(CycleCutError):
    def __init__(self, u: int, du: int, v: int, dv: int):
        super().__init__(f"graph is not regular: deg({u})={du} but deg({v})={dv}")
        self.witness = (u, du, v, dv)


class SizeTooSmall(InputError):
    pass


class GenerationFailed(CycleCutError):
    pass


class EmptySide(InputError):
    pass


# -- decomposition -----------------------------------------------------------

class RefinementFailed(CycleCutError):
    def __init__(self, vertex: int, best: int, needed):
        super().__init__(
            f"vertex {vertex} has only {best} neighbours on its best side, "
            f"needs >= {needed}")
        self.vertex = vertex


class DecompositionFailed(CycleCutError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class ClassificationAmbiguous(CycleCutError):
    pass


# -- balancing flow ----------------------------------------------------------

class NotAlmostBalancing(CycleCutError):
    pass


class BalancingFailed(CycleCutError):
    def __init__(self, message: str, best_deficit=None):
        super().__init__(message)
        self.best_deficit = best_deficit


# -- linear forest -----------------------------------------------------------

class CycleDetected(CycleCutError):
    pass


class Disconnected(CycleCutError):
    pass


class MergeFailed(CycleCutError):
    pass


class NoExtensionVertex(CycleCutError):
    pass


# -- hamiltonicity -----------------------------------------------------------

class ReservoirFailed(CycleCutError):
    pass


class NoPerfectMatching(CycleCutError):
    def __init__(self, message: str, hall_violator=None):
        super().__init__(message)
        self.hall_violator = hall_violator


class RotationExhausted(CycleCutError):
    pass


class ConnectFailed(CycleCutError):
    pass


class AbsorbFailed(CycleCutError):
    pass


class HamFailed(CycleCutError):
    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        # best path found before giving up; useful for diagnostics
        self.certificate = certificate


# -- assembly ----------------------------------------------------------------

class AssemblyFailed(CycleCutError):
    def __init__(self, stage: str, diagnostic: str):
        super().__init__(f"[{stage}] {diagnostic}")
        self.stage = stage
        self.diagnostic = diagnostic


class TwoMatchingMissing(AssemblyFailed):
    def __init__(self, diagnostic: str):
        super().__init__("two-matching", diagnostic)


# -- oracles -----------------------------------------------------------------

class TooLarge(InputError):
    pass
