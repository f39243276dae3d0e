"""Catalog of sculpting schemes with their closed-form outputs, and a runner."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bigraph import BLACK, BLUE, RED, Dot, Edge, EdgeColor, SculptingBigraph, to_sculpting_operator
from .engine import (
    SculptingOperator,
    SubtractionOperator,
    SubtractionTerm,
    apply_sculpting,
    check_no_bunching,
    maximally_symmetric_state,
)
from .entanglement import (
    EntanglementClass,
    LogicalState,
    classify,
    fidelity_up_to_phase,
    ghz_target,
    to_logical_state,
    type5_target,
    w_target,
)
from .errors import NoBunchingError, NormalizationError
from .fock import NORM_TOL, FockState, computational_internal, fourier_internal

R2 = 1 / math.sqrt(2)
R3 = 1 / math.sqrt(3)


@dataclass(frozen=True, eq=False)
class SchemeDescriptor:
    name: str
    params: dict
    operator: SculptingOperator
    expected_state: LogicalState
    expected_success: float | None
    local_basis: tuple[tuple[complex, ...], ...]
    basis_label: str
    graph: SculptingBigraph | None = None
    ancilla_levels: tuple[int, ...] = ()
    # when set, relative phases between the expected basis terms are not fixed
    phase_free: bool = False

    def __post_init__(self):
        if self.expected_success is not None and not 0 < self.expected_success <= 1:
            raise ValueError(f"expected success {self.expected_success} outside (0, 1]")
        if len(self.ancilla_levels) != self.operator.K:
            raise ValueError("one ancilla level per ancilla mode is required")

    @property
    def N(self) -> int:
        return self.operator.N

    @property
    def K(self) -> int:
        return self.operator.K

    @property
    def d(self) -> int:
        return self.operator.d

    def initial_state(self) -> FockState:
        return maximally_symmetric_state(self.N, self.d, self.ancilla_levels)


def _pm_basis() -> tuple[tuple[complex, ...], ...]:
    return tuple(tuple(fourier_internal(2, k)) for k in range(2))


def _fourier_basis(d: int) -> tuple[tuple[complex, ...], ...]:
    return tuple(tuple(fourier_internal(d, k)) for k in range(d))


def _computational_basis(d: int) -> tuple[tuple[complex, ...], ...]:
    return tuple(tuple(computational_internal(d, s)) for s in range(d))


def ring_graph(N: int, d: int = 2) -> SculptingBigraph:
    """Dot j: RED +1/sqrt2 on circle j, BLUE -1/sqrt2 on circle j+1 (mod N); multiplicity d-1.

    For d > 2 "RED" is the Fourier state 0~ and "BLUE" is (d-1)~.
    """
    if N < 2:
        raise ValueError(f"a ring needs N >= 2, got {N}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    lo, hi = EdgeColor("fourier", 0), EdgeColor("fourier", d - 1)
    dots = tuple(Dot((Edge(j, lo, R2), Edge((j + 1) % N, hi, -R2)), d - 1) for j in range(N))
    return SculptingBigraph(N, 0, d, dots)


def bell_scheme() -> SchemeDescriptor:
    g = ring_graph(2)
    return SchemeDescriptor("bell", {"N": 2, "d": 2}, to_sculpting_operator(g), ghz_target(2),
                            0.5, _pm_basis(), "+->0,-->1", graph=g)


def ghz_scheme(N: int) -> SchemeDescriptor:
    if N < 2:
        raise ValueError(f"GHZ needs N >= 2, got {N}")
    g = ring_graph(N)
    return SchemeDescriptor("ghz", {"N": N, "d": 2}, to_sculpting_operator(g), ghz_target(N),
                            1 / 2 ** (N - 1), _pm_basis(), "+->0,-->1", graph=g)


def ghz_original_operator(N: int) -> SculptingOperator:
    """Dense variant: every factor spreads over all N modes with relative phases e^{2 pi i (j-l)/N}.

    Each factor is normalized on its own (amplitude 1/sqrt(N) per spatial term).
    """
    if N < 2:
        raise ValueError(f"GHZ needs N >= 2, got {N}")
    factors = []
    for l in range(N):
        terms = []
        for j in range(N):
            phase = cmath.exp(2j * math.pi * (j - l) / N)
            # a_{j,0} + phase a_{j,1} = sqrt2 a_{j,v} with v = (1, conj(phase))/sqrt2
            terms.append(SubtractionTerm(j, 1 / math.sqrt(N), (R2, phase.conjugate() * R2)))
        factors.append(SubtractionOperator(tuple(terms)))
    return SculptingOperator(tuple(factors), N)


def ghz_original_scheme(N: int) -> SchemeDescriptor:
    op = ghz_original_operator(N)
    return SchemeDescriptor("ghz-original", {"N": N, "d": 2}, op, ghz_target(N), None,
                            _computational_basis(2), "0->0,1->1", phase_free=True)


def w_optimal(N: int) -> tuple[float, float]:
    return math.sqrt((N - 1) / N), 1 / math.sqrt(N)


def w_graph(N: int, alpha: complex, beta: complex) -> SculptingBigraph:
    if N < 2:
        raise ValueError(f"W needs N >= 2, got {N}")
    total = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(total - 1) > NORM_TOL:
        raise NormalizationError(f"|alpha|^2 + |beta|^2 = {total:.12g}, expected 1")
    if alpha == 0 or beta == 0:
        raise ValueError("alpha and beta must both be nonzero")
    dots = [Dot((Edge(j, RED, alpha), Edge(N, BLACK, beta))) for j in range(N)]
    dots.append(Dot(tuple(Edge(j, BLUE, 1 / math.sqrt(N)) for j in range(N))))
    return SculptingBigraph(N, 1, 2, tuple(dots))


def w_scheme(N: int, alpha: complex | None = None, beta: complex | None = None) -> SchemeDescriptor:
    a0, b0 = w_optimal(N) if N >= 2 else (0.0, 0.0)
    alpha = a0 if alpha is None else alpha
    beta = b0 if beta is None else beta
    g = w_graph(N, alpha, beta)
    success = abs(alpha ** (N - 1) * beta) ** 2
    return SchemeDescriptor("w", {"N": N, "d": 2, "alpha": complex(alpha), "beta": complex(beta)},
                            to_sculpting_operator(g), w_target(N), success, _pm_basis(), "+->0,-->1",
                            graph=g, ancilla_levels=(0,))


def type5_graph() -> SculptingBigraph:
    A, B, C = 3, 4, 5
    dots = (
        Dot((Edge(0, RED, R2), Edge(A, BLACK, R2))),
        Dot((Edge(1, RED, R2), Edge(B, BLACK, R2))),
        Dot((Edge(2, RED, R2), Edge(C, BLACK, R2))),
        Dot((Edge(C, BLACK, R2), Edge(0, BLUE, -R2))),
        Dot((Edge(A, BLACK, R3), Edge(B, BLACK, R3), Edge(1, BLUE, -R3))),
        Dot((Edge(B, BLACK, R3), Edge(C, BLACK, R3), Edge(2, BLUE, -R3))),
    )
    return SculptingBigraph(3, 3, 2, dots)


def type5_scheme() -> SchemeDescriptor:
    g = type5_graph()
    return SchemeDescriptor("type5", {"N": 3, "d": 2}, to_sculpting_operator(g), type5_target(),
                            5 / 144, _pm_basis(), "+->0,-->1", graph=g, ancilla_levels=(0, 0, 0))


def qudit_ghz_success(N: int, d: int) -> float:
    per_mode = math.factorial(d - 1) / (math.sqrt(2) ** (d - 1) * math.sqrt(d) ** (d - 2))
    return d * per_mode ** (2 * N)


def qudit_ghz_scheme(N: int, d: int) -> SchemeDescriptor:
    g = ring_graph(N, d)
    return SchemeDescriptor("qudit-ghz", {"N": N, "d": d}, to_sculpting_operator(g), ghz_target(N, d),
                            qudit_ghz_success(N, d), _fourier_basis(d), "k~->k", graph=g)


# -- running ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SchemeReport:
    name: str
    params: dict
    final: FockState
    logical: LogicalState
    success: float
    fidelity: float
    classification: EntanglementClass
    basis_label: str
    expected_success: float | None = None

    def to_json(self) -> dict:
        params = {k: ([v.real, v.imag] if isinstance(v, complex) else v) for k, v in self.params.items()}
        return {
            "name": self.name, "params": params,
            "success": self.success, "expected_success": self.expected_success,
            "fidelity": self.fidelity,
            "classification": self.classification.to_json(),
            "basis": self.basis_label,
            "logical_state": self.logical.to_json(),
            "final_state": self.final.to_json(),
        }


def phase_free_fidelity(expected: LogicalState, actual: LogicalState) -> float:
    """Best overlap when each expected basis term may carry its own phase."""
    return float(min(1.0, np.sum(np.abs(expected.amps) * np.abs(actual.amps))))


def run_scheme(desc: SchemeDescriptor) -> SchemeReport:
    final = apply_sculpting(desc.operator, desc.initial_state())
    report = check_no_bunching(final, desc.N, desc.K)
    if not report:
        raise NoBunchingError(report.violations)
    logical, success = to_logical_state(final, desc.N, desc.d, desc.local_basis, desc.K)
    if desc.phase_free:
        fid = phase_free_fidelity(desc.expected_state, logical)
    else:
        fid = fidelity_up_to_phase(desc.expected_state, logical)
    return SchemeReport(desc.name, dict(desc.params), final, logical, success, fid, classify(logical),
                        desc.basis_label, desc.expected_success)


SCHEMES: dict[str, Callable[..., SchemeDescriptor]] = {
    "bell": lambda **kw: bell_scheme(),
    "ghz": lambda N=3, **kw: ghz_scheme(N),
    "ghz-original": lambda N=3, **kw: ghz_original_scheme(N),
    "w": lambda N=3, alpha=None, beta=None, **kw: w_scheme(N, alpha, beta),
    "type5": lambda **kw: type5_scheme(),
    "qudit-ghz": lambda N=3, d=3, **kw: qudit_ghz_scheme(N, d),
}


def build_scheme(name: str, **params) -> SchemeDescriptor:
    try:
        ctor = SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; choose from {sorted(SCHEMES)}") from None
    return ctor(**{k: v for k, v in params.items() if v is not None})


def builtin_schemes() -> list[SchemeDescriptor]:
    """Representative instances used by the oracle checks."""
    out = [bell_scheme()]
    out += [ghz_scheme(N) for N in range(2, 7)]
    out += [w_scheme(N) for N in range(2, 6)]
    out.append(type5_scheme())
    out += [qudit_ghz_scheme(2, 3), qudit_ghz_scheme(3, 3), qudit_ghz_scheme(2, 4)]
    return out
