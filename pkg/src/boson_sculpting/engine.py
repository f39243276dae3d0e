"""Maximally symmetric initial states, subtraction operators and their application."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractError, NormalizationError, ResourceError
from .fock import (
    NORM_TOL,
    Config,
    FockState,
    annihilate,
    computational_internal,
    create,
    internal_vector,
    sum_states,
    vacuum,
)

DEFAULT_PATH_CAP = 10**7


@dataclass(frozen=True)
class SubtractionTerm:
    """``amplitude * a_{spatial, internal}`` inside one subtraction operator."""

    spatial: int
    amplitude: complex
    internal: tuple[complex, ...]

    def __post_init__(self):
        v = internal_vector(self.internal)
        object.__setattr__(self, "internal", tuple(complex(x) for x in v))
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.internal, dtype=complex)

    def combo(self) -> dict[tuple[int, int], complex]:
        return {(self.spatial, s): self.amplitude * c.conjugate()
                for s, c in enumerate(self.internal) if c != 0}


@dataclass(frozen=True)
class SubtractionOperator:
    """One spatially superposed single-boson subtraction, ``sum_j alpha_j a_{j,psi_j}``."""

    terms: tuple[SubtractionTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("a subtraction operator needs at least one term")
        object.__setattr__(self, "terms", terms)
        total = sum(abs(t.amplitude) ** 2 for t in terms)
        if abs(total - 1) > NORM_TOL:
            raise NormalizationError(f"subtraction amplitudes have squared norm {total:.12g}, expected 1")
        for a, b in itertools.combinations(terms, 2):
            if a.spatial == b.spatial and abs(abs(np.vdot(a.vector, b.vector)) - 1) < NORM_TOL:
                raise ValueError(f"duplicate term on spatial mode {a.spatial} with the same internal direction")

    def combo(self) -> dict[tuple[int, int], complex]:
        out: dict[tuple[int, int], complex] = {}
        for t in self.terms:
            for k, c in t.combo().items():
                out[k] = out.get(k, 0j) + c
        return out

    def sort_key(self):
        return tuple(sorted((t.spatial, _round_tuple(t.internal), _round(t.amplitude)) for t in self.terms))

    def canonical(self) -> SubtractionOperator:
        return SubtractionOperator(tuple(sorted(self.terms, key=lambda t: (t.spatial, _round_tuple(t.internal)))))


def _round(z: complex, nd: int = 12) -> tuple[float, float]:
    return (round(z.real, nd) + 0.0, round(z.imag, nd) + 0.0)


def _round_tuple(v) -> tuple:
    return tuple(_round(complex(x)) for x in v)


@dataclass(frozen=True)
class SculptingOperator:
    """Product of subtraction operators acting on ``N`` system plus ``K`` ancilla modes."""

    factors: tuple[SubtractionOperator, ...]
    N: int
    K: int = 0
    d: int = 2

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.N < 1 or self.K < 0 or self.d < 2:
            raise ValueError(f"bad operator dims N={self.N} K={self.K} d={self.d}")
        for f in self.factors:
            for t in f.terms:
                if not 0 <= t.spatial < self.N + self.K:
                    raise ValueError(f"term on spatial mode {t.spatial} outside N+K={self.N + self.K}")
                if len(t.internal) != self.d:
                    raise ValueError(f"term internal vector has {len(t.internal)} components, d={self.d}")

    @property
    def spatial(self) -> int:
        return self.N + self.K

    def canonical(self) -> SculptingOperator:
        """Factors commute; sort them (and their terms) into a fixed order."""
        fs = sorted((f.canonical() for f in self.factors), key=SubtractionOperator.sort_key)
        return SculptingOperator(tuple(fs), self.N, self.K, self.d)

    def path_count(self) -> int:
        return math.prod(len(f.terms) for f in self.factors)

    def to_json(self) -> dict:
        return {
            "N": self.N, "K": self.K, "d": self.d,
            "factors": [
                [{"j": t.spatial, "re": t.amplitude.real, "im": t.amplitude.imag,
                  "internal": [[c.real, c.imag] for c in t.internal]} for t in f.terms]
                for f in self.canonical().factors
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> SculptingOperator:
        factors = []
        for f in data["factors"]:
            factors.append(SubtractionOperator(tuple(
                SubtractionTerm(int(t["j"]), complex(t["re"], t.get("im", 0.0)),
                                tuple(complex(re, im) for re, im in t["internal"]))
                for t in f)))
        return cls(tuple(factors), int(data["N"]), int(data.get("K", 0)), int(data.get("d", 2)))


def maximally_symmetric_state(N: int, d: int = 2, ancilla_levels: Sequence[int] = ()) -> FockState:
    """d bosons in levels 0..d-1 on each of N system modes, one boson per ancilla."""
    if N < 1 or d < 2:
        raise ValueError(f"need N >= 1 and d >= 2, got N={N}, d={d}")
    K = len(ancilla_levels)
    occ = {(j, s): 1 for j in range(N) for s in range(d)}
    for k, level in enumerate(ancilla_levels):
        computational_internal(d, level)
        occ[(N + k, level)] = 1
    cfg = tuple(sorted((j, s, n) for (j, s), n in occ.items()))
    return FockState(N + K, d, {cfg: 1 + 0j})


def _check_op_state(op: SculptingOperator, state: FockState) -> None:
    if state.dims != (op.spatial, op.d):
        raise ValueError(f"operator dims {(op.spatial, op.d)} do not match state dims {state.dims}")
    total = state.boson_count()
    if total is not None and total - len(op.factors) != op.N:
        raise ValueError(
            f"{len(op.factors)} subtractions from {total} bosons cannot leave one boson "
            f"in each of the {op.N} system modes")


def apply_sculpting(op: SculptingOperator, state: FockState) -> FockState:
    """Apply every factor in turn (rightmost first); the result is unnormalized."""
    _check_op_state(op, state)
    out = state
    for f in reversed(op.factors):
        out = annihilate(out, f.combo())
        if out.is_zero():
            break
    return out


# -- no-bunching ----------------------------------------------------------------

@dataclass(frozen=True)
class NoBunchingReport:
    passed: bool
    violations: tuple[tuple[Config, complex], ...]

    def __bool__(self) -> bool:
        return self.passed


def is_valid_config(cfg: Config, N: int, K: int) -> bool:
    per_mode = [0] * (N + K)
    for j, _, n in cfg:
        per_mode[j] += n
    return all(c == 1 for c in per_mode[:N]) and all(c == 0 for c in per_mode[N:])


def check_no_bunching(state: FockState, N: int, K: int = 0) -> NoBunchingReport:
    """Every surviving term must hold one boson per system mode and none in ancillas."""
    if state.spatial != N + K:
        raise ValueError(f"state has {state.spatial} spatial modes, expected N+K={N + K}")
    bad = tuple((c, a) for c, a in state.items() if not is_valid_config(c, N, K))
    return NoBunchingReport(not bad, bad)


def split_by_validity(state: FockState, N: int, K: int = 0) -> tuple[FockState, FockState]:
    """(no-bunching part, bunched part)."""
    good = {c: a for c, a in state.terms.items() if is_valid_config(c, N, K)}
    bad = {c: a for c, a in state.terms.items() if c not in good}
    return FockState(state.spatial, state.internal, good), FockState(state.spatial, state.internal, bad)


def success_probability(final: FockState, N: int) -> float:
    """Squared norm of the heralded final state; requires the no-bunching check to pass."""
    report = check_no_bunching(final, N, final.spatial - N)
    if not report:
        raise ContractError(f"success probability undefined: {len(report.violations)} bunched term(s) survive")
    return final.norm_squared()


# -- collective paths -------------------------------------------------------------

@dataclass(frozen=True)
class CollectivePath:
    """One choice of term per factor: ``assignment[l]`` indexes ``op.factors[l].terms``."""

    assignment: tuple[int, ...]
    coefficient: complex
    modes: tuple[tuple[int, tuple[complex, ...]], ...]

    def hits(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.modes)


def expand_collective_paths(op: SculptingOperator, cap: int = DEFAULT_PATH_CAP) -> list[CollectivePath]:
    count = op.path_count()
    if count > cap:
        raise ResourceError(f"{count} collective paths exceed the cap of {cap}")
    paths = []
    for assignment in itertools.product(*(range(len(f.terms)) for f in op.factors)):
        chosen = [f.terms[i] for f, i in zip(op.factors, assignment)]
        coeff = math.prod((t.amplitude for t in chosen), start=1 + 0j)
        paths.append(CollectivePath(tuple(assignment), coeff, tuple((t.spatial, t.internal) for t in chosen)))
    return paths


def apply_path(path: CollectivePath, state: FockState) -> FockState:
    """Coefficient times the chosen annihilations applied to ``state``."""
    out = state
    for j, vec in reversed(path.modes):
        out = annihilate(out, {(j, s): c.conjugate() for s, c in enumerate(vec) if c != 0})
        if out.is_zero():
            return out
    return out.scaled(path.coefficient)


def sum_over_paths(op: SculptingOperator, state: FockState, cap: int = DEFAULT_PATH_CAP,
                   keep=None) -> FockState:
    """Sum of path contributions, optionally restricted by a ``keep(path)`` predicate."""
    _check_op_state(op, state)
    contribs = (apply_path(p, state) for p in expand_collective_paths(op, cap)
                if keep is None or keep(p))
    return sum_states(contribs, state.spatial, state.internal)


def path_covers_once(path: CollectivePath, required: Sequence[int]) -> bool:
    """True if the path hits circle ``j`` exactly ``required[j]`` times for every j."""
    hits = [0] * len(required)
    for j in path.hits():
        hits[j] += 1
    return hits == list(required)


def initial_state_for(op: SculptingOperator, ancilla_levels: Sequence[int] | None = None) -> FockState:
    levels = [0] * op.K if ancilla_levels is None else list(ancilla_levels)
    if len(levels) != op.K:
        raise ValueError(f"expected {op.K} ancilla levels, got {len(levels)}")
    return maximally_symmetric_state(op.N, op.d, levels)


def build_state(spatial: int, d: int, creations: Sequence[Mapping[tuple[int, int], complex]]) -> FockState:
    """Product of linear creation forms applied to the vacuum (last form applied first)."""
    out = vacuum(spatial, d)
    for combo in reversed(creations):
        out = create(out, combo)
    return out
