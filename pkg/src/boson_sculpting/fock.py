"""Sparse bosonic Fock-state algebra over spatial modes with a d-level internal state.

A state is a finite linear combination of occupation configurations. A
configuration is a sorted tuple of ``(spatial, internal, count)`` triples with
``count >= 1``; the ordering is (spatial, internal) ascending so equal
configurations hash and compare equal.

Amplitudes are normalized Fock amplitudes: the configuration
``((j, s, n), ...)`` stands for ``prod (a†_{j,s})^n / sqrt(n!) |vac>``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

PRUNE_TOL = 1e-12
COMPARE_TOL = 1e-9
NORM_TOL = 1e-9

Config = tuple[tuple[int, int, int], ...]


class ModeKey(NamedTuple):
    spatial: int
    internal: int


def _check_dims(spatial: int, internal: int) -> None:
    if int(spatial) != spatial or spatial < 1:
        raise ValueError(f"spatial mode count must be >= 1, got {spatial!r}")
    if int(internal) != internal or internal < 2:
        raise ValueError(f"internal dimension must be >= 2, got {internal!r}")


@dataclass(frozen=True)
class FockState:
    """Immutable sparse state. Build new states through the module functions."""

    spatial: int
    internal: int
    terms: Mapping[Config, complex] = field(default_factory=dict)

    def __post_init__(self):
        _check_dims(self.spatial, self.internal)

    # -- container-ish helpers -------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Config]:
        return iter(sorted(self.terms))

    def items(self) -> list[tuple[Config, complex]]:
        return sorted(self.terms.items())

    def amplitude(self, config: Config) -> complex:
        return self.terms.get(config, 0j)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def dims(self) -> tuple[int, int]:
        return (self.spatial, self.internal)

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def normalized(self) -> FockState:
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return self.scaled(1 / n)

    def scaled(self, factor: complex) -> FockState:
        return _build(self.spatial, self.internal,
                      {c: a * factor for c, a in self.terms.items()})

    def _check_same(self, other: FockState) -> None:
        if self.dims != other.dims:
            raise ValueError(f"dimension mismatch: {self.dims} vs {other.dims}")

    def __add__(self, other: FockState) -> FockState:
        self._check_same(other)
        out = dict(self.terms)
        for c, a in other.terms.items():
            out[c] = out.get(c, 0j) + a
        return _build(self.spatial, self.internal, out)

    def __sub__(self, other: FockState) -> FockState:
        return self + other.scaled(-1)

    def __mul__(self, factor: complex) -> FockState:
        return self.scaled(factor)

    __rmul__ = __mul__

    def __neg__(self) -> FockState:
        return self.scaled(-1)

    def boson_count(self) -> int | None:
        """Total boson number if every term agrees, else None. Zero state gives 0."""
        counts = {sum(n for _, _, n in c) for c in self.terms}
        if not counts:
            return 0
        return counts.pop() if len(counts) == 1 else None

    def allclose(self, other: FockState, tol: float = COMPARE_TOL) -> bool:
        self._check_same(other)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.amplitude(k) - other.amplitude(k)) <= tol for k in keys)

    def max_abs_diff(self, other: FockState) -> float:
        self._check_same(other)
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.amplitude(k) - other.amplitude(k)) for k in keys), default=0.0)

    def with_spatial(self, spatial: int) -> FockState:
        """Same terms in an ambient space with a different spatial mode count."""
        for c in self.terms:
            if any(j >= spatial for j, _, _ in c):
                raise ValueError("occupied mode falls outside the new spatial range")
        return FockState(spatial, self.internal, dict(self.terms))

    # -- serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "dims": {"spatial": self.spatial, "internal": self.internal},
            "terms": [
                {"occ": [list(t) for t in c], "re": a.real, "im": a.imag}
                for c, a in self.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> FockState:
        dims = data["dims"]
        spatial, internal = int(dims["spatial"]), int(dims["internal"])
        terms: dict[Config, complex] = {}
        for t in data["terms"]:
            occ = {}
            for j, s, n in t["occ"]:
                occ[ModeKey(int(j), int(s))] = int(n)
            cfg = _config_from_counts(occ)
            _validate_config(cfg, spatial, internal)
            terms[cfg] = terms.get(cfg, 0j) + complex(t["re"], t["im"])
        return _build(spatial, internal, terms)

    def to_braket(self, digits: int = 6) -> str:
        if not self.terms:
            return "0"
        parts = []
        for c, a in self.items():
            occ = ",".join(f"{j}:{s}^{n}" if n > 1 else f"{j}:{s}" for j, s, n in c)
            parts.append(f"({_fmt_complex(a, digits)})|{occ or 'vac'}>")
        return " + ".join(parts)


def _fmt_complex(z: complex, digits: int) -> str:
    if abs(z.imag) < 10 ** -(digits + 2):
        return f"{z.real:.{digits}g}"
    if abs(z.real) < 10 ** -(digits + 2):
        return f"{z.imag:.{digits}g}j"
    return f"{z.real:.{digits}g}{z.imag:+.{digits}g}j"


def _config_from_counts(counts: Mapping[tuple[int, int], int]) -> Config:
    return tuple(sorted((j, s, n) for (j, s), n in counts.items() if n > 0))


def _validate_config(cfg: Config, spatial: int, internal: int) -> None:
    for j, s, n in cfg:
        if not (0 <= j < spatial and 0 <= s < internal) or n < 1:
            raise ValueError(f"invalid occupation entry {(j, s, n)} for dims {(spatial, internal)}")


def _build(spatial: int, internal: int, terms: Mapping[Config, complex]) -> FockState:
    return FockState(spatial, internal,
                     {c: complex(a) for c, a in terms.items() if abs(a) >= PRUNE_TOL})


def vacuum(spatial_count: int, d: int) -> FockState:
    _check_dims(spatial_count, d)
    return FockState(spatial_count, d, {(): 1 + 0j})


def zero_state(spatial_count: int, d: int) -> FockState:
    return FockState(spatial_count, d, {})


def basis_state(spatial_count: int, d: int, occupation: Mapping[tuple[int, int], int],
                amplitude: complex = 1.0) -> FockState:
    """Single-configuration state from a ``{(spatial, internal): count}`` mapping."""
    _check_dims(spatial_count, d)
    cfg = _config_from_counts(occupation)
    _validate_config(cfg, spatial_count, d)
    return _build(spatial_count, d, {cfg: amplitude})


# -- ladder operators ----------------------------------------------------------

def _shift(cfg: Config, mode: tuple[int, int], delta: int) -> tuple[Config, int]:
    """Return (new config, old count at mode)."""
    counts = {(j, s): n for j, s, n in cfg}
    old = counts.get(mode, 0)
    counts[mode] = old + delta
    return _config_from_counts(counts), old


def create(state: FockState, combo: Mapping[tuple[int, int], complex]) -> FockState:
    """Apply ``sum_k combo[k] a†_k`` where keys are ``(spatial, internal)`` pairs."""
    out: dict[Config, complex] = {}
    for mode, coeff in combo.items():
        _validate_config(((mode[0], mode[1], 1),), state.spatial, state.internal)
        if coeff == 0:
            continue
        for cfg, amp in state.terms.items():
            new, old = _shift(cfg, mode, +1)
            out[new] = out.get(new, 0j) + amp * coeff * math.sqrt(old + 1)
    return _build(state.spatial, state.internal, out)


def annihilate(state: FockState, combo: Mapping[tuple[int, int], complex]) -> FockState:
    """Apply ``sum_k combo[k] a_k``; empty modes drop out (zero state allowed)."""
    out: dict[Config, complex] = {}
    for mode, coeff in combo.items():
        _validate_config(((mode[0], mode[1], 1),), state.spatial, state.internal)
        if coeff == 0:
            continue
        for cfg, amp in state.terms.items():
            new, old = _shift(cfg, mode, -1)
            if old == 0:
                continue
            out[new] = out.get(new, 0j) + amp * coeff * math.sqrt(old)
    return _build(state.spatial, state.internal, out)


def internal_vector(components: Sequence[complex], *, normalize: bool = False) -> np.ndarray:
    """Validated unit internal-state vector."""
    v = np.asarray(components, dtype=complex).reshape(-1)
    if v.size < 2:
        raise ValueError("internal vector needs at least 2 components")
    n = np.linalg.norm(v)
    if normalize:
        if n == 0:
            raise ValueError("cannot normalize a zero internal vector")
        return v / n
    if abs(n - 1) > NORM_TOL:
        raise ValueError(f"internal vector must have unit norm, got {n:.12g}")
    return v


def _check_vector(state: FockState, spatial: int, v: Sequence[complex]) -> np.ndarray:
    v = internal_vector(v)
    if v.size != state.internal:
        raise ValueError(f"internal vector has {v.size} components, state has d={state.internal}")
    if not 0 <= spatial < state.spatial:
        raise ValueError(f"spatial index {spatial} out of range [0, {state.spatial})")
    return v


def apply_creation(state: FockState, spatial: int, v: Sequence[complex]) -> FockState:
    """a†_{j,v} = sum_s <s|v> a†_{j,s}."""
    v = _check_vector(state, spatial, v)
    return create(state, {(spatial, s): v[s] for s in range(v.size)})


def apply_annihilation(state: FockState, spatial: int, v: Sequence[complex]) -> FockState:
    """a_{j,v} = sum_s conj(<s|v>) a_{j,s}, the adjoint of :func:`apply_creation`."""
    v = _check_vector(state, spatial, v)
    return annihilate(state, {(spatial, s): v[s].conjugate() for s in range(v.size)})


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    a._check_same(b)
    small, large = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    total = 0j
    for cfg in small:
        if cfg in large:
            total += a.terms[cfg].conjugate() * b.terms[cfg]
    return total


def fourier_internal(d: int, k: int) -> np.ndarray:
    """|k~> with components exp(2 pi i k s / d) / sqrt(d)."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not 0 <= k < d:
        raise ValueError(f"Fourier index {k} out of range [0, {d})")
    return np.array([cmath.exp(2j * math.pi * k * s / d) for s in range(d)]) / math.sqrt(d)


def computational_internal(d: int, s: int) -> np.ndarray:
    if not 0 <= s < d:
        raise ValueError(f"level {s} out of range [0, {d})")
    v = np.zeros(d, dtype=complex)
    v[s] = 1
    return v


def plus_minus() -> tuple[np.ndarray, np.ndarray]:
    return fourier_internal(2, 0), fourier_internal(2, 1)


def sum_states(states: Iterable[FockState], spatial: int, d: int) -> FockState:
    out: dict[Config, complex] = {}
    for st in states:
        if st.dims != (spatial, d):
            raise ValueError(f"dimension mismatch: {st.dims} vs {(spatial, d)}")
        for c, a in st.terms.items():
            out[c] = out.get(c, 0j) + a
    return _build(spatial, d, out)
