"""Logical N-party states read off no-bunching Fock states, and their entanglement class."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .engine import check_no_bunching
from .errors import ContractError
from .fock import NORM_TOL, FockState, _fmt_complex

SCHMIDT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LogicalState:
    N: int
    d: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size != self.d ** self.N:
            raise ValueError(f"expected {self.d ** self.N} amplitudes for N={self.N}, d={self.d}, got {amps.size}")
        n = np.linalg.norm(amps)
        if abs(n - 1) > NORM_TOL:
            raise ValueError(f"logical state must be normalized, norm is {n:.12g}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_terms(cls, N: int, d: int, terms: Mapping[Sequence[int] | str, complex]) -> LogicalState:
        """Build and normalize from ``{digits: amplitude}``; keys may be strings like ``"010"``."""
        v = np.zeros(d ** N, dtype=complex)
        for key, a in terms.items():
            digits = [int(ch) for ch in key] if isinstance(key, str) else list(key)
            if len(digits) != N or any(not 0 <= x < d for x in digits):
                raise ValueError(f"bad basis label {key!r}")
            v[np.ravel_multi_index(digits, (d,) * N)] += a
        return cls(N, d, v / np.linalg.norm(v))

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((self.d,) * self.N)

    def nonzero_terms(self, tol: float = 1e-12) -> dict[tuple[int, ...], complex]:
        return {tuple(int(x) for x in np.unravel_index(i, (self.d,) * self.N)): complex(a)
                for i, a in enumerate(self.amps) if abs(a) > tol}

    def to_braket(self, digits: int = 6) -> str:
        parts = []
        for key, a in sorted(self.nonzero_terms().items()):
            parts.append(f"({_fmt_complex(a, digits)})|{''.join(map(str, key))}>")
        return " + ".join(parts) or "0"

    def to_json(self) -> dict:
        return {"N": self.N, "d": self.d, "amps": [[a.real, a.imag] for a in self.amps]}

    @classmethod
    def from_json(cls, data: Mapping) -> LogicalState:
        amps = np.array([complex(re, im) for re, im in data["amps"]])
        n = np.linalg.norm(amps)
        if n == 0:
            raise ValueError("logical state has zero norm")
        return cls(int(data["N"]), int(data["d"]), amps / n)


def to_logical_state(f: FockState, N: int, d: int, local_basis: Sequence[Sequence[complex]],
                     K: int | None = None) -> tuple[LogicalState, float]:
    """Express a no-bunching state in ``local_basis`` (logical s <-> ``local_basis[s]``).

    Returns the normalized logical state and the squared norm before normalization.
    """
    K = f.spatial - N if K is None else K
    if f.internal != d:
        raise ValueError(f"state has d={f.internal}, expected {d}")
    report = check_no_bunching(f, N, K)
    if not report:
        raise ContractError(f"state violates no-bunching in {len(report.violations)} term(s)")
    if f.is_zero():
        raise ContractError("the zero state has no logical content")
    basis = np.asarray(local_basis, dtype=complex)
    if basis.shape != (d, d) or not np.allclose(basis.conj() @ basis.T, np.eye(d), atol=1e-9):
        raise ValueError("local_basis must be d orthonormal vectors")
    comp = np.zeros((d,) * N, dtype=complex)
    for cfg, a in f.items():
        levels = [s for _, s, _ in sorted(cfg)]
        comp[tuple(levels)] = a
    # amplitude on |b_{s_1}...b_{s_N}> = sum_t c(t) prod_j conj(b_{s_j}[t_j])
    out = comp
    for axis in range(N):
        out = np.moveaxis(np.tensordot(basis.conj(), out, axes=([1], [axis])), 0, axis)
    amps = out.reshape(-1)
    norm2 = float(np.vdot(amps, amps).real)
    return LogicalState(N, d, amps / math.sqrt(norm2)), norm2


class EntanglementKind(enum.Enum):
    FULLY_SEPARABLE = "FULLY_SEPARABLE"
    PARTIALLY_SEPARABLE = "PARTIALLY_SEPARABLE"
    GENUINE = "GENUINE"


@dataclass(frozen=True)
class EntanglementClass:
    kind: EntanglementKind
    witnesses: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = ()
    ranks: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {"class": self.kind.value,
                "witnesses": [[list(a), list(b)] for a, b in self.witnesses],
                "schmidt_ranks": [{"cut": [list(a), list(b)], "rank": r} for (a, b), r in self.ranks.items()]}


def bipartitions(N: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """The 2^(N-1) - 1 cuts; party 0 always sits on the left."""
    cuts = []
    rest = list(range(1, N))
    for r in range(0, N - 1):
        for extra in itertools.combinations(rest, r):
            left = (0,) + extra
            right = tuple(i for i in range(N) if i not in left)
            cuts.append((left, right))
    return cuts


def cut_matrix(s: LogicalState, left: Sequence[int], right: Sequence[int]) -> np.ndarray:
    t = np.transpose(s.tensor(), list(left) + list(right))
    return t.reshape(s.d ** len(left), s.d ** len(right))


def schmidt_rank(s: LogicalState, left: Sequence[int], right: Sequence[int], tol: float = SCHMIDT_TOL) -> int:
    sv = np.linalg.svd(cut_matrix(s, left, right), compute_uv=False)
    return int(np.sum(sv > tol))


def classify(s: LogicalState, tol: float = SCHMIDT_TOL) -> EntanglementClass:
    if s.N < 2:
        raise ValueError("classification needs at least two parties")
    ranks = {cut: schmidt_rank(s, *cut, tol=tol) for cut in bipartitions(s.N)}
    product_cuts = tuple(cut for cut, r in ranks.items() if r == 1)
    if not product_cuts:
        return EntanglementClass(EntanglementKind.GENUINE, (), ranks)
    if len(product_cuts) == len(ranks):
        return EntanglementClass(EntanglementKind.FULLY_SEPARABLE, product_cuts, ranks)
    return EntanglementClass(EntanglementKind.PARTIALLY_SEPARABLE, product_cuts, ranks)


def fidelity_up_to_phase(a: LogicalState, b: LogicalState) -> float:
    """|<a|b>|."""
    if (a.N, a.d) != (b.N, b.d):
        raise ValueError(f"shape mismatch: {(a.N, a.d)} vs {(b.N, b.d)}")
    return float(min(1.0, abs(np.vdot(a.amps, b.amps))))


def ghz_target(N: int, d: int = 2) -> LogicalState:
    return LogicalState.from_terms(N, d, {(k,) * N: 1 for k in range(d)})


def w_target(N: int) -> LogicalState:
    return LogicalState.from_terms(N, 2, {tuple(int(i == j) for i in range(N)): 1 for j in range(N)})


def type5_target() -> LogicalState:
    """(|+++> + |-++> + |-+-> + |--+> + |--->)/sqrt(5) with + -> 0 and - -> 1."""
    return LogicalState.from_terms(3, 2, {"000": 1, "100": 1, "101": 1, "110": 1, "111": 1})


def product_target(digits: Sequence[int], d: int = 2) -> LogicalState:
    return LogicalState.from_terms(len(digits), d, {tuple(digits): 1})


def kron(a: LogicalState, b: LogicalState) -> LogicalState:
    if a.d != b.d:
        raise ValueError("local dimensions differ")
    return LogicalState(a.N + b.N, a.d, np.kron(a.amps, b.amps))
