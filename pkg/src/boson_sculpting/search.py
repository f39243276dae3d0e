"""Search for sculpting bigraphs that produce a given qubit target state.

The pipeline: one perfect-matching skeleton per target basis term, a
minimal-edge merge of the skeletons, then a multistart least-squares solve for
the edge weights. Every claimed solution is re-checked by applying the
resulting operator directly.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

from .bigraph import BLACK, BLUE, DOTTED, RED, Dot, Edge, EdgeColor, SculptingBigraph, to_sculpting_operator
from .engine import (
    apply_sculpting,
    check_no_bunching,
    is_valid_config,
    maximally_symmetric_state,
    split_by_validity,
)
from .entanglement import EntanglementClass, LogicalState, classify, fidelity_up_to_phase, schmidt_rank, to_logical_state
from .errors import ContractError, NormalizationError, ResourceError, SculptingError
from .fock import FockState, _build, annihilate

SOLVE_TOL = 1e-8
FD_STEP = 1e-6
DEFAULT_STARTS = 64
MAX_RETRIES = 3
EXACT_DOT_LIMIT = 6
EXACT_COMBO_LIMIT = 100_000
PATH_LIMIT = 100_000
# solutions below this heralding probability are treated as degenerate
MIN_SUCCESS = 1e-6
SUCCESS_FLOOR = 1e-4
FLOOR_WEIGHT = 1e-3

BASIS_COLORS = {"pm": (RED, BLUE), "computational": (BLACK, DOTTED)}
ALL_COLORS = frozenset({RED, BLUE, BLACK, DOTTED})


class UnsupportedTargetError(SculptingError):
    pass


@dataclass(frozen=True, eq=False)
class TargetSpec:
    target: LogicalState
    K: int = 0
    colors: frozenset = ALL_COLORS
    basis: str = "pm"

    def __post_init__(self):
        if self.target.d != 2:
            raise UnsupportedTargetError("only qubit targets are searched")
        if self.basis not in BASIS_COLORS:
            raise ValueError(f"basis must be one of {sorted(BASIS_COLORS)}")
        if self.K < 0:
            raise ValueError("K must be >= 0")
        object.__setattr__(self, "colors", frozenset(self.colors))

    @property
    def N(self) -> int:
        return self.target.N

    def local_basis(self) -> tuple[tuple[complex, ...], ...]:
        return tuple(tuple(c.vector(2)) for c in BASIS_COLORS[self.basis])

    def to_json(self) -> dict:
        return {"target": self.target.to_json(), "K": self.K, "basis": self.basis,
                "colors": sorted(c.to_json() for c in self.colors)}

    @classmethod
    def from_json(cls, data: Mapping) -> TargetSpec:
        if "target" not in data:
            return cls(LogicalState.from_json(data))
        colors = frozenset(EdgeColor.from_json(c) for c in data.get("colors", [])) or ALL_COLORS
        return cls(LogicalState.from_json(data["target"]), int(data.get("K", 0)), colors,
                   data.get("basis", "pm"))


# a skeleton assigns dot i to one (circle, color); it is a perfect matching by construction
Skeleton = tuple[tuple[int, EdgeColor], ...]


def pms_from_target(t: TargetSpec) -> list[Skeleton]:
    """One skeleton per nonzero target amplitude; ancilla dots carry BLACK edges."""
    zero, one = BASIS_COLORS[t.basis]
    out = []
    for digits in sorted(t.target.nonzero_terms(1e-12)):
        sk = [(j, zero if s == 0 else one) for j, s in enumerate(digits)]
        sk += [(t.N + k, BLACK) for k in range(t.K)]
        for _, c in sk:
            if c not in t.colors:
                raise UnsupportedTargetError(f"term {digits} needs color {c.name()}, not in the allowed set")
        out.append(tuple(sk))
    return out


# -- step 2: merge skeletons into a small graph -------------------------------------

@dataclass(frozen=True)
class Template:
    """Bigraph shape without weights: ``dots[i]`` lists ``(circle, color)`` pairs."""

    N: int
    K: int
    dots: tuple[tuple[tuple[int, EdgeColor], ...], ...]

    def edge_count(self) -> int:
        return sum(len(d) for d in self.dots)

    def key(self):
        return tuple(sorted(tuple(sorted((c, col.kind, col.index) for c, col in d)) for d in self.dots))

    def uniform_graph(self) -> SculptingBigraph:
        return self.graph([np.ones(len(d)) for d in self.dots])

    def graph(self, amplitudes: Sequence[Sequence[complex]]) -> SculptingBigraph:
        dots = tuple(Dot(tuple(Edge(c, col, complex(a)) for (c, col), a in zip(d, _unit(amp))))
                     for d, amp in zip(self.dots, amplitudes))
        return SculptingBigraph(self.N, self.K, 2, dots)

    @classmethod
    def from_graph(cls, g: SculptingBigraph) -> Template:
        return cls(g.N, g.K, tuple(tuple((e.circle, e.color) for e in d.edges) for d in g.expanded().dots))

    def components(self) -> list[set[int]]:
        parent = list(range(self.N + self.K))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for d in self.dots:
            cs = [c for c, _ in d]
            for c in cs[1:]:
                parent[find(c)] = find(cs[0])
        groups: dict[int, set[int]] = {}
        for c in range(self.N + self.K):
            groups.setdefault(find(c), set()).add(c)
        return sorted(groups.values(), key=min)

    def with_extra_ancilla(self) -> Template:
        """One more ancilla circle, BLACK edges to it from every dot, and one new dot
        carrying a BLACK edge to the ancilla plus RED and BLUE edges to every system circle."""
        a = self.N + self.K
        dots = [tuple(d) + ((a, BLACK),) for d in self.dots]
        extra = ((a, BLACK),) + tuple((j, col) for j in range(self.N) for col in (RED, BLUE))
        dots.append(extra)
        return Template(self.N, self.K + 1, tuple(dots))


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise NormalizationError("a dot has all-zero edge weights")
    return v / n


def _merge(skeletons: Sequence[Skeleton], perms: Sequence[Sequence[int]]) -> Template:
    n = len(skeletons[0])
    dots: list[list[tuple[int, EdgeColor]]] = [[] for _ in range(n)]
    for sk, perm in zip(skeletons, perms):
        for i, g in enumerate(perm):
            if sk[i] not in dots[g]:
                dots[g].append(sk[i])
    return tuple(tuple(d) for d in dots)


def _separates_entangled_cut(tmpl: Template, target: LogicalState | None) -> bool:
    """True if the graph splits system circles that the target entangles."""
    if target is None:
        return False
    for comp in tmpl.components():
        left = tuple(sorted(c for c in comp if c < tmpl.N))
        if 0 < len(left) < tmpl.N:
            right = tuple(i for i in range(tmpl.N) if i not in left)
            if schmidt_rank(target, left, right) > 1:
                return True
    return False


def candidate_templates(skeletons: Sequence[Skeleton], N: int, K: int,
                        target: LogicalState | None = None, limit: int = 8) -> list[Template]:
    """Dot identifications ranked by edge count, ties broken by sorted incidence lists.

    Skeleton 0 fixes the dot labels; every other skeleton is matched onto them.
    The search is exhaustive for small cases and greedy otherwise. Graphs whose
    connected components cut an entangled bipartition of the target are dropped.
    """
    if not skeletons:
        raise ValueError("no skeletons")
    n = len(skeletons[0])
    if any(len(s) != n for s in skeletons) or n != N + K:
        raise ValueError("inconsistent skeleton shapes")
    rest = skeletons[1:]
    combos = math.factorial(n) ** len(rest)
    found: dict = {}
    if n <= EXACT_DOT_LIMIT and combos <= EXACT_COMBO_LIMIT:
        perms = list(itertools.permutations(range(n)))
        for choice in itertools.product(perms, repeat=len(rest)):
            dots = _merge(skeletons, [tuple(range(n))] + list(choice))
            tmpl = Template(N, K, dots)
            found.setdefault(tmpl.key(), tmpl)
    else:
        tmpl = _greedy(skeletons, N, K)
        found[tmpl.key()] = tmpl
    ranked = sorted(found.values(), key=lambda t: (t.edge_count(), t.key()))
    kept = [t for t in ranked if not _separates_entangled_cut(t, target)]
    return kept[:limit]


def _greedy(skeletons: Sequence[Skeleton], N: int, K: int) -> Template:
    from scipy.optimize import linear_sum_assignment

    n = len(skeletons[0])
    dots: list[list[tuple[int, EdgeColor]]] = [[e] for e in skeletons[0]]
    for sk in skeletons[1:]:
        cost = np.array([[0 if sk[i] in dots[g] else 1 for g in range(n)] for i in range(n)])
        rows, cols = linear_sum_assignment(cost)
        for i, g in zip(rows, cols):
            if sk[i] not in dots[g]:
                dots[g].append(sk[i])
    return Template(N, K, tuple(tuple(d) for d in dots))


def candidate_bigraph(skeletons: Sequence[Skeleton], N: int | None = None, K: int = 0,
                      target: LogicalState | None = None) -> SculptingBigraph:
    """Best-ranked candidate with uniform placeholder weights."""
    N = len(skeletons[0]) - K if N is None else N
    ranked = candidate_templates(skeletons, N, K, target, limit=1)
    if not ranked:
        raise ContractError("every dot identification separates an entangled cut of the target")
    return ranked[0].uniform_graph()


# -- step 3: weights ------------------------------------------------------------------

def embed_target(t: TargetSpec, K: int | None = None) -> FockState:
    """The target as a unit-norm Fock state: one boson per system mode, ancillas empty."""
    K = t.K if K is None else K
    basis = np.array(t.local_basis())
    N = t.N
    terms: dict = {}
    for digits, a in t.target.nonzero_terms(1e-15).items():
        for levels in itertools.product(range(2), repeat=N):
            c = a * np.prod([basis[d][s] for d, s in zip(digits, levels)])
            cfg = tuple((j, s, 1) for j, s in enumerate(levels))
            terms[cfg] = terms.get(cfg, 0j) + c
    return _build(N + K, 2, terms)


@dataclass
class _PathModel:
    """psi(weights) = sum_paths (prod of chosen edge weights) * fixed state vector."""

    choice: np.ndarray        # (paths, dots) edge index per dot
    vectors: np.ndarray       # (paths, configs)
    configs: list
    valid: np.ndarray         # bool mask over configs
    sizes: list[int]

    @classmethod
    def build(cls, tmpl: Template, initial: FockState) -> _PathModel:
        sizes = [len(d) for d in tmpl.dots]
        count = math.prod(sizes)
        if count > PATH_LIMIT:
            raise ResourceError(f"{count} collective paths exceed the search limit of {PATH_LIMIT}")
        choices = list(itertools.product(*(range(s) for s in sizes)))
        index: dict = {}
        rows = []
        for ch in choices:
            st = initial
            for d in reversed(range(len(sizes))):
                c, col = tmpl.dots[d][ch[d]]
                v = col.vector(2)
                st = annihilate(st, {(c, s): v[s].conjugate() for s in range(2) if v[s] != 0})
                if st.is_zero():
                    break
            row = {}
            for cfg, a in st.terms.items():
                row[index.setdefault(cfg, len(index))] = a
            rows.append(row)
        vec = np.zeros((len(choices), max(len(index), 1)), dtype=complex)
        for i, row in enumerate(rows):
            for k, a in row.items():
                vec[i, k] = a
        configs = sorted(index, key=index.get)
        valid = np.array([is_valid_config(c, tmpl.N, tmpl.K) for c in configs] or [True])
        return cls(np.array(choices, dtype=int).reshape(len(choices), len(sizes)), vec, configs, valid, sizes)

    def psi(self, amps: Sequence[np.ndarray]) -> np.ndarray:
        coeff = np.ones(len(self.choice), dtype=complex)
        for d, a in enumerate(amps):
            coeff = coeff * a[self.choice[:, d]]
        return coeff @ self.vectors


def _split(x: np.ndarray, sizes: Sequence[int]) -> list[np.ndarray]:
    n = sum(sizes)
    z = x[:n] + 1j * x[n:]
    out, k = [], 0
    for s in sizes:
        v = z[k:k + s]
        nv = np.linalg.norm(v)
        out.append(v / nv if nv > 0 else v)
        k += s
    return out


def _target_vector(model: _PathModel, t_state: FockState) -> np.ndarray:
    v = np.zeros(len(model.configs) or 1, dtype=complex)
    index = {c: i for i, c in enumerate(model.configs)}
    missing = 0.0
    for cfg, a in t_state.terms.items():
        if cfg in index:
            v[index[cfg]] = a
        else:
            missing += abs(a) ** 2
    return v, missing


def _residual_vector(x, model: _PathModel, tvec: np.ndarray) -> np.ndarray:
    psi = model.psi(_split(x, model.sizes))
    n = np.linalg.norm(psi)
    if n < 1e-300:
        return np.ones(2 * len(psi) + 1)
    r = (psi - np.vdot(tvec, psi) * tvec) / n
    # keep the optimizer away from the trivial zero of the final state, where the
    # relative residual can shrink without any real cancellation
    floor = FLOOR_WEIGHT * max(0.0, math.log(SUCCESS_FLOOR / n ** 2))
    return np.concatenate([r.real, r.imag, [floor]])


def _jacobian(x, model, tvec) -> np.ndarray:
    cols = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = FD_STEP
        cols.append((_residual_vector(x + e, model, tvec) - _residual_vector(x - e, model, tvec)) / (2 * FD_STEP))
    return np.stack(cols, axis=1)


def model_residual(model: _PathModel, amps: Sequence[np.ndarray]) -> float:
    """Bunched norm relative to the full final state, from the path expansion."""
    psi = model.psi(amps)
    n = np.linalg.norm(psi)
    if n == 0:
        return math.inf
    return float(np.linalg.norm(psi[~model.valid]) / n)


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    no_bunching: bool
    residual: float
    fidelity: float
    success: float
    classification: EntanglementClass | None
    error: str | None = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "no_bunching": self.no_bunching, "residual": self.residual,
                "fidelity": self.fidelity, "success": self.success,
                "classification": None if self.classification is None else self.classification.kind.value,
                "error": self.error}


def bunched_residual(final: FockState, N: int, K: int) -> float:
    """Norm of the bunched part relative to the whole final state."""
    total = final.norm()
    if total == 0:
        return math.inf
    _, bad = split_by_validity(final, N, K)
    return bad.norm() / total


def verify_candidate(g: SculptingBigraph, t: TargetSpec, tol: float = SOLVE_TOL) -> VerifyReport:
    """Apply the graph's operator directly and compare with the target."""
    try:
        op = to_sculpting_operator(g)
    except (NormalizationError, ValueError) as e:
        return VerifyReport(False, False, math.inf, 0.0, 0.0, None, f"normalization: {e}")
    final = apply_sculpting(op, maximally_symmetric_state(g.N, 2, [0] * g.K))
    residual = bunched_residual(final, g.N, g.K)
    good, _ = split_by_validity(final, g.N, g.K)
    if good.is_zero():
        return VerifyReport(False, residual == 0, residual, 0.0, 0.0, None, "final state has no valid terms")
    logical, success = to_logical_state(good, g.N, 2, t.local_basis(), g.K)
    fid = fidelity_up_to_phase(t.target, logical)
    nb = bool(check_no_bunching(final, g.N, g.K))
    ok = residual < tol and fid > 1 - tol and success >= MIN_SUCCESS
    return VerifyReport(ok, nb, residual, fid, success, classify(logical) if g.N >= 2 else None)


@dataclass(frozen=True, eq=False)
class SearchResult:
    status: str
    graph: SculptingBigraph | None
    residual: float
    fidelity: float
    success: float = 0.0
    candidate: int | None = None
    retries: int = 0
    start: int | None = None
    log: tuple[str, ...] = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {"status": self.status, "residual": self.residual, "fidelity": self.fidelity,
                "success": self.success, "candidate": self.candidate, "retries": self.retries,
                "start": self.start, "graph": None if self.graph is None else self.graph.to_json()}


def _canonical_phases(amps: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Rotate each dot so its largest weight is real and positive; drop float dust."""
    out = []
    for a in amps:
        k = int(np.argmax(np.abs(a) - 1e-9 * np.arange(len(a))))
        v = a * (abs(a[k]) / a[k])
        v = np.where(np.abs(v.real) < 1e-13, 0, v.real) + 1j * np.where(np.abs(v.imag) < 1e-13, 0, v.imag)
        out.append(v)
    return out


def solve_weights(g: SculptingBigraph | Template, t: TargetSpec, starts: int = DEFAULT_STARTS,
                  seed: int = 0, time_budget: float | None = None, tol: float = SOLVE_TOL) -> SearchResult:
    """Multistart least squares on per-dot complex weights.

    Start 0 uses the weights already on ``g``; the rest are seeded random draws.
    The objective is the component of the final state orthogonal to the target,
    relative to the state's norm, so it vanishes only when every non-PM path
    cancels and the PM sum is proportional to the target.
    """
    tmpl = g if isinstance(g, Template) else Template.from_graph(g)
    if tmpl.N != t.N:
        raise ValueError(f"graph has N={tmpl.N}, target has N={t.N}")
    initial = maximally_symmetric_state(tmpl.N, 2, [0] * tmpl.K)
    model = _PathModel.build(tmpl, initial)
    tvec, missing = _target_vector(model, embed_target(t, tmpl.K))
    sizes = model.sizes
    n = sum(sizes)
    rng = np.random.default_rng(seed)
    x0s = []
    if isinstance(g, SculptingBigraph):
        z0 = np.concatenate([[e.amplitude for e in d.edges] for d in g.expanded().dots])
    else:
        z0 = np.ones(n, dtype=complex)
    x0s.append(np.concatenate([z0.real, z0.imag]))
    for _ in range(starts - 1):
        x0s.append(rng.normal(size=2 * n))
    t0 = time.monotonic()
    best = None
    exhausted = False
    for k, x0 in enumerate(x0s):
        if time_budget is not None and time.monotonic() - t0 > time_budget:
            exhausted = True
            break
        sol = least_squares(_residual_vector, x0, jac=_jacobian, args=(model, tvec), method="trf",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
        cost = float(np.linalg.norm(sol.fun))
        key = (round(cost, 14), k)
        if best is None or key < best[0]:
            best = (key, sol.x, k)
        if cost < tol * 1e-2 and missing == 0:
            break
    if best is None:
        return SearchResult("BUDGET_EXHAUSTED", None, math.inf, 0.0)
    amps = _canonical_phases(_split(best[1], sizes))
    graph = tmpl.graph(amps)
    report = verify_candidate(graph, t, tol)
    if report.ok:
        status = "SOLVED"
    else:
        status = "BUDGET_EXHAUSTED" if exhausted else "FAILED"
    return SearchResult(status, graph, report.residual, report.fidelity, report.success, start=best[2])


def search(t: TargetSpec, starts: int = DEFAULT_STARTS, seed: int = 0, max_candidates: int = 4,
           max_retries: int = MAX_RETRIES, time_budget: float | None = 30.0,
           color_search: bool = False, tol: float = SOLVE_TOL) -> SearchResult:
    """Skeletons, ranked candidate graphs, weight solve; add ancilla edges on failure."""
    skeletons = pms_from_target(t)
    cands = candidate_templates(skeletons, t.N, t.K, t.target, limit=max_candidates)
    if color_search:
        cands = _with_color_swaps(cands)
    t0 = time.monotonic()
    best: SearchResult | None = None
    log = []

    def remaining():
        return None if time_budget is None else max(0.0, time_budget - (time.monotonic() - t0))

    for retry in range(max_retries + 1):
        for ci, tmpl in enumerate(cands):
            if remaining() == 0.0:
                return _finish(best, "BUDGET_EXHAUSTED", log)
            try:
                res = solve_weights(tmpl, t, starts, seed, remaining(), tol)
            except ResourceError as e:
                log.append(f"candidate {ci} retry {retry}: {e}")
                continue
            res = SearchResult(res.status, res.graph, res.residual, res.fidelity, res.success,
                               ci, retry, res.start)
            log.append(f"candidate {ci} retry {retry}: {res.status} residual={res.residual:.3g}")
            if res.status == "SOLVED":
                return _finish(res, "SOLVED", log)
            if best is None or (res.residual, 1 - res.fidelity) < (best.residual, 1 - best.fidelity):
                best = res
        cands = [c.with_extra_ancilla() for c in cands[:1]]
    return _finish(best, "FAILED", log)


def _finish(res: SearchResult | None, status: str, log) -> SearchResult:
    if res is None:
        return SearchResult(status, None, math.inf, 0.0, log=tuple(log))
    return SearchResult(status, res.graph, res.residual, res.fidelity, res.success, res.candidate,
                        res.retries, res.start, tuple(log))


def _with_color_swaps(cands: Sequence[Template]) -> list[Template]:
    swap = {RED: BLUE, BLUE: RED}
    out = []
    for tmpl in cands:
        out.append(tmpl)
        for i, d in enumerate(tmpl.dots):
            if any(col in swap for _, col in d):
                nd = tuple((c, swap.get(col, col)) for c, col in d)
                out.append(Template(tmpl.N, tmpl.K, tmpl.dots[:i] + (nd,) + tmpl.dots[i + 1:]))
    return out
