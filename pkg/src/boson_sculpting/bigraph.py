"""Sculpting bigraphs: circles are spatial modes, dots are subtraction operators.

Circles are numbered from 0; indices ``0..N-1`` are system modes and
``N..N+K-1`` are ancillas (each prepared with one level-0 boson). A dot with
multiplicity ``m`` stands for ``m`` identical subtraction operators.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .engine import (
    SculptingOperator,
    SubtractionOperator,
    SubtractionTerm,
    apply_path,
    CollectivePath,
)
from .errors import ContractError, NormalizationError
from .fock import NORM_TOL, FockState, computational_internal, fourier_internal, sum_states

_NAMES = {("fourier", 0): "RED", ("fourier", 1): "BLUE", ("level", 0): "BLACK", ("level", 1): "DOTTED"}


@dataclass(frozen=True, order=True)
class EdgeColor:
    """Internal state carried by an edge: a computational level or a Fourier index."""

    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in ("fourier", "level"):
            raise ValueError(f"unknown color kind {self.kind!r}")
        if self.index < 0:
            raise ValueError("color index must be >= 0")

    def vector(self, d: int) -> np.ndarray:
        if self.kind == "fourier":
            return fourier_internal(d, self.index)
        return computational_internal(d, self.index)

    def name(self, d: int = 2) -> str:
        if d == 2 and (self.kind, self.index) in _NAMES:
            return _NAMES[(self.kind, self.index)]
        return f"{self.kind}:{self.index}"

    def to_json(self, d: int = 2):
        if d == 2:
            return _NAMES[(self.kind, self.index)]
        return {self.kind: self.index}

    @classmethod
    def from_json(cls, data) -> EdgeColor:
        if isinstance(data, str):
            for key, name in _NAMES.items():
                if name == data.upper():
                    return cls(*key)
            raise ValueError(f"unknown color name {data!r}")
        (kind, index), = data.items()
        return cls(kind, int(index))


RED = EdgeColor("fourier", 0)
BLUE = EdgeColor("fourier", 1)
BLACK = EdgeColor("level", 0)
DOTTED = EdgeColor("level", 1)


def identify_color(v: Sequence[complex], d: int) -> tuple[EdgeColor, complex]:
    """Find the color whose vector equals ``v`` up to a phase; return (color, phase)."""
    v = np.asarray(v, dtype=complex)
    for kind in ("level", "fourier"):
        for k in range(d):
            c = EdgeColor(kind, k)
            overlap = np.vdot(c.vector(d), v)
            if abs(abs(overlap) - 1) < 1e-9:
                return c, overlap
    raise ValueError(f"internal vector {v} is not a computational or Fourier basis state")


@dataclass(frozen=True)
class Edge:
    circle: int
    color: EdgeColor
    amplitude: complex

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    def key(self):
        return (self.circle, self.color, round(self.amplitude.real, 12) + 0.0, round(self.amplitude.imag, 12) + 0.0)


@dataclass(frozen=True)
class Dot:
    edges: tuple[Edge, ...]
    mult: int = 1

    def key(self):
        return (tuple(sorted(e.key() for e in self.edges)), self.mult)


def _canonical_dots(dots: Sequence[Dot]) -> tuple[Dot, ...]:
    normed = [Dot(tuple(sorted(d.edges, key=Edge.key)), d.mult) for d in dots]
    return tuple(sorted(normed, key=Dot.key))


@dataclass(frozen=True)
class SculptingBigraph:
    N: int
    K: int
    d: int
    dots: tuple[Dot, ...]

    def __post_init__(self):
        if self.N < 0 or self.K < 0 or self.d < 2:
            raise ValueError(f"bad graph dims N={self.N} K={self.K} d={self.d}")
        for dot in self.dots:
            if not dot.edges:
                raise ValueError("every dot needs at least one edge")
            if dot.mult < 1:
                raise ValueError("dot multiplicity must be >= 1")
            seen = set()
            for e in dot.edges:
                if not 0 <= e.circle < self.N + self.K:
                    raise ValueError(f"edge to circle {e.circle} outside N+K={self.N + self.K}")
                if e.color.index >= self.d:
                    raise ValueError(f"color {e.color} invalid for d={self.d}")
                if (e.circle, e.color) in seen:
                    raise ValueError(f"duplicate edge (circle {e.circle}, {e.color.name(self.d)}) on one dot")
                seen.add((e.circle, e.color))
        object.__setattr__(self, "dots", _canonical_dots(self.dots))

    @property
    def circles(self) -> int:
        return self.N + self.K

    def edge_count(self) -> int:
        return sum(len(d.edges) * d.mult for d in self.dots)

    def dot_count(self) -> int:
        return sum(d.mult for d in self.dots)

    def expanded(self) -> SculptingBigraph:
        dots = [Dot(d.edges) for d in self.dots for _ in range(d.mult)]
        return SculptingBigraph(self.N, self.K, self.d, tuple(dots))

    def check_normalization(self) -> None:
        for i, dot in enumerate(self.dots):
            total = sum(abs(e.amplitude) ** 2 for e in dot.edges)
            if abs(total - 1) > NORM_TOL:
                raise NormalizationError(f"dot {i} edge amplitudes have squared norm {total:.12g}")

    def incident(self, circle: int) -> list[tuple[int, Edge]]:
        return [(i, e) for i, dot in enumerate(self.dots) for e in dot.edges if e.circle == circle
                for _ in range(dot.mult)]

    def to_json(self) -> dict:
        return {
            "N": self.N, "K": self.K, "d": self.d,
            "dots": [{"mult": dot.mult,
                      "edges": [{"circle": e.circle, "re": e.amplitude.real, "im": e.amplitude.imag,
                                 "color": e.color.to_json(self.d)} for e in dot.edges]}
                     for dot in self.dots],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> SculptingBigraph:
        dots = []
        for dot in data["dots"]:
            edges = tuple(Edge(int(e["circle"]), EdgeColor.from_json(e["color"]),
                               complex(e["re"], e.get("im", 0.0))) for e in dot["edges"])
            dots.append(Dot(edges, int(dot.get("mult", 1))))
        return cls(int(data["N"]), int(data.get("K", 0)), int(data.get("d", 2)), tuple(dots))


def to_sculpting_operator(g: SculptingBigraph) -> SculptingOperator:
    """One factor per dot copy; each edge becomes ``amplitude * a_{circle, color}``."""
    g.check_normalization()
    factors = []
    for dot in g.dots:
        f = SubtractionOperator(tuple(SubtractionTerm(e.circle, e.amplitude, tuple(e.color.vector(g.d)))
                                      for e in dot.edges))
        factors.extend([f] * dot.mult)
    return SculptingOperator(tuple(factors), g.N, g.K, g.d)


def from_sculpting_operator(op: SculptingOperator) -> SculptingBigraph:
    """Inverse of :func:`to_sculpting_operator`; identical factors merge into one dot."""
    dots: list[Dot] = []
    for f in op.factors:
        edges = []
        for t in f.terms:
            color, phase = identify_color(t.internal, op.d)
            # a_{j, e^{i phi} c} = e^{-i phi} a_{j, c}
            edges.append(Edge(t.spatial, color, t.amplitude * phase.conjugate() / abs(phase)))
        dots.append(Dot(tuple(edges)))
    counts = Counter(d.key() for d in _canonical_dots(dots))
    merged = {}
    for dot in _canonical_dots(dots):
        merged.setdefault(dot.key(), Dot(dot.edges, counts[dot.key()]))
    return SculptingBigraph(op.N, op.K, op.d, tuple(merged.values()))


# -- perfect matchings --------------------------------------------------------------

@dataclass(frozen=True)
class PerfectMatching:
    """``choice[i]`` is the edge index used by expanded dot ``i``."""

    choice: tuple[int, ...]
    edges: tuple[Edge, ...]

    def coefficient(self) -> complex:
        return math.prod((e.amplitude for e in self.edges), start=1 + 0j)


def circle_requirements(g: SculptingBigraph) -> list[int]:
    """Times each circle must be hit: once per system mode, once per single-boson ancilla."""
    return [1] * (g.N + g.K)


def enumerate_perfect_matchings(g: SculptingBigraph, required: Sequence[int] | None = None) -> list[PerfectMatching]:
    """All edge sets using one edge per dot and hitting circle j exactly required[j] times."""
    need = list(circle_requirements(g) if required is None else required)
    dots = g.expanded().dots
    if len(dots) != sum(need):
        return []
    found: list[PerfectMatching] = []
    remaining = list(need)
    chosen: list[int] = []

    def backtrack(i: int) -> None:
        if i == len(dots):
            if not any(remaining):
                found.append(PerfectMatching(tuple(chosen), tuple(dots[k].edges[c] for k, c in enumerate(chosen))))
            return
        for ei, e in enumerate(dots[i].edges):
            if remaining[e.circle] > 0:
                remaining[e.circle] -= 1
                chosen.append(ei)
                backtrack(i + 1)
                chosen.pop()
                remaining[e.circle] += 1

    backtrack(0)
    return found


@dataclass(frozen=True)
class EpmReport:
    epm: bool
    offending: dict[int, str]

    def __bool__(self) -> bool:
        return self.epm


def is_epm(g: SculptingBigraph) -> EpmReport:
    """Per-circle edge pattern must be {one RED, one BLUE}, all BLACK, or all DOTTED."""
    if g.d != 2:
        raise ContractError("the EPM pattern is defined for qubit graphs (d=2) only")
    bad: dict[int, str] = {}
    for c in range(g.circles):
        colors = Counter(e.color for _, e in g.incident(c))
        if not colors:
            bad[c] = "no incident edges"
        elif colors == Counter({RED: 1, BLUE: 1}):
            continue
        elif set(colors) in ({BLACK}, {DOTTED}):
            continue
        else:
            pattern = ", ".join(f"{n}x{col.name()}" for col, n in sorted(colors.items()))
            bad[c] = f"edge pattern {{{pattern}}} is not RED+BLUE, all-BLACK or all-DOTTED"
    return EpmReport(not bad, bad)


def _pm_path(pm: PerfectMatching, d: int) -> CollectivePath:
    return CollectivePath(pm.choice, pm.coefficient(),
                          tuple((e.circle, tuple(e.color.vector(d))) for e in pm.edges))


def pm_contribution(g: SculptingBigraph, initial: FockState) -> FockState:
    """Sum over perfect matchings of the matched annihilations applied to ``initial``."""
    if initial.dims != (g.circles, g.d):
        raise ValueError(f"initial state dims {initial.dims} do not match graph {(g.circles, g.d)}")
    return sum_states((apply_path(_pm_path(pm, g.d), initial) for pm in enumerate_perfect_matchings(g)),
                      initial.spatial, initial.internal)


def pm_sum_state(g: SculptingBigraph, initial: FockState) -> FockState:
    """Final state predicted from the perfect matchings alone (EPM graphs only)."""
    report = is_epm(g)
    if not report:
        raise ContractError(f"graph is not EPM: {report.offending}")
    return pm_contribution(g, initial)


def permute_circle_labels(g: SculptingBigraph, sigma: Sequence[int] | Mapping[int, int]) -> SculptingBigraph:
    """Relabel system circle ``i`` as ``sigma[i]``; ancillas must stay fixed."""
    mapping = dict(sigma) if isinstance(sigma, Mapping) else dict(enumerate(sigma))
    for k, v in mapping.items():
        if k >= g.N or v >= g.N or k < 0 or v < 0:
            raise ValueError(f"permutation touches non-system circle ({k} -> {v})")
    full = {i: mapping.get(i, i) for i in range(g.N)}
    if sorted(full.values()) != list(range(g.N)):
        raise ValueError(f"{sigma!r} is not a permutation of the system circles")
    dots = tuple(Dot(tuple(Edge(full.get(e.circle, e.circle), e.color, e.amplitude) for e in dot.edges), dot.mult)
                 for dot in g.dots)
    return SculptingBigraph(g.N, g.K, g.d, dots)


# -- DOT export -------------------------------------------------------------------

_DOT_STYLE = {RED: 'color="red"', BLUE: 'color="blue"', BLACK: 'color="black"', DOTTED: 'color="black", style="dashed"'}


def _edge_attrs(color: EdgeColor, d: int) -> str:
    if d == 2:
        return _DOT_STYLE[color]
    hue = {"fourier": "red" if color.index == 0 else "blue"}.get(color.kind, "black")
    style = ', style="dashed"' if color.kind == "level" and color.index > 0 else ""
    return f'color="{hue}"{style}, tooltip="{color.name(d)}"'


def circle_label(g: SculptingBigraph, c: int) -> str:
    if c < g.N:
        return str(c + 1)
    k = c - g.N
    return "A" if g.K == 1 else chr(ord("A") + k) if k < 26 else f"A{k}"


def export_dot(g: SculptingBigraph, directed: bool = False) -> str:
    """Graphviz text. Directed mode adds the creation dots of the symmetric initial state."""
    head, arrow = ("digraph", "->") if directed else ("graph", "--")
    lines = [f"{head} sculpting {{"]
    if not g.circles and not g.dots:
        lines.append("}")
        return "\n".join(lines) + "\n"
    lines.append("  rankdir=LR;")
    if directed:
        for c in range(g.circles):
            levels = range(g.d) if c < g.N else (0,)
            for s in levels:
                style = ', style="dashed"' if s else ""
                lines.append(f'  u{c}_{s} [shape=point];')
                lines.append(f'  u{c}_{s} {arrow} c{c} [color="black"{style}];')
    for c in range(g.circles):
        lines.append(f'  c{c} [shape=circle, label="{circle_label(g, c)}"];')
    k = 0
    for dot in g.dots:
        for copy in range(dot.mult):
            lines.append(f"  v{k} [shape=point];")
            for e in dot.edges:
                ends = f"c{e.circle} {arrow} v{k}"
                lines.append(f'  {ends} [{_edge_attrs(e.color, g.d)}, label="{_fmt_amp(e.amplitude)}"];')
            k += 1
    lines.append("}")
    return "\n".join(lines) + "\n"


def _fmt_amp(z: complex) -> str:
    if abs(z.imag) < 1e-12:
        return f"{z.real:.4g}"
    return f"{z.real:.4g}{z.imag:+.4g}i"
