"""Polarization-encoded linear optics: half-wave plates, polarizing beam splitters, heralding.

Photons live on string-labelled paths with internal level 0 = H and 1 = V.
Every element is a linear map on creation operators, so states are pushed
through configuration by configuration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .entanglement import LogicalState, fidelity_up_to_phase, to_logical_state
from .errors import ContractError
from .fock import FockState, _build, _fmt_complex, create, vacuum

H, V = 0, 1
POL = {"H": H, "V": V}
POL_NAME = {H: "H", V: "V"}

Mode = tuple[str, int]


@dataclass(frozen=True)
class OpticalState:
    paths: tuple[str, ...]
    fock: FockState

    def __post_init__(self):
        paths = tuple(self.paths)
        if len(set(paths)) != len(paths):
            raise ValueError(f"duplicate path labels in {paths}")
        if self.fock.dims != (len(paths), 2):
            raise ValueError(f"Fock dims {self.fock.dims} do not match {len(paths)} paths")
        object.__setattr__(self, "paths", paths)

    def index(self, path: str) -> int:
        try:
            return self.paths.index(path)
        except ValueError:
            raise KeyError(f"unknown path {path!r}; have {list(self.paths)}") from None

    def photon_count(self) -> int | None:
        return self.fock.boson_count()

    def norm_squared(self) -> float:
        return self.fock.norm_squared()

    def terms(self) -> dict[tuple[tuple[str, str, int], ...], complex]:
        """Amplitudes keyed by sorted ``(path, "H"|"V", count)`` triples."""
        return {tuple(sorted((self.paths[j], POL_NAME[s], n) for j, s, n in cfg)): a
                for cfg, a in self.fock.items()}

    def max_abs_diff(self, other: OpticalState) -> float:
        a, b = self.terms(), other.terms()
        return max((abs(a.get(k, 0) - b.get(k, 0)) for k in set(a) | set(b)), default=0.0)

    def allclose(self, other: OpticalState, tol: float = 1e-9) -> bool:
        return self.max_abs_diff(other) <= tol

    def to_braket(self, digits: int = 6) -> str:
        if self.fock.is_zero():
            return "0"
        parts = []
        for key, a in sorted(self.terms().items()):
            occ = " ".join(f"{p}{s}^{n}" if n > 1 else f"{p}{s}" for p, s, n in key)
            parts.append(f"({_fmt_complex(a, digits)})|{occ or 'vac'}>")
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {"paths": list(self.paths), "state": self.fock.to_json()}


def optical_state(paths: Sequence[str], occupation: Mapping[Mode | tuple[str, str], int]) -> OpticalState:
    """Fock basis state; keys are ``(path, H|V)`` with H/V given as 0/1 or "H"/"V"."""
    paths = tuple(paths)
    st = vacuum(len(paths), 2)
    norm = 1.0
    for (p, s), n in occupation.items():
        s = POL[s] if isinstance(s, str) else s
        for _ in range(n):
            st = create(st, {(paths.index(p), s): 1})
        norm *= math.factorial(n)
    return OpticalState(paths, st.scaled(1 / math.sqrt(norm)))


def creation_product(paths: Sequence[str], forms: Sequence[Mapping[tuple[str, str], complex]],
                     scale: complex = 1.0) -> OpticalState:
    """``scale * prod_k (sum c a†_{path,pol}) |vac>`` from linear forms keyed by ``(path, "H"|"V")``."""
    paths = tuple(paths)
    st = vacuum(len(paths), 2)
    for form in reversed(forms):
        st = create(st, {(paths.index(p), POL[s]): c for (p, s), c in form.items()})
    return OpticalState(paths, st.scaled(scale))


def add_states(a: OpticalState, b: OpticalState) -> OpticalState:
    if a.paths != b.paths:
        raise ValueError("states live on different path sets")
    return OpticalState(a.paths, a.fock + b.fock)


def transform_modes(s: OpticalState, mapping: Mapping[Mode, Mapping[Mode, complex]],
                    new_paths: Sequence[str] | None = None) -> OpticalState:
    """Substitute ``a†_m -> sum_k mapping[m][k] a†_k`` for every mode in ``mapping``.

    Modes missing from ``mapping`` map to themselves. ``new_paths`` fixes the output
    path list (default: unchanged).
    """
    out_paths = tuple(s.paths if new_paths is None else new_paths)
    out_index = {p: i for i, p in enumerate(out_paths)}
    images: dict[tuple[int, int], dict[tuple[int, int], complex]] = {}
    for j, p in enumerate(s.paths):
        for pol in (H, V):
            target = mapping.get((p, pol), {(p, pol): 1})
            try:
                images[(j, pol)] = {(out_index[q], t): c for (q, t), c in target.items() if c != 0}
            except KeyError as e:
                raise KeyError(f"mode image on path {e.args[0]!r} missing from output paths") from None
    terms: dict = {}
    for cfg, amp in s.fock.terms.items():
        st = vacuum(len(out_paths), 2)
        denom = 1.0
        for j, pol, n in cfg:
            for _ in range(n):
                st = create(st, images[(j, pol)])
            denom *= math.factorial(n)
        scale = amp / math.sqrt(denom)
        for c, a in st.terms.items():
            terms[c] = terms.get(c, 0j) + a * scale
    return OpticalState(out_paths, _build(len(out_paths), 2, terms))


def apply_hwp(s: OpticalState, path: str) -> OpticalState:
    """a†_H -> (a†_H + a†_V)/sqrt2, a†_V -> (a†_H - a†_V)/sqrt2 on one path."""
    s.index(path)
    r = 1 / math.sqrt(2)
    return transform_modes(s, {(path, H): {(path, H): r, (path, V): r},
                               (path, V): {(path, H): r, (path, V): -r}})


def apply_pbs(s: OpticalState, in1: str | None, in2: str | None, out1: str, out2: str) -> OpticalState:
    """H of in1 -> out1, V of in1 -> out2, H of in2 -> out2, V of in2 -> out1.

    Either input may be ``None`` (an empty port). Input paths disappear unless
    reused as outputs; outputs that are new paths are appended.
    """
    ins = [p for p in (in1, in2) if p is not None]
    if not ins:
        raise ValueError("a PBS needs at least one input path")
    if len(set(ins)) != len(ins) or out1 == out2:
        raise ValueError(f"path collision in PBS {in1!r},{in2!r} -> {out1!r},{out2!r}")
    for p in ins:
        s.index(p)
    for q in (out1, out2):
        if q in s.paths and q not in ins:
            raise ValueError(f"PBS output {q!r} collides with an existing path")
    kept = [p for p in s.paths if p not in ins]
    new_paths = tuple(kept + [q for q in (out1, out2) if q not in kept])
    mapping: dict[Mode, dict[Mode, complex]] = {}
    if in1 is not None:
        mapping[(in1, H)] = {(out1, H): 1}
        mapping[(in1, V)] = {(out2, V): 1}
    if in2 is not None:
        mapping[(in2, H)] = {(out2, H): 1}
        mapping[(in2, V)] = {(out1, V): 1}
    # the input paths are empty after the map; keep their labels only if reused
    return transform_modes(s, mapping, new_paths)


def swap_paths(s: OpticalState, a: str, b: str) -> OpticalState:
    ia, ib = s.index(a), s.index(b)
    paths = list(s.paths)
    paths[ia], paths[ib] = paths[ib], paths[ia]
    return OpticalState(tuple(paths), s.fock)


# -- heralding ------------------------------------------------------------------------

@dataclass(frozen=True)
class DetectorOutcome:
    count: int
    polarization: str | None = None

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("photon counts must be >= 0")
        if self.polarization not in (None, "H", "V"):
            raise ValueError(f"polarization must be H, V or None, got {self.polarization!r}")


HeraldPattern = Mapping[str, DetectorOutcome]


def _matches(cfg, idx: dict[int, DetectorOutcome]) -> bool:
    seen = {j: [0, 0] for j in idx}
    for j, pol, n in cfg:
        if j in seen:
            seen[j][pol] += n
    for j, want in idx.items():
        h, v = seen[j]
        if h + v != want.count:
            return False
        if want.count and want.polarization is not None:
            if (h if want.polarization == "V" else v):
                return False
    return True


def herald(s: OpticalState, pattern: HeraldPattern) -> tuple[OpticalState, float]:
    """Project detector paths onto the requested outcome and drop them.

    With a polarization given, all detected photons must carry it. The remainder
    is unnormalized; its squared norm is the branch probability.
    """
    idx = {s.index(p): DetectorOutcome(*o) if isinstance(o, tuple) else o for p, o in pattern.items()}
    keep = [j for j in range(len(s.paths)) if j not in idx]
    if not keep:
        raise ValueError("heralding every path leaves nothing to return")
    remap = {j: k for k, j in enumerate(keep)}
    terms: dict = {}
    for cfg, a in s.fock.terms.items():
        if not _matches(cfg, idx):
            continue
        rest = tuple((remap[j], pol, n) for j, pol, n in cfg if j in remap)
        terms[rest] = terms.get(rest, 0j) + a
    out = OpticalState(tuple(s.paths[j] for j in keep), _build(len(keep), 2, terms))
    return out, out.norm_squared()


# -- circuits -------------------------------------------------------------------------

@dataclass(frozen=True)
class Element:
    op: str
    args: tuple = ()
    step: int | None = None

    def to_json(self) -> dict:
        d: dict = {"op": self.op}
        if self.op == "hwp":
            d["path"] = self.args[0]
        elif self.op == "pbs":
            d["in"] = [self.args[0], self.args[1]]
            d["out"] = [self.args[2], self.args[3]]
        elif self.op == "swap":
            d["paths"] = list(self.args)
        elif self.op == "herald":
            d["detectors"] = list(self.args)
        if self.step is not None:
            d["step"] = self.step
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> Element:
        op = d["op"]
        if op == "hwp":
            args = (d["path"],)
        elif op == "pbs":
            args = (*d["in"], *d["out"])
        elif op == "swap":
            args = tuple(d["paths"])
        elif op == "herald":
            args = tuple(d["detectors"])
        else:
            raise ValueError(f"unknown element {op!r}")
        return cls(op, args, d.get("step"))


@dataclass
class Circuit:
    inputs: tuple[str, ...]
    elements: list[Element] = field(default_factory=list)
    _subtractors: set = field(default_factory=set, repr=False)

    def hwp(self, path: str, step: int | None = None) -> Circuit:
        self.elements.append(Element("hwp", (path,), step))
        return self

    def pbs(self, in1, in2, out1, out2, step: int | None = None) -> Circuit:
        self.elements.append(Element("pbs", (in1, in2, out1, out2), step))
        return self

    def swap(self, a: str, b: str, step: int | None = None) -> Circuit:
        self.elements.append(Element("swap", (a, b), step))
        return self

    def detectors(self, *paths: str, step: int | None = None) -> Circuit:
        self.elements.append(Element("herald", tuple(paths), step))
        return self

    def detector_groups(self) -> list[tuple[str, ...]]:
        return [e.args for e in self.elements if e.op == "herald"]

    def to_json(self) -> dict:
        return {"inputs": list(self.inputs), "elements": [e.to_json() for e in self.elements]}

    @classmethod
    def from_json(cls, d: Mapping) -> Circuit:
        return cls(tuple(d["inputs"]), [Element.from_json(e) for e in d["elements"]])


def apply_element(s: OpticalState, e: Element) -> OpticalState:
    if e.op == "hwp":
        return apply_hwp(s, e.args[0])
    if e.op == "pbs":
        return apply_pbs(s, *e.args)
    if e.op == "swap":
        return swap_paths(s, *e.args)
    if e.op == "herald":
        return s  # detectors only mark paths; projection happens in herald()
    raise ValueError(f"unknown element {e.op!r}")


def run_circuit(c: Circuit, s: OpticalState) -> tuple[OpticalState, dict[int, OpticalState]]:
    """Final state plus a snapshot after the last element of every numbered step."""
    snaps: dict[int, OpticalState] = {}
    for e in c.elements:
        s = apply_element(s, e)
        if e.step is not None:
            snaps[e.step] = s
    return s, snaps


def mode_splitter(c: Circuit, path: str, out1: str, out2: str, step_split: int | None = None,
                  step_rotate: int | None = None) -> Circuit:
    """HWP then PBS on one path, followed by HWPs on both outputs."""
    c.hwp(path, step_split).pbs(path, None, out1, out2, step_split)
    return c.hwp(out1, step_rotate).hwp(out2, step_rotate)


def heralded_subtractor(c: Circuit, path_a: str, path_b: str, step_mix: int | None = None,
                        step_detect: int | None = None, leg_hwp: bool = True) -> Circuit:
    """PBS mixing ``a`` and ``b``, HWP on ``b``, PBS splitting ``b`` onto two detectors.

    Detectors are named ``b+"1"`` (H port) and ``b+"2"`` (V port). Without the leg
    HWP the fragment heralds in the H/V basis of ``b`` directly.
    """
    key = (path_a, path_b)
    if key in c._subtractors:
        raise ValueError(f"a subtractor is already attached to paths {key}")
    c._subtractors.add(key)
    c.pbs(path_a, path_b, path_a, path_b, step_mix)
    if leg_hwp:
        c.hwp(path_b, step_detect)
    d1, d2 = path_b + "1", path_b + "2"
    c.pbs(path_b, None, d1, d2, step_detect)
    return c.detectors(d1, d2, step=step_detect)


def bell_circuit() -> Circuit:
    """Two mode splitters, a crossing of the inner legs, then two subtractors.

    The subtractor wiring follows the two-dot Bell graph: each subtractor mixes
    one leg of input 1 with one leg of input 2. Elements carry step numbers 1..5.
    """
    c = Circuit(("1", "2"))
    c.hwp("1", 1).hwp("2", 1)
    c.pbs("1", None, "11", "12", 2).pbs("2", None, "21", "22", 2)
    c.swap("12", "22", 3)
    for p in ("11", "12", "21", "22"):
        c.hwp(p, 3)
    heralded_subtractor(c, "11", "12", step_mix=4, step_detect=5)
    heralded_subtractor(c, "21", "22", step_mix=4, step_detect=5)
    # the two subtractors act on disjoint paths, so grouping their elements by step is exact
    c.elements.sort(key=lambda e: e.step or 0)
    return c


def single_mode_subtractor_circuit() -> Circuit:
    """One subtractor with both wires on the two legs of a single input path."""
    c = Circuit(("1",))
    c.hwp("1", 1).pbs("1", None, "11", "12", 2).hwp("11", 3).hwp("12", 3)
    return heralded_subtractor(c, "11", "12", step_mix=3, step_detect=3, leg_hwp=False)


def bell_input() -> OpticalState:
    return optical_state(("1", "2"), {("1", H): 1, ("1", V): 1, ("2", H): 1, ("2", V): 1})


@dataclass(frozen=True)
class HeraldBranch:
    pattern: dict[str, tuple[int, str | None]]
    state: OpticalState
    probability: float
    logical: LogicalState | None
    target_sign: int
    fidelity: float

    def to_json(self) -> dict:
        return {"pattern": {p: {"count": n, "pol": pol} for p, (n, pol) in self.pattern.items()},
                "probability": self.probability,
                "target": "(|HH>+|VV>)/sqrt2" if self.target_sign > 0 else "(|HH>-|VV>)/sqrt2",
                "fidelity": self.fidelity,
                "logical_state": None if self.logical is None else self.logical.to_json(),
                "state": self.state.to_json()}


@dataclass(frozen=True)
class BellCircuitReport:
    circuit: Circuit
    snapshots: dict[int, OpticalState]
    branches: list[HeraldBranch]
    total_probability: float

    def to_json(self) -> dict:
        return {"circuit": self.circuit.to_json(),
                "snapshots": {str(k): v.to_json() for k, v in sorted(self.snapshots.items())},
                "branches": [b.to_json() for b in self.branches],
                "total_probability": self.total_probability}


def bell_target(sign: int) -> LogicalState:
    return LogicalState.from_terms(2, 2, {"00": 1, "11": sign})


def _single_clicks(group: Sequence[str]):
    """One photon in exactly one detector of the group, with either polarization."""
    for hit in group:
        for pol in ("H", "V"):
            yield {p: ((1, pol) if p == hit else (0, None)) for p in group}


def run_bell_circuit() -> BellCircuitReport:
    c = bell_circuit()
    final, snaps = run_circuit(c, bell_input())
    groups = c.detector_groups()
    outputs = [p for p in final.paths if not any(p in g for g in groups)]
    comp = (tuple(np.eye(2)[0]), tuple(np.eye(2)[1]))
    branches = []
    for combo in itertools.product(*(_single_clicks(g) for g in groups)):
        pattern = {p: o for part in combo for p, o in part.items()}
        rest, prob = herald(final, {p: DetectorOutcome(*o) for p, o in pattern.items()})
        if prob < 1e-15:
            continue
        rest = OpticalState(rest.paths, rest.fock)
        order = [rest.index(p) for p in outputs]
        if order != sorted(order):
            raise ContractError("output paths out of order")
        pols = [pol for part in combo for p, (n, pol) in part.items() if n]
        # same detector polarization on both heralds -> |HH>+|VV>, opposite -> |HH>-|VV>
        sign = 1 if len(set(pols)) == 1 else -1
        try:
            logical, _ = to_logical_state(rest.fock, len(outputs), 2, comp, 0)
            fid = fidelity_up_to_phase(bell_target(sign), logical)
        except ContractError:
            logical, fid = None, 0.0
        branches.append(HeraldBranch(pattern, rest, prob, logical, sign, fid))
    total = float(sum(b.probability for b in branches))
    return BellCircuitReport(c, snaps, branches, total)
