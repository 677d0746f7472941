"""Compositional ZX string-diagram IR.

Diagrams are trees over generators (spiders, cups/caps, Hadamard, swaps,
scalars) combined with sequential (`Seq`) and parallel (`Par`) composition.
Wire 0 is the most significant qubit everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .syntax import Basis, Phase, ZetaError


class DiagramError(ZetaError):
    pass


class ArityError(DiagramError):
    pass


@dataclass(frozen=True)
class Diagram:
    pass


@dataclass(frozen=True)
class Id(Diagram):
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise DiagramError("negative wire count")


@dataclass(frozen=True)
class Spider(Diagram):
    basis: Basis
    phase: Phase
    m: int  # inputs
    n: int  # outputs

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise DiagramError("negative spider arity")


@dataclass(frozen=True)
class Had(Diagram):
    pass


@dataclass(frozen=True)
class Swap(Diagram):
    pass


@dataclass(frozen=True)
class Cup(Diagram):
    pass


@dataclass(frozen=True)
class Cap(Diagram):
    pass


@dataclass(frozen=True)
class Scalar(Diagram):
    value: complex


@dataclass(frozen=True)
class Seq(Diagram):
    first: Diagram
    second: Diagram


@dataclass(frozen=True)
class Par(Diagram):
    top: Diagram
    bottom: Diagram


@dataclass(frozen=True)
class WireArity:
    inputs: int
    outputs: int


def arity(d: Diagram) -> WireArity:
    """Wire arity by structural recursion; rejects ill-formed Seq."""
    if isinstance(d, Id):
        return WireArity(d.n, d.n)
    if isinstance(d, Spider):
        return WireArity(d.m, d.n)
    if isinstance(d, Had):
        return WireArity(1, 1)
    if isinstance(d, Swap):
        return WireArity(2, 2)
    if isinstance(d, Cup):
        return WireArity(0, 2)
    if isinstance(d, Cap):
        return WireArity(2, 0)
    if isinstance(d, Scalar):
        return WireArity(0, 0)
    if isinstance(d, Seq):
        a = arity(d.first)
        b = arity(d.second)
        if a.outputs != b.inputs:
            raise ArityError(
                f"sequential mismatch: {a.outputs} outputs feed {b.inputs} inputs"
                f" in Seq({d.first!r}, {d.second!r})"
            )
        return WireArity(a.inputs, b.outputs)
    if isinstance(d, Par):
        a = arity(d.top)
        b = arity(d.bottom)
        return WireArity(a.inputs + b.inputs, a.outputs + b.outputs)
    raise DiagramError(f"not a diagram: {d!r}")


def max_width(d: Diagram) -> int:
    """Largest simultaneous wire count in the diagram (for budget checks)."""
    if isinstance(d, Seq):
        return max(max_width(d.first), max_width(d.second))
    if isinstance(d, Par):
        return max_width(d.top) + max_width(d.bottom)
    a = arity(d)
    return max(a.inputs, a.outputs)


# ---------------------------------------------------------------------------
# Builders


def seq(*parts: Diagram) -> Diagram:
    """Left-to-right pipeline; seq() is the empty diagram Id(0) -- callers
    should prefer seq(first, ...) with at least one part."""
    if not parts:
        return Id(0)
    out = parts[0]
    for p in parts[1:]:
        out = Seq(out, p)
    return out


def par(*parts: Diagram) -> Diagram:
    if not parts:
        return Id(0)
    out = parts[0]
    for p in parts[1:]:
        out = Par(out, p)
    return out


def permutation(perm: list[int]) -> Diagram:
    """A k->k diagram of swaps sending input wire i to output position perm[i]."""
    k = len(perm)
    if sorted(perm) != list(range(k)):
        raise DiagramError(f"not a permutation: {perm}")
    if k == 0:
        return Id(0)
    targets = list(perm)
    layers = []
    changed = True
    while changed:
        changed = False
        for j in range(k - 1):
            if targets[j] > targets[j + 1]:
                targets[j], targets[j + 1] = targets[j + 1], targets[j]
                layers.append(par(Id(j), Swap(), Id(k - j - 2)))
                changed = True
    if not layers:
        return Id(k)
    return seq(*layers)


def upsilon(wires: int, basis: Basis, n: int) -> Diagram:
    """Sharing: a (wires)->(n*wires) diagram. Each wire feeds a 1->n spider
    of the given basis; outputs are regrouped copy-major (n blocks of
    `wires`, block j being the j-th copy in original wire order)."""
    if wires < 0 or n < 0:
        raise DiagramError("negative upsilon parameters")
    if n == 1:
        return Id(wires)
    if wires == 0:
        return Id(0)
    spiders = par(*(Spider(basis, Phase.zero(), 1, n) for _ in range(wires)))
    if n == 0:
        return spiders
    # wire-major output (i, j) at i*n + j moves to copy-major j*wires + i
    perm = [0] * (wires * n)
    for i in range(wires):
        for j in range(n):
            perm[i * n + j] = j * wires + i
    return Seq(spiders, permutation(perm))


def cup_many(n: int) -> Diagram:
    """0 -> 2n diagram denoting sum_x |x>|x> over n-bit x: the first n output
    wires are entangled pairwise with the last n."""
    if n == 0:
        return Id(0)
    cups = par(*(Cup() for _ in range(n)))
    # pair i occupies (2i, 2i+1); route to (i, n+i)
    perm = [0] * (2 * n)
    for i in range(n):
        perm[2 * i] = i
        perm[2 * i + 1] = n + i
    return Seq(cups, permutation(perm))


def discard(wires: int, basis: Basis) -> Diagram:
    """wires -> 0 basis-spider discard."""
    if wires == 0:
        return Id(0)
    return par(*(Spider(basis, Phase.zero(), 1, 0) for _ in range(wires)))


# ---------------------------------------------------------------------------
# Serialization


def _phase_to_json(p: Phase) -> dict:
    if p.is_exact:
        return {"pi_num": p.pi_multiple.numerator, "pi_den": p.pi_multiple.denominator}
    return {"radians": p.radians_value}


def _phase_from_json(doc) -> Phase:
    if not isinstance(doc, dict):
        raise DiagramError(f"malformed phase: {doc!r}")
    if "pi_num" in doc:
        return Phase.exact(doc["pi_num"], doc.get("pi_den", 1))
    if "radians" in doc:
        return Phase.radians(doc["radians"])
    raise DiagramError(f"malformed phase: {doc!r}")


def to_json_obj(d: Diagram) -> dict:
    if isinstance(d, Id):
        return {"kind": "id", "wires": d.n}
    if isinstance(d, Spider):
        return {
            "kind": "spider",
            "basis": str(d.basis),
            "phase": _phase_to_json(d.phase),
            "in": d.m,
            "out": d.n,
        }
    if isinstance(d, Had):
        return {"kind": "had"}
    if isinstance(d, Swap):
        return {"kind": "swap"}
    if isinstance(d, Cup):
        return {"kind": "cup"}
    if isinstance(d, Cap):
        return {"kind": "cap"}
    if isinstance(d, Scalar):
        return {"kind": "scalar", "re": d.value.real, "im": d.value.imag}
    if isinstance(d, Seq):
        return {"kind": "seq", "first": to_json_obj(d.first), "second": to_json_obj(d.second)}
    if isinstance(d, Par):
        return {"kind": "par", "top": to_json_obj(d.top), "bottom": to_json_obj(d.bottom)}
    raise DiagramError(f"not a diagram: {d!r}")


def to_json(d: Diagram) -> str:
    return json.dumps(to_json_obj(d))


def from_json_obj(doc) -> Diagram:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DiagramError(f"malformed diagram document: {doc!r}")
    kind = doc["kind"]
    try:
        if kind == "id":
            return Id(int(doc["wires"]))
        if kind == "spider":
            basis = Basis(doc["basis"])
            return Spider(basis, _phase_from_json(doc["phase"]), int(doc["in"]), int(doc["out"]))
        if kind == "had":
            return Had()
        if kind == "swap":
            return Swap()
        if kind == "cup":
            return Cup()
        if kind == "cap":
            return Cap()
        if kind == "scalar":
            return Scalar(complex(doc["re"], doc["im"]))
        if kind == "seq":
            d = Seq(from_json_obj(doc["first"]), from_json_obj(doc["second"]))
            arity(d)  # arity consistency on load
            return d
        if kind == "par":
            return Par(from_json_obj(doc["top"]), from_json_obj(doc["bottom"]))
    except (KeyError, ValueError) as exc:
        raise DiagramError(f"malformed {kind} node: {exc}") from exc
    raise DiagramError(f"unknown node kind {kind!r}")


def from_json(text: str) -> Diagram:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError(f"malformed JSON: {exc}") from exc
    return from_json_obj(doc)


# ---------------------------------------------------------------------------
# DOT export

_SPIDER_COLORS = {Basis.Z: "green", Basis.X: "red"}


def to_dot(d: Diagram) -> str:
    """Left-to-right graph, one node per generator, spiders colored by basis."""
    arity(d)
    lines = ["digraph zx {", "  rankdir=LR;", '  node [shape=circle];']
    counter = [0]

    def node(label: str, **attrs) -> str:
        counter[0] += 1
        name = f"n{counter[0]}"
        attr = " ".join(f'{k}="{v}"' for k, v in attrs.items())
        lines.append(f"  {name} [label=\"{label}\" {attr}];".replace(" ]", "]"))
        return name

    def edge(a: str, b: str):
        lines.append(f"  {a} -> {b};")

    def emit(dg: Diagram, ins: list[str]) -> list[str]:
        if isinstance(dg, Id):
            return ins
        if isinstance(dg, Swap):
            return [ins[1], ins[0]]
        if isinstance(dg, Spider):
            label = "" if dg.phase.is_zero else str(dg.phase)
            name = node(label, style="filled", fillcolor=_SPIDER_COLORS[dg.basis])
            for src in ins:
                edge(src, name)
            return [name] * dg.n
        if isinstance(dg, Had):
            name = node("H", shape="box", style="filled", fillcolor="yellow")
            edge(ins[0], name)
            return [name]
        if isinstance(dg, Cup):
            name = node("cup", shape="point")
            return [name, name]
        if isinstance(dg, Cap):
            name = node("cap", shape="point")
            edge(ins[0], name)
            edge(ins[1], name)
            return []
        if isinstance(dg, Scalar):
            node(f"{dg.value:.3g}", shape="box")
            return []
        if isinstance(dg, Seq):
            return emit(dg.second, emit(dg.first, ins))
        if isinstance(dg, Par):
            k = arity(dg.top).inputs
            return emit(dg.top, ins[:k]) + emit(dg.bottom, ins[k:])
        raise DiagramError(f"not a diagram: {dg!r}")

    a = arity(d)
    ins = []
    for i in range(a.inputs):
        name = node(f"in{i}", shape="plaintext")
        ins.append(name)
    outs = emit(d, ins)
    for i, src in enumerate(outs):
        name = node(f"out{i}", shape="plaintext")
        edge(src, name)
    lines.append("}")
    return "\n".join(lines)
