"""Translation of typing derivations into ZX string diagrams.

Every judgement Gamma |- M : A becomes a diagram whose input wires carry the
labels of the context (in context order) and whose output wires carry the
labels of A. Abstraction bends the binder's wires into dual outputs via
cups; application caps the dual outputs of the function against the
argument's outputs, pairing label a* with label a in label order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .diagram import (
    Cap,
    Diagram,
    Id,
    Par,
    Seq,
    Spider,
    cup_many,
    discard,
    par,
    permutation,
    seq,
    upsilon,
)
from .syntax import Abs, Gen, Term, free_vars, print_term
from .types import (
    Context,
    Derivation,
    Type,
    fn_parts,
    labels,
    print_context,
    print_type,
    size,
)
from .diagram import to_json_obj
from .syntax import ZetaError


class TranslationError(ZetaError):
    pass


@dataclass(frozen=True)
class JudgementDiagram:
    ctx: Context
    term: Term
    type: Type
    diagram: Diagram
    input_labels: tuple
    output_labels: tuple

    def to_json_obj(self) -> dict:
        return {
            "context": print_context(self.ctx),
            "term": print_term(self.term),
            "type": print_type(self.type),
            "diagram": to_json_obj(self.diagram),
            "labels": {
                "inputs": [repr(l) for l in self.input_labels],
                "outputs": [repr(l) for l in self.output_labels],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def context_labels(ctx: Context) -> tuple:
    out = []
    for e in ctx:
        out.extend((e.name, l) for l in labels(e.type))
    return tuple(out)


def share_context(ctx: Context, n: int) -> Diagram:
    """Share every entry in its own basis into n copies, regrouped so the
    output is n consecutive full copies of the context block (copy-major)."""
    if len(ctx) == 0:
        return Id(0)
    sizes = [size(e.type) for e in ctx]
    shared = par(*(upsilon(s, e.basis, n) for s, e in zip(sizes, ctx)))
    if n == 1:
        return shared
    if n == 0 or sum(sizes) == 0:
        return shared
    # after per-entry sharing, wires are entry-major: entry i, copy j, offset k
    # at sum(sizes[:i])*n + j*sizes[i] + k; regroup to copy-major.
    total = sum(sizes)
    perm = []
    for i, s in enumerate(sizes):
        before = sum(sizes[:i])
        for j in range(n):
            for k in range(s):
                perm.append(j * total + before + k)
    return Seq(shared, permutation(perm))


def _wire_offsets(ctx: Context) -> list[int]:
    offs = [0]
    for e in ctx:
        offs.append(offs[-1] + size(e.type))
    return offs


def _caps(first_block: int, mid: int) -> Diagram:
    """Cap wires i and first_block+mid+i pairwise (i < first_block), passing
    the mid wires through: a (2*first_block + mid) -> mid diagram."""
    a = first_block
    if a == 0:
        return Id(mid)
    perm = [0] * (2 * a + mid)
    for i in range(a):
        perm[i] = 2 * i
        perm[a + mid + i] = 2 * i + 1
    for j in range(mid):
        perm[a + j] = 2 * a + j
    caps = par(*([Cap()] * a + [Id(mid)]))
    return Seq(permutation(perm), caps)


def _peel_weakenings(node: Derivation, drop: set[str]) -> Derivation:
    """Skip leading W nodes for entries in `drop` (entries the parent never
    routed to this child, so there is no wire to discard)."""
    while node.rule == "W" and node.payload["entry"].name in drop:
        (node,) = node.children
    return node


def _split_binary(ctx: Context, c1: Derivation, c2: Derivation):
    """Context routing for a binary node. After W/C preprocessing every entry
    occurs exactly once in the node's term, hence in exactly one child; the
    full-context sharing of the child judgements collapses (a same-basis
    copy spider with one leg discarded is an identity wire), so each entry is
    routed only to its user. Returns (router to [c1 block, c2 block], peeled
    c1, peeled c2, block sizes) or None when the occurrence invariant fails,
    in which case the caller falls back to literal sharing."""
    used1 = set(free_vars(c1.term))
    offs = _wire_offsets(ctx)
    to_first = []
    for e in ctx:
        if e.name in used1:
            to_first.append(True)
        elif e.name in set(free_vars(c2.term)):
            to_first.append(False)
        else:
            return None
    g1 = sum(size(e.type) for e, f in zip(ctx, to_first) if f)
    perm = [0] * ctx.wire_count()
    pos1, pos2 = 0, g1
    for i, e in enumerate(ctx.entries):
        s = size(e.type)
        if to_first[i]:
            for k in range(s):
                perm[offs[i] + k] = pos1 + k
            pos1 += s
        else:
            for k in range(s):
                perm[offs[i] + k] = pos2 + k
            pos2 += s
    names1 = {e.name for e, f in zip(ctx, to_first) if f}
    names2 = {e.name for e in ctx} - names1
    p1 = _peel_weakenings(c1, names2)
    p2 = _peel_weakenings(c2, names1)
    g2 = ctx.wire_count() - g1
    return permutation(perm), p1, p2, g1, g2


def _stack(c1: Diagram, c2: Diagram) -> Diagram:
    """Par(c1, c2) in staircase form: run c1 while c2's inputs wait, then c2.
    Same morphism, but the peak wire count is max over the children instead
    of their sum, which keeps nested applications inside the wire budget."""
    from .diagram import arity

    a1, a2 = arity(c1), arity(c2)
    first = c1 if a2.inputs == 0 else Par(c1, Id(a2.inputs))
    second = c2 if a1.outputs == 0 else Par(Id(a1.outputs), c2)
    return Seq(first, second)


def translate(derivation: Derivation) -> JudgementDiagram:
    """Structural translation of a validated derivation."""
    d = _translate(derivation)
    return JudgementDiagram(
        derivation.ctx,
        derivation.term,
        derivation.type,
        d,
        context_labels(derivation.ctx),
        tuple(labels(derivation.type)),
    )


def _discard_ctx(ctx: Context) -> Diagram:
    return par(*(discard(size(e.type), e.basis) for e in ctx)) if len(ctx) else Id(0)


def _translate(node: Derivation) -> Diagram:
    ctx, t = node.ctx, node.type
    if node.rule == "U":
        return _discard_ctx(ctx)
    if node.rule == "V":
        name = node.term.name
        return par(
            *(
                Id(size(e.type)) if e.name == name else discard(size(e.type), e.basis)
                for e in ctx
            )
        )
    if node.rule == "G":
        gen: Gen = node.term
        core = Spider(gen.basis, gen.phase, 0, gen.n)
        return Par(_discard_ctx(ctx), core) if len(ctx) else core
    if node.rule == "D":
        gen = node.term
        k = -gen.n
        core = Seq(cup_many(k), Par(Id(k), Spider(gen.basis, gen.phase, k, 0)))
        return Par(_discard_ctx(ctx), core) if len(ctx) else core
    if node.rule == "B":
        (child,) = node.children
        term: Abs = node.term
        g = ctx.wire_count()
        a = size(child.ctx.entries[-1].type)
        body = _translate(child)
        rot = (
            par(*(Spider(term.basis, term.phase, 1, 1) for _ in range(a)))
            if a
            else Id(0)
        )
        body_rot = Seq(Par(Id(g), rot), body) if a else body
        if a == 0:
            # nothing to bend; outputs are labels(A*) ++ labels(B) = labels(B)
            return body_rot
        # Gamma -> [Gamma, dual block, copy block], move duals to the front,
        # then run the rotated body on [Gamma, copy block].
        stage1 = Par(Id(g), cup_many(a))
        perm = list(range(a, a + g)) + list(range(a)) + list(range(a + g, 2 * a + g))
        return seq(stage1, permutation(perm), Par(Id(a), body_rot))
    if node.rule == "A":
        c1, c2 = node.children
        parts = fn_parts(c1.type)
        if parts is None:
            raise TranslationError("application of a non-function type")
        a = size(parts[0])
        b = size(parts[1])
        split = _split_binary(ctx, c1, c2)
        if split is None:
            shared = share_context(ctx, 2)
            both = _stack(_translate(c1), _translate(c2))
        else:
            router, p1, p2, _, _ = split
            shared = router
            both = _stack(_translate(p1), _translate(p2))
        return seq(shared, both, _caps(a, b))
    if node.rule == "T":
        c1, c2 = node.children
        split = _split_binary(ctx, c1, c2)
        if split is None:
            return seq(share_context(ctx, 2), _stack(_translate(c1), _translate(c2)))
        router, p1, p2, _, _ = split
        return Seq(router, _stack(_translate(p1), _translate(p2)))
    if node.rule == "E":
        c1, c2 = node.children
        g = ctx.wire_count()
        # layout [N's entries, M's entries]: run M, then feed its outputs as
        # the trailing x,y wires of N.
        split = _split_binary(ctx, c2, c1)
        if split is None:
            return seq(
                share_context(ctx, 2), Par(Id(g), _translate(c1)), _translate(c2)
            )
        router, pn, pm, gn, _ = split
        return seq(router, Par(Id(gn), _translate(pm)), _translate(pn))
    if node.rule == "W":
        (child,) = node.children
        e, i = node.payload["entry"], node.payload["index"]
        offs = _wire_offsets(ctx)
        before, after = offs[i], offs[-1] - offs[i + 1]
        drop = par(Id(before), discard(size(e.type), e.basis), Id(after))
        return Seq(drop, _translate(child))
    if node.rule == "C":
        (child,) = node.children
        i = node.payload["index"]
        k = node.payload["arity"]
        e = ctx.entries[i]
        offs = _wire_offsets(ctx)
        before, after = offs[i], offs[-1] - offs[i + 1]
        share = par(Id(before), upsilon(size(e.type), e.basis, k), Id(after))
        return Seq(share, _translate(child))
    if node.rule == "X":
        (child,) = node.children
        perm_entries = node.payload["perm"]
        offs = _wire_offsets(ctx)
        child_offs = _wire_offsets(child.ctx)
        wire_perm = [0] * ctx.wire_count()
        for i, e in enumerate(ctx.entries):
            target = perm_entries[i]
            for k in range(size(e.type)):
                wire_perm[offs[i] + k] = child_offs[target] + k
        return Seq(permutation(wire_perm), _translate(child))
    raise TranslationError(f"unknown rule {node.rule!r}")


def eval_as_map(jd: JudgementDiagram) -> JudgementDiagram:
    """Uncurry once: bend the A* outputs of a function-typed judgement back
    into inputs, yielding a (Gamma, A) -> B judgement diagram."""
    parts = fn_parts(jd.type)
    if parts is None:
        raise TranslationError(
            f"type {print_type(jd.type)} is not of function shape A* (x) B"
        )
    a_t, b_t = parts
    a, b = size(a_t), size(b_t)
    g = jd.ctx.wire_count()
    # inputs [Gamma, A]; run the state diagram on Gamma, carry A through,
    # then cap each dual output against the matching carried input.
    staged = Par(jd.diagram, Id(a))  # (g+a) -> (a + b + a)
    capped = Seq(staged, _caps(a, b))
    in_labels = jd.input_labels + tuple(("<map-arg>", l) for l in labels(a_t))
    return JudgementDiagram(jd.ctx, jd.term, b_t, capped, in_labels, tuple(labels(b_t)))
