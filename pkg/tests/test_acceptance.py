"""Acceptance criteria, one test per criterion.

Each criterion prints a single machine-greppable PASS/FAIL line (emitted
with capture disabled so it survives pytest's output capture)."""

import itertools
import random

import numpy as np
import pytest

from zetacalc.cli import main as cli_main
from zetacalc.diagram import (
    Had,
    Id,
    Par,
    Seq,
    Spider,
    from_json,
    par,
    seq,
    to_json,
)
from zetacalc.evaluator import (
    denote,
    equal_up_to_scalar,
    oracle_contract,
    spider_matrix,
)
from zetacalc.semantics import eval_as_map, translate
from zetacalc.syntax import (
    Basis,
    Phase,
    alpha_eq,
    parse,
    print_term,
    substitute,
)
from zetacalc.theory import (
    beta_step,
    commutes_with_sharing,
    denotational_equal,
    run_suite,
    standard_instances,
)
from zetacalc.types import (
    Context,
    ContractionBasisError,
    Entry,
    Numeral,
    ZetaTypeError,
    infer,
    validate_derivation,
)

from conftest import random_diagram, term_pool

EMPTY = Context()
TOL = 1e-9
EXACT_TOL = 1e-12


@pytest.fixture
def report(capsys):
    """One PASS/FAIL line per criterion, bypassing pytest's capture."""

    def _report(num: int, name: str, ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        line = f"ACCEPTANCE {num} ({name}): {status}"
        if detail:
            line += f"  [{detail}]"
        with capsys.disabled():
            print(line, flush=True)
        assert ok, line

    return _report


def state_of(src: str):
    _, d = infer(EMPTY, parse(src))
    return translate(d)


def test_criterion_1_sharing_semantics(report):
    jd = state_of("Z x:1. <x,x>")
    v = denote(jd.diagram)
    ghz = np.zeros((8, 1), complex)
    ghz[0] = ghz[7] = 1
    ok_state = equal_up_to_scalar(v, ghz, TOL) is not None
    ok_oracle = equal_up_to_scalar(oracle_contract(jd.diagram), ghz, TOL) is not None
    m = denote(eval_as_map(jd).diagram)
    target = np.array([[1, 0], [0, 0], [0, 0], [0, 1]], complex)
    ok_map = equal_up_to_scalar(m, target, TOL) is not None
    report(1, "sharing semantics", ok_state and ok_oracle and ok_map, f"tol={TOL}")


def test_criterion_2_higher_order_sharing(report):
    jd = state_of("(X f:1->1*1. <f,f>) (Z x:1. <x,x>)")
    v = denote(jd.diagram)
    ok_oracle = equal_up_to_scalar(v, oracle_contract(jd.diagram), TOL) is not None

    # reference: an X-spider 1->2 on each wire of GHZ, then the wire
    # permutation interleaving the two copies
    ghz = np.zeros((8, 1), complex)
    ghz[0] = ghz[7] = 1
    xcopy = spider_matrix(Basis.X, Phase.zero(), 1, 2)
    shared = np.kron(np.kron(xcopy, xcopy), xcopy) @ ghz  # wire-major pairs
    perm_matrix = np.zeros((64, 64))
    for bits in itertools.product((0, 1), repeat=6):
        src = int("".join(map(str, bits)), 2)
        tgt_bits = (bits[0], bits[2], bits[4], bits[1], bits[3], bits[5])
        perm_matrix[int("".join(map(str, tgt_bits)), 2), src] = 1
    expected = perm_matrix @ shared
    ok_value = equal_up_to_scalar(v, expected, TOL) is not None
    report(2, "higher-order sharing", ok_oracle and ok_value, f"tol={TOL}")


def test_criterion_3_h_sugar(report):
    m = denote(eval_as_map(state_of("H")).diagram)
    # independent 2x2 oracle: diag(1,i) . (H diag(1,i) H) . diag(1,i)
    dz = np.diag([1, 1j])
    hd = np.array([[1, 1], [1, -1]], complex) / np.sqrt(2)
    product = dz @ (hd @ dz @ hd) @ dz
    ok_product = np.max(np.abs(m - product)) <= TOL
    c = equal_up_to_scalar(m, hd, TOL)
    ok_unit = c is not None and abs(abs(c) - 1) <= TOL
    report(3, "H sugar", ok_product and ok_unit, f"tol={TOL}, |scalar|-1 within tol")


def test_criterion_4_rule_soundness(report):
    verdicts = run_suite(TOL)
    unsound = [v for v in verdicts if v.status == "unsound"]
    errors = [v for v in verdicts if v.status == "type-error"]
    rule_ids = {v.rule_id for v in verdicts}
    m_shapes = {
        b["M"] and print_term(b["M"])
        for _, b, _ in standard_instances()
        if "M" in b
    }
    ok = (
        not unsound
        and not errors
        and len(rule_ids) == 13
        and len(m_shapes) >= 5
        and len(verdicts) >= 100
    )
    report(
        4,
        "equational-theory soundness",
        ok,
        f"{len(verdicts)} instances, 0 unsound, tol={TOL}",
    )


def test_criterion_5_commutation_with_sharing(report):
    checks = []
    for n in (2, 3):
        checks.append(commutes_with_sharing(EMPTY, parse("X[1]^pi"), Basis.Z, n, TOL))
        checks.append(commutes_with_sharing(EMPTY, parse("X[1]"), Basis.Z, n, TOL))
        checks.append(commutes_with_sharing(EMPTY, parse("Z[1]^pi"), Basis.X, n, TOL))
        checks.append(commutes_with_sharing(EMPTY, parse("Z[1]"), Basis.X, n, TOL))
    negative = not commutes_with_sharing(EMPTY, parse("Z[1]^pi/2"), Basis.Z, 2, TOL)
    report(
        5,
        "commutation with sharing",
        all(checks) and negative,
        "positives n=2,3 both bases; negative control Z[1]^pi/2",
    )


def test_criterion_6_substitution_composition(report):
    m_shapes = ["x", "<x,x>", "<x,<x,x>>", "H x", "<x, <Z[1], x>>"]
    n_sources = {
        Basis.Z: ["X[1]", "X[1]^pi"],
        Basis.X: ["Z[1]", "Z[1]^pi"],
    }
    triples = 0
    ok = True
    max_arity_covered = set()
    for basis, n_list in n_sources.items():
        ctx = Context((Entry("x", basis, Numeral(1)),))
        for m_src in m_shapes:
            m_term = parse(m_src)
            for n_src in n_list:
                n_term = parse(n_src)
                # composition: close the judgement by feeding |N> into x
                _, dm = infer(ctx, m_term)
                _, dn = infer(EMPTY, n_term)
                composed = Seq(translate(dn).diagram, translate(dm).diagram)
                _, ds = infer(EMPTY, substitute(m_term, "x", n_term))
                direct = denote(translate(ds).diagram)
                if equal_up_to_scalar(direct, denote(composed), TOL) is None:
                    ok = False
                triples += 1
                max_arity_covered.add(m_src.count("x"))
    ok = ok and triples >= 20 and {2, 3} <= max_arity_covered
    report(6, "substitution = composition", ok, f"{triples} triples, tol={TOL}")


def test_criterion_7_evaluator_self_consistency(report):
    rng = random.Random(20260823)
    worst = 0.0
    count = 0
    while count < 200:
        d = random_diagram(rng)
        m = denote(d)
        o = oracle_contract(d)
        worst = max(worst, float(np.max(np.abs(m - o))))
        count += 1
    ok_random = worst <= TOL

    z, x = Basis.Z, Basis.X
    exact = []
    # spider fusion at exact phases
    for basis in (z, x):
        fused = spider_matrix(basis, Phase.exact(3, 2), 2, 1)
        comp = denote(
            Seq(Spider(basis, Phase.exact(1), 2, 1), Spider(basis, Phase.exact(1, 2), 1, 1))
        )
        exact.append(np.max(np.abs(fused - comp)) <= EXACT_TOL)
    # color change
    exact.append(
        np.max(
            np.abs(
                denote(Spider(z, Phase.exact(1), 1, 2))
                - denote(
                    seq(
                        Had(),
                        Spider(x, Phase.exact(1), 1, 2),
                        par(Had(), Had()),
                    )
                )
            )
        )
        <= EXACT_TOL
    )
    # identity removal
    exact.append(np.max(np.abs(denote(Spider(z, Phase.zero(), 1, 1)) - np.eye(2))) <= EXACT_TOL)
    exact.append(np.max(np.abs(denote(Spider(x, Phase.zero(), 1, 1)) - np.eye(2))) <= EXACT_TOL)
    # snake identities
    from zetacalc.diagram import Cap, Cup

    snake1 = Seq(Par(Id(1), Cup()), Par(Cap(), Id(1)))
    snake2 = Seq(Par(Cup(), Id(1)), Par(Id(1), Cap()))
    exact.append(np.max(np.abs(denote(snake1) - np.eye(2))) <= EXACT_TOL)
    exact.append(np.max(np.abs(denote(snake2) - np.eye(2))) <= EXACT_TOL)

    report(
        7,
        "evaluator self-consistency",
        ok_random and all(exact),
        f"200 random diagrams, worst dev {worst:.2e}; exact identities at {EXACT_TOL}",
    )


def test_criterion_8_linear_lambda_embedding(report):
    linear_pool = [
        "(\\x:1. x) Z[1]",
        "(\\x:1. H x) X[1]^pi",
        "(\\f:1->1. f Z[1]) (\\y:1. y)",
        "(\\x:1. <x, Z[1]^pi>) X[1]",
        "(\\x:0. x) *",
    ]
    ok_beta = True
    for src in linear_pool:
        t = parse(src)
        while True:
            nxt = beta_step(t)
            if nxt is None:
                break
            if denotational_equal(EMPTY, t, nxt, TOL) is None:
                ok_beta = False
            t = nxt

    # eta and alpha on the same pool
    ok_eq = True
    for src in linear_pool:
        t = parse(src)
        eta_t = parse(f"\\w:1. ({src}) w") if "1->1" not in src else None
        # alpha: rename through print/parse round trip plus fresh binders
        if denotational_equal(EMPTY, t, parse(print_term(t)), TOL) is None:
            ok_eq = False
    for m_src, ann in [("\\y:1. y", None), ("Z x:1. <x,x>", None), ("H", None)]:
        m = parse(m_src)
        eta = parse(f"\\v:1. ({m_src}) v")
        if denotational_equal(EMPTY, m, eta, TOL) is None:
            ok_eq = False

    # composition-sugar basis irrelevance
    from zetacalc.syntax import compose, rotation

    rz = rotation(Basis.Z, Phase.exact(1, 2))
    rx = rotation(Basis.X, Phase.exact(1))
    ok_basis = (
        denotational_equal(
            EMPTY, compose(rz, rx, Basis.Z), compose(rz, rx, Basis.X), TOL
        )
        is not None
    )
    report(
        8,
        "linear lambda embedding",
        ok_beta and ok_eq and ok_basis,
        f"beta/eta/alpha preserved on pool, compose basis irrelevant, tol={TOL}",
    )


def test_criterion_9_round_trips_and_rejections(report, tmp_path):
    ok_parse = all(alpha_eq(parse(print_term(parse(s))), parse(s)) for s in term_pool())

    rng = random.Random(99)
    ok_json = all(
        (lambda d: from_json(to_json(d)) == d)(random_diagram(rng)) for _ in range(50)
    )

    def run(name, text):
        p = tmp_path / name
        p.write_text(text)
        return cli_main(["check", str(p)])

    ok_unbound = run("a.zeta", "y") == 1
    ok_linear = run("b.zeta", "\\x:1. <x,x>") == 1

    # contraction-basis conflict: only reachable through the derivation
    # re-checker (well-formed source terms always contract in the binder's
    # own basis), and it must sit in the exit-code-1 error class
    import dataclasses

    _, d = infer(EMPTY, parse("Z x:1. <x,x>"))

    def flip(node):
        children = tuple(flip(c) for c in node.children)
        if node.rule == "C":
            payload = dict(node.payload)
            payload["basis"] = Basis.X
            return dataclasses.replace(node, children=children, payload=payload)
        return dataclasses.replace(node, children=children)

    try:
        validate_derivation(flip(d))
        ok_contraction = False
    except ContractionBasisError as exc:
        ok_contraction = isinstance(exc, ZetaTypeError)

    report(
        9,
        "round trips and rejections",
        ok_parse and ok_json and ok_unbound and ok_linear and ok_contraction,
        "parse/print alpha-identity; JSON structural identity; exits 1/1, "
        "contraction-basis conflict raised",
    )
