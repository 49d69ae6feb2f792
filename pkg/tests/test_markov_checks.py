import random
from fractions import Fraction

import pytest

from admgkit import (
    DistributionError,
    JointTable,
    StateSpace,
    check_augmentation,
    check_ef,
    check_factorization,
    check_gm,
    check_lm,
    check_nm,
    check_um,
    expand_noise,
    generate_system,
    induced_joint,
    parse_graph,
    relation_matrix,
)
from helpers import (
    ef_table,
    factorized_table,
    perturb_table,
    rand_bidirected,
    rand_dag,
    rand_rational_cpt,
    rand_table,
    rand_unconfounded,
)

CHAIN = "vertices: A B C\nA -> B\nB -> C"


def chain_tables(seed):
    rng = random.Random(seed)
    chain = parse_graph(CHAIN)
    member = factorized_table(rng, chain)
    # inject a direct A-C dependence: p(c | a, b) varies with a
    pa = rand_rational_cpt(rng, 1, 2)[0]
    pb = rand_rational_cpt(rng, 2, 2)
    pc = rand_rational_cpt(rng, 4, 2)
    sp = StateSpace((v, 2) for v in "ABC")
    bad = JointTable(sp, [pa[a] * pb[a][b] * pc[a * 2 + b][c]
                          for a, b, c in sp.cells()])
    return chain, member, bad


def test_float_mode_matches_rational_verdicts():
    rng = random.Random(20)
    chain = parse_graph(CHAIN)
    for _ in range(8):
        t = factorized_table(rng, chain)
        if rng.random() < 0.5:
            t = perturb_table(rng, t)
        tf = JointTable(t.space, [float(p) for p in t.probs], mode="float")
        for checker in (check_gm, check_um, check_lm, check_augmentation,
                        check_nm):
            exact = checker(chain, t)
            approx = checker(chain, tf, tol=1e-9)
            assert exact.passed == approx.passed
            assert approx.tol == 1e-9


def test_check_gm():
    chain, member, bad = chain_tables(0)
    assert check_gm(chain, member).passed
    report = check_gm(chain, bad)
    assert not report.passed
    assert any("{A} _||_ {C} | {B}" == v.constraint for v in report.violations)
    complete = parse_graph("vertices: A B C\nA -> B\nB -> C\nA -> C")
    assert check_gm(complete, bad).passed  # vacuous: no m-separations


def test_check_gm_name_mismatch():
    chain, member, _ = chain_tables(0)
    other = JointTable.uniform(StateSpace((v, 2) for v in "XYZ"))
    with pytest.raises(DistributionError, match="match"):
        check_gm(chain, other)


def test_check_um():
    rng = random.Random(1)
    iv = parse_graph("vertices: Z X Y\nZ -> X\nX -> Y\nX <-> Y")
    # every pair is arc-connected, so the model is everything
    assert check_um(iv, rand_table(rng, StateSpace((v, 2) for v in "ZXY"))).passed
    collider = parse_graph("vertices: A B C\nA -> C\nB -> C")
    sp = StateSpace((v, 2) for v in "ABC")
    corr = JointTable(sp, [Fraction(1, 4), Fraction(1, 4), 0, 0,
                           0, 0, Fraction(1, 4), Fraction(1, 4)])
    report = check_um(collider, corr)
    assert not report.passed
    assert any(v.constraint == "{A} _||_ {B}" for v in report.violations)
    edgeless = parse_graph("vertices: A B")
    pa = [Fraction(1, 3), Fraction(2, 3)]
    pb = [Fraction(1, 5), Fraction(4, 5)]
    prod = JointTable(StateSpace((v, 2) for v in "AB"),
                      [pa[a] * pb[b] for a in (0, 1) for b in (0, 1)])
    assert check_um(edgeless, prod).passed


def test_check_lm():
    chain, member, bad = chain_tables(2)
    assert check_lm(chain, member).passed
    assert not check_lm(chain, bad).passed


def test_check_lm_rejects_bad_order():
    chain, member, _ = chain_tables(3)
    with pytest.raises(DistributionError, match="topological"):
        check_lm(chain, member, order=("C", "B", "A"))


def test_check_lm_order_independent():
    rng = random.Random(4)
    fork = parse_graph("vertices: A B C\nA -> B\nA -> C")
    for _ in range(10):
        t = factorized_table(rng, fork)
        if rng.random() < 0.5:
            t = perturb_table(rng, t)
        verdicts = {check_lm(fork, t, order).passed
                    for order in (("A", "B", "C"), ("A", "C", "B"))}
        assert len(verdicts) == 1


def test_check_factorization():
    rng = random.Random(5)
    complete = parse_graph("vertices: A B C\nA -> B\nB -> C\nA -> C")
    anything = rand_table(rng, StateSpace((v, 2) for v in "ABC"))
    assert check_factorization(complete, anything).passed  # chain rule
    edgeless = parse_graph("vertices: A B")
    pa = [Fraction(2, 7), Fraction(5, 7)]
    pb = [Fraction(1, 2), Fraction(1, 2)]
    sp = StateSpace((v, 2) for v in "AB")
    prod = JointTable(sp, [pa[a] * pb[b] for a, b in sp.cells()])
    corr = JointTable(sp, [Fraction(1, 2), 0, 0, Fraction(1, 2)])
    assert check_factorization(edgeless, prod).passed
    assert not check_factorization(edgeless, corr).passed
    with pytest.raises(DistributionError, match="DAG"):
        check_factorization(parse_graph("vertices: A B\nA <-> B"), prod)


def test_check_ef_equals_f_on_dags():
    rng = random.Random(6)
    for _ in range(15):
        g = rand_dag(rng, 3)
        t = factorized_table(rng, g)
        if rng.random() < 0.5:
            t = perturb_table(rng, t)
        assert check_ef(g, t).passed == check_factorization(g, t).passed


def test_check_ef_equals_gm_on_bidirected():
    rng = random.Random(7)
    for _ in range(15):
        g = rand_bidirected(rng, 3)
        t = induced_joint(generate_system(g, seed=rng.randrange(10 ** 6)))
        if rng.random() < 0.5:
            t = perturb_table(rng, t)
        assert check_ef(g, t).passed == check_gm(g, t).passed


def test_check_ef_noise_expansion_member(mixed4):
    rng = random.Random(8)
    g = expand_noise(mixed4)
    t = ef_table(rng, g)
    assert check_ef(g, t).passed
    with pytest.raises(DistributionError, match="unconfounded"):
        check_ef(mixed4, JointTable.uniform(StateSpace((v, 2) for v in mixed4.vertices)))


def test_check_augmentation():
    chain, member, bad = chain_tables(9)
    assert check_augmentation(chain, member).passed
    assert not check_augmentation(chain, bad).passed
    rng = random.Random(10)
    complete = parse_graph("vertices: A B C\nA -> B\nB -> C\nA -> C")
    assert check_augmentation(complete, rand_table(
        rng, StateSpace((v, 2) for v in "ABC"))).passed


def test_augmentation_equals_gm_corpus():
    rng = random.Random(11)
    for _ in range(15):
        g = rand_unconfounded(rng, 3) if rng.random() < 0.5 else rand_dag(rng, 3)
        t = ef_table(rng, g) if rng.random() < 0.5 else rand_table(
            rng, StateSpace((v, 2) for v in g.vertices))
        assert check_augmentation(g, t).passed == check_gm(g, t).passed


def test_check_nm_dag_factorized():
    rng = random.Random(12)
    for _ in range(5):
        g = rand_dag(rng, 3)
        assert check_nm(g, factorized_table(rng, g)).passed


def test_check_nm_edgeless_reduces_to_independence():
    edgeless = parse_graph("vertices: A B")
    sp = StateSpace((v, 2) for v in "AB")
    prod = JointTable.uniform(sp)
    corr = JointTable(sp, [Fraction(1, 2), 0, 0, Fraction(1, 2)])
    assert check_nm(edgeless, prod).passed
    assert not check_nm(edgeless, corr).passed


def test_check_nm_verma(verma):
    s = generate_system(verma, seed=1)
    t = induced_joint(s)
    assert check_gm(verma, t).passed
    assert check_nm(verma, t).passed


def test_nm_implies_gm_implies_um():
    rng = random.Random(13)
    for _ in range(10):
        g = rand_unconfounded(rng, 3)
        t = ef_table(rng, g) if rng.random() < 0.5 else perturb_table(
            rng, ef_table(rng, g))
        nm = check_nm(g, t).passed
        gm = check_gm(g, t).passed
        um = check_um(g, t).passed
        assert (not nm or gm) and (not gm or um)


def verma_gm_only_table(seed):
    """Member of GM but not NM for the four-chain with V2 <-> V4."""
    rng = random.Random(seed)
    p1 = rand_rational_cpt(rng, 1, 2)[0]
    p2 = rand_rational_cpt(rng, 2, 2)
    p3 = rand_rational_cpt(rng, 2, 2)
    p4 = rand_rational_cpt(rng, 8, 2)
    sp = StateSpace((f"V{i}", 2) for i in (1, 2, 3, 4))

    def functional(v1, v3, v4):
        return sum(p4[v1 * 4 + v2 * 2 + v3][v4] * p2[v1][v2] for v2 in (0, 1))

    varies = any(functional(0, v3, v4) != functional(1, v3, v4)
                 for v3 in (0, 1) for v4 in (0, 1))
    if not varies:
        return None
    probs = [p1[a] * p2[a][b] * p3[b][c] * p4[a * 4 + b * 2 + c][d]
             for a, b, c, d in sp.cells()]
    return JointTable(sp, probs)


def test_gm_without_nm_verma(verma):
    t = None
    seed = 0
    while t is None:
        t = verma_gm_only_table(seed)
        seed += 1
    assert check_gm(verma, t).passed
    report = check_nm(verma, t)
    assert not report.passed
    assert any(v.constraint.startswith("fix{V3}:") for v in report.violations)


def test_relation_matrix():
    rng = random.Random(14)
    corpus = []
    for i in range(4):
        g = rand_unconfounded(rng, 3)
        corpus.append((f"u{i}", g, ef_table(rng, g)))
        corpus.append((f"u{i}x", g, perturb_table(rng, ef_table(rng, g))))
    for i in range(3):
        g = rand_dag(rng, 3)
        corpus.append((f"d{i}", g, factorized_table(rng, g)))
    for i in range(3):
        g = rand_bidirected(rng, 3)
        corpus.append(
            (f"b{i}", g, induced_joint(generate_system(g, seed=i + 50))))
    verma = parse_graph(
        "vertices: V1 V2 V3 V4\nV1 -> V2\nV2 -> V3\nV3 -> V4\nV2 <-> V4")
    t = None
    seed = 0
    while t is None:
        t = verma_gm_only_table(seed)
        seed += 1
    corpus.append(("verma_gm_only", verma, t))
    result = relation_matrix(corpus)
    assert result["hard_failures"] == []
    for inst in result["instances"]:
        v = inst["verdicts"]
        cls = set(inst["classes"])
        if "Unconfounded" in cls and "ADMG" in cls:
            assert len({v["GM"], v["LM"], v["A"], v["EF"], v["NM"]}) == 1
        if "DAG" in cls:
            assert v["F"] == v["GM"]
        if "Bidirected" in cls:
            assert v["UM"] == v["GM"]
    assert "verma_gm_only" in result["strictness_witnesses"]["GM_not_NM"]
