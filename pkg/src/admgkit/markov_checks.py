"""Membership checkers for the statistical models attached to an ADMG.

Each checker exhaustively enumerates the constraints its model imposes on a
finite joint table and reports every violated one.  Enumeration over
disjoint vertex triples is exponential in the vertex count, so checkers are
capped at a desk-scale number of vertices.
"""

import itertools
import json
from dataclasses import dataclass, field

from .dist_core import (
    DistributionError,
    JointTable,
    Kernel,
    ci_violation,
    extended_ci_violation,
    fix_dist,
)
from .graph_core import CondADMG, DirectedMixedGraph, classify, topological_orders
from .graph_transform import (
    augment,
    fix_graph,
    fixable_sets,
    marginalize,
    tilde_fix_graph,
    undirected_separated,
)
from .walk_algebra import (
    ancestral_closure,
    arc_connected,
    m_connected,
    markov_background,
    markov_boundary,
)

__all__ = [
    "CheckReport",
    "Violation",
    "check_gm",
    "check_um",
    "check_lm",
    "check_factorization",
    "check_ef",
    "check_augmentation",
    "check_nm",
    "relation_matrix",
]

ENUMERATION_VERTEX_CAP = 8


@dataclass(frozen=True)
class Violation:
    constraint: str
    witness: dict
    magnitude: float

    def to_json(self) -> dict:
        return {"constraint": self.constraint,
                "witness": {k: v for k, v in sorted(self.witness.items(), key=str)},
                "magnitude": self.magnitude}


@dataclass
class CheckReport:
    model: str
    passed: bool
    violations: list = field(default_factory=list)
    skipped_slices: int = 0
    tol: float = 1e-9  # applied in float mode only; rational mode is exact

    def to_json(self) -> dict:
        return {"model": self.model,
                "passed": self.passed,
                "violations": [v.to_json() for v in self.violations],
                "skipped_slices": self.skipped_slices,
                "tol": self.tol}

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def _check_names(g: DirectedMixedGraph, t: JointTable) -> None:
    if set(g.vertices) != set(t.space.names):
        raise DistributionError(
            "table variables do not match graph vertices: "
            f"{sorted(t.space.names)} vs {sorted(g.vertices)}")


def _check_cap(g: DirectedMixedGraph) -> None:
    if len(g.vertices) > ENUMERATION_VERTEX_CAP:
        raise DistributionError(
            f"exhaustive constraint enumeration capped at {ENUMERATION_VERTEX_CAP} vertices")


def _disjoint_triples(vertices, with_context=True):
    """All (J, K, L) with J, K nonempty and pairwise disjoint, deduplicated
    under swapping J and K.  Without context, L is always empty."""
    n = len(vertices)
    labels = (0, 1, 2, 3) if with_context else (0, 1, 3)  # J, K, L, out
    for combo in itertools.product(labels, repeat=n):
        J = frozenset(v for v, c in zip(vertices, combo) if c == 0)
        K = frozenset(v for v, c in zip(vertices, combo) if c == 1)
        if not J or not K:
            continue
        if combo.index(0) > combo.index(1):
            continue  # J/K swap duplicate: first assigned vertex goes to J
        L = frozenset(v for v, c in zip(vertices, combo) if c == 2)
        yield J, K, L


def _fmt(vs) -> str:
    return "{" + ",".join(sorted(vs)) + "}"


def check_gm(g: DirectedMixedGraph, t: JointTable, tol: float = 1e-9) -> CheckReport:
    """Global Markov: every m-separation implies conditional independence."""
    _check_names(g, t)
    _check_cap(g)
    report = CheckReport("GM", True, tol=tol)
    for J, K, L in _disjoint_triples(g.vertices):
        if m_connected(g, J, K, L):
            continue
        bad = ci_violation(t, J, K, L, tol)
        if bad is not None:
            witness, magnitude = bad
            report.passed = False
            report.violations.append(Violation(
                f"{_fmt(J)} _||_ {_fmt(K)} | {_fmt(L)}", witness, magnitude))
    return report


def check_um(g: DirectedMixedGraph, t: JointTable, tol: float = 1e-9) -> CheckReport:
    """Unconditional Markov: arc-separated sets are independent."""
    _check_names(g, t)
    _check_cap(g)
    report = CheckReport("UM", True, tol=tol)
    for J, K, _ in _disjoint_triples(g.vertices, with_context=False):
        if arc_connected(g, J, K):
            continue
        bad = ci_violation(t, J, K, frozenset(), tol)
        if bad is not None:
            witness, magnitude = bad
            report.passed = False
            report.violations.append(Violation(
                f"{_fmt(J)} _||_ {_fmt(K)}", witness, magnitude))
    return report


def _is_ancestral(g: DirectedMixedGraph, S: frozenset) -> bool:
    return ancestral_closure(g, S) == S


def check_lm(g: DirectedMixedGraph, t: JointTable, order=None,
             tol: float = 1e-9) -> CheckReport:
    """Ordered local Markov: for every vertex and every ancestral set K of
    earlier vertices containing it, the vertex is independent of the rest of
    K given its Markov boundary within the induced subgraph on K.

    The boundary must be taken in the induced subgraph: intersecting the
    whole-graph Markov background with K is NOT equivalent (a bidirected
    four-cycle with K skipping alternate vertices separates the two), and
    only the induced form makes this property equivalent to the global one.
    Since K never contains children of the vertex, the induced boundary and
    induced background coincide; that is asserted as a self-test.
    """
    _check_names(g, t)
    _check_cap(g)
    if order is None:
        order = topological_orders(g, 1)[0]
    order = tuple(order)
    if sorted(order) != sorted(g.vertices):
        raise DistributionError("order must be a permutation of the vertices")
    pos = {v: i for i, v in enumerate(order)}
    for tail, head in g.directed:
        if pos[tail] > pos[head]:
            raise DistributionError(f"not a topological order: {tail} -> {head}")
    from .graph_core import induced_subgraph

    report = CheckReport("LM", True, tol=tol)
    for v in order:
        pre = [w for w in order if pos[w] < pos[v]]
        for r in range(len(pre) + 1):
            for extra in itertools.combinations(pre, r):
                K = frozenset(extra) | {v}
                if not _is_ancestral(g, K):
                    continue
                sub = induced_subgraph(g, K)
                mb = markov_boundary(sub, v)
                assert mb == markov_background(sub, v), \
                    f"{v} should be childless within K={sorted(K)}"
                rest = K - mb - {v}
                if not rest:
                    continue
                bad = ci_violation(t, {v}, rest, mb, tol)
                if bad is not None:
                    witness, magnitude = bad
                    report.passed = False
                    report.violations.append(Violation(
                        f"{v} _||_ {_fmt(rest)} | {_fmt(mb)} (K={_fmt(K)})",
                        witness, magnitude))
    return report


def check_factorization(g: DirectedMixedGraph, t: JointTable,
                        tol: float = 1e-9) -> CheckReport:
    """DAG factorization: p(v) equals the product of parent conditionals
    wherever those conditionals are defined."""
    _check_names(g, t)
    if "DAG" not in classify(g):
        raise DistributionError("factorization model requires a DAG")
    report = CheckReport("F", True, tol=tol)
    margs = {}
    for v in g.vertices:
        pa = g.parents_of(v)
        margs[v] = (t.marginal(pa | {v}), t.marginal(pa))
    for idx in range(t.space.size):
        cell = t.space.assignment(idx)
        by_name = dict(zip(t.space.names, cell))
        prod = t.probs[idx] * 0 + 1  # one in the table's arithmetic
        defined = True
        for v in g.vertices:
            num, den = margs[v]
            d = den.probs[den.space.index(tuple(by_name[n] for n in den.space.names))]
            if d == 0:
                defined = False
                break
            n_ = num.probs[num.space.index(tuple(by_name[n] for n in num.space.names))]
            prod = prod * n_ / d
        if not defined:
            report.skipped_slices += 1
            continue
        lhs = t.probs[idx]
        equal = lhs == prod if t.mode == "rational" else abs(lhs - prod) <= tol
        if not equal:
            report.passed = False
            report.violations.append(Violation(
                "p(v) = prod_j p(v_j | v_pa(j))", by_name, float(abs(lhs - prod))))
    return report


def check_ef(g: DirectedMixedGraph, t: JointTable, tol: float = 1e-9) -> CheckReport:
    """Exogenous factorization: density splits into an exogenous block times
    endogenous parent conditionals, and the exogenous marginal is global
    Markov for the induced bidirected subgraph."""
    from .graph_core import induced_subgraph

    _check_names(g, t)
    cls = classify(g)
    if "Unconfounded" not in cls or "ADMG" not in cls:
        raise DistributionError("exogenous factorization requires an unconfounded ADMG")
    from .graph_core import exogenous_vertices

    E = exogenous_vertices(g)
    endo = [v for v in g.vertices if v not in E]
    report = CheckReport("EF", True, tol=tol)
    t_e = t.marginal(E)
    margs = {v: (t.marginal(g.parents_of(v) | {v}), t.marginal(g.parents_of(v)))
             for v in endo}
    for idx in range(t.space.size):
        cell = t.space.assignment(idx)
        by_name = dict(zip(t.space.names, cell))
        prod = t_e.probs[t_e.space.index(tuple(by_name[n] for n in t_e.space.names))]
        defined = True
        for v in endo:
            num, den = margs[v]
            d = den.probs[den.space.index(tuple(by_name[n] for n in den.space.names))]
            if d == 0:
                defined = False
                break
            n_ = num.probs[num.space.index(tuple(by_name[n] for n in num.space.names))]
            prod = prod * n_ / d
        if not defined:
            report.skipped_slices += 1
            continue
        lhs = t.probs[idx]
        equal = lhs == prod if t.mode == "rational" else abs(lhs - prod) <= tol
        if not equal:
            report.passed = False
            report.violations.append(Violation(
                "p(v) = p(e) prod_j p(v_j | v_pa(j))", by_name, float(abs(lhs - prod))))
    exo_report = check_gm(induced_subgraph(g, E), t_e, tol)
    if not exo_report.passed:
        report.passed = False
        for v in exo_report.violations:
            report.violations.append(Violation(
                "exogenous marginal: " + v.constraint, v.witness, v.magnitude))
    report.model = "EF"
    return report


def check_augmentation(g: DirectedMixedGraph, t: JointTable,
                       tol: float = 1e-9) -> CheckReport:
    """Augmentation: every ancestral marginal obeys the undirected global
    Markov property of the augmented marginal graph."""
    _check_names(g, t)
    _check_cap(g)
    report = CheckReport("A", True, tol=tol)
    n = len(g.vertices)
    for r in range(1, n + 1):
        for combo in itertools.combinations(g.vertices, r):
            S = frozenset(combo)
            if not _is_ancestral(g, S):
                continue
            u = augment(marginalize(g, S))
            t_s = t.marginal(S)
            for J, K, L in _disjoint_triples(tuple(g.sorted_by_order(S))):
                if not undirected_separated(u, J, K, L):
                    continue
                bad = ci_violation(t_s, J, K, L, tol)
                if bad is not None:
                    witness, magnitude = bad
                    report.passed = False
                    report.violations.append(Violation(
                        f"[marginal {_fmt(S)}] {_fmt(J)} _||_ {_fmt(K)} | {_fmt(L)}",
                        witness, magnitude))
    return report


def check_nm(g: DirectedMixedGraph, t: JointTable, tol: float = 1e-9) -> CheckReport:
    """Nested Markov: for every fixable set J, the kernel obtained by fixing
    J satisfies the extended global Markov property of the fixed graph with
    bidirected overlay edges among J.

    Queries place fixed vertices in at most one of K and L; the conditioning
    set of the graphical query is M exactly.
    """
    _check_names(g, t)
    _check_cap(g)
    report = CheckReport("NM", True, tol=tol)
    for J, order in fixable_sets(g).items():
        kernel = Kernel.from_table(t)
        c = CondADMG(g)
        for v in order:
            kernel = fix_dist(kernel, c, v)
            c = fix_graph(c, v)
        report.skipped_slices += kernel.undefined_slices()
        tilde = tilde_fix_graph(g, J)
        msep_g = tilde.msep_graph
        for K, L, M in _disjoint_triples(g.vertices):
            if K & J and L & J:
                continue
            if m_connected(msep_g, K, L, M):
                continue
            bad = extended_ci_violation(kernel, K, L, M, tol)
            if bad is not None:
                witness, magnitude = bad
                report.passed = False
                report.violations.append(Violation(
                    f"fix{_fmt(J)}: {_fmt(K)} _||_ {_fmt(L)} | {_fmt(M)}",
                    witness, magnitude))
    return report


_CHECKERS = {
    "GM": check_gm,
    "UM": check_um,
    "LM": check_lm,
    "F": check_factorization,
    "EF": check_ef,
    "A": check_augmentation,
    "NM": check_nm,
}

# model pairs (X, Y) such that an X-member must be a Y-member, per graph class
_EXPECTED_IMPLICATIONS = {
    "any": [("NM", "GM"), ("GM", "UM"), ("GM", "LM"), ("LM", "GM"),
            ("GM", "A"), ("A", "GM")],
    "Unconfounded": [("EF", "GM"), ("GM", "EF"), ("GM", "NM"), ("NM", "GM")],
    "DAG": [("F", "GM"), ("GM", "F")],
    "Bidirected": [("UM", "GM"), ("GM", "UM")],
}


def relation_matrix(corpus, tol: float = 1e-9) -> dict:
    """Run every applicable checker on (graph, table) pairs and tabulate the
    observed implications between model memberships.

    A counterexample to a known containment is a hard failure; a missing
    strictness witness (no instance separating two models that can differ)
    is merely reported.
    """
    instances = []
    for name, g, t in corpus:
        cls = classify(g)
        verdicts = {}
        for model, checker in _CHECKERS.items():
            if model == "F" and "DAG" not in cls:
                continue
            if model == "EF" and ("Unconfounded" not in cls or "ADMG" not in cls):
                continue
            verdicts[model] = checker(g, t, tol=tol).passed
        instances.append({"name": name, "classes": sorted(cls), "verdicts": verdicts})

    failures = []
    observed = {}
    expected = []
    for inst in instances:
        cls = set(inst["classes"])
        pairs = list(_EXPECTED_IMPLICATIONS["any"])
        for label in ("Unconfounded", "DAG", "Bidirected"):
            if label in cls:
                pairs += _EXPECTED_IMPLICATIONS[label]
        for x, y in pairs:
            if x not in inst["verdicts"] or y not in inst["verdicts"]:
                continue
            expected.append((x, y))
            holds = (not inst["verdicts"][x]) or inst["verdicts"][y]
            key = f"{x}=>{y}"
            observed.setdefault(key, True)
            if not holds:
                observed[key] = False
                failures.append({"implication": key, "instance": inst["name"]})
    witnesses = {
        "GM_not_NM": [i["name"] for i in instances
                      if i["verdicts"].get("GM") and i["verdicts"].get("NM") is False],
        "UM_not_GM": [i["name"] for i in instances
                      if i["verdicts"].get("UM") and i["verdicts"].get("GM") is False],
    }
    return {
        "instances": instances,
        "implications": dict(sorted(observed.items())),
        "hard_failures": failures,
        "strictness_witnesses": witnesses,
    }
