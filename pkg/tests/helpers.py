"""Shared corpus generators for the randomized tests."""

import itertools
from fractions import Fraction

from admgkit import (
    DirectedMixedGraph,
    JointTable,
    StateSpace,
    generate_system,
    induced_joint,
)
from admgkit.graph_core import induced_subgraph


def rand_admg(rng, n, p_dir=0.4, p_bid=0.3, prefix="V"):
    """Random canonical ADMG on n vertices via a random topological order."""
    names = [f"{prefix}{i + 1}" for i in range(n)]
    perm = names[:]
    rng.shuffle(perm)
    pos = {v: i for i, v in enumerate(perm)}
    directed = [(a, b) if pos[a] < pos[b] else (b, a)
                for a, b in itertools.combinations(names, 2)
                if rng.random() < p_dir]
    bidirected = [(a, b) for a, b in itertools.combinations(names, 2)
                  if rng.random() < p_bid]
    return DirectedMixedGraph(names, directed, bidirected)


def rand_dag(rng, n, p_dir=0.5, prefix="V"):
    return rand_admg(rng, n, p_dir=p_dir, p_bid=0.0, prefix=prefix)


def rand_bidirected(rng, n, p_bid=0.4, prefix="V"):
    return rand_admg(rng, n, p_dir=0.0, p_bid=p_bid, prefix=prefix)


def rand_unconfounded(rng, n, p_dir=0.4, p_bid=0.4, prefix="V"):
    """Random unconfounded ADMG: bidirected edges only between sources."""
    names = [f"{prefix}{i + 1}" for i in range(n)]
    perm = names[:]
    rng.shuffle(perm)
    pos = {v: i for i, v in enumerate(perm)}
    n_sources = rng.randint(1, n)
    sources = set(perm[:n_sources])
    directed = []
    for a, b in itertools.combinations(names, 2):
        tail, head = (a, b) if pos[a] < pos[b] else (b, a)
        if head in sources:
            continue
        if rng.random() < p_dir:
            directed.append((tail, head))
    bidirected = [(a, b) for a, b in itertools.combinations(sorted(sources), 2)
                  if rng.random() < p_bid]
    return DirectedMixedGraph(names, directed, bidirected)


def rand_rational_cpt(rng, n_contexts, card):
    """Random strictly positive rational conditional table."""
    rows = []
    for _ in range(n_contexts):
        weights = [rng.randint(1, 9) for _ in range(card)]
        total = sum(weights)
        rows.append([Fraction(w, total) for w in weights])
    return rows


def ef_table(rng, g, card=2):
    """Member of the exogenous factorization model of an unconfounded ADMG.

    The exogenous block is the induced joint of a random equation system on
    the induced bidirected subgraph (hence global Markov for it); endogenous
    vertices get random positive rational conditionals given their parents.
    """
    from admgkit import exogenous_vertices

    exo = g.sorted_by_order(exogenous_vertices(g))
    exo_table = induced_joint(
        generate_system(induced_subgraph(g, exo), seed=rng.randrange(2 ** 30),
                        outcome_card=card))
    endo = [v for v in g.vertices if v not in exo]
    cpts = {}
    for v in endo:
        pa = g.sorted_by_order(g.parents_of(v))
        cpts[v] = (pa, rand_rational_cpt(rng, card ** len(pa), card))
    space = StateSpace((v, card) for v in g.vertices)
    probs = []
    for cell in space.cells():
        val = dict(zip(space.names, cell))
        p = exo_table.prob(tuple(val[v] for v in exo))
        for v in endo:
            pa, rows = cpts[v]
            ctx = 0
            for q in pa:
                ctx = ctx * card + val[q]
            p *= rows[ctx][val[v]]
        probs.append(p)
    return JointTable(space, probs)


def factorized_table(rng, g, card=2):
    """Member of the DAG factorization model with positive rational CPTs."""
    cpts = {}
    for v in g.vertices:
        pa = g.sorted_by_order(g.parents_of(v))
        cpts[v] = (pa, rand_rational_cpt(rng, card ** len(pa), card))
    space = StateSpace((v, card) for v in g.vertices)
    probs = []
    for cell in space.cells():
        val = dict(zip(space.names, cell))
        p = Fraction(1)
        for v in g.vertices:
            pa, rows = cpts[v]
            ctx = 0
            for q in pa:
                ctx = ctx * card + val[q]
            p *= rows[ctx][val[v]]
        probs.append(p)
    return JointTable(space, probs)


def perturb_table(rng, t, strength=Fraction(1, 3)):
    """Bump one random cell and renormalize; stays exactly rational."""
    probs = list(t.probs)
    idx = rng.randrange(len(probs))
    probs[idx] += strength
    total = sum(probs)
    return JointTable(t.space, [p / total for p in probs], t.mode)


def rand_table(rng, space):
    """Random strictly positive rational joint table."""
    weights = [rng.randint(1, 19) for _ in range(space.size)]
    total = sum(weights)
    return JointTable(space, [Fraction(w, total) for w in weights])


def small_system(rng, n, max_noise_cells=512, tries=50, p_dir=0.4, p_bid=0.3):
    """Random ADMG plus generated equation system with a bounded noise space."""
    from admgkit.dist_core import DistributionError

    for _ in range(tries):
        g = rand_admg(rng, n, p_dir=p_dir, p_bid=p_bid)
        try:
            s = generate_system(g, seed=rng.randrange(2 ** 30))
        except DistributionError:
            continue
        if len(s.support) <= max_noise_cells:
            return g, s
    raise RuntimeError("could not sample a small system")
