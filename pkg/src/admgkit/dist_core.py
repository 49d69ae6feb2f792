"""Exact finite joint distributions, kernels, and the fixing operator.

Tables are flat row-major arrays with the LAST variable fastest-varying.
Two arithmetic modes exist: exact rationals (``fractions.Fraction``, the
default for anything that must be bit-exact) and float64 with a per-cell
tolerance.  Every checker skips undefined kernel slices and reports how
many it skipped.
"""

import itertools
import json
from fractions import Fraction
from typing import Iterable

from .graph_core import CondADMG
from .walk_algebra import markov_background

__all__ = [
    "DistributionError",
    "STATE_SPACE_CAP",
    "StateSpace",
    "JointTable",
    "Kernel",
    "marginal",
    "ci_holds",
    "ci_violation",
    "fix_dist",
    "extended_ci_holds",
    "extended_ci_violation",
    "table_to_json",
    "table_from_json",
]

STATE_SPACE_CAP = 10 ** 6
DEFAULT_TOL = 1e-9


class DistributionError(ValueError):
    """Invalid distribution, kernel, or query."""


class StateSpace:
    """Ordered list of named finite variables with index arithmetic."""

    __slots__ = ("variables", "names", "cards", "size", "_strides", "_pos")

    def __init__(self, variables: Iterable[tuple[str, int]]):
        variables = tuple((str(n), int(c)) for n, c in variables)
        names = tuple(n for n, _ in variables)
        if len(set(names)) != len(names):
            raise DistributionError("duplicate variable name")
        cards = tuple(c for _, c in variables)
        if any(c < 1 for c in cards):
            raise DistributionError("cardinalities must be at least 1")
        size = 1
        for c in cards:
            size *= c
            if size > STATE_SPACE_CAP:
                raise DistributionError(
                    f"state space exceeds cap of {STATE_SPACE_CAP} cells")
        strides = [1] * len(cards)
        for i in range(len(cards) - 2, -1, -1):
            strides[i] = strides[i + 1] * cards[i + 1]
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "cards", cards)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "_strides", tuple(strides))
        object.__setattr__(self, "_pos", {n: i for i, n in enumerate(names)})

    def __setattr__(self, name, value):
        raise AttributeError("StateSpace is immutable")

    def __eq__(self, other):
        if not isinstance(other, StateSpace):
            return NotImplemented
        return self.variables == other.variables

    def __hash__(self):
        return hash(self.variables)

    def __repr__(self):
        return f"StateSpace({list(self.variables)})"

    def position(self, name: str) -> int:
        if name not in self._pos:
            raise DistributionError(f"unknown variable {name!r}")
        return self._pos[name]

    def index(self, assignment: tuple) -> int:
        return sum(v * s for v, s in zip(assignment, self._strides))

    def assignment(self, index: int) -> tuple:
        out = []
        for s, c in zip(self._strides, self.cards):
            out.append((index // s) % c)
        return tuple(out)

    def cells(self):
        """Iterate all assignments in row-major order (last variable fastest)."""
        for i in range(self.size):
            yield self.assignment(i)

    def subspace(self, names: Iterable[str]) -> "StateSpace":
        keep = set(names)
        for n in keep:
            self.position(n)
        return StateSpace((n, c) for n, c in self.variables if n in keep)


class JointTable:
    """Exact joint probability table over a :class:`StateSpace`."""

    __slots__ = ("space", "probs", "mode", "_marg_cache", "_root")

    def __init__(self, space: StateSpace, probs, mode: str = "rational"):
        if mode not in ("rational", "float"):
            raise DistributionError(f"unknown arithmetic mode {mode!r}")
        probs = list(probs)
        if len(probs) != space.size:
            raise DistributionError(
                f"expected {space.size} entries, got {len(probs)}")
        if mode == "rational":
            probs = [p if isinstance(p, Fraction) else Fraction(p) for p in probs]
        else:
            probs = [float(p) for p in probs]
        if any(p < 0 for p in probs):
            raise DistributionError("negative probability entry")
        total = sum(probs)
        if mode == "rational":
            if total != 1:
                raise DistributionError(f"entries sum to {total}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise DistributionError(f"entries sum to {total!r}, not 1")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "probs", tuple(probs))
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "_marg_cache", {})
        object.__setattr__(self, "_root", self)

    def __setattr__(self, name, value):
        raise AttributeError("JointTable is immutable")

    def __eq__(self, other):
        if not isinstance(other, JointTable):
            return NotImplemented
        return (self.space == other.space and self.mode == other.mode
                and self.probs == other.probs)

    def __hash__(self):
        return hash((self.space, self.mode, self.probs))

    def __repr__(self):
        return f"JointTable({self.space!r}, mode={self.mode!r})"

    @classmethod
    def uniform(cls, space: StateSpace, mode: str = "rational") -> "JointTable":
        if mode == "rational":
            p = Fraction(1, space.size)
        else:
            p = 1.0 / space.size
        return cls(space, [p] * space.size, mode)

    def prob(self, assignment: tuple):
        return self.probs[self.space.index(assignment)]

    def marginal(self, keep: Iterable[str]) -> "JointTable":
        """Sum out every variable not in ``keep``; variable order preserved.

        Results are cached on the original table, shared by all tables
        derived from it, and each new marginal is accumulated from the
        smallest already-computed superset.
        """
        keep_set = frozenset(keep)
        for n in keep_set:
            self.space.position(n)
        root = self._root
        cached = root._marg_cache.get(keep_set)
        if cached is not None:
            return cached
        source = root
        for key, table in root._marg_cache.items():
            if keep_set <= key and table.space.size < source.space.size:
                source = table
        sub = source.space.subspace(keep_set)
        stride = {n: sub._strides[i] for i, n in enumerate(sub.names)}
        smap = [(i, stride[n]) for i, n in enumerate(source.space.names)
                if n in keep_set]
        zero = Fraction(0) if self.mode == "rational" else 0.0
        out = [zero] * sub.size
        ranges = [range(c) for c in source.space.cards]
        probs = source.probs
        for idx, cell in enumerate(itertools.product(*ranges)):
            out[sum(cell[i] * s for i, s in smap)] += probs[idx]
        table = JointTable(sub, out, self.mode)
        object.__setattr__(table, "_root", root)
        root._marg_cache[keep_set] = table
        return table


def marginal(t: JointTable, keep: Iterable[str]) -> JointTable:
    return t.marginal(keep)


def _values_equal(a, b, mode: str, tol: float) -> bool:
    if mode == "rational":
        return a == b
    return abs(a - b) <= tol


def _stride_map(sub: StateSpace, parent: StateSpace):
    """(parent position, sub stride) pairs mapping parent cells to sub indices."""
    return [(parent.position(n), sub._strides[i]) for i, n in enumerate(sub.names)]


def ci_violation(t: JointTable, J, K, L=frozenset(), tol: float = DEFAULT_TOL):
    """First witness of J not independent of K given L, or None.

    Checks p(j,k | l) = p(j | l) * p(k | l) at every context with
    p(l) > 0; zero-probability contexts are vacuous.
    """
    J, K, L = list(J), list(K), list(L)
    names = set(J) | set(K) | set(L)
    if len(names) != len(J) + len(K) + len(L) or not J or not K:
        raise DistributionError("conditional independence query sets must be "
                                "disjoint with J, K nonempty")
    m = t.marginal(names)
    m_jl = m.marginal(set(J) | set(L))
    m_kl = m.marginal(set(K) | set(L))
    m_l = m.marginal(set(L))
    map_jl = _stride_map(m_jl.space, m.space)
    map_kl = _stride_map(m_kl.space, m.space)
    map_l = _stride_map(m_l.space, m.space)
    p = m.probs
    p_jl, p_kl, p_l = m_jl.probs, m_kl.probs, m_l.probs
    ranges = [range(c) for c in m.space.cards]
    for idx, cell in enumerate(itertools.product(*ranges)):
        pl = p_l[sum(cell[i] * s for i, s in map_l)]
        if pl == 0:
            continue
        lhs = p[idx] * pl
        rhs = (p_jl[sum(cell[i] * s for i, s in map_jl)]
               * p_kl[sum(cell[i] * s for i, s in map_kl)])
        if lhs != rhs:
            # compare at conditional scale, matching the rational fast path
            lhs_c = p[idx] / pl
            rhs_c = rhs / (pl * pl)
            if not _values_equal(lhs_c, rhs_c, t.mode, tol):
                witness = dict(zip(m.space.names, cell))
                return witness, float(abs(lhs_c - rhs_c))
    return None


def ci_holds(t: JointTable, J, K, L=frozenset(), tol: float = DEFAULT_TOL) -> bool:
    """True iff J is independent of K given L under ``t``."""
    return ci_violation(t, J, K, L, tol) is None


class Kernel:
    """Family of joint tables over remaining variables, indexed by fixed
    assignments.  Slices may be ``None`` (undefined on a zero-probability
    fixed context); checkers skip those and count them."""

    __slots__ = ("fixed_space", "remaining_space", "tables", "mode")

    def __init__(self, fixed_space: StateSpace, remaining_space: StateSpace,
                 tables: dict, mode: str):
        object.__setattr__(self, "fixed_space", fixed_space)
        object.__setattr__(self, "remaining_space", remaining_space)
        object.__setattr__(self, "tables", dict(tables))
        object.__setattr__(self, "mode", mode)
        if len(self.tables) != fixed_space.size:
            raise DistributionError("kernel must have one slice per fixed assignment")

    def __setattr__(self, name, value):
        raise AttributeError("Kernel is immutable")

    @classmethod
    def from_table(cls, t: JointTable) -> "Kernel":
        return cls(StateSpace(()), t.space, {(): t}, t.mode)

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        return (self.fixed_space == other.fixed_space
                and self.remaining_space == other.remaining_space
                and self.tables == other.tables)

    def undefined_slices(self) -> int:
        return sum(1 for t in self.tables.values() if t is None)


def fix_dist(k: Kernel, c: CondADMG, v: str) -> Kernel:
    """Fix variable ``v`` of a kernel: divide each slice by the conditional
    of ``v`` given its Markov background in ``c``.

    The Markov background may contain fixed vertices; those are implied by
    the slice context, so the division conditions on the background's random
    part within each slice.  A new slice that no longer sums to one lost
    mass on a zero-probability event and is flagged undefined.
    """
    from .graph_transform import is_fixable  # local import to avoid a cycle

    if v not in k.remaining_space.names:
        raise DistributionError(f"variable {v} is not random in the kernel")
    if not is_fixable(c, v):
        raise DistributionError(f"vertex {v} is not fixable in the current graph")
    mbg = markov_background(c.graph, v)
    cond_vars = [n for n in k.remaining_space.names if n in mbg]
    v_pos = k.remaining_space.position(v)
    card_v = k.remaining_space.cards[v_pos]
    new_remaining = StateSpace(
        (n, cd) for n, cd in k.remaining_space.variables if n != v)
    new_fixed = StateSpace(tuple(k.fixed_space.variables) + ((v, card_v),))
    rem_positions = [k.remaining_space.position(n) for n in new_remaining.names]
    zero = Fraction(0) if k.mode == "rational" else 0.0

    new_tables = {}
    for assign, t in k.tables.items():
        if t is None:
            for val in range(card_v):
                new_tables[assign + (val,)] = None
            continue
        num = t.marginal(set(cond_vars) | {v})
        den = t.marginal(cond_vars)
        num_pos = [t.space.position(n) for n in num.space.names]
        den_pos = [t.space.position(n) for n in den.space.names]
        per_val = {val: [zero] * new_remaining.size for val in range(card_v)}
        for idx in range(t.space.size):
            cell = t.space.assignment(idx)
            p = t.probs[idx]
            val = cell[v_pos]
            n_ = num.probs[num.space.index(tuple(cell[p_] for p_ in num_pos))]
            d_ = den.probs[den.space.index(tuple(cell[p_] for p_ in den_pos))]
            if n_ == 0:
                q = zero  # then p == 0 as well
            else:
                q = p * d_ / n_
            per_val[val][new_remaining.index(tuple(cell[p_] for p_ in rem_positions))] += q
        for val in range(card_v):
            total = sum(per_val[val])
            if k.mode == "rational":
                defined = total == 1
                entries = per_val[val]
            else:
                defined = abs(total - 1.0) <= 1e-9
                entries = [x / total for x in per_val[val]] if defined else None
            if defined:
                new_tables[assign + (val,)] = JointTable(
                    new_remaining, entries, k.mode)
            else:
                new_tables[assign + (val,)] = None
    return Kernel(new_fixed, new_remaining, new_tables, k.mode)


def _resolve_extended_query(k: Kernel, K, L, M):
    K, L, M = frozenset(K), frozenset(L), frozenset(M)
    if (K & L) or (K & M) or (L & M):
        raise DistributionError("extended query sets must be pairwise disjoint")
    fixed = set(k.fixed_space.names)
    if K & fixed:
        if L & fixed:
            raise DistributionError(
                "at most one of K and L may contain fixed variables")
        K, L = L, K
    return K, L, M


def extended_ci_violation(k: Kernel, K, L, M=frozenset(), tol: float = DEFAULT_TOL):
    """First witness against K independent of L given M in the kernel, or None.

    The conditional of K given ((L | M) minus fixed) must not vary with the
    random part of L within a slice nor with the fixed part of L across
    slices.  Fixed variables outside L belong to the kernel's context:
    dependence on them is allowed.
    """
    K, L, M = _resolve_extended_query(k, K, L, M)
    fixed_names = k.fixed_space.names
    if not K or not L:
        return None
    rand_names = set(k.remaining_space.names)
    for n in K | L | M:
        if n not in rand_names and n not in fixed_names:
            raise DistributionError(f"unknown variable {n!r}")
    cond_vars = (L | M) - set(fixed_names)
    context_fixed_pos = [i for i, n in enumerate(fixed_names) if n not in L]
    groups = {}
    for assign, t in k.tables.items():
        if t is None:
            continue
        joint = t.marginal(K | cond_vars)
        den = joint.marginal(cond_vars)
        k_pos = [joint.space.position(n) for n in joint.space.names if n in K]
        m_pos = [joint.space.position(n) for n in joint.space.names if n in M]
        den_pos = [joint.space.position(n) for n in joint.space.names
                   if n in cond_vars]
        ctx_fixed = tuple(assign[i] for i in context_fixed_pos)
        for idx in range(joint.space.size):
            cell = joint.space.assignment(idx)
            d = den.probs[den.space.index(tuple(cell[p] for p in den_pos))]
            if d == 0:
                continue
            value = joint.probs[idx] / d
            key = (tuple(cell[p] for p in k_pos), tuple(cell[p] for p in m_pos),
                   ctx_fixed)
            if key not in groups:
                groups[key] = (value, assign, cell)
            else:
                ref, ref_assign, ref_cell = groups[key]
                if not _values_equal(value, ref, k.mode, tol):
                    witness = {
                        "context": dict(zip(fixed_names, ref_assign))
                        | dict(zip(joint.space.names, ref_cell)),
                        "other": dict(zip(fixed_names, assign))
                        | dict(zip(joint.space.names, cell)),
                    }
                    return witness, float(abs(value - ref))
    return None


def extended_ci_holds(k: Kernel, K, L, M=frozenset(), tol: float = DEFAULT_TOL) -> bool:
    """Extended conditional independence of K and L given M in a kernel."""
    return extended_ci_violation(k, K, L, M, tol) is None


def table_to_json(t: JointTable) -> str:
    """Distribution file format: vars, mode, row-major probs (rationals as "p/q")."""
    if t.mode == "rational":
        probs = [f"{p.numerator}/{p.denominator}" for p in t.probs]
    else:
        probs = list(t.probs)
    doc = {
        "vars": [{"name": n, "card": c} for n, c in t.space.variables],
        "mode": t.mode,
        "probs": probs,
    }
    return json.dumps(doc, indent=2) + "\n"


def table_from_json(text: str) -> JointTable:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionError(f"invalid JSON: {exc}") from exc
    try:
        space = StateSpace((v["name"], v["card"]) for v in doc["vars"])
        mode = doc["mode"]
        raw = doc["probs"]
    except (KeyError, TypeError) as exc:
        raise DistributionError(f"missing distribution field: {exc}") from exc
    if mode == "rational":
        probs = [Fraction(p) for p in raw]
    elif mode == "float":
        probs = [float(p) for p in raw]
    else:
        raise DistributionError(f"unknown arithmetic mode {mode!r}")
    return JointTable(space, probs, mode)
