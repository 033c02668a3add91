"""Core reaction-network model: species, complexes, reactions and matrices.

A network is a finite list of species together with directed reactions
between complexes (formal non-negative rational combinations of species).
Everything is immutable and exact; graph and rank computations are done
over the rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .rational import RAT, ZERO, rat, rat_str


@dataclass(frozen=True)
class Species:
    """A chemical species: dense index plus display name."""

    index: int
    name: str


@dataclass(frozen=True)
class Complex:
    """Sparse formal combination of species, e.g. X2 + X3 or 2 X2.

    ``coeffs`` holds (species_index, coefficient) pairs sorted by index with
    no zero coefficients; the empty tuple is the zero complex.  Coefficients
    may be any rational (negative values never occur in parsed user input
    but are permitted so projected and derived constructions cannot fail).
    """

    coeffs: tuple = ()

    @staticmethod
    def make(mapping: Mapping[int, object]) -> "Complex":
        items = []
        for idx, c in mapping.items():
            c = rat(c)
            if c != ZERO:
                items.append((int(idx), c))
        items.sort()
        return Complex(tuple(items))

    def coeff(self, index: int):
        for idx, c in self.coeffs:
            if idx == index:
                return c
        return ZERO

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def support(self) -> tuple:
        return tuple(idx for idx, _ in self.coeffs)

    def vector(self, m: int) -> tuple:
        """Dense length-m coefficient vector."""
        v = [ZERO] * m
        for idx, c in self.coeffs:
            v[idx] = c
        return tuple(v)

    def format(self, species: Sequence[Species]) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for idx, c in self.coeffs:
            name = species[idx].name
            parts.append(name if c == 1 else f"{rat_str(c)} {name}")
        return " + ".join(parts)


@dataclass(frozen=True)
class Reaction:
    source: Complex
    target: Complex

    @property
    def is_self_loop(self) -> bool:
        return self.source == self.target

    def reversed(self) -> "Reaction":
        return Reaction(self.target, self.source)

    def format(self, species: Sequence[Species]) -> str:
        return f"{self.source.format(species)} -> {self.target.format(species)}"


@dataclass(frozen=True)
class ReactionNetwork:
    """A chemical reaction network (species, complexes, reactions).

    ``allow_self_loops`` is set only on networks produced by projection or
    reduction; user input networks reject self-loop reactions.
    """

    species: tuple
    reactions: tuple
    allow_self_loops: bool = False
    name: str = ""

    def __post_init__(self):
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise ValueError("species names must be unique")
        for i, s in enumerate(self.species):
            if s.index != i:
                raise ValueError("species indices must be contiguous from 0")
        m = len(self.species)
        for rxn in self.reactions:
            for cx in (rxn.source, rxn.target):
                if any(idx < 0 or idx >= m for idx, _ in cx.coeffs):
                    raise ValueError("complex references unknown species index")
            if rxn.is_self_loop and not self.allow_self_loops:
                raise ValueError(f"self-loop reaction not allowed: {rxn.format(self.species)}")

    @property
    def num_species(self) -> int:
        return len(self.species)

    @property
    def num_reactions(self) -> int:
        return len(self.reactions)

    def species_names(self) -> tuple:
        return tuple(s.name for s in self.species)

    def complexes(self) -> tuple:
        """Distinct complexes in first-appearance order (sources before targets per reaction)."""
        seen = {}
        for rxn in self.reactions:
            for cx in (rxn.source, rxn.target):
                if cx not in seen:
                    seen[cx] = len(seen)
        return tuple(seen)

    def unused_species(self) -> tuple:
        """Species indices appearing in no complex (flagged in reports, still classified)."""
        used = set()
        for rxn in self.reactions:
            used.update(rxn.source.support())
            used.update(rxn.target.support())
        return tuple(i for i in range(self.num_species) if i not in used)

    def permuted(self, species_perm: Sequence[int], reaction_perm: Sequence[int]) -> "ReactionNetwork":
        """Network with species and reactions relabelled (test helper; classification-invariant)."""
        inv = [0] * len(species_perm)
        for new, old in enumerate(species_perm):
            inv[old] = new

        def remap(cx: Complex) -> Complex:
            return Complex.make({inv[idx]: c for idx, c in cx.coeffs})

        species = tuple(Species(i, self.species[old].name) for i, old in enumerate(species_perm))
        reactions = tuple(
            Reaction(remap(self.reactions[k].source), remap(self.reactions[k].target)) for k in reaction_perm
        )
        return ReactionNetwork(species, reactions, self.allow_self_loops, self.name)


@dataclass(frozen=True)
class NetworkMatrices:
    """Stoichiometric and source matrices, one column per reaction.

    gamma column k is target - source of reaction k; y_source column k is
    the source complex of reaction k.  Repeated source complexes appear as
    repeated columns on purpose.
    """

    gamma: tuple  # tuple of r columns, each a length-m tuple
    y_source: tuple
    m: int
    r: int

    def gamma_col(self, k: int) -> tuple:
        return self.gamma[k]

    def y_col(self, k: int) -> tuple:
        return self.y_source[k]


def build_matrices(net: ReactionNetwork) -> NetworkMatrices:
    """Build (gamma, y_source) for a network with at least one reaction."""
    if net.num_reactions == 0:
        raise ValueError("network has no reactions; matrices are undefined")
    m = net.num_species
    gamma = []
    ysrc = []
    for rxn in net.reactions:
        src = rxn.source.vector(m)
        tgt = rxn.target.vector(m)
        gamma.append(tuple(t - s for s, t in zip(src, tgt)))
        ysrc.append(src)
    return NetworkMatrices(tuple(gamma), tuple(ysrc), m, net.num_reactions)


def rational_rank(columns: Iterable[Sequence]) -> int:
    """Rank of the matrix with the given columns, by exact Gaussian elimination."""
    rows = [list(col) for col in columns]  # eliminate on columns-as-rows; rank is symmetric
    rank = 0
    ncols = len(rows[0]) if rows else 0
    pivot_col = 0
    while rank < len(rows) and pivot_col < ncols:
        pivot = None
        for i in range(rank, len(rows)):
            if rows[i][pivot_col] != ZERO:
                pivot = i
                break
        if pivot is None:
            pivot_col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pr = rows[rank]
        pv = pr[pivot_col]
        for i in range(rank + 1, len(rows)):
            f = rows[i][pivot_col]
            if f != ZERO:
                ratio = f / pv
                rows[i] = [a - ratio * b for a, b in zip(rows[i], pr)]
        rank += 1
        pivot_col += 1
    return rank


def stoichiometric_dimension(net: ReactionNetwork) -> int:
    """Dimension of the stoichiometric subspace span{target-source}."""
    mats = build_matrices(net)
    return rational_rank(mats.gamma)


def _complex_graph(net: ReactionNetwork):
    """Deduplicated complexes and directed edges between their indices."""
    cxs = net.complexes()
    index = {cx: i for i, cx in enumerate(cxs)}
    edges = [(index[r.source], index[r.target]) for r in net.reactions]
    return cxs, edges


def linkage_classes(net: ReactionNetwork) -> tuple:
    """Partition of the deduplicated complex set into undirected components."""
    cxs, edges = _complex_graph(net)
    parent = list(range(len(cxs)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[rv] = ru
    groups = {}
    for i, cx in enumerate(cxs):
        groups.setdefault(find(i), []).append(cx)
    # first-appearance order of each class
    return tuple(tuple(g) for g in groups.values())


def _strongly_connected_components(n: int, edges) -> list:
    """Iterative Tarjan SCC; returns component id per vertex."""
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for i in range(pi, len(adj[v])):
                w = adj[v][i]
                if index[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return comp


def is_weakly_reversible(net: ReactionNetwork) -> bool:
    """True iff every linkage class is a single strongly connected component."""
    cxs, edges = _complex_graph(net)
    if not cxs:
        return True
    comp = _strongly_connected_components(len(cxs), edges)
    return all(comp[u] == comp[v] for u, v in edges)


def is_reversible(net: ReactionNetwork) -> bool:
    """True iff the reaction set is closed under swapping source and target."""
    rset = {(r.source, r.target) for r in net.reactions}
    return all((t, s) in rset for s, t in rset)
