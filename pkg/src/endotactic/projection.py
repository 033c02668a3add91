"""Single-species networks and directional projections.

Projecting every complex of a network onto a direction w collapses it to a
network over one abstract species, where each reaction becomes a pair of
rational scalars (source value, target value).  Self-loops and repeated
pairs are kept: classification of the projected network is what decides
whether w witnesses a violation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .network import ReactionNetwork
from .rational import dot, rat


class SingleSpeciesVerdict(enum.IntEnum):
    NOT_ENDOTACTIC = 0
    ENDOTACTIC_ONLY = 1
    STRONGLY_ENDOTACTIC = 2


@dataclass(frozen=True)
class SingleSpeciesNetwork:
    """Multiset of scalar reactions (source, target); self-loops permitted."""

    reactions: tuple  # tuple of (source, target) rational pairs

    def __len__(self):
        return len(self.reactions)

    def sources(self) -> tuple:
        return tuple(s for s, _ in self.reactions)

    def mirrored(self) -> "SingleSpeciesNetwork":
        return SingleSpeciesNetwork(tuple((-s, -t) for s, t in self.reactions))


def project(net: ReactionNetwork, w) -> SingleSpeciesNetwork:
    """The w-projected network: reaction y -> y' maps to (w.y -> w.y')."""
    w = tuple(rat(c) for c in w)
    if len(w) != net.num_species:
        raise ValueError(f"direction has length {len(w)}, expected {net.num_species}")
    m = net.num_species
    rxns = []
    for rxn in net.reactions:
        rxns.append((dot(w, rxn.source.vector(m)), dot(w, rxn.target.vector(m))))
    return SingleSpeciesNetwork(tuple(rxns))


def proper_subnetwork(ssn: SingleSpeciesNetwork) -> SingleSpeciesNetwork:
    """Drop all self-loop reactions (and with them, self-loop-only sources)."""
    return SingleSpeciesNetwork(tuple((s, t) for s, t in ssn.reactions if s != t))


def _is_strongly_endotactic(ssn: SingleSpeciesNetwork) -> bool:
    """Exact test of the strong condition on a single-species network.

    A reaction pointing down must be covered by an up reaction from the
    minimal source complex (which therefore must not point down itself),
    and symmetrically for reactions pointing up.  Vacuously true when every
    reaction is a self-loop or the network is empty.
    """
    down = set()
    up = set()
    for s, t in ssn.reactions:
        if t < s:
            down.add(s)
        elif t > s:
            up.add(s)
    if not down and not up:
        return True
    sources = ssn.sources()
    lo = min(sources)
    hi = max(sources)
    if down and (lo not in up or lo in down):
        return False
    if up and (hi not in down or hi in up):
        return False
    return True


def satisfies_down_covering(ssn: SingleSpeciesNetwork) -> bool:
    """One-sided endotactic condition: every reaction with target < source
    has an up reaction from a strictly smaller source.

    This is the condition that a nonnegative direction must satisfy for the
    network to be lower endotactic; the full endotactic condition is this
    plus its mirror image.
    """
    up_sources = [s for s, t in ssn.reactions if t > s]
    for s, t in ssn.reactions:
        if t < s and not any(u < s for u in up_sources):
            return False
    return True


def classify_single_species(ssn: SingleSpeciesNetwork) -> SingleSpeciesVerdict:
    """Three-level verdict for a single-species network.

    The network is endotactic exactly when its proper subnetwork is strongly
    endotactic; a strongly endotactic network is in particular endotactic.
    """
    if _is_strongly_endotactic(ssn):
        return SingleSpeciesVerdict.STRONGLY_ENDOTACTIC
    if _is_strongly_endotactic(proper_subnetwork(ssn)):
        return SingleSpeciesVerdict.ENDOTACTIC_ONLY
    return SingleSpeciesVerdict.NOT_ENDOTACTIC
