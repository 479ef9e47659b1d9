"""Dyadic statistics computed from a lagged network.

The similarity indices treat the network as undirected: a node's neighbor
set is the union of its in- and out-neighbors (never containing the node
itself, since self-initiations are rejected at ingestion). Any common
neighbor of a dyad therefore has undirected degree at least 2, keeping
the Adamic-Adar logarithm positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .store import LaggedNetwork

# Column order of the endogenous block, as emitted by feature_block.
ENDOGENOUS_FEATURE_NAMES = (
    "memory",
    "flow",
    "common-combatants",
    "adamic-adar",
    "jaccard",
    "common-community",
    "mmsbm-prob",
    "latent-distance",
)


@dataclass(frozen=True)
class NeighborIndex:
    """Adjacency of one lagged network, precomputed for repeated lookups."""

    out_nb: dict
    in_nb: dict
    und_nb: dict
    edges: frozenset

    @staticmethod
    def from_network(net: LaggedNetwork) -> "NeighborIndex":
        out_nb = {n: set() for n in net.nodes}
        in_nb = {n: set() for n in net.nodes}
        for i, j in net.edges:
            out_nb[i].add(j)
            in_nb[j].add(i)
        und_nb = {n: frozenset((out_nb[n] | in_nb[n]) - {n}) for n in net.nodes}
        return NeighborIndex(
            out_nb={n: frozenset(v) for n, v in out_nb.items()},
            in_nb={n: frozenset(v) for n, v in in_nb.items()},
            und_nb=und_nb,
            edges=net.edges,
        )

    def degree(self, node: str) -> int:
        return len(self.und_nb[node])


def _check_dyad(i, j):
    if i == j:
        raise ValueError(f"dyadic statistic undefined on the self-pair ({i},{j})")


def memory(index: NeighborIndex, i: str, j: str) -> float:
    """1 if the focal directed edge occurred anywhere in the window."""
    _check_dyad(i, j)
    return 1.0 if (i, j) in index.edges else 0.0


def flow(index: NeighborIndex, i: str, j: str, exclude_focal: bool = False) -> float:
    """Binary out-degree of the sender times binary in-degree of the
    receiver. The focal edge itself contributes to both counts by default;
    exclude_focal removes it from each side."""
    _check_dyad(i, j)
    out_d = len(index.out_nb[i])
    in_d = len(index.in_nb[j])
    if exclude_focal and (i, j) in index.edges:
        out_d -= 1
        in_d -= 1
    return float(out_d * in_d)


def common_combatants(index: NeighborIndex, i: str, j: str) -> float:
    """Count of shared undirected neighbors other than the dyad members."""
    _check_dyad(i, j)
    return float(len((index.und_nb[i] & index.und_nb[j]) - {i, j}))


def adamic_adar(index: NeighborIndex, i: str, j: str) -> float:
    """Common neighbors weighted by 1/ln(undirected degree)."""
    _check_dyad(i, j)
    shared = (index.und_nb[i] & index.und_nb[j]) - {i, j}
    return float(sum(1.0 / math.log(index.degree(k)) for k in shared))


def jaccard(index: NeighborIndex, i: str, j: str) -> float:
    """Shared neighbors over the neighbor union, both sets stripped of the
    dyad members themselves; 0 when the union is empty."""
    _check_dyad(i, j)
    ni = index.und_nb[i] - {j}
    nj = index.und_nb[j] - {i}
    union = ni | nj
    if not union:
        return 0.0
    return len(ni & nj) / len(union)


def feature_block(net: LaggedNetwork, dyads, bundle, exclude_focal_flow: bool = False) -> np.ndarray:
    """The eight endogenous statistics for an ordered dyad list.

    bundle carries the latent-structure fits (community partition, block
    model, latent space) already computed on this same network. Columns
    follow ENDOGENOUS_FEATURE_NAMES; rows align with dyads.
    """
    index = NeighborIndex.from_network(net)
    out = np.empty((len(dyads), len(ENDOGENOUS_FEATURE_NAMES)))
    for row, (i, j) in enumerate(dyads):
        out[row, 0] = memory(index, i, j)
        out[row, 1] = flow(index, i, j, exclude_focal=exclude_focal_flow)
        out[row, 2] = common_combatants(index, i, j)
        out[row, 3] = adamic_adar(index, i, j)
        out[row, 4] = jaccard(index, i, j)
        out[row, 5] = 1.0 if bundle.partition.same_community(i, j) else 0.0
        out[row, 6] = bundle.mmsbm.prob(i, j)
        out[row, 7] = bundle.latent.distance(i, j)
    return out
