"""Shared test utilities: tiny graph builders and independent oracles.

Everything here is deliberately written from scratch (loops and dicts,
no reuse of library internals) so that agreement between a library
routine and its oracle is meaningful evidence.
"""

from collections import Counter

import numpy as np

from dyadcast import EventPanel, LaggedNetwork, LatentConfig


def make_net(edges, nodes=(), window=(1, 1)):
    edges = frozenset(tuple(e) for e in edges)
    node_set = set(nodes)
    for i, j in edges:
        node_set.add(i)
        node_set.add(j)
    return LaggedNetwork(window=window, edges=edges, nodes=frozenset(node_set))


def make_panel(events, registry=None):
    """events: iterable of (sender, receiver, period)."""
    events = tuple(events)
    if registry is None:
        registry = EventPanel.infer_registry(events)
    return EventPanel(events=events, registry=registry)


def tiny_latent_config():
    """Small iteration budgets: plenty for toy graphs, fast in loops."""
    return LatentConfig(
        walk_length=3,
        mmsbm_k=2,
        mmsbm_restarts=2,
        mmsbm_max_iter=60,
        mmsbm_tol=1e-6,
        latent_dim=2,
        latent_tau=0.1,
        latent_starts=1,
        latent_max_iter=60,
    )


class StubPartition:
    def __init__(self, labels):
        self.labels = labels

    def same_community(self, i, j):
        return self.labels[i] == self.labels[j]


class StubMMSBM:
    def __init__(self, probs):
        self.probs = probs

    def prob(self, i, j):
        return self.probs[(i, j)]


class StubLatent:
    def __init__(self, dists):
        self.dists = dists

    def distance(self, i, j):
        return self.dists[(i, j)]


class StubBundle:
    """Hand-specified latent fits, for pinning column placement."""

    def __init__(self, labels, probs, dists):
        self.partition = StubPartition(labels)
        self.mmsbm = StubMMSBM(probs)
        self.latent = StubLatent(dists)


# ---------------------------------------------------------------- metrics

def mann_whitney_auc(scores, labels):
    """Pairwise concordance with half credit for ties."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    gt = float((pos[:, None] > neg[None, :]).sum())
    eq = float((pos[:, None] == neg[None, :]).sum())
    return (gt + 0.5 * eq) / (len(pos) * len(neg))


def average_precision_oracle(scores, labels):
    """Group-by-distinct-score average precision, dict-and-loop style.

    Every positive in a tied group is credited the precision at the end
    of that group.
    """
    pairs = sorted(zip(scores, labels), key=lambda t: -t[0])
    total_pos = sum(1 for _, y in pairs if y == 1)
    tp = 0
    seen = 0
    total = 0.0
    idx = 0
    n = len(pairs)
    while idx < n:
        j = idx
        group_pos = 0
        while j < n and pairs[j][0] == pairs[idx][0]:
            group_pos += int(pairs[j][1] == 1)
            j += 1
        tp += group_pos
        seen = j
        total += group_pos * (tp / seen)
        idx = j
    return total / total_pos


def expected_ap_random(n, p):
    """Exact mean average precision when p positives land uniformly among
    n distinct ranks."""
    harmonic = sum(1.0 / k for k in range(1, n + 1))
    return (p - 1) / (n - 1) + (n - p) * harmonic / (n * (n - 1))


# ----------------------------------------------------------- partitions

def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [part[k] | {first}] + part[k + 1:]
        yield part + [{first}]


def modularity_oracle(n_nodes, und_edges, groups):
    """Newman modularity computed the slow, obvious way."""
    m = len(und_edges)
    if m == 0:
        return 0.0
    deg = Counter()
    for a, b in und_edges:
        deg[a] += 1
        deg[b] += 1
    q = 0.0
    for g in groups:
        within = sum(1 for a, b in und_edges if a in g and b in g)
        total_deg = sum(deg[v] for v in g)
        q += within / m - (total_deg / (2.0 * m)) ** 2
    return q


def best_modularity_partition(n_nodes, und_edges):
    """Exhaustive argmax over all set partitions. Returns (groups, q,
    unique) where groups is a frozenset of frozensets and unique says the
    argmax was strict (beyond 1e-12)."""
    best_q = -np.inf
    best = None
    near = 0
    for part in set_partitions(range(n_nodes)):
        q = modularity_oracle(n_nodes, und_edges, part)
        if q > best_q + 1e-12:
            best_q = q
            best = frozenset(frozenset(g) for g in part)
            near = 1
        elif abs(q - best_q) <= 1e-12:
            near += 1
    return best, best_q, near == 1


def partition_as_groups(labels):
    """{node: label} -> frozenset of frozensets of nodes."""
    groups = {}
    for node, lab in labels.items():
        groups.setdefault(lab, set()).add(node)
    return frozenset(frozenset(g) for g in groups.values())


# ------------------------------------------------------------- rankings

def rankdata_avg(values):
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j < len(values) and values[order[j]] == values[order[i]]:
            j += 1
        avg = 0.5 * (i + j - 1) + 1.0
        for k in range(i, j):
            ranks[order[k]] = avg
        i = j
    return ranks


def spearman(x, y):
    rx = rankdata_avg(x)
    ry = rankdata_avg(y)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float(np.sum(rx * ry) / np.sqrt(np.sum(rx**2) * np.sum(ry**2)))
