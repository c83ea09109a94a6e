"""Downstream evaluation on a user/source/article information graph.

LLM-detected communities are written back into the graph as user-user
cliques; the effect is measured by K-means purity of user embeddings
against labels propagated down from news sources.
"""

from __future__ import annotations

import csv
import itertools
import random
from collections import Counter
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np
from sklearn.cluster import KMeans

USER, SOURCE, ARTICLE = "user", "source", "article"
NODE_KINDS = (USER, SOURCE, ARTICLE)
EDGE_KINDS = {
    frozenset({USER}): "user-user",
    frozenset({USER, SOURCE}): "user-source",
    frozenset({SOURCE, ARTICLE}): "source-article",
    frozenset({USER, ARTICLE}): "user-article",
}
# worst factuality first: ties resolve toward it
FACTUALITY_TIE_ORDER = ("low", "mixed", "high")
NEIGHBOR_POOL = 20
SAMPLED_NEIGHBORS = 5


class SocialGraph:
    """Typed undirected graph backed by :class:`networkx.Graph`."""

    def __init__(self) -> None:
        self.g = nx.Graph()

    def add_node(self, node_id: str, kind: str, *, split: str = "test", **attrs) -> None:
        if kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {kind!r}")
        self.g.add_node(node_id, kind=kind, split=split, **attrs)

    def add_user(self, user_id: str, **attrs) -> None:
        self.add_node(user_id, USER, **attrs)

    def add_source(self, source_id: str, factuality: str | None = None, bias: str | None = None, **attrs) -> None:
        self.add_node(source_id, SOURCE, factuality=factuality, bias=bias, **attrs)

    def add_article(self, article_id: str, **attrs) -> None:
        self.add_node(article_id, ARTICLE, **attrs)

    def kind(self, node_id: str) -> str:
        return self.g.nodes[node_id]["kind"]

    def add_edge(self, a: str, b: str) -> bool:
        """Add a typed edge; returns False if it already existed."""
        for n in (a, b):
            if n not in self.g:
                raise KeyError(f"unknown node {n!r}")
        kind = EDGE_KINDS.get(frozenset({self.kind(a), self.kind(b)}))
        if kind is None:
            raise ValueError(f"edge {self.kind(a)}-{self.kind(b)} is not allowed")
        if a == b or self.g.has_edge(a, b):
            return False
        self.g.add_edge(a, b, kind=kind)
        return True

    def nodes_of(self, kind: str) -> list[str]:
        return sorted(n for n, d in self.g.nodes(data=True) if d["kind"] == kind)

    def users(self) -> list[str]:
        return self.nodes_of(USER)

    def user_neighbors(self, user_id: str) -> list[str]:
        return sorted(n for n in self.g.neighbors(user_id) if self.kind(n) == USER)

    def is_inductive(self, train_split: str = "train", test_split: str = "test") -> bool:
        """True when no edge joins a train node to a test node."""
        splits = nx.get_node_attributes(self.g, "split")
        return not any(
            {splits[a], splits[b]} == {train_split, test_split} for a, b in self.g.edges()
        )

    def subgraph(self, split: str) -> "SocialGraph":
        out = SocialGraph()
        out.g = self.g.subgraph(n for n, d in self.g.nodes(data=True) if d.get("split") == split).copy()
        return out

    def user_edge_count(self) -> int:
        return sum(1 for _, _, d in self.g.edges(data=True) if d["kind"] == "user-user")

    @classmethod
    def from_csv(cls, nodes_csv: str | Path, edges_csv: str | Path) -> "SocialGraph":
        """``nodes.csv``: id,kind,split,factuality,bias; ``edges.csv``: source,target."""
        graph = cls()
        with Path(nodes_csv).open(newline="") as fh:
            for row in csv.DictReader(fh):
                attrs = {k: row[k] for k in ("factuality", "bias") if row.get(k)}
                graph.add_node(row["id"], row["kind"], split=row.get("split") or "test", **attrs)
        with Path(edges_csv).open(newline="") as fh:
            for row in csv.DictReader(fh):
                graph.add_edge(row["source"], row["target"])
        return graph

    def write_edges_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["source", "target", "kind"])
            for a, b, d in sorted(self.g.edges(data=True), key=lambda e: tuple(sorted(e[:2]))):
                a, b = sorted((a, b))
                w.writerow([a, b, d["kind"]])


def load_embeddings(path: str | Path) -> dict[str, np.ndarray]:
    """CSV rows ``id,x0,x1,...`` (header optional) or ``.npz`` with ``ids`` and ``X``."""
    path = Path(path)
    if path.suffix == ".npz":
        data = np.load(path, allow_pickle=False)
        return {str(i): np.asarray(x, dtype=float) for i, x in zip(data["ids"], data["X"])}
    out = {}
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                out[row[0]] = np.array([float(v) for v in row[1:]])
            except ValueError:
                continue  # header
    return out


def save_embeddings(embeddings: Mapping[str, np.ndarray], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        for uid in sorted(embeddings):
            w.writerow([uid, *(f"{v:.10g}" for v in embeddings[uid])])


def sample_sextet_by_proximity(
    graph: SocialGraph | Sequence[str],
    embeddings: Mapping[str, np.ndarray],
    seed: int | random.Random = 0,
    pool: int = NEIGHBOR_POOL,
    picks: int = SAMPLED_NEIGHBORS,
) -> list[str]:
    """Random anchor plus ``picks`` users drawn from its ``pool`` nearest neighbors.

    Distances are Euclidean; equal distances are ordered by user id.
    """
    users = graph.users() if isinstance(graph, SocialGraph) else sorted(graph)
    users = [u for u in users if u in embeddings]
    if len(users) < pool + 1:
        raise ValueError(f"need at least {pool + 1} users with embeddings, got {len(users)}")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    anchor = rng.choice(users)
    a = np.asarray(embeddings[anchor], dtype=float)
    dists = sorted(
        (float(np.linalg.norm(np.asarray(embeddings[u], dtype=float) - a)), u) for u in users if u != anchor
    )
    neighbors = [u for _, u in dists[:pool]]
    return [anchor, *rng.sample(neighbors, picks)]


def inject_community_edges(graph: SocialGraph, communities: Iterable[Iterable[str]]) -> int:
    """Connect every pair inside each community; returns the number of new edges."""
    added = 0
    for community in communities:
        members = sorted(set(community))
        for uid in members:
            if uid not in graph.g or graph.kind(uid) != USER:
                raise KeyError(f"unknown user {uid!r}")
        for a, b in itertools.combinations(members, 2):
            added += graph.add_edge(a, b)
    return added


def propagate_user_labels(
    graph: SocialGraph,
    attribute: str = "factuality",
    tie_order: Sequence[str] = FACTUALITY_TIE_ORDER,
) -> dict[str, str]:
    """Majority source label per user over followed sources and shared articles.

    Ties go to the label listed first in ``tie_order``; users without any
    labeled source are left out.
    """
    rank = {lab: i for i, lab in enumerate(tie_order)}
    out = {}
    for uid in graph.users():
        votes: Counter[str] = Counter()
        for n in graph.g.neighbors(uid):
            kind = graph.kind(n)
            if kind == SOURCE:
                lab = graph.g.nodes[n].get(attribute)
                if lab:
                    votes[lab] += 1
            elif kind == ARTICLE:
                for s in graph.g.neighbors(n):
                    if graph.kind(s) == SOURCE and graph.g.nodes[s].get(attribute):
                        votes[graph.g.nodes[s][attribute]] += 1
        if votes:
            top = max(votes.values())
            tied = [lab for lab, c in votes.items() if c == top]
            out[uid] = min(tied, key=lambda lab: (rank.get(lab, len(rank)), lab))
    return out


def purity_of_assignment(assignment: Mapping[str, int], labels: Mapping[str, str]) -> float:
    """Sum over clusters of the majority-label count, over all labeled points."""
    clusters: dict[int, Counter] = {}
    n = 0
    for uid, c in assignment.items():
        if uid in labels:
            clusters.setdefault(c, Counter())[labels[uid]] += 1
            n += 1
    if n == 0:
        raise ValueError("no labeled points")
    return sum(max(cnt.values()) for cnt in clusters.values()) / n


def cluster_purity(
    embeddings: Mapping[str, np.ndarray],
    labels: Mapping[str, str],
    k: int = 17,
    seed: int = 0,
) -> float:
    """K-means (k-means++, 10 restarts, fixed seed) purity of labeled users."""
    ids = sorted(u for u in labels if u in embeddings)
    if len(ids) < k:
        raise ValueError(f"{len(ids)} labeled users is fewer than k={k}")
    X = np.stack([np.asarray(embeddings[u], dtype=float) for u in ids])
    km = KMeans(n_clusters=k, init="k-means++", n_init=10, random_state=seed).fit(X)
    return purity_of_assignment(dict(zip(ids, km.labels_.tolist())), labels)


def smoothed_user_embeddings(
    graph: SocialGraph,
    features: Mapping[str, np.ndarray],
    hops: int = 2,
) -> dict[str, np.ndarray]:
    """Stand-in for trained graph embeddings: repeated mean over each user and its user neighbors."""
    users = [u for u in graph.users() if u in features]
    index = {u: i for i, u in enumerate(users)}
    X = np.stack([np.asarray(features[u], dtype=float) for u in users])
    A = np.eye(len(users))
    for u in users:
        for v in graph.user_neighbors(u):
            if v in index:
                A[index[u], index[v]] = 1.0
    P = A / A.sum(1, keepdims=True)
    for _ in range(hops):
        X = P @ X
    return {u: X[index[u]] for u in users}
