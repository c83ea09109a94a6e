import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from focusarea.graph import (
    SocialGraph,
    cluster_purity,
    inject_community_edges,
    load_embeddings,
    propagate_user_labels,
    purity_of_assignment,
    sample_sextet_by_proximity,
    save_embeddings,
    smoothed_user_embeddings,
)


def user_graph(ids):
    g = SocialGraph()
    for u in ids:
        g.add_user(u)
    return g


def line_embeddings(n):
    return {f"u{i:02d}": np.array([float(i)]) for i in range(n)}


# proximity sampling


def test_line_of_21_users_uses_everyone_else_as_pool():
    emb = line_embeddings(21)
    sextet = sample_sextet_by_proximity(list(emb), emb, seed=3)
    assert len(sextet) == 6 and len(set(sextet)) == 6
    assert all(u in emb for u in sextet)


def test_too_few_users_raises():
    emb = line_embeddings(10)
    with pytest.raises(ValueError):
        sample_sextet_by_proximity(list(emb), emb)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(21, 40))
def test_picks_come_from_brute_force_neighbor_pool(seed, n):
    rng = np.random.default_rng(seed)
    emb = {f"u{i:02d}": rng.normal(size=3) for i in range(n)}
    anchor, *picks = sample_sextet_by_proximity(list(emb), emb, seed=seed)
    ranked = sorted((u for u in emb if u != anchor), key=lambda u: (np.linalg.norm(emb[u] - emb[anchor]), u))
    assert set(picks) <= set(ranked[:20])
    assert anchor not in picks


def test_sampling_is_seeded():
    emb = line_embeddings(30)
    assert sample_sextet_by_proximity(list(emb), emb, seed=7) == sample_sextet_by_proximity(list(emb), emb, seed=7)


# community injection


@pytest.mark.parametrize(
    "communities, added",
    [([["A", "B", "C"]], 3), ([["A"]], 0), ([["A", "B"], ["B", "C"]], 2), ([["A", "B"], ["A", "B"]], 1)],
)
def test_injected_edge_counts(communities, added):
    g = user_graph("ABC")
    assert inject_community_edges(g, communities) == added
    assert g.user_edge_count() == added


def test_injection_is_idempotent():
    g = user_graph("ABCD")
    inject_community_edges(g, [["A", "B", "C"], ["C", "D"]])
    edges = set(g.g.edges())
    assert inject_community_edges(g, [["A", "B", "C"], ["C", "D"]]) == 0
    assert set(g.g.edges()) == edges


def test_unknown_user_raises():
    g = user_graph("AB")
    with pytest.raises(KeyError):
        inject_community_edges(g, [["A", "Z"]])


def test_edge_kind_rules():
    g = user_graph("A")
    g.add_source("s")
    g.add_article("x")
    assert g.add_edge("A", "s") and g.add_edge("s", "x") and g.add_edge("A", "x")
    assert not g.add_edge("A", "A")
    g.add_source("t")
    with pytest.raises(ValueError):
        g.add_edge("s", "t")


# label propagation and purity


def labeled_user(g, uid, labels):
    g.add_user(uid)
    for i, lab in enumerate(labels):
        sid = f"{uid}_src{i}"
        g.add_source(sid, factuality=lab)
        g.add_edge(uid, sid)


def test_majority_label_and_worse_label_on_ties():
    g = SocialGraph()
    labeled_user(g, "maj", ["high", "high", "low"])
    labeled_user(g, "tie", ["high", "low"])
    labeled_user(g, "tie3", ["high", "mixed"])
    g.add_user("alone")
    labels = propagate_user_labels(g)
    assert labels == {"maj": "high", "tie": "low", "tie3": "mixed"}


def test_label_reaches_user_through_article():
    g = SocialGraph()
    g.add_user("u")
    g.add_source("s", factuality="high")
    g.add_article("a")
    g.add_edge("s", "a")
    g.add_edge("u", "a")
    assert propagate_user_labels(g) == {"u": "high"}


def test_purity_of_assignment_example():
    assignment = {"a": 0, "b": 0, "c": 0, "d": 1, "e": 1}
    labels = {"a": "h", "b": "h", "c": "l", "d": "l", "e": "l"}
    assert purity_of_assignment(assignment, labels) == pytest.approx(0.8)


def test_single_label_purity_is_one():
    rng = np.random.default_rng(0)
    emb = {f"u{i}": rng.normal(size=2) for i in range(20)}
    assert cluster_purity(emb, {u: "high" for u in emb}, k=3) == 1.0


def test_two_blobs_are_pure():
    rng = np.random.default_rng(0)
    emb = {f"a{i}": rng.normal(0, 0.1, 2) for i in range(15)}
    emb |= {f"b{i}": rng.normal(5, 0.1, 2) for i in range(15)}
    labels = {u: "high" if u[0] == "a" else "low" for u in emb}
    assert cluster_purity(emb, labels, k=2) == 1.0


def test_fewer_labeled_users_than_k_raises():
    emb = line_embeddings(5)
    with pytest.raises(ValueError):
        cluster_purity(emb, {u: "h" for u in emb}, k=17)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from("hml")), min_size=1, max_size=30), st.permutations(range(4)))
def test_purity_invariant_to_cluster_relabeling(points, perm):
    assignment = {f"u{i}": c for i, (c, _) in enumerate(points)}
    labels = {f"u{i}": lab for i, (_, lab) in enumerate(points)}
    relabeled = {u: perm[c] for u, c in assignment.items()}
    p = purity_of_assignment(assignment, labels)
    assert p == purity_of_assignment(relabeled, labels)
    assert 1 / len(set(labels.values())) - 1e-12 <= p <= 1.0


def test_smoothing_averages_connected_users():
    g = user_graph(["a", "b", "c"])
    g.add_edge("a", "b")
    feats = {"a": np.array([0.0]), "b": np.array([2.0]), "c": np.array([5.0])}
    out = smoothed_user_embeddings(g, feats, hops=1)
    assert out["a"] == pytest.approx([1.0]) and out["b"] == pytest.approx([1.0])
    assert out["c"] == pytest.approx([5.0])


# IO


def test_embedding_round_trip(tmp_path):
    emb = {"u1": np.array([0.5, -1.25]), "u2": np.array([3.0, 4.0])}
    save_embeddings(emb, tmp_path / "e.csv")
    loaded = load_embeddings(tmp_path / "e.csv")
    assert set(loaded) == set(emb)
    for u in emb:
        assert np.allclose(loaded[u], emb[u])
    np.savez(tmp_path / "e.npz", ids=np.array(list(emb)), X=np.stack(list(emb.values())))
    assert np.allclose(load_embeddings(tmp_path / "e.npz")["u2"], emb["u2"])


def test_graph_csv_round_trip_and_inductive_check(tmp_path):
    (tmp_path / "nodes.csv").write_text(
        "id,kind,split,factuality,bias\n"
        "u1,user,train,,\nu2,user,train,,\nu3,user,test,,\ns1,source,train,high,left\n"
    )
    (tmp_path / "edges.csv").write_text("source,target\nu1,u2\nu1,s1\n")
    g = SocialGraph.from_csv(tmp_path / "nodes.csv", tmp_path / "edges.csv")
    assert g.is_inductive()
    assert g.subgraph("train").users() == ["u1", "u2"]
    g.add_edge("u2", "u3")
    assert not g.is_inductive()
    g.write_edges_csv(tmp_path / "out.csv")
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[0] == "source,target,kind" and len(lines) == 4


def test_clique_edges_match_combinations():
    members = ["a", "b", "c", "d", "e"]
    g = user_graph(members)
    inject_community_edges(g, [members])
    assert {tuple(sorted(e)) for e in g.g.edges()} == set(itertools.combinations(members, 2))
