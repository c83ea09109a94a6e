"""Writing detected communities into a social graph and measuring cluster purity.

Run: python3 demos/06_downstream_graph.py
"""

from focusarea.pipeline import run_purity_fixture
from focusarea.synthetic import planted_partition_graph
from focusarea.graph import propagate_user_labels

# %% Users inherit the factuality label of the sources they follow.
graph, features, classes = planted_partition_graph(n_users=60, seed=0)
labels = propagate_user_labels(graph)
print(f"{len(labels)} labeled users, {graph.user_edge_count()} user-user edges before injection")
print("label counts:", {lab: list(labels.values()).count(lab) for lab in sorted(set(labels.values()))})

# %% Sampling 20 sextets, splitting each by its true classes, and adding cliques.
for seed in range(3):
    r = run_purity_fixture(seed=seed, n_samples=20)
    print(f"seed {seed}: +{r['edges_added']} edges, purity {r['before']:.3f} -> {r['after']:.3f}")
