"""Scoring a detected community against a gold split of six users.

Run: python3 demos/01_coverage_and_parsing.py
"""

from focusarea.gateway.parsing import parse_community_response
from focusarea.metrics import coverage, dual_coverage

# %% A sextet has two gold communities of three users each.
gold_c1, gold_c2 = {"u1", "u2", "u3"}, {"u4", "u5", "u6"}
valid = gold_c1 | gold_c2

# %% The task LLM answers in free text; the community comes before ";;;;;".
for raw in ("u1, u2 ;;;;; u3, u4, u5, u6", "u1 u2 u4 ;;;;; the others", "I think u5 and u6 belong together"):
    pred = parse_community_response(raw, valid)
    cb = coverage(pred, gold_c1, gold_c2)
    print(f"{raw!r}")
    print(f"  community={sorted(pred.community)} remainder={sorted(pred.remainder)} warning={pred.parse_warning}")
    print(f"  matched {cb.matched_gold}: correct={cb.correct} incorrect={cb.incorrect} missing={cb.missing}")
    print(f"  coverage={cb.coverage:.3f} dual={dual_coverage(pred, gold_c1, gold_c2):.3f}")

# %% Coverage over all 64 possible communities, grouped by value.
users = sorted(valid)
table: dict[float, int] = {}
for mask in range(64):
    community = frozenset(u for i, u in enumerate(users) if mask >> i & 1)
    pred = parse_community_response(" ".join(sorted(community)) + " ;;;;; ", valid)
    value = round(coverage(pred, gold_c1, gold_c2).coverage, 3)
    table[value] = table.get(value, 0) + 1
print("coverage value -> number of subsets:", dict(sorted(table.items())))
