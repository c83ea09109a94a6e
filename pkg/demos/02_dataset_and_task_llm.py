"""From a Reddit-style dump to sextets, summaries, gold focus areas and detections.

The task LLM here is scripted: it finds more of the right community when the
focus area names entities that actually split the users.

Run: python3 demos/02_dataset_and_task_llm.py
"""

from focusarea.gateway import detect_community
from focusarea.metrics import coverage
from focusarea.pipeline import add_gold_focus, summarize_dataset
from focusarea.synthetic import fixture_dataset, scripted_backend
from focusarea.types import FocusArea, FocusSource

# %% Opposing posts are paired, commenters filtered, and six users sampled per pair.
samples = fixture_dataset(n_pairs=4, seed=0)
s = samples[0]
print(f"{len(samples)} sextets; first is {s.sample_id}")
print("gold c1:", sorted(s.gold_c1))
print("gold c2:", sorted(s.gold_c2))

# %% Each user is summarized by the task LLM, then a gold focus area is requested.
backend = scripted_backend()
samples = add_gold_focus(summarize_dataset(samples, backend), backend)
s = samples[0]
for user in s.ordered_users()[:2]:
    print(f"{user.user_id}: {user.summary[:90]}...")
print("gold focus area:", s.gold_focus_area)

# %% Detection with no focus, the gold focus, and a sharper hand-written one.
focuses = {
    "none": FocusArea.none(),
    "gold": FocusArea(s.gold_focus_area, FocusSource.GOLD_LLM),
    "manual": FocusArea("Focus on Harbor Union, Mayor Quill and Green Delta Fund.", FocusSource.GOLD_LLM),
}
for name, fa in focuses.items():
    pred = detect_community(s, fa, backend)
    print(f"{name:>6}: community={sorted(pred.community)} coverage={coverage(pred, s.gold_c1, s.gold_c2).coverage:.3f}")
