"""The four reward signals and how they are blended with ROUGE-L.

Run: python3 demos/03_rewards.py
"""

from focusarea.rewards import combine_rewards, rf2, rf3_score, rf3_train, rf4, rouge_reward
from focusarea.synthetic import informativeness_corpus

gold = "Focus on Harbor Union and Mayor Quill."
candidates = [
    "Focus on what they say.",
    "Focus on Harbor Union.",
    "Focus on how Harbor Union, Mayor Quill and Green Delta Fund clash with Senator Vale over the Riverton Dam.",
]
discriminative = {"Harbor Union", "Mayor Quill", "Green Delta Fund"}

# %% The informativeness scorer is a logistic regression on a labeled corpus.
corpus = informativeness_corpus(200, seed=1)
scorer = rf3_train(corpus[:150])
held = corpus[150:]
acc = sum((scorer.score(t) >= 0.5) == bool(y) for t, y in held) / len(held)
print(f"informativeness scorer held-out accuracy: {acc:.2%}")

# %% Entity frequency, informativeness, length and ROUGE-L for each candidate.
for text in candidates:
    parts = {
        "rouge": rouge_reward(text, gold),
        "rf2": rf2(text, discriminative),
        "rf3": rf3_score(scorer, text),
        "rf4": rf4(text),
    }
    blended = combine_rewards(parts, ["rf2", "rf3", "rf4"])
    print(text)
    print("   " + "  ".join(f"{k}={v:.3f}" for k, v in parts.items()) + f"  combined={blended:.3f}")
