"""Focus-area generator policies.

:class:`PolicyModel` is the interface the trainers use: sampling and greedy
generation, differentiable per-token log-probabilities, entropy and KL
against a reference, and snapshot/restore. Parameters are updated by the
trainers through ``policy.parameters()``.

Two small implementations are provided. :class:`CandidatePolicy` picks one
of a fixed pool of focus areas with a linear model over bag-of-words input
features. :class:`Seq2SeqPolicy` is a word-level GRU encoder-decoder.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F

from .config import SLConfig

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"


def truncate_words(text: str, max_len: int) -> list[str]:
    return text.split()[:max_len]


class PolicyModel(nn.Module):
    kind = "abstract"

    # subclasses: _step_logits(inputs, outputs) -> (logits [B,T,V], targets [B,T], mask [B,T])

    def _step_logits(self, inputs: Sequence[str], outputs: Sequence[str]):
        raise NotImplementedError

    def sample(self, inputs: Sequence[str], generator: torch.Generator | None = None) -> list[str]:
        raise NotImplementedError

    def generate(self, input_text: str, *, greedy: bool = True, generator: torch.Generator | None = None) -> str:
        raise NotImplementedError

    def token_logprob_tensor(self, inputs: Sequence[str], outputs: Sequence[str]):
        logits, targets, mask = self._step_logits(inputs, outputs)
        logp = F.log_softmax(logits, dim=-1)
        token_lp = logp.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
        return token_lp * mask, mask

    def sequence_logprobs(self, inputs: Sequence[str], outputs: Sequence[str]) -> torch.Tensor:
        lp, _ = self.token_logprob_tensor(inputs, outputs)
        return lp.sum(-1)

    def token_logprobs(self, input_text: str, output_text: str) -> list[float]:
        with torch.no_grad():
            lp, mask = self.token_logprob_tensor([input_text], [output_text])
        return [float(x) for x, m in zip(lp[0], mask[0]) if m > 0]

    def entropy(self, inputs: Sequence[str], outputs: Sequence[str]) -> torch.Tensor:
        """Mean per-step entropy along each output path, shape ``[B]``."""
        logits, _, mask = self._step_logits(inputs, outputs)
        logp = F.log_softmax(logits, dim=-1)
        ent = -(logp.exp() * logp).sum(-1)
        return (ent * mask).sum(-1) / mask.sum(-1).clamp(min=1)

    def kl_divergence(self, reference: "PolicyModel", inputs: Sequence[str], outputs: Sequence[str]) -> torch.Tensor:
        """Sum over output steps of KL(self || reference) of the full next-token distributions."""
        logits, _, mask = self._step_logits(inputs, outputs)
        with torch.no_grad():
            ref_logits, _, _ = reference._step_logits(inputs, outputs)
        logp = F.log_softmax(logits, dim=-1)
        ref_logp = F.log_softmax(ref_logits, dim=-1)
        kl = (logp.exp() * (logp - ref_logp)).sum(-1)
        return (kl * mask).sum(-1)

    def snapshot(self) -> dict:
        return copy.deepcopy(self.state_dict())

    def restore(self, snap: dict) -> None:
        self.load_state_dict(copy.deepcopy(snap))

    def frozen_copy(self) -> "PolicyModel":
        ref = copy.deepcopy(self)
        for p in ref.parameters():
            p.requires_grad_(False)
        ref.eval()
        return ref

    # persistence
    def metadata(self) -> dict:
        raise NotImplementedError

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "policy.json").write_text(json.dumps({"kind": self.kind, **self.metadata()}, indent=1))
        torch.save(self.state_dict(), directory / "policy.pt")


class CandidatePolicy(PolicyModel):
    """Categorical choice over a fixed pool of focus areas, conditioned on input words."""

    kind = "candidate"

    def __init__(self, candidates: Sequence[str], input_vocab: Sequence[str] = (), max_prompt_len: int = 650):
        super().__init__()
        if not candidates:
            raise ValueError("candidate pool is empty")
        self.candidates = list(dict.fromkeys(candidates))
        self.index = {c: i for i, c in enumerate(self.candidates)}
        self.input_vocab = list(dict.fromkeys(input_vocab))
        self.vocab_index = {w: i for i, w in enumerate(self.input_vocab)}
        self.max_prompt_len = max_prompt_len
        self.weight = nn.Parameter(torch.zeros(len(self.candidates), max(len(self.input_vocab), 1)))
        self.bias = nn.Parameter(torch.zeros(len(self.candidates)))

    @classmethod
    def build(cls, candidates: Sequence[str], inputs: Sequence[str] = (), max_prompt_len: int = 650) -> "CandidatePolicy":
        vocab = sorted({w.lower() for t in inputs for w in truncate_words(t, max_prompt_len)})
        return cls(candidates, vocab, max_prompt_len)

    def _features(self, inputs: Sequence[str]) -> torch.Tensor:
        x = torch.zeros(len(inputs), self.weight.shape[1])
        for row, text in enumerate(inputs):
            for w in truncate_words(text, self.max_prompt_len):
                j = self.vocab_index.get(w.lower())
                if j is not None:
                    x[row, j] = 1.0
        norms = x.sum(-1, keepdim=True).clamp(min=1.0).sqrt()
        return x / norms

    def logits(self, inputs: Sequence[str]) -> torch.Tensor:
        return self._features(inputs) @ self.weight.T + self.bias

    def probs(self, input_text: str = "") -> torch.Tensor:
        with torch.no_grad():
            return F.softmax(self.logits([input_text]), dim=-1)[0]

    def _step_logits(self, inputs, outputs):
        try:
            targets = torch.tensor([[self.index[o]] for o in outputs])
        except KeyError as exc:
            raise ValueError(f"output {exc.args[0]!r} is not a candidate") from None
        logits = self.logits(inputs).unsqueeze(1)
        return logits, targets, torch.ones(len(outputs), 1)

    def sample(self, inputs, generator=None):
        with torch.no_grad():
            p = F.softmax(self.logits(inputs), dim=-1)
        idx = torch.multinomial(p, 1, generator=generator).squeeze(-1)
        return [self.candidates[int(i)] for i in idx]

    def generate(self, input_text, *, greedy=True, generator=None):
        if not greedy:
            return self.sample([input_text], generator)[0]
        with torch.no_grad():
            return self.candidates[int(self.logits([input_text])[0].argmax())]

    def metadata(self):
        return {"candidates": self.candidates, "input_vocab": self.input_vocab, "max_prompt_len": self.max_prompt_len}


class Seq2SeqPolicy(PolicyModel):
    """Word-level encoder-decoder: mean-pooled input embeddings seed a GRU decoder."""

    kind = "seq2seq"

    def __init__(self, vocab: Sequence[str], dim: int = 64, max_prompt_len: int = 650, max_new_tokens: int = 48):
        super().__init__()
        specials = [PAD, BOS, EOS, UNK]
        self.vocab = specials + [w for w in dict.fromkeys(vocab) if w not in specials]
        self.stoi = {w: i for i, w in enumerate(self.vocab)}
        self.dim = dim
        self.max_prompt_len = max_prompt_len
        self.max_new_tokens = max_new_tokens
        self.embed = nn.Embedding(len(self.vocab), dim, padding_idx=0)
        self.bridge = nn.Linear(dim, dim)
        self.decoder = nn.GRU(dim, dim, batch_first=True)
        self.out = nn.Linear(dim, len(self.vocab))

    @classmethod
    def build(cls, pairs: Sequence[tuple[str, str]], dim: int = 64, max_prompt_len: int = 650, seed: int = 0) -> "Seq2SeqPolicy":
        words = sorted({w for x, y in pairs for w in truncate_words(x, max_prompt_len) + y.split()})
        torch.manual_seed(seed)
        return cls(words, dim=dim, max_prompt_len=max_prompt_len)

    def _ids(self, words: Sequence[str]) -> list[int]:
        unk = self.stoi[UNK]
        return [self.stoi.get(w, unk) for w in words]

    def _encode(self, inputs: Sequence[str]) -> torch.Tensor:
        seqs = [self._ids(truncate_words(t, self.max_prompt_len)) or [self.stoi[UNK]] for t in inputs]
        width = max(len(s) for s in seqs)
        ids = torch.tensor([s + [0] * (width - len(s)) for s in seqs])
        emb = self.embed(ids)
        mask = (ids != 0).float().unsqueeze(-1)
        pooled = (emb * mask).sum(1) / mask.sum(1).clamp(min=1)
        return torch.tanh(self.bridge(pooled)).unsqueeze(0)  # [1,B,D]

    def _step_logits(self, inputs, outputs):
        targets = [self._ids(o.split()) + [self.stoi[EOS]] for o in outputs]
        width = max(len(t) for t in targets)
        tgt = torch.tensor([t + [0] * (width - len(t)) for t in targets])
        prev = torch.cat([torch.full((len(outputs), 1), self.stoi[BOS]), tgt[:, :-1]], dim=1)
        h0 = self._encode(inputs)
        hidden, _ = self.decoder(self.embed(prev), h0)
        logits = self.out(hidden)
        mask = torch.tensor([[1.0] * len(t) + [0.0] * (width - len(t)) for t in targets])
        return logits, tgt, mask

    def _decode(self, inputs, greedy, generator):
        with torch.no_grad():
            h = self._encode(inputs)
            tok = torch.full((len(inputs), 1), self.stoi[BOS])
            done = torch.zeros(len(inputs), dtype=torch.bool)
            words: list[list[str]] = [[] for _ in inputs]
            for _ in range(self.max_new_tokens):
                out, h = self.decoder(self.embed(tok), h)
                logits = self.out(out[:, -1])
                logits[:, self.stoi[PAD]] = -float("inf")
                logits[:, self.stoi[BOS]] = -float("inf")
                if greedy:
                    nxt = logits.argmax(-1)
                else:
                    nxt = torch.multinomial(F.softmax(logits, -1), 1, generator=generator).squeeze(-1)
                for i, t in enumerate(nxt.tolist()):
                    if done[i]:
                        continue
                    if t == self.stoi[EOS]:
                        done[i] = True
                    else:
                        words[i].append(self.vocab[t])
                if bool(done.all()):
                    break
                tok = nxt.unsqueeze(-1)
        return [" ".join(w) for w in words]

    def sample(self, inputs, generator=None):
        return self._decode(inputs, greedy=False, generator=generator)

    def generate(self, input_text, *, greedy=True, generator=None):
        return self._decode([input_text], greedy, generator)[0]

    def metadata(self):
        return {
            "vocab": self.vocab[4:],
            "dim": self.dim,
            "max_prompt_len": self.max_prompt_len,
            "max_new_tokens": self.max_new_tokens,
        }


def load_policy(directory: str | Path) -> PolicyModel:
    directory = Path(directory)
    meta = json.loads((directory / "policy.json").read_text())
    kind = meta.pop("kind")
    if kind == CandidatePolicy.kind:
        policy: PolicyModel = CandidatePolicy(**meta)
    elif kind == Seq2SeqPolicy.kind:
        policy = Seq2SeqPolicy(**meta)
    else:
        raise ValueError(f"unknown policy kind {kind!r}")
    policy.load_state_dict(torch.load(directory / "policy.pt", weights_only=True))
    return policy


def make_policy(kind: str, pairs: Sequence[tuple[str, str]], candidates: Sequence[str] = (), cfg: SLConfig | None = None) -> PolicyModel:
    cfg = cfg or SLConfig()
    torch.manual_seed(cfg.seed)
    if kind == CandidatePolicy.kind:
        pool = list(dict.fromkeys([*candidates, *(y for _, y in pairs)]))
        return CandidatePolicy.build(pool, [x for x, _ in pairs], cfg.max_prompt_len)
    if kind == Seq2SeqPolicy.kind:
        return Seq2SeqPolicy.build(pairs, max_prompt_len=cfg.max_prompt_len, seed=cfg.seed)
    raise ValueError(f"unknown policy kind {kind!r}")
