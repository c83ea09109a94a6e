"""Command-line entry point.

Every subcommand accepts ``--seed``, ``--backend`` and ``--config`` and
writes a ``manifest.json`` (config hash, seed, artifact digests) next to its
outputs. Exit code 1 means invalid input or configuration, 2 a failure
while running.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

from . import __version__
from .gateway import use_templates
from .types import DatasetValidationError

log = logging.getLogger("focusarea")

SUBCOMMANDS = (
    "build-dataset",
    "summarize",
    "gen-gold-focus",
    "train-sl",
    "train-rl",
    "eval",
    "ablate",
    "inject-communities",
    "purity",
    "export-annotation-csv",
)


class ConfigError(ValueError):
    """Invalid configuration or arguments; ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; usage errors are validation errors
        raise _UsageError(message)


@dataclass
class RunConfig:
    """Effective settings of one run, merged from the config file and flags."""

    seed: int = 0
    backend: str = "scripted"
    script: str | None = None
    cache: str | None = None
    cache_strict: bool = False
    url: str = "http://localhost:8000/v1/chat/completions"
    model: str = "default"
    token_env: str = "FOCUSAREA_API_TOKEN"
    templates: str | None = None
    train: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def _coerce(value: str, like):
    if isinstance(like, bool):
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def load_run_config(path: str | None, args: argparse.Namespace) -> RunConfig:
    """INI file with ``[run]``, ``[backend]``, ``[sl]``, ``[rl]`` and ``[curriculum]`` sections."""
    from .trainer import RLConfig, SLConfig, TrainConfig

    cfg = RunConfig()
    sl, rl = SLConfig(), RLConfig()
    patience, rouge_weight = 3.0, 0.25
    if path:
        if not Path(path).is_file():
            raise ConfigError("--config", f"file not found: {path}")
        ini = configparser.ConfigParser()
        try:
            ini.read(path)
        except configparser.Error as exc:
            raise ConfigError("--config", str(exc)) from None
        plain = {f.name for f in fields(RunConfig)} - {"train"}
        for section in ini.sections():
            for key, value in ini[section].items():
                name = f"{section}.{key}"
                try:
                    if section in ("run", "backend") and key in plain:
                        current = getattr(cfg, key)
                        setattr(cfg, key, _coerce(value, current) if current is not None else value)
                    elif section in ("sl", "rl"):
                        target = sl if section == "sl" else rl
                        if not hasattr(target, key):
                            raise ConfigError(name, "unknown key")
                        setattr(target, key, _coerce(value, getattr(target, key)))
                    elif section == "curriculum" and key == "patience":
                        patience = float(value)
                    elif section == "rewards" and key == "rouge_weight":
                        rouge_weight = float(value)
                    else:
                        raise ConfigError(name, "unknown key")
                except ValueError as exc:
                    if isinstance(exc, ConfigError):
                        raise
                    raise ConfigError(name, str(exc)) from None
    if args.seed is not None:
        cfg.seed = args.seed
    if args.backend is not None:
        cfg.backend = args.backend
    for name in ("script", "cache"):
        if getattr(args, name, None):
            setattr(cfg, name, getattr(args, name))
    sl.seed = rl.seed = cfg.seed
    train = TrainConfig(sl, rl, patience, rouge_weight)
    try:
        train.validate()
    except ValueError as exc:
        raise ConfigError("train", str(exc)) from None
    cfg.train = train.to_dict()
    if math.isinf(patience):
        cfg.train["patience"] = "inf"
    if cfg.backend not in ("scripted", "http", "replay"):
        raise ConfigError("backend", f"unknown backend {cfg.backend!r}")
    if cfg.backend == "replay" and not cfg.cache:
        raise ConfigError("cache", "the replay backend needs a cache file")
    if cfg.script and not Path(cfg.script).exists():
        raise ConfigError("script", f"path does not exist: {cfg.script}")
    if cfg.templates and not Path(cfg.templates).is_dir():
        raise ConfigError("run.templates", f"not a directory: {cfg.templates}")
    return cfg


def train_config(cfg: RunConfig):
    from .trainer import TrainConfig

    d = dict(cfg.train)
    if d.get("patience") == "inf":
        d["patience"] = math.inf
    return TrainConfig.from_dict(d)


def make_backend(cfg: RunConfig):
    from .gateway import HTTPChatBackend, ReplayCache, ScriptedBackend
    from .synthetic import scripted_backend

    if cfg.backend == "scripted":
        inner = ScriptedBackend.from_json(cfg.script) if cfg.script else scripted_backend()
    elif cfg.backend == "http":
        inner = HTTPChatBackend(cfg.url, cfg.model, token_env=cfg.token_env)
    else:
        inner = None
    if cfg.cache:
        return ReplayCache(cfg.cache, inner, strict=cfg.cache_strict or inner is None)
    return inner


# manifests


def _digest_paths(paths: Sequence[Path]) -> dict[str, str]:
    from .types import digest_file

    out = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for f in sorted(q for q in p.rglob("*") if q.is_file() and q.name != "manifest.json"):
                out[str(f)] = digest_file(f)
        elif p.is_file():
            out[str(p)] = digest_file(p)
    return out


def write_manifest(out_dir: Path, command: str, cfg: RunConfig, inputs: Sequence[Path], outputs: Sequence[Path]) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config_sha256": cfg.digest(),
        "config": cfg.to_dict(),
        "inputs": _digest_paths(inputs),
        "outputs": {str(Path(k).relative_to(out_dir)) if Path(k).is_relative_to(out_dir) else k: v
                    for k, v in _digest_paths(outputs).items()},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _require(path: str | None, name: str) -> Path:
    if not path:
        raise ConfigError(name, "is required")
    p = Path(path)
    if not p.exists():
        raise ConfigError(name, f"path does not exist: {path}")
    return p


def _load(path: Path):
    from .types import deserialize_dataset

    return deserialize_dataset(path)


def _ner(args):
    from .rewards import DictionaryNER, capitalized_span_ner

    if getattr(args, "entities", None):
        words = [w.strip() for w in _require(args.entities, "--entities").read_text().splitlines() if w.strip()]
        return DictionaryNER(words)
    return capitalized_span_ner


# subcommands


def cmd_build_dataset(args, cfg: RunConfig, out: Path) -> tuple[list, list]:
    from .ingestion import build_reddit_dataset, build_twibot_sextets, load_reddit_dump, load_twibot_json
    from .synthetic import world_ner, write_synthetic_dump
    from .types import serialize_dataset

    inputs = []
    if args.synthetic:
        src = write_synthetic_dump(out / "synthetic_dump.jsonl", args.synthetic, cfg.seed)
        args.platform, args.subreddits, ner = "reddit", ["r_alpha", "r_beta"], world_ner()
        inputs.append(src)
    else:
        src = _require(args.input, "--input")
        inputs.append(src)
        ner = _ner(args)
    if args.platform == "reddit":
        args.subreddits = [s for part in args.subreddits or () for s in part.split(",") if s]
        if len(args.subreddits) != 2:
            raise ConfigError("--subreddits", "give exactly two subreddits")
        posts = load_reddit_dump(src)
        a = [p for p in posts if p.subreddit == args.subreddits[0]]
        b = [p for p in posts if p.subreddit == args.subreddits[1]]
        if not a or not b:
            raise ConfigError("--subreddits", "no posts found for one of the subreddits")
        samples = build_reddit_dataset(a, b, ner, seed=cfg.seed, window_days=args.window_days, salt=args.salt, split=args.split)
    else:
        samples = build_twibot_sextets(load_twibot_json(src), seed=cfg.seed, salt=args.salt, split=args.split, limit=args.limit)
    if args.limit:
        samples = samples[: args.limit]
    path = out / "dataset.jsonl"
    serialize_dataset(samples, path)
    print(f"{len(samples)} sextets written to {path}")
    return inputs, [path]


def cmd_summarize(args, cfg, out):
    from .pipeline import summarize_dataset
    from .types import serialize_dataset

    src = _require(args.dataset, "--dataset")
    samples = summarize_dataset(_load(src), make_backend(cfg), seed=cfg.seed, model_hint=cfg.model)
    path = out / "summarized.jsonl"
    serialize_dataset(samples, path)
    return [src], [path]


def cmd_gen_gold_focus(args, cfg, out):
    from .pipeline import add_gold_focus
    from .types import serialize_dataset

    src = _require(args.dataset, "--dataset")
    samples = add_gold_focus(_load(src), make_backend(cfg), ordering_filter=args.ordering_filter, model_hint=cfg.model)
    path = out / "gold.jsonl"
    serialize_dataset(samples, path)
    return [src], [path]


def cmd_train_sl(args, cfg, out):
    from .trainer import make_policy, supervised_pairs, train_supervised

    tc = train_config(cfg)
    src = _require(args.dataset, "--dataset")
    inputs = [src]
    pairs = supervised_pairs(_load(src), tc.sl.max_prompt_len)
    if not pairs:
        raise ConfigError("--dataset", "no sample carries a gold focus area")
    val_pairs = None
    if args.val:
        inputs.append(_require(args.val, "--val"))
        val_pairs = supervised_pairs(_load(inputs[-1]), tc.sl.max_prompt_len) or None
    candidates = []
    if args.candidates:
        inputs.append(_require(args.candidates, "--candidates"))
        candidates = [c.strip() for c in inputs[-1].read_text().splitlines() if c.strip()]
    policy = make_policy(args.policy, pairs, candidates, tc.sl)
    history: list[dict] = []
    train_supervised(policy, pairs, tc.sl, val_pairs=val_pairs, history=history)
    policy.save(out / "policy")
    hist = out / "sl_history.csv"
    with hist.open("w", newline="") as fh:
        w = csv.DictWriter(fh, ["epoch", "train_nll", "val_nll"], lineterminator="\n")
        w.writeheader()
        w.writerows({k: round(v, 6) if isinstance(v, float) else v for k, v in r.items()} for r in history)
    return inputs, [out / "policy", hist]


def _train_rl(args, cfg, out, curriculum=None):
    from .rewards import InformativenessScorer, build_informativeness_corpus, rf3_train
    from .trainer import load_policy, train_rl

    tc = train_config(cfg)
    src = _require(args.dataset, "--dataset")
    val_src = _require(args.val, "--val")
    init = _require(args.policy_dir, "--policy-dir")
    inputs = [src, val_src, init]
    train, val = _load(src), _load(val_src)
    backend = make_backend(cfg)
    ner = _ner(args)
    outputs = []
    if args.scorer:
        inputs.append(_require(args.scorer, "--scorer"))
        scorer = InformativenessScorer.load(inputs[-1])
    else:
        golds = sorted({s.gold_focus_area for s in train if s.gold_focus_area})
        corpus = build_informativeness_corpus(golds, backend)
        scorer = rf3_train(corpus, seed=cfg.seed) if {label for _, label in corpus} == {0, 1} else None
        if scorer is not None:
            scorer.save(out / "rf3_scorer.json")
            outputs.append(out / "rf3_scorer.json")
    policy = load_policy(init)
    result = train_rl(
        policy, policy.frozen_copy(), backend, train, val, tc,
        ner=ner, scorer=scorer, curriculum=curriculum, checkpoint_dir=out / "checkpoints",
    )
    print(f"final curriculum: {'+'.join(result.curriculum.active_rewards)} (phase {result.curriculum.phase})")
    return inputs, outputs + [out / "checkpoints"]


def cmd_train_rl(args, cfg, out):
    return _train_rl(args, cfg, out)


def cmd_ablate(args, cfg, out):
    from .trainer import CurriculumState

    return _train_rl(args, cfg, out, CurriculumState.pinned_to(*args.reward))


def cmd_eval(args, cfg, out):
    from .pipeline import evaluate, gold_focus, no_focus, policy_focus, write_eval
    from .trainer import load_policy
    from .types import FocusSource

    src = _require(args.dataset, "--dataset")
    inputs = [src]
    if args.focus == "policy":
        inputs.append(_require(args.policy_dir, "--policy-dir"))
        provider = policy_focus(load_policy(inputs[-1]), FocusSource.RL_MODEL, train_config(cfg).sl.max_prompt_len)
    else:
        provider = gold_focus if args.focus == "gold" else no_focus
    result = evaluate(_load(src), make_backend(cfg), provider, model_hint=cfg.model)
    paths = write_eval(result, out, {"seed": cfg.seed, "focus": args.focus})
    print(json.dumps(result.summary, sort_keys=True))
    return inputs, list(paths)


def _read_communities(path: Path) -> list[list[str]]:
    if path.suffix == ".csv":
        with path.open(newline="") as fh:
            return [row["community"].split() for row in csv.DictReader(fh)]
    data = json.loads(path.read_text())
    if not isinstance(data, list) or not all(isinstance(c, list) for c in data):
        raise ConfigError("--communities", "expected a JSON list of lists of user ids")
    return data


def cmd_inject_communities(args, cfg, out):
    from .graph import SocialGraph, inject_community_edges

    nodes, edges, comm = (_require(args.nodes, "--nodes"), _require(args.edges, "--edges"),
                          _require(args.communities, "--communities"))
    graph = SocialGraph.from_csv(nodes, edges)
    try:
        added = inject_community_edges(graph, _read_communities(comm))
    except KeyError as exc:
        raise ConfigError("--communities", str(exc)) from None
    path = out / "edges.csv"
    graph.write_edges_csv(path)
    report = out / "inject.json"
    report.write_text(json.dumps({"edges_added": added, "user_edges": graph.user_edge_count()}, sort_keys=True) + "\n")
    print(f"{added} user-user edges added")
    return [nodes, edges, comm], [path, report]


def cmd_purity(args, cfg, out):
    from .graph import SocialGraph, cluster_purity, load_embeddings, propagate_user_labels, smoothed_user_embeddings

    nodes, edges = _require(args.nodes, "--nodes"), _require(args.edges, "--edges")
    graph = SocialGraph.from_csv(nodes, edges)
    inputs = [nodes, edges]
    if args.embeddings:
        inputs.append(_require(args.embeddings, "--embeddings"))
        emb = load_embeddings(inputs[-1])
    elif args.features:
        inputs.append(_require(args.features, "--features"))
        emb = smoothed_user_embeddings(graph, load_embeddings(inputs[-1]), hops=args.hops)
    else:
        raise ConfigError("--embeddings", "give --embeddings or --features")
    labels = propagate_user_labels(graph, args.label)
    try:
        value = cluster_purity(emb, labels, k=args.k, seed=cfg.seed)
    except ValueError as exc:
        raise ConfigError("--k", str(exc)) from None
    path = out / "purity.json"
    path.write_text(json.dumps({"purity": round(value, 6), "k": args.k, "labeled_users": len(labels),
                                "label": args.label, "seed": cfg.seed}, sort_keys=True) + "\n")
    print(f"purity {value:.4f}")
    return inputs, [path]


def cmd_export_annotation_csv(args, cfg, out):
    from .trainer import load_policy, policy_input

    src = _require(args.dataset, "--dataset")
    init = _require(args.policy_dir, "--policy-dir")
    policy = load_policy(init)
    max_len = train_config(cfg).sl.max_prompt_len
    path = out / "annotation.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id", "model_focus_area", "gold_focus_area"])
        for s in _load(src):
            if s.gold_focus_area:
                w.writerow([s.sample_id, policy.generate(policy_input(s, max_len)), s.gold_focus_area])
    return [src, init], [path]


COMMANDS = {
    "build-dataset": cmd_build_dataset,
    "summarize": cmd_summarize,
    "gen-gold-focus": cmd_gen_gold_focus,
    "train-sl": cmd_train_sl,
    "train-rl": cmd_train_rl,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "inject-communities": cmd_inject_communities,
    "purity": cmd_purity,
    "export-annotation-csv": cmd_export_annotation_csv,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="focusarea", description="Focus-area community detection pipeline.")
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--backend", choices=("scripted", "http", "replay"), default=None)
    common.add_argument("--config", default=None, help="INI file")
    common.add_argument("--script", help="JSON rule file for the scripted backend")
    common.add_argument("--cache", help="replay cache (JSONL)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add("build-dataset", "build sextets from a Reddit dump or TwiBot-20 file")
    p.add_argument("--platform", choices=("reddit", "twibot"), default="reddit")
    p.add_argument("--input")
    p.add_argument("--subreddits", nargs="+", help="two subreddits, space or comma separated")
    p.add_argument("--synthetic", type=int, default=0, help="generate N synthetic post pairs instead")
    p.add_argument("--entities", help="entity list for post pairing, one per line")
    p.add_argument("--window-days", type=int, default=21)
    p.add_argument("--salt", default="")
    p.add_argument("--split", choices=("train", "val", "test"), default="test")
    p.add_argument("--limit", type=int, default=None)

    add("summarize", "summarize every user").add_argument("--dataset")
    p = add("gen-gold-focus", "generate gold focus areas")
    p.add_argument("--dataset")
    p.add_argument("--ordering-filter", choices=("strip", "flag", "off"), default="strip")

    p = add("train-sl", "supervised training on gold focus areas")
    p.add_argument("--dataset")
    p.add_argument("--val")
    p.add_argument("--policy", choices=("seq2seq", "candidate"), default="seq2seq")
    p.add_argument("--candidates", help="extra candidate focus areas, one per line")

    for name, text in (("train-rl", "curriculum RL"), ("ablate", "RL with the reward set pinned")):
        p = add(name, text)
        p.add_argument("--dataset")
        p.add_argument("--val")
        p.add_argument("--policy-dir")
        p.add_argument("--scorer")
        p.add_argument("--entities")
        if name == "ablate":
            p.add_argument("--reward", nargs="+", choices=("rf1", "rf2", "rf3", "rf4"), required=True)

    p = add("eval", "detect communities and score them")
    p.add_argument("--dataset")
    p.add_argument("--focus", choices=("none", "gold", "policy"), default="none")
    p.add_argument("--policy-dir")

    p = add("inject-communities", "add detected communities to a graph as cliques")
    p.add_argument("--nodes")
    p.add_argument("--edges")
    p.add_argument("--communities", help="eval_samples.csv or JSON list of lists")

    p = add("purity", "K-means purity of user embeddings")
    p.add_argument("--nodes")
    p.add_argument("--edges")
    p.add_argument("--embeddings")
    p.add_argument("--features", help="raw features; smoothed over user-user edges")
    p.add_argument("--hops", type=int, default=2)
    p.add_argument("--k", type=int, default=17)
    p.add_argument("--label", choices=("factuality", "bias"), default="factuality")

    p = add("export-annotation-csv", "pair model and gold focus areas for rating")
    p.add_argument("--dataset")
    p.add_argument("--policy-dir")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not args.command:
        parser.print_help(sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_run_config(args.config, args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        use_templates(cfg.templates)
        inputs, outputs = COMMANDS[args.command](args, cfg, out)
        if cfg.templates:
            inputs = [*inputs, Path(cfg.templates)]
        write_manifest(out, args.command, cfg, inputs, outputs)
    except (ConfigError, DatasetValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("run failed", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
