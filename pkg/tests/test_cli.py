import csv
import json

import pytest

from focusarea.cli import SUBCOMMANDS, main

SMALL_RUN = """\
[sl]
epochs = 1
lr = 0.05

[rl]
lr = 0.05
iterations = 2
steps_per_iteration = 1
batch_size = 4
"""


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def prepared(tmp_path_factory):
    """Synthetic train and val datasets carrying summaries and gold focus areas."""
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "small.ini"
    cfg.write_text(SMALL_RUN)
    paths = {"root": root, "config": cfg}
    for split, seed, n in (("train", 1, 8), ("val", 2, 3)):
        d = root / split
        assert run("build-dataset", "--synthetic", n, "--seed", seed, "--split", split, "--out", d / "raw") == 0
        assert run("summarize", "--dataset", d / "raw" / "dataset.jsonl", "--seed", seed, "--out", d / "sum") == 0
        assert run("gen-gold-focus", "--dataset", d / "sum" / "summarized.jsonl", "--out", d / "gold") == 0
        paths[split] = d / "gold" / "gold.jsonl"
    sl = root / "sl"
    assert run("train-sl", "--dataset", paths["train"], "--policy", "candidate", "--config", cfg, "--out", sl) == 0
    paths["policy"] = sl / "policy"
    return paths


def test_every_subcommand_is_registered():
    assert len(SUBCOMMANDS) == 10
    for name in SUBCOMMANDS:
        with pytest.raises(SystemExit) as exc:
            main([name, "--help"])
        assert exc.value.code == 0


def test_eval_writes_aggregate_and_manifest(prepared, tmp_path):
    assert run("eval", "--dataset", prepared["val"], "--focus", "gold", "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "eval_summary.json").read_text())
    assert 0 <= summary["dataset_coverage"] <= 100
    assert summary["n_samples"] == 3
    with (tmp_path / "eval_samples.csv").open() as fh:
        assert len(list(csv.DictReader(fh))) == 3
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "eval"
    assert manifest["seed"] == 0
    assert len(manifest["config_sha256"]) == 64
    assert set(manifest["outputs"]) == {"eval_samples.csv", "eval_summary.json"}
    assert str(prepared["val"]) in manifest["inputs"]


def test_eval_metric_outputs_are_byte_identical(prepared, tmp_path):
    for d in ("a", "b"):
        assert run("eval", "--dataset", prepared["val"], "--focus", "policy", "--policy-dir", prepared["policy"],
                   "--out", tmp_path / d) == 0
    for name in ("eval_samples.csv", "eval_summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_train_rl_writes_checkpoints(prepared, tmp_path):
    assert run("train-rl", "--dataset", prepared["train"], "--val", prepared["val"], "--policy-dir", prepared["policy"],
               "--config", prepared["config"], "--out", tmp_path) == 0
    ck = tmp_path / "checkpoints"
    assert (ck / "final").is_dir() and (ck / "step_000001").is_dir()
    assert (tmp_path / "rf3_scorer.json").exists()


def test_ablate_pins_reward_set(prepared, tmp_path):
    assert run("ablate", "--reward", "rf2", "--dataset", prepared["train"], "--val", prepared["val"],
               "--policy-dir", prepared["policy"], "--config", prepared["config"], "--out", tmp_path) == 0
    state = json.loads((tmp_path / "checkpoints" / "final" / "curriculum.json").read_text())
    assert state["active_rewards"] == ["rf2"] and state["pinned"]
    with (tmp_path / "checkpoints" / "metrics.csv").open() as fh:
        assert {row["active"] for row in csv.DictReader(fh)} == {"rf2"}


def test_export_annotation_csv(prepared, tmp_path):
    assert run("export-annotation-csv", "--dataset", prepared["val"], "--policy-dir", prepared["policy"],
               "--out", tmp_path) == 0
    with (tmp_path / "annotation.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 and all(r["model_focus_area"] for r in rows)


def write_graph(d):
    (d / "nodes.csv").write_text(
        "id,kind,split,factuality,bias\n"
        + "".join(f"u{i},user,test,,\n" for i in range(6))
        + "s_hi,source,test,high,\ns_lo,source,test,low,\n"
    )
    (d / "edges.csv").write_text(
        "source,target\n" + "".join(f"u{i},{'s_hi' if i < 3 else 's_lo'}\n" for i in range(6))
    )


def test_inject_communities_and_purity(tmp_path):
    write_graph(tmp_path)
    (tmp_path / "comm.json").write_text(json.dumps([["u0", "u1", "u2"], ["u3", "u4"]]))
    assert run("inject-communities", "--nodes", tmp_path / "nodes.csv", "--edges", tmp_path / "edges.csv",
               "--communities", tmp_path / "comm.json", "--out", tmp_path / "inj") == 0
    assert json.loads((tmp_path / "inj" / "inject.json").read_text()) == {"edges_added": 4, "user_edges": 4}
    feats = "".join(f"u{i},{float(i)},{float(i % 2)}\n" for i in range(6))
    (tmp_path / "feats.csv").write_text(feats)
    assert run("purity", "--nodes", tmp_path / "nodes.csv", "--edges", tmp_path / "inj" / "edges.csv",
               "--features", tmp_path / "feats.csv", "--k", 2, "--out", tmp_path / "pur") == 0
    result = json.loads((tmp_path / "pur" / "purity.json").read_text())
    assert result["labeled_users"] == 6 and 0.5 <= result["purity"] <= 1.0


def test_unknown_community_user_is_a_validation_error(tmp_path):
    write_graph(tmp_path)
    (tmp_path / "comm.json").write_text(json.dumps([["u0", "ghost"]]))
    assert run("inject-communities", "--nodes", tmp_path / "nodes.csv", "--edges", tmp_path / "edges.csv",
               "--communities", tmp_path / "comm.json", "--out", tmp_path / "o") == 1


def test_purity_with_too_few_users_for_k(tmp_path):
    write_graph(tmp_path)
    (tmp_path / "e.csv").write_text("".join(f"u{i},{i}\n" for i in range(6)))
    assert run("purity", "--nodes", tmp_path / "nodes.csv", "--edges", tmp_path / "edges.csv",
               "--embeddings", tmp_path / "e.csv", "--out", tmp_path / "o") == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["no-such-command"],
        ["eval"],
        ["eval", "--dataset", "/nonexistent/data.jsonl"],
        ["eval", "--focus", "sideways"],
        ["build-dataset", "--input", __file__, "--subreddits", "a"],
    ],
)
def test_invalid_input_exits_1(argv, tmp_path):
    assert main([*argv, "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize(
    "ini, field",
    [("[rl]\ntarget_kl = -1\n", "target_kl"), ("[rl]\nbogus = 1\n", "rl.bogus"), ("[sl]\nlr = fast\n", "sl.lr")],
)
def test_bad_config_exits_1_naming_field(ini, field, tmp_path, capsys):
    (tmp_path / "c.ini").write_text(ini)
    assert run("eval", "--config", tmp_path / "c.ini", "--out", tmp_path) == 1
    assert field in capsys.readouterr().err


def test_replay_without_cache_is_a_config_error(prepared, tmp_path):
    assert run("eval", "--dataset", prepared["val"], "--backend", "replay", "--out", tmp_path) == 1


def test_runtime_failure_exits_2(prepared, tmp_path):
    (tmp_path / "c.ini").write_text("[backend]\nurl = http://127.0.0.1:9/v1/chat/completions\n")
    assert run("eval", "--dataset", prepared["val"], "--backend", "http", "--config", tmp_path / "c.ini",
               "--out", tmp_path) == 2


def test_replay_cache_serves_recorded_run(prepared, tmp_path):
    cache = tmp_path / "cache.jsonl"
    assert run("eval", "--dataset", prepared["val"], "--cache", cache, "--out", tmp_path / "live") == 0
    assert run("eval", "--dataset", prepared["val"], "--backend", "replay", "--cache", cache,
               "--out", tmp_path / "replay") == 0
    live = (tmp_path / "live" / "eval_samples.csv").read_bytes()
    assert live == (tmp_path / "replay" / "eval_samples.csv").read_bytes()


@pytest.mark.parametrize("subs", [["r_alpha,r_beta"], ["r_alpha", "r_beta"]])
def test_build_dataset_from_dump(subs, tmp_path):
    from focusarea.synthetic import world_entities, write_synthetic_dump

    dump = write_synthetic_dump(tmp_path / "dump.jsonl", n_pairs=4, seed=0)
    (tmp_path / "ents.txt").write_text("\n".join(world_entities()))
    assert run("build-dataset", "--input", dump, "--subreddits", *subs, "--entities", tmp_path / "ents.txt",
               "--out", tmp_path / "o") == 0
    assert len((tmp_path / "o" / "dataset.jsonl").read_text().splitlines()) == 4


def test_template_directory_override(prepared, tmp_path):
    from importlib import resources

    tdir = tmp_path / "templates"
    tdir.mkdir()
    packaged = (resources.files("focusarea") / "templates" / "summarize_user.txt").read_text()
    (tdir / "summarize_user.txt").write_text("Custom header.\n" + packaged)
    rules = {"rules": [{"template_id": "summarize_user", "pattern": "^Custom header", "output": "The user mentions X."}]}
    (tmp_path / "rules.json").write_text(json.dumps(rules))
    (tmp_path / "c.ini").write_text(f"[run]\ntemplates = {tdir}\n")
    raw = prepared["root"] / "val" / "raw" / "dataset.jsonl"
    assert run("summarize", "--dataset", raw, "--script", tmp_path / "rules.json", "--config", tmp_path / "c.ini",
               "--out", tmp_path / "o") == 0
    assert "The user mentions X." in (tmp_path / "o" / "summarized.jsonl").read_text()
    # packaged templates are back for the next run, so the rule no longer matches and samples are dropped
    assert run("summarize", "--dataset", raw, "--script", tmp_path / "rules.json", "--out", tmp_path / "p") == 0
    assert (tmp_path / "p" / "summarized.jsonl").read_text() == ""
