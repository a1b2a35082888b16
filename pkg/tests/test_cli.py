import csv
import os

import numpy as np
import pytest

from trajpred.cli import main

TINY = [
    "model.d=16", "model.heads=2", "model.k=2",
    "data.m=3", "data.t_h=5", "data.t_f=4",
    "data.train_scenes=4", "data.val_scenes=2",
    "train.epochs=1", "train.warmup_steps=2",
]


def tiny_args(out_dir, extra=()):
    args = []
    for kv in TINY + [f"output.dir={out_dir}"] + list(extra):
        args += ["--set", kv]
    return args


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("train"))
    assert main(["train"] + tiny_args(out)) == 0
    return out


def test_train_outputs(trained):
    assert os.path.exists(os.path.join(trained, "checkpoint.bin"))
    with open(os.path.join(trained, "loss.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["epoch", "train_loss", "val_minADE", "val_minFDE"]
    assert len(rows) == 2  # header + one epoch


def test_eval(trained, tmp_path):
    ckpt = os.path.join(trained, "checkpoint.bin")
    out = str(tmp_path)
    assert main(["eval", "--checkpoint", ckpt] + tiny_args(out)) == 0
    with open(os.path.join(out, "eval.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["scene_id", "min_ade", "min_fde", "k", "M"]
    assert rows[-1][0] == "aggregate"
    assert len(rows) == 1 + 2 + 1  # header + 2 val scenes + aggregate


def test_eval_baseline(tmp_path):
    out = str(tmp_path)
    assert main(["eval"] + tiny_args(out, ["eval.baseline=true"])) == 0
    assert os.path.exists(os.path.join(out, "eval.csv"))


def test_eval_requires_checkpoint(tmp_path):
    assert main(["eval"] + tiny_args(str(tmp_path))) == 1


def test_unknown_key_is_usage_error(tmp_path):
    assert main(["train", "--set", "model.width=3",
                 "--set", f"output.dir={tmp_path}"]) == 1


def test_missing_data_file_is_data_error(tmp_path):
    args = tiny_args(str(tmp_path), ["data.source=ethucy",
                                     "data.path=/nonexistent/file.txt"])
    assert main(["train"] + args) == 2


def test_corrupt_checkpoint_is_data_error(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"not a checkpoint at all")
    assert main(["eval", "--checkpoint", str(bad)] + tiny_args(str(tmp_path))) == 2


def test_incompatible_checkpoint_exit_code(trained, tmp_path):
    ckpt = os.path.join(trained, "checkpoint.bin")
    args = tiny_args(str(tmp_path))
    args[args.index("model.d=16")] = "model.d=32"  # mismatch with checkpoint
    assert main(["eval", "--checkpoint", ckpt] + args) == 3


def test_sweep(trained, tmp_path, capsys):
    ckpt = os.path.join(trained, "checkpoint.bin")
    out = str(tmp_path)
    code = main(["sweep-p", "--checkpoint", ckpt, "--p-values", "0.6,1.0"]
                + tiny_args(out))
    assert code == 0
    with open(os.path.join(out, "sweep.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["p", "minADE", "minFDE", "mean_k_star"]
    assert [r[0] for r in rows[1:]] == ["0.6", "1"]
    assert os.path.exists(os.path.join(out, "sweep.svg"))


def test_sweep_needs_checkpoint_without_retrain(tmp_path):
    assert main(["sweep-p", "--p-values", "0.75"] + tiny_args(str(tmp_path))) == 1


def test_macs(tmp_path, capsys):
    assert main(["macs", "--m", "8"] + tiny_args(str(tmp_path))) == 0
    text = capsys.readouterr().out
    assert "total" in text and "parameters" in text


def test_viz_attention(trained, tmp_path):
    ckpt = os.path.join(trained, "checkpoint.bin")
    out = str(tmp_path)
    code = main(["viz-attention", "--checkpoint", ckpt, "--scene", "0",
                 "--pair", "0,1"] + tiny_args(out))
    assert code == 0
    path = os.path.join(out, "attention_s0_0_1.csv")
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["head", "t", "alpha", "distance_m"]
    heads, t_h = 2, 5
    assert len(rows) == 1 + heads * t_h + t_h
    mean_rows = [r for r in rows[1:] if r[0] == "mean"]
    assert len(mean_rows) == t_h
    # the mean rows really are the per-head mean
    for t in range(t_h):
        per_head = [float(r[2]) for r in rows[1:1 + heads * t_h]
                    if int(r[1]) == t]
        assert abs(float(mean_rows[t][2]) - np.mean(per_head)) <= 1e-9
    assert os.path.exists(os.path.join(out, "attention_s0_0_1.svg"))


def test_viz_attention_bad_indices(trained, tmp_path):
    ckpt = os.path.join(trained, "checkpoint.bin")
    args = tiny_args(str(tmp_path))
    assert main(["viz-attention", "--checkpoint", ckpt, "--scene", "99"] + args) == 1
    assert main(["viz-attention", "--checkpoint", ckpt, "--pair", "0,9"] + args) == 1
    assert main(["viz-attention", "--checkpoint", ckpt, "--pair", "zero,one"] + args) == 1
