"""End-to-end integration with the analysis toolkit, exercised purely
through external interfaces: probe files on disk, the `cskprobe` CLI as a
subprocess, and this bridge as its scorer endpoint."""

from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

pytestmark = pytest.mark.skipif(
    shutil.which("cskprobe") is None,
    reason="cskprobe CLI not installed alongside the bridge",
)


def test_eval_rank_through_bridge(tiny_checkpoint, tmp_path):
    probes_path = tmp_path / "probes.jsonl"
    with open(probes_path, "w", encoding="utf-8") as f:
        for i, text in enumerate(
            ["the sky is [MASK] .", "the sun is [MASK] .", "the dolphin is an [MASK] ."]
        ):
            f.write(json.dumps({
                "probe_id": f"p{i}", "text": text, "gold": "blue",
                "masked_slot": "object", "dataset_tag": "cslb",
                "typicality_band": None}) + "\n")

    endpoint = (
        f"cmd:{sys.executable} -m cskprobe_bridge.cli "
        f"--model {tiny_checkpoint} --stdio"
    )
    dump = tmp_path / "preds.jsonl"
    result = subprocess.run(
        ["cskprobe", "eval", "rank", "--probes", str(probes_path),
         "--scorer", endpoint, "--group", "none", "--top-k", "10",
         "--dump-predictions", str(dump)],
        capture_output=True, text=True, timeout=300,
    )
    assert result.returncode == 0, result.stderr
    lines = result.stdout.strip().splitlines()
    assert lines[0].startswith("label\tgroup\tn\tmrr")
    assert lines[1].split("\t")[2] == "3"  # all three probes evaluated

    rows = [json.loads(l) for l in dump.read_text().splitlines()]
    assert len(rows) == 3
    for row in rows:
        scores = [s for _, s in row["candidates"]]
        assert scores == sorted(scores, reverse=True)

    # determinism across a fresh bridge session
    rerun = subprocess.run(
        ["cskprobe", "eval", "rank", "--probes", str(probes_path),
         "--scorer", endpoint, "--group", "none", "--top-k", "10"],
        capture_output=True, text=True, timeout=300,
    )
    assert rerun.stdout == result.stdout


def test_probe_vocab_gate_through_bridge(tiny_checkpoint, tmp_path):
    triples = tmp_path / "triples.tsv"
    triples.write_text(
        "pencil\tmade\tgraphite\t\tthe pencil is made of graphite .\n"
        "mug\thold\tice cream\t\tthe mug can hold ice cream .\n",
        encoding="utf-8",
    )
    endpoint = (
        f"cmd:{sys.executable} -m cskprobe_bridge.cli "
        f"--model {tiny_checkpoint} --stdio"
    )
    out = tmp_path / "probes.jsonl"
    skips = tmp_path / "skips.tsv"
    result = subprocess.run(
        ["cskprobe", "probes", "build", "--triples", str(triples),
         "--mask", "object", "--tag", "quasimodo", "--out", str(out),
         "--skips-out", str(skips), "--scorer", endpoint],
        capture_output=True, text=True, timeout=300,
    )
    assert result.returncode == 0, result.stderr
    built = [json.loads(l) for l in out.read_text().splitlines()]
    assert [p["gold"] for p in built] == ["graphite"]  # in the model vocab
    assert "multi_token" in skips.read_text()  # "ice cream" is not one unit
