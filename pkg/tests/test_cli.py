import json
import math

import numpy as np
import pytest

from pseudorefine.core.cli import main
from pseudorefine.models.masks import MaskSet
from pseudorefine.storage.documents import load_prompts, save_mask_set
from pseudorefine.storage.images import read_label_map, read_mask_id_map
from pseudorefine.storage.rle import encode_rle
from pseudorefine.storage.tensor_io import load_tensor
from tests.helpers import (
    random_probmap,
    write_labels,
    write_manifest,
    write_masks,
    write_rgb,
    write_tensor,
)

CONFIDENT = [0.995, 0.003, 0.002]
UNSURE = [0.6, 0.3, 0.1]


def _refine_inputs(root, masks):
    write_tensor(
        root / "a.npy",
        np.array([[CONFIDENT, UNSURE], [UNSURE, UNSURE]], dtype=np.float32),
    )
    write_masks(root / "a.json", 2, 2, masks)
    return write_manifest(root / "manifest.json", [{"probmap": "a.npy", "masks": "a.json"}])


def test_prompts_on_a_uniform_image(workspace, capsys):
    write_rgb(workspace / "data" / "a.png", np.full((8, 8, 3), 120))
    manifest = write_manifest(workspace / "data" / "manifest.json", [{"image": "a.png"}])

    code = main(["prompts", "--manifest", str(manifest), "--num-superpixels", "4"])

    assert code == 0
    prompts = load_prompts(workspace / "out" / "prompts" / "a.json")
    assert len(prompts) == 4
    assert (workspace / "out" / "superpixels" / "a.png").is_file()
    out = capsys.readouterr().out
    assert "prompts: 1/1 records ok (0 skipped, 0 failed)" in out
    assert "mean prompts per image: 4.0" in out


def test_grid_prompt_baseline(workspace, capsys):
    write_rgb(workspace / "a.png", np.full((64, 64, 3), 120))
    manifest = write_manifest(workspace / "manifest.json", [{"image": "a.png"}])

    code = main([
        "prompts", "--manifest", str(manifest),
        "--prompt-mode", "grid", "--points-per-side", "32",
    ])

    assert code == 0
    assert len(load_prompts(workspace / "out" / "prompts" / "a.json")) == 1024
    assert not (workspace / "out" / "superpixels").exists()
    assert "mean prompts per image: 1024.0" in capsys.readouterr().out


def test_empty_manifest(workspace, capsys):
    manifest = write_manifest(workspace / "manifest.json", [])

    assert main(["prompts", "--manifest", str(manifest)]) == 0
    assert "Manifest has no records" in capsys.readouterr().err
    assert not (workspace / "out" / "prompts").exists()


def test_failed_record_does_not_stop_the_others(workspace, capsys):
    write_rgb(workspace / "a.png", np.full((8, 8, 3), 30))
    (workspace / "b.png").write_bytes(b"\x89PNG not really")
    manifest = write_manifest(
        workspace / "manifest.json", [{"image": "a.png"}, {"image": "b.png"}]
    )

    code = main(["prompts", "--manifest", str(manifest), "--num-superpixels", "4"])

    assert code == 1
    assert (workspace / "out" / "prompts" / "a.json").is_file()
    assert not (workspace / "out" / "prompts" / "b.json").exists()
    out = capsys.readouterr().out
    assert "prompts: 1/2 records ok (0 skipped, 1 failed)" in out
    assert "b: ValidationError" in out


def test_missing_manifest_input(workspace, capsys):
    manifest = write_manifest(workspace / "manifest.json", [{"image": "nowhere.png"}])
    assert main(["prompts", "--manifest", str(manifest)]) == 1
    assert "MissingInputError" in capsys.readouterr().out


def test_filter(workspace, capsys):
    write_masks(
        workspace / "a.json", 2, 2,
        [{"runs": [0, 3, 1], "area": 3}, {"runs": [2, 2], "area": 2}],
    )
    manifest = write_manifest(workspace / "manifest.json", [{"masks": "a.json"}])

    assert main(["filter", "--manifest", str(manifest)]) == 0

    idmap = read_mask_id_map(workspace / "out" / "maskids" / "a.png")
    assert idmap.ids.tolist() == [[1, 1], [1, 2]]
    stats = json.loads((workspace / "out" / "coverage" / "a.json").read_text())
    assert stats["mask_count"] == 2
    assert stats["candidates"] == 2
    assert stats["coverage"] == 1.0
    assert stats["prompt_count"] == 0
    assert (workspace / "out" / "coverage.csv").read_text().splitlines() == [
        "image,prompts,masks,covered_pixels,total_pixels,coverage",
        "a,0,2,4,4,1.000000",
    ]
    assert "0, 2, 100.00 %" in capsys.readouterr().out

    assert main(["stats", "--manifest", str(manifest)]) == 0
    summary = json.loads((workspace / "out" / "coverage_summary.json").read_text())
    assert summary["images"] == 1
    assert summary["table_row"] == "0, 2, 100.00 %"
    assert "prompts, masks, coverage: 0, 2, 100.00 %" in capsys.readouterr().out


def test_refine_assigns_the_unanimous_mask(workspace, capsys):
    manifest = _refine_inputs(workspace, [{"runs": [0, 4], "area": 4}])

    assert main(["refine", "--manifest", str(manifest)]) == 0

    labels = read_label_map(workspace / "out" / "refined" / "a.png")
    assert labels.labels.tolist() == [[0, 0], [0, 0]]
    stats = json.loads((workspace / "out" / "refine_stats" / "a.json").read_text())
    assert (stats["before"], stats["after"], stats["gain"]) == (1, 4, 3)
    assert (workspace / "out" / "refine_gains.csv").read_text().splitlines()[1] == "a,1,4,3"
    assert "labeled pixels: 1 -> 4 (+3)" in capsys.readouterr().out


@pytest.mark.parametrize(
    "masks,flags",
    [
        ([{"runs": [0, 4], "area": 4}], ["--tau-prime", "1.0"]),
        ([], []),
    ],
)
def test_refine_falls_back_to_thresholding(workspace, masks, flags):
    manifest = _refine_inputs(workspace, masks)

    assert main(["refine", "--manifest", str(manifest), *flags]) == 0

    labels = read_label_map(workspace / "out" / "refined" / "a.png")
    assert labels.labels.tolist() == [[0, 255], [255, 255]]


def test_refine_record_without_masks_fails(workspace, capsys):
    _refine_inputs(workspace, [])
    manifest = write_manifest(workspace / "manifest.json", [{"probmap": "a.npy"}])

    assert main(["refine", "--manifest", str(manifest)]) == 1
    assert "refine: 0/1 records ok (0 skipped, 1 failed)" in capsys.readouterr().out
    assert not (workspace / "out" / "refined" / "a.png").exists()


def _random_refine_manifest(root, rng, count):
    records = []
    for i in range(count):
        write_tensor(root / f"img{i}.npy", random_probmap(rng, 6, 5, 4, peak=12.0))
        grids = [rng.random((6, 5)) < 0.4 for _ in range(int(rng.integers(0, 5)))]
        save_mask_set(MaskSet(6, 5, tuple(encode_rle(g) for g in grids)), root / f"img{i}.json")
        records.append({"probmap": f"img{i}.npy", "masks": f"img{i}.json"})
    return write_manifest(root / "manifest.json", records)


def test_worker_count_does_not_change_outputs(workspace, rng):
    manifest = _random_refine_manifest(workspace, rng, 6)

    for workers in ("1", "8"):
        code = main([
            "refine", "--manifest", str(manifest),
            "--workers", workers, "--out", f"run{workers}", "--tau", "0.9",
        ])
        assert code == 0

    first = sorted(p.relative_to(workspace / "run1") for p in (workspace / "run1").rglob("*"))
    second = sorted(p.relative_to(workspace / "run8") for p in (workspace / "run8").rglob("*"))
    assert first == second
    for rel in first:
        if (workspace / "run1" / rel).is_file():
            assert (workspace / "run1" / rel).read_bytes() == (
                workspace / "run8" / rel
            ).read_bytes()


def test_current_outputs_are_skipped(workspace, capsys):
    manifest = _refine_inputs(workspace, [{"runs": [0, 4], "area": 4}])

    assert main(["refine", "--manifest", str(manifest)]) == 0
    capsys.readouterr()

    assert main(["refine", "--manifest", str(manifest)]) == 0
    out = capsys.readouterr().out
    assert "(1 skipped, 0 failed)" in out
    assert "labeled pixels: 1 -> 4 (+3)" in out

    assert main(["refine", "--manifest", str(manifest), "--force"]) == 0
    assert "(0 skipped, 0 failed)" in capsys.readouterr().out


def _prototype_inputs(root):
    write_tensor(root / "a.npy", np.array([[[1.0, 0.0], [0.0, 1.0]]], dtype=np.float32))
    write_labels(root / "a.png", [[0, 1]])
    return write_manifest(root / "manifest.json", [{"features": "a.npy", "labels": "a.png"}])


def test_prototypes(workspace):
    manifest = _prototype_inputs(workspace)

    assert main(["prototypes", "--manifest", str(manifest), "--num-classes", "2"]) == 0

    bank = load_tensor(workspace / "out" / "prototypes.npy")
    assert bank.tolist() == [[1.0, 0.0], [0.0, 1.0]]
    sidecar = json.loads((workspace / "out" / "prototypes.json").read_text())
    assert sidecar["present"] == [True, True]
    assert sidecar["counts"] == [1, 1]


def test_prototypes_with_absent_classes(workspace, capsys):
    manifest = _prototype_inputs(workspace)

    assert main(["prototypes", "--manifest", str(manifest), "--num-classes", "3"]) == 1
    code = main([
        "prototypes", "--manifest", str(manifest), "--num-classes", "3", "--allow-absent",
    ])
    assert code == 0
    sidecar = json.loads((workspace / "out" / "prototypes.json").read_text())
    assert sidecar["present"] == [True, True, False]
    assert "absent [2]" in capsys.readouterr().out


def test_proto_loss(workspace, capsys):
    manifest = _prototype_inputs(workspace)
    assert main(["prototypes", "--manifest", str(manifest), "--num-classes", "2"]) == 0

    code = main([
        "proto-loss", "--manifest", str(manifest), "--temperature", "1.0",
        "--grad-dir", "grads", "--source-loss", "1.0", "--target-loss", "0.5",
    ])

    assert code == 0
    result = json.loads((workspace / "out" / "proto_loss.json").read_text())
    expected = math.log(1 + math.exp(-1))
    assert result["proto_loss"] == pytest.approx(expected, abs=1e-9)
    assert result["labeled_pixels"] == 2
    assert result["total_loss"] == pytest.approx(1.5 + 0.1 * expected)
    assert load_tensor(workspace / "grads" / "a.npy").shape == (1, 2, 2)
    assert "proto loss: 0.313262 over 2 pixels" in capsys.readouterr().out


def test_proto_loss_without_bank(workspace):
    manifest = _prototype_inputs(workspace)
    assert main(["proto-loss", "--manifest", str(manifest)]) == 1


def test_ema(workspace, capsys):
    write_tensor(workspace / "teacher.npy", np.array([1.0]))
    write_tensor(workspace / "student.npy", np.array([0.0]))

    code = main([
        "ema", "--teacher", "teacher.npy", "--student", "student.npy", "--alpha", "0.99",
    ])

    assert code == 0
    assert load_tensor(workspace / "out" / "ema.npy").tolist() == pytest.approx([0.99])
    assert "alpha=0.99" in capsys.readouterr().out


def test_eval_with_prediction_dir(workspace, capsys):
    write_labels(workspace / "labels" / "a.png", [[0, 1]])
    write_labels(workspace / "pred" / "a.png", [[0, 0]])
    manifest = write_manifest(workspace / "manifest.json", [{"labels": "labels/a.png"}])

    code = main([
        "eval", "--manifest", str(manifest), "--pred-dir", "pred", "--num-classes", "2",
    ])

    assert code == 0
    result = json.loads((workspace / "out" / "eval.json").read_text())
    assert result["miou"] == 0.25
    assert result["per_class"] == {"Road": 0.5, "S.walk": 0.0}
    assert result["confusion"]["counts"] == [[1, 0], [1, 0]]
    assert "     50.0      0.0     25.0" in capsys.readouterr().out


def test_eval_from_probmap_argmax(workspace):
    write_labels(workspace / "a.png", [[0, 1]])
    write_tensor(workspace / "a.npy", np.array([[[0.9, 0.1], [0.2, 0.8]]], dtype=np.float32))
    manifest = write_manifest(
        workspace / "manifest.json", [{"labels": "a.png", "probmap": "a.npy"}]
    )

    assert main(["eval", "--manifest", str(manifest), "--num-classes", "2"]) == 0
    assert json.loads((workspace / "out" / "eval.json").read_text())["miou"] == 1.0


def test_eval_missing_prediction(workspace):
    write_labels(workspace / "a.png", [[0, 1]])
    manifest = write_manifest(workspace / "manifest.json", [{"labels": "a.png"}])
    (workspace / "pred").mkdir()
    assert main([
        "eval", "--manifest", str(manifest), "--pred-dir", "pred", "--num-classes", "2",
    ]) == 1
    assert not (workspace / "out" / "eval.json").exists()


def test_config_file_and_flags(workspace):
    (workspace / "cfg.yml").write_text("pseudorefine:\n  tau_prime: 1.0\n", encoding="utf-8")
    manifest = _refine_inputs(workspace, [{"runs": [0, 4], "area": 4}])

    assert main(["--config", "cfg.yml", "refine", "--manifest", str(manifest)]) == 0
    labels = read_label_map(workspace / "out" / "refined" / "a.png")
    assert labels.labels.tolist() == [[0, 255], [255, 255]]

    (workspace / "bad.yml").write_text("tau: 5\n", encoding="utf-8")
    assert main(["--config", "bad.yml", "refine", "--manifest", str(manifest)]) == 1


def test_version_and_help(workspace, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert "PseudoRefine 1.0.0" in capsys.readouterr().out

    assert main([]) == 0
    assert "<command>" in capsys.readouterr().out


def _pipeline_manifest(root, rng, count):
    records = []
    for i in range(count):
        write_rgb(root / f"img{i}.png", rng.integers(0, 256, size=(8, 6, 3)))
        write_tensor(root / f"img{i}.npy", random_probmap(rng, 8, 6, 3, peak=12.0))
        grids = [rng.random((8, 6)) < 0.4 for _ in range(int(rng.integers(0, 5)))]
        save_mask_set(MaskSet(8, 6, tuple(encode_rle(g) for g in grids)), root / f"img{i}.json")
        labels = rng.integers(0, 3, size=(8, 6))
        labels[0, :3] = [0, 1, 2]
        write_labels(root / f"gt{i}.png", labels)
        write_tensor(root / f"feat{i}.npy", rng.normal(size=(8, 6, 4)).astype(np.float32))
        records.append({
            "id": f"img{i}", "image": f"img{i}.png", "probmap": f"img{i}.npy",
            "masks": f"img{i}.json", "labels": f"gt{i}.png", "features": f"feat{i}.npy",
        })
    return write_manifest(root / "manifest.json", records)


def test_full_pipeline_is_identical_across_worker_counts(workspace, rng):
    manifest = str(_pipeline_manifest(workspace, rng, 10))

    for workers in ("1", "8"):
        out = f"run{workers}"
        common = ["--manifest", manifest, "--workers", workers, "--out", out]
        steps = [
            ["prompts", *common, "--num-superpixels", "4"],
            ["filter", *common],
            ["stats", *common],
            ["refine", *common, "--tau", "0.9"],
            ["prototypes", *common, "--num-classes", "3"],
            ["proto-loss", *common, "--grad-dir", f"{out}/grads"],
            ["eval", *common, "--num-classes", "3"],
        ]
        for step in steps:
            assert main(step) == 0, step[0]

    first = sorted(p.relative_to(workspace / "run1") for p in (workspace / "run1").rglob("*"))
    second = sorted(p.relative_to(workspace / "run8") for p in (workspace / "run8").rglob("*"))
    assert first == second
    assert len([rel for rel in first if rel.parent.name == "grads"]) == 10
    for rel in first:
        if (workspace / "run1" / rel).is_file():
            assert (workspace / "run1" / rel).read_bytes() == (
                workspace / "run8" / rel
            ).read_bytes(), rel
