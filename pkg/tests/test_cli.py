"""End-to-end runs of the kdrsdl command line."""

import numpy as np
import pytest

from kdrsdl import read_tensor, write_image, write_tensor
from kdrsdl.cli import main
from kdrsdl.io import BUNDLE_FILES, read_manifest, read_metrics


def run(*argv):
    return main([str(a) for a in argv])


def write_video_fixture(frame_dir, mask_dir):
    """Rank-one background with a bright square walking across it."""
    h, w, num = 24, 32, 8
    background = np.outer(np.linspace(0.2, 0.8, h), np.linspace(0.3, 0.9, w))
    for i in range(num):
        frame = background.copy()
        mask = np.zeros((h, w))
        r0, c0 = 4 + i, 2 + 3 * i
        frame[r0:r0 + 6, c0:c0 + 6] = 1.0
        mask[r0:r0 + 6, c0:c0 + 6] = 1.0
        write_image(frame_dir / f"frame_{i:03d}.pgm", frame)
        write_image(mask_dir / f"mask_{i:03d}.pgm", mask)


def write_banded_images(image_dir, count=6, seed=0):
    """Images constant on a 3x3 grid of bands: rank three, quantization-proof."""
    rng = np.random.default_rng(seed)
    rows = np.repeat([0, 1, 2], [7, 7, 6])
    cols = np.repeat([0, 1, 2], [6, 5, 5])
    for i in range(count):
        blocks = rng.integers(0, 256, size=(3, 3)) / 255.0
        write_image(image_dir / f"img_{i:03d}.pgm", blocks[rows][:, cols])


def test_synth_clean_instance(tmp_path, capsys):
    out = tmp_path / "run"
    rc = run("synth", "--m", 30, "--n", 24, "--num-slices", 4, "--rank-a", 2,
             "--rank-b", 2, "--r", 4, "--zero-prob", 1.0, "--out-dir", out)
    assert rc == 0
    metrics = read_metrics(out / "metrics.csv")
    assert metrics["density_true"] == 0.0
    assert metrics["density_recovered"] == 0.0
    assert metrics["relative_error_outliers"] == 0.0
    assert metrics["err_rec"] <= 1e-7
    assert metrics["converged"] == 1.0
    assert "iterations" in capsys.readouterr().out


def test_synth_bundle_complete(tmp_path):
    out = tmp_path / "run"
    rc = run("synth", "--m", 14, "--n", 12, "--num-slices", 3, "--rank-a", 2,
             "--rank-b", 2, "--r", 3, "--zero-prob", 0.7, "--out-dir", out)
    assert rc == 0
    for name in BUNDLE_FILES:
        assert (out / name).is_file()
    manifest = read_manifest(out / "manifest.json")
    assert manifest["command"] == "synth"
    assert manifest["seed"] == 0
    assert manifest["prng"] == "pcg64"
    assert manifest["config.r"] == 3
    a = read_tensor(out / "A.kdt")
    assert a.shape == (14, 3, 1)


def test_synth_metrics_schema(tmp_path):
    out = tmp_path / "run"
    run("synth", "--m", 14, "--n", 12, "--num-slices", 3, "--rank-a", 2,
        "--rank-b", 2, "--r", 3, "--zero-prob", 0.7, "--out-dir", out)
    lines = (out / "metrics.csv").read_text().splitlines()
    assert [ln.split(",")[0] for ln in lines] == [
        "metric",
        "converged",
        "density_recovered",
        "density_true",
        "err_rec",
        "err_split",
        "iterations",
        "relative_error_low_rank",
        "relative_error_outliers",
    ]


def test_synth_default_density_tracking(tmp_path):
    out = tmp_path / "run"
    rc = run("synth", "--zero-prob", 0.4, "--r", 10, "--out-dir", out)
    assert rc == 0
    metrics = read_metrics(out / "metrics.csv")
    assert abs(metrics["density_recovered"] - metrics["density_true"]) <= 0.005
    assert abs(metrics["density_true"] - 0.6) <= 0.015
    assert metrics["relative_error_low_rank"] <= 1e-3


def test_synth_same_seed_byte_identical(tmp_path):
    first, second = tmp_path / "one", tmp_path / "two"
    args = ("synth", "--m", 14, "--n", 12, "--num-slices", 3, "--rank-a", 2,
            "--rank-b", 2, "--r", 3, "--zero-prob", 0.6, "--seed", 5)
    assert run(*args, "--out-dir", first) == 0
    assert run(*args, "--out-dir", second) == 0
    for name in BUNDLE_FILES + ("metrics.csv",):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_synth_rejects_bad_probability(tmp_path, capsys):
    rc = run("synth", "--zero-prob", 1.5, "--out-dir", tmp_path / "run")
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_decompose_zero_tensor(tmp_path):
    src = tmp_path / "x.kdt"
    write_tensor(src, np.zeros((5, 4, 2)))
    out = tmp_path / "run"
    with pytest.warns(RuntimeWarning):
        rc = run("decompose", "--input", src, "--r", 2, "--out-dir", out)
    assert rc == 0
    metrics = read_metrics(out / "metrics.csv")
    assert metrics["iterations"] == 1.0
    assert metrics["outlier_density"] == 0.0
    assert len((out / "trace.csv").read_text().splitlines()) == 2


def test_decompose_clean_tensor_leaves_outliers_empty(tmp_path):
    from kdrsdl import SyntheticSpec, generate

    spec = SyntheticSpec(m=50, n=50, num_slices=20, rank_a=5, rank_b=5, r=10, p=1.0, seed=0)
    x, _ = generate(spec)
    src = tmp_path / "x.kdt"
    write_tensor(src, x)
    out = tmp_path / "run"
    rc = run("decompose", "--input", src, "--r", 10, "--out-dir", out)
    assert rc == 0
    metrics = read_metrics(out / "metrics.csv")
    assert metrics["outlier_density"] <= 1e-3
    assert metrics["err_rec"] <= 1e-7
    assert metrics["converged"] == 1.0


def test_decompose_missing_input(tmp_path, capsys):
    rc = run("decompose", "--input", tmp_path / "absent.kdt", "--out-dir", tmp_path / "o")
    assert rc == 2
    err = capsys.readouterr().err
    assert "absent.kdt" in err and "error:" in err


def test_decompose_bad_magic(tmp_path, capsys):
    src = tmp_path / "x.kdt"
    src.write_bytes(b"NOPE" + bytes(20))
    rc = run("decompose", "--input", src, "--out-dir", tmp_path / "o")
    assert rc == 2
    assert "magic" in capsys.readouterr().err


def test_rpca_command(tmp_path):
    rng = np.random.default_rng(0)
    x = np.empty((20, 15, 3))
    for i in range(3):
        low = np.outer(rng.standard_normal(20), rng.standard_normal(15))
        spikes = (rng.random((20, 15)) < 0.05) * 4.0
        x[:, :, i] = low + spikes
    src = tmp_path / "x.kdt"
    write_tensor(src, x)
    out = tmp_path / "run"
    rc = run("rpca", "--input", src, "--out-dir", out)
    assert rc == 0
    low_rank = read_tensor(out / "low_rank.kdt")
    sparse = read_tensor(out / "sparse.kdt")
    np.testing.assert_allclose(low_rank + sparse, x, atol=1e-5)
    metrics = read_metrics(out / "metrics.csv")
    assert metrics["converged"] == 1.0
    assert 0.0 < metrics["outlier_density"] < 0.5
    assert read_manifest(out / "manifest.json")["command"] == "rpca"


def test_eval_golden_output(tmp_path):
    ref, est = tmp_path / "ref.kdt", tmp_path / "est.kdt"
    x = np.ones((2, 2, 1))
    write_tensor(ref, x)
    write_tensor(est, 0.5 * x)
    out = tmp_path / "run"
    rc = run("eval", "--estimate", est, "--reference", ref, "--out-dir", out)
    assert rc == 0
    assert (out / "metrics.csv").read_bytes() == b"metric,value\nrelative_error,0.5\n"


def test_eval_with_peak_reports_psnr(tmp_path):
    ref, est = tmp_path / "ref.kdt", tmp_path / "est.kdt"
    write_tensor(ref, np.zeros((3, 3, 1)) + 0.5)
    write_tensor(est, np.full((3, 3, 1), 0.25))
    out = tmp_path / "run"
    rc = run("eval", "--estimate", est, "--reference", ref, "--peak", 1.0, "--out-dir", out)
    assert rc == 0
    metrics = read_metrics(out / "metrics.csv")
    assert abs(metrics["psnr"] - 10 * np.log10(1.0 / 0.25 ** 2)) <= 1e-10


def test_eval_shape_mismatch(tmp_path, capsys):
    ref, est = tmp_path / "ref.kdt", tmp_path / "est.kdt"
    write_tensor(ref, np.ones((2, 2, 1)))
    write_tensor(est, np.ones((2, 2, 2)))
    rc = run("eval", "--estimate", est, "--reference", ref, "--out-dir", tmp_path / "o")
    assert rc == 2
    assert "mismatch" in capsys.readouterr().err


def test_bgsub_moving_square(tmp_path, capsys):
    frames, masks = tmp_path / "frames", tmp_path / "masks"
    frames.mkdir(), masks.mkdir()
    write_video_fixture(frames, masks)
    out = tmp_path / "run"
    rc = run("bgsub", "--frames", frames / "*.pgm", "--mask-frames", masks / "*.pgm",
             "--r", 1, "--out-dir", out)
    assert rc == 0
    metrics = read_metrics(out / "metrics.csv")
    assert metrics["auc_pooled"] >= 0.99
    assert metrics["auc_per_frame"] >= 0.99
    assert metrics["frames"] == 8.0
    assert metrics["scored_frames"] == 8.0
    assert len(list(out.glob("foreground_*.pgm"))) == 8
    assert "auc (pooled):" in capsys.readouterr().out


def test_bgsub_mask_count_mismatch(tmp_path, capsys):
    frames, masks = tmp_path / "frames", tmp_path / "masks"
    frames.mkdir(), masks.mkdir()
    write_video_fixture(frames, masks)
    (sorted(masks.glob("*.pgm"))[0]).unlink()
    rc = run("bgsub", "--frames", frames / "*.pgm", "--mask-frames", masks / "*.pgm",
             "--out-dir", tmp_path / "o")
    assert rc == 2
    assert "mask" in capsys.readouterr().err


def test_bgsub_single_class_masks(tmp_path, capsys):
    frames, masks = tmp_path / "frames", tmp_path / "masks"
    frames.mkdir(), masks.mkdir()
    write_video_fixture(frames, masks)
    for path in masks.glob("*.pgm"):
        write_image(path, np.zeros((24, 32)))
    rc = run("bgsub", "--frames", frames / "*.pgm", "--mask-frames", masks / "*.pgm",
             "--out-dir", tmp_path / "o")
    assert rc == 2
    assert "single class" in capsys.readouterr().err


def test_denoise_clean_images_pass_through(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    write_banded_images(images)
    out = tmp_path / "run"
    rc = run("denoise", "--images", images / "*.pgm", "--noise-level", 0.0,
             "--r", 3, "--out-dir", out)
    assert rc == 0
    metrics = read_metrics(out / "metrics.csv")
    assert metrics["mean_psnr"] >= 60.0
    assert metrics["mean_psnr_input"] == float("inf")


def test_denoise_restores_impulse_noise(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    write_banded_images(images)
    out = tmp_path / "run"
    rc = run("denoise", "--images", images / "*.pgm", "--noise-level", 0.3,
             "--r", 3, "--out-dir", out)
    assert rc == 0
    metrics = read_metrics(out / "metrics.csv")
    assert metrics["mean_psnr"] - metrics["mean_psnr_input"] >= 15.0
    for i in range(6):
        assert (out / f"corrupted_{i:03d}.pgm").is_file()
        assert (out / f"recovered_{i:03d}.pgm").is_file()
        assert f"image_{i:03d}_psnr" in metrics
    manifest = read_manifest(out / "manifest.json")
    assert manifest["alpha"] == 1e-3
    assert manifest["seed"] == 0
    assert manifest["method"] == "kdrsdl"


def test_denoise_color_images(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    rng = np.random.default_rng(3)
    rows = np.repeat([0, 1, 2], [4, 4, 4])
    cols = np.repeat([0, 1, 2], [4, 3, 3])
    for i in range(2):
        image = np.empty((12, 10, 3))
        for c in range(3):
            blocks = rng.integers(0, 256, size=(3, 3)) / 255.0
            image[:, :, c] = blocks[rows][:, cols]
        write_image(images / f"img_{i}.ppm", image)
    out = tmp_path / "run"
    rc = run("denoise", "--images", images / "*.ppm", "--noise-level", 0.2,
             "--r", 3, "--out-dir", out)
    assert rc == 0
    metrics = read_metrics(out / "metrics.csv")
    assert metrics["mean_psnr"] > metrics["mean_psnr_input"]
    assert (out / "recovered_001.ppm").is_file()


def test_denoise_rpca_method(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    write_banded_images(images, count=3)
    out = tmp_path / "run"
    rc = run("denoise", "--images", images / "*.pgm", "--noise-level", 0.1,
             "--method", "rpca", "--out-dir", out)
    assert rc == 0
    assert read_manifest(out / "manifest.json")["method"] == "rpca"


def test_denoise_rejects_unknown_method(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        run("denoise", "--images", tmp_path / "*.pgm", "--noise-level", 0.1,
            "--method", "wavelet", "--out-dir", tmp_path / "o")
    assert info.value.code == 2
    capsys.readouterr()


def test_denoise_rejects_bad_level(tmp_path, capsys):
    images = tmp_path / "images"
    images.mkdir()
    write_banded_images(images, count=2)
    rc = run("denoise", "--images", images / "*.pgm", "--noise-level", 1.0,
             "--out-dir", tmp_path / "o")
    assert rc == 2
    assert "noise level" in capsys.readouterr().err


def test_denoise_rejects_mixed_image_types(tmp_path, capsys):
    images = tmp_path / "images"
    images.mkdir()
    write_image(images / "a.pgm", np.zeros((4, 4)))
    write_image(images / "b.ppm", np.zeros((4, 4, 3)))
    rc = run("denoise", "--images", images / "*.p?m", "--noise-level", 0.1,
             "--out-dir", tmp_path / "o")
    assert rc == 2
    assert "mix" in capsys.readouterr().err


def test_no_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
    capsys.readouterr()
