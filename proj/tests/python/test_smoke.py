# Copyright 2026 The realsr Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import realsr


def test_version_and_cli():
    code, out, _ = realsr.cli("--version")
    assert code == 0
    assert out.strip() == "realsr " + realsr.__version__
    code, _, _ = realsr.cli("frobnicate")
    assert code == 2


def test_image_ops():
    img = realsr.synth_image(64, 48, 3)
    assert img.shape == (64, 48, 3)
    assert img.dtype == np.float32
    small = realsr.downsample(img, 4)
    assert small.shape == (16, 12, 3)
    assert realsr.psnr(img, img) == math.inf
    assert realsr.ssim(img, img) == pytest.approx(1.0, abs=1e-12)
    noisy = realsr.apply_sensor_noise(img, 8.0, 1)
    assert np.array_equal(noisy, realsr.apply_sensor_noise(img, 8.0, 1))
    assert 25.0 < realsr.psnr(img, noisy) < 35.0
    assert realsr.apply_jpeg(img, 30).shape == img.shape


def test_psnr_closed_form():
    a = np.full((8, 8, 3), 0.25, np.float32)
    b = np.full((8, 8, 3), 0.3125, np.float32)
    assert realsr.psnr(a, b) == pytest.approx(20 * math.log10(16), abs=1e-12)


def test_color_adjust_block_means():
    rng = np.random.default_rng(0)
    sr = rng.uniform(-0.5, 1.5, (16, 12, 3))
    lr = rng.uniform(0.0, 1.0, (4, 3, 3))
    out = realsr.color_adjust(sr, lr)
    means = out.reshape(4, 4, 3, 4, 3).mean(axis=(1, 3))
    assert np.abs(means - lr).max() < 1e-6
    assert np.abs(realsr.color_adjust(out, lr) - out).max() < 1e-6


def test_schedule():
    assert realsr.multistep_lr(0, 100, 1e-4) == 1e-4
    assert realsr.multistep_lr(10, 100, 1e-4) == 5e-5
    assert realsr.multistep_lr(60, 100, 1e-4) == 1e-4 / 16


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(ValueError):
        realsr.downsample(np.zeros((4, 4), np.float32), 4)
    with pytest.raises(OSError):
        realsr.read_png(tmp_path / "missing.png")
    with pytest.raises(OSError):
        realsr.SrModel(tmp_path / "missing.ckpt")


def test_train_infer_evaluate(tmp_path):
    code, out, err = realsr.cli("generate", "--synthetic", "2,0,1", "--synth-size", "256", "--scenario", "dsr",
                                "--degradation", "noise", "--out", tmp_path)
    assert code == 0, err
    bench = tmp_path / "dsr_noise"
    ckpt = tmp_path / "s.ckpt"
    code, _, err = realsr.cli("train-sr", "--benchmark", bench, "--out", ckpt, "--mode", "baseline", "--steps", "2")
    assert code == 0, err
    info = realsr.checkpoint_info(ckpt)
    assert info["step"] == 2
    assert "S" in info["networks"]

    model = realsr.SrModel(ckpt)
    lr = realsr.read_png(bench / "eval_input" / "0000.png")
    sr = model.infer(lr)
    assert sr.shape == (4 * lr.shape[0], 4 * lr.shape[1], 3)

    report = realsr.evaluate(ckpt, bench, "not-lpips")
    assert len(report["rows"]) == 1
    assert report["checkpoint_id"] == model.id
    assert report["mean_lpips"] is not None

    outputs = tmp_path / "out"
    outputs.mkdir()
    realsr.write_png(outputs / (report["rows"][0]["image_id"] + ".png"), sr)
    ext = realsr.score_external(outputs, bench, "not-lpips", model.id)
    assert ext["tsv"] == report["tsv"]
