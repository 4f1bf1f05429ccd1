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

"""Python bindings for the realsr core.

Images are float32 arrays of shape (H, W, 3) with values in [0, 1].
"""

from realsr._core import (
    DivergenceError,
    IoError,
    SrModel,
    ValidationError,
    __version__,
    apply_jpeg,
    apply_sensor_noise,
    checkpoint_info,
    color_adjust,
    downsample,
    evaluate,
    linear_decay_lr,
    multistep_lr,
    psnr,
    read_png,
    resample,
    run_cli,
    score_external,
    ssim,
    synth_image,
    write_png,
)


def cli(*args):
    """Runs the command-line tool in-process. Returns (code, stdout, stderr)."""
    return run_cli([str(a) for a in args])


__all__ = [
    "DivergenceError",
    "IoError",
    "SrModel",
    "ValidationError",
    "__version__",
    "apply_jpeg",
    "apply_sensor_noise",
    "checkpoint_info",
    "cli",
    "color_adjust",
    "downsample",
    "evaluate",
    "linear_decay_lr",
    "multistep_lr",
    "psnr",
    "read_png",
    "resample",
    "run_cli",
    "score_external",
    "ssim",
    "synth_image",
    "write_png",
]
