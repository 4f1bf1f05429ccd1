// Copyright 2026 The realsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <sstream>

#include "../support/oracles.hpp"
#include "realsr/cli.hpp"
#include "realsr/common.hpp"
#include "realsr/image_io.hpp"

using namespace realsr;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("version, help and usage errors") {
  const Run v = cli({"--version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out == "realsr " + std::string(kToolVersion) + "\n");
  const Run h = cli({"--help"});
  CHECK(h.code == kExitOk);
  CHECK(contains(h.out, "Usage: realsr"));
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"generate", "--synthetic", "1,0,1"}).code == kExitUsage);
  CHECK(cli({"generate", "--synthetic", "1,0", "--scenario", "dsr", "--degradation", "noise"}).code == kExitUsage);
  CHECK(cli({"report", "--in", "x.tsv", "--format", "xml"}).code == kExitUsage);
}

TEST_CASE("generate is idempotent and reports the domain sets") {
  const auto dir = oracle::scratch_dir("cli_generate");
  const std::vector<std::string> args = {"generate", "--synthetic", "2,0,1",    "--synth-size", "64",
                                         "--scenario", "dsr",     "--degradation", "noise", "--out", dir.string()};
  const Run first = cli(args);
  REQUIRE(first.code == kExitOk);
  CHECK(contains(first.out, "files written"));
  CHECK(contains(first.out, "train_input_X=2 train_output_Y=2 eval_pairs=1"));
  const Run second = cli(args);
  CHECK(second.code == kExitOk);
  CHECK(contains(second.out, "up-to-date, 0 files written"));

  const Run csr = cli({"generate", "--synthetic", "3,2,1", "--synth-size", "64", "--scenario", "csr",
                       "--degradation", "jpeg", "--quality", "40", "--out", dir.string()});
  CHECK(csr.code == kExitOk);
  CHECK(contains(csr.out, "csr_jpeg"));
  CHECK(contains(csr.out, "train_input_X=3 train_output_Y=2 eval_pairs=1"));

  CHECK(cli({"generate", "--synthetic", "1,0,1", "--synth-size", "64", "--scenario", "dsr", "--degradation", "jpeg",
             "--quality", "0", "--out", dir.string()})
            .code == kExitUsage);
  // The 64-pixel sources leave output-domain images smaller than the crop.
  CHECK(cli({"train-sr", "--benchmark", (dir / "dsr_noise").string(), "--out", (dir / "s.ckpt").string(),
             "--mode", "baseline", "--steps", "1"})
            .code == kExitValidation);
  CHECK(cli({"generate", "--source", (dir / "absent").string(), "--scenario", "dsr", "--degradation", "noise",
             "--out", dir.string()})
            .code == kExitIo);
}

TEST_CASE("train, infer, evaluate and report end to end") {
  const auto dir = oracle::scratch_dir("cli_pipeline");
  const std::string bench = (dir / "dsr_noise").string();
  REQUIRE(cli({"generate", "--synthetic", "2,0,1", "--synth-size", "256", "--scenario", "dsr", "--degradation",
               "noise", "--out", dir.string()})
              .code == kExitOk);

  const Run missing = cli({"train-sr", "--benchmark", bench, "--out", (dir / "s.ckpt").string(), "--mode", "ours"});
  CHECK(missing.code == kExitUsage);
  CHECK(contains(missing.err, "--mode ours requires --ddl-checkpoint"));

  const Run ddl = cli({"train-ddl", "--benchmark", bench, "--out", (dir / "ddl.ckpt").string(), "--steps", "2"});
  REQUIRE(ddl.code == kExitOk);
  CHECK(contains(ddl.out, "step 2"));
  const Run sr = cli({"train-sr", "--benchmark", bench, "--out", (dir / "s.ckpt").string(), "--mode", "ours",
                      "--ddl-checkpoint", (dir / "ddl.ckpt").string(), "--steps", "2"});
  REQUIRE(sr.code == kExitOk);
  CHECK(contains(sr.err, "warning: no vgg_weights given"));

  const Image lr = read_png(dir / "dsr_noise" / "eval_input" / "0000.png");
  const Run inf = cli({"infer", "--checkpoint", (dir / "s.ckpt").string(), "--in",
                       (dir / "dsr_noise" / "eval_input" / "0000.png").string(), "--out",
                       (dir / "sr.png").string()});
  REQUIRE(inf.code == kExitOk);
  const Image out = read_png(dir / "sr.png");
  CHECK(out.height() == 4 * lr.height());
  CHECK(out.width() == 4 * lr.width());

  const std::string tsv = (dir / "r.tsv").string();
  const Run ev = cli({"evaluate", "--checkpoint", (dir / "s.ckpt").string(), "--benchmark", bench, "--plugin",
                      "not-lpips", "--out", tsv});
  REQUIRE(ev.code == kExitOk);
  CHECK(contains(ev.out, "PSNR"));
  const Run rep = cli({"report", "--in", tsv, "--format", "tsv"});
  CHECK(rep.code == kExitOk);
  CHECK(rep.out == oracle::slurp(tsv));

  CHECK(cli({"infer", "--checkpoint", (dir / "nope.ckpt").string(), "--in", (dir / "sr.png").string(), "--out",
             (dir / "x.png").string()})
            .code == kExitIo);
  CHECK(cli({"infer", "--checkpoint", (dir / "ddl.ckpt").string(), "--in", (dir / "sr.png").string(), "--out",
             (dir / "x.png").string()})
            .code == kExitValidation);
  CHECK(cli({"report", "--in", (dir / "absent.tsv").string()}).code == kExitIo);
}
