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

#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "realsr/common.hpp"
#include "realsr/degrade.hpp"
#include "realsr/image_io.hpp"
#include "realsr/parallel.hpp"

namespace realsr {
namespace {

namespace fs = std::filesystem;

constexpr const char* kManifestMagic = "# realsr manifest v1";
constexpr const char* kColumns = "role\tpath\tsource_id\trecipe_kind\tparams\tseed";

struct RoleName {
  Role role;
  const char* name;
};
constexpr RoleName kRoleNames[] = {
    {kTrainInputX, "train_input_X"},
    {kTrainOutputY, "train_output_Y"},
    {kEvalInput, "eval_input"},
    {kEvalGt, "eval_gt"},
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string numbered(const char* dir, size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s/%04zu.png", dir, index);
  return buf;
}

std::string crop_param(const CenterCrop& c) {
  return "crop=" + std::to_string(c.y0) + "," + std::to_string(c.x0) + "," +
         std::to_string(c.height) + "," + std::to_string(c.width);
}

uint64_t content_hash(const Image& img) {
  const auto bytes = to_rgb8(img);
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void check_disjoint(const TrainingSources& sources) {
  std::set<std::string> ids;
  std::set<uint64_t> hashes;
  for (const auto* set : {&sources.train_input, &sources.train_output}) {
    for (const auto& s : *set) {
      ids.insert(s.id);
      hashes.insert(content_hash(s.image));
    }
  }
  for (const auto& s : sources.eval) {
    if (ids.count(s.id) != 0) {
      throw ValidationError("source '" + s.id + "' appears in both training and evaluation sets");
    }
    if (hashes.count(content_hash(s.image)) != 0) {
      throw ValidationError("evaluation source '" + s.id +
                            "' has the same content as a training source");
    }
  }
}

Image cropped(const Image& img, const CenterCrop& c) {
  if (c.y0 == 0 && c.x0 == 0 && c.height == img.height() && c.width == img.width()) return img;
  return img.crop(c.y0, c.x0, c.height, c.width);
}

// One unit of generation work, producing a single file.
struct Job {
  ManifestEntry entry;
  const Image* source = nullptr;
  enum class Kind { kTrainInput, kTrainOutput, kEvalInput, kEvalGt } kind;
  DegradationRecipe recipe;  // seed already derived
};

std::string with_crop(const std::string& params, const CenterCrop& c) {
  return params.empty() ? crop_param(c) : params + " " + crop_param(c);
}

GeneratedBenchmark run_jobs(DatasetManifest manifest, std::vector<Job> jobs, int scale,
                            Scenario scenario, int workers) {
  GeneratedBenchmark out;
  out.files.resize(jobs.size());
  parallel_for(jobs.size(), workers, [&](size_t i) {
    const Job& job = jobs[i];
    const CenterCrop c = center_crop_for(job.source->height(), job.source->width(), scale);
    const Image original = cropped(*job.source, c);
    Image result;
    switch (job.kind) {
      case Job::Kind::kTrainInput:
        result = make_train_input(original, scale, job.recipe);
        break;
      case Job::Kind::kTrainOutput:
        result = make_train_output(original, scale);
        break;
      case Job::Kind::kEvalInput:
        result = (scenario == Scenario::kDSR ? make_dsr_eval_pair(original, scale, job.recipe)
                                             : make_csr_eval_pair(original, scale, job.recipe))
                     .input;
        break;
      case Job::Kind::kEvalGt:
        result = (scenario == Scenario::kDSR ? make_dsr_eval_pair(original, scale, job.recipe)
                                             : make_csr_eval_pair(original, scale, job.recipe))
                     .gt;
        break;
    }
    out.files[i] = {job.entry.path, std::move(result)};
  });
  for (auto& job : jobs) {
    const CenterCrop c = center_crop_for(job.source->height(), job.source->width(), scale);
    job.entry.params = with_crop(job.entry.params, c);
    manifest.entries.push_back(job.entry);
  }
  manifest.validate();
  out.manifest = std::move(manifest);
  return out;
}

DatasetManifest manifest_header(Scenario scenario, int scale, const DegradationRecipe& recipe,
                                uint64_t master_seed) {
  DatasetManifest m;
  m.tool_version = std::string(kToolVersion);
  m.master_seed = master_seed;
  m.scenario = scenario;
  m.scale = scale;
  m.recipe = recipe.with_seed(master_seed);
  if (recipe.kind == DegradationRecipe::Kind::kJpeg) m.codec = jpeg_codec_id();
  return m;
}

std::vector<Job> training_jobs(const TrainingSources& sources, Scenario scenario,
                               const DegradationRecipe& recipe, uint64_t master_seed) {
  if (sources.train_input.empty()) throw ValidationError("no training input sources");
  if (scenario == Scenario::kDSR && !sources.train_output.empty()) {
    throw ValidationError("DSR uses one training set for both domains; "
                          "separate output sources are only valid for CSR");
  }
  if (scenario == Scenario::kCSR && sources.train_output.empty()) {
    throw ValidationError("CSR requires output-domain training sources");
  }
  std::vector<Job> jobs;
  const unsigned input_roles =
      scenario == Scenario::kDSR ? (kTrainInputX | kTrainOutputY) : kTrainInputX;
  for (size_t i = 0; i < sources.train_input.size(); ++i) {
    const auto& s = sources.train_input[i];
    Job job;
    job.kind = Job::Kind::kTrainInput;
    job.source = &s.image;
    job.recipe = recipe.with_seed(derive_seed(master_seed, s.id, "train_input_X"));
    job.entry = {input_roles,      numbered("train_input", i), s.id, recipe.kind_name(),
                 recipe.params(), job.recipe.seed};
    jobs.push_back(job);
  }
  if (scenario == Scenario::kCSR) {
    for (size_t i = 0; i < sources.train_output.size(); ++i) {
      const auto& s = sources.train_output[i];
      Job job;
      job.kind = Job::Kind::kTrainOutput;
      job.source = &s.image;
      job.recipe = recipe;
      job.entry = {kTrainOutputY, numbered("train_output", i), s.id, "none", "",
                   derive_seed(master_seed, s.id, "train_output_Y")};
      jobs.push_back(job);
    }
  }
  return jobs;
}

}  // namespace

std::string roles_to_string(unsigned roles) {
  std::string out;
  for (const auto& rn : kRoleNames) {
    if ((roles & rn.role) == 0) continue;
    if (!out.empty()) out += '+';
    out += rn.name;
  }
  return out;
}

unsigned parse_roles(const std::string& s) {
  unsigned roles = 0;
  for (const auto& part : split(s, '+')) {
    bool found = false;
    for (const auto& rn : kRoleNames) {
      if (part == rn.name) {
        roles |= rn.role;
        found = true;
      }
    }
    if (!found) throw ValidationError("unknown manifest role '" + part + "'");
  }
  return roles;
}

std::vector<const ManifestEntry*> DatasetManifest::with_role(unsigned role) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.roles & role) out.push_back(&e);
  return out;
}

std::vector<std::pair<const ManifestEntry*, const ManifestEntry*>> DatasetManifest::eval_pairs()
    const {
  std::map<std::string, const ManifestEntry*> gts;
  for (const auto* e : with_role(kEvalGt)) gts[e->source_id] = e;
  std::vector<std::pair<const ManifestEntry*, const ManifestEntry*>> out;
  for (const auto* e : with_role(kEvalInput)) {
    auto it = gts.find(e->source_id);
    if (it == gts.end()) {
      throw ValidationError("eval input '" + e->path + "' has no eval_gt partner (source '" +
                            e->source_id + "')");
    }
    out.emplace_back(e, it->second);
  }
  return out;
}

void DatasetManifest::validate() const {
  std::set<std::string> train_ids, eval_in, eval_gt, paths;
  for (const auto& e : entries) {
    if (e.roles == 0) throw ValidationError("manifest entry without role: " + e.path);
    if (!paths.insert(e.path).second) throw ValidationError("duplicate manifest path " + e.path);
    const bool train = (e.roles & (kTrainInputX | kTrainOutputY)) != 0;
    const bool eval = (e.roles & (kEvalInput | kEvalGt)) != 0;
    if (train && eval) throw ValidationError("entry " + e.path + " mixes train and eval roles");
    if (train) train_ids.insert(e.source_id);
    if (e.roles & kEvalInput) {
      if (!eval_in.insert(e.source_id).second)
        throw ValidationError("duplicate eval_input for source '" + e.source_id + "'");
    }
    if (e.roles & kEvalGt) {
      if (!eval_gt.insert(e.source_id).second)
        throw ValidationError("duplicate eval_gt for source '" + e.source_id + "'");
    }
  }
  if (eval_in != eval_gt) throw ValidationError("eval_input/eval_gt entries are not paired");
  for (const auto& id : eval_in) {
    if (train_ids.count(id) != 0) {
      throw ValidationError("source '" + id + "' appears in both training and evaluation roles");
    }
  }
}

std::string DatasetManifest::serialize() const {
  std::ostringstream os;
  os << kManifestMagic << '\n';
  os << "# tool_version\t" << tool_version << '\n';
  os << "# master_seed\t" << master_seed << '\n';
  os << "# scenario\t" << to_string(scenario) << '\n';
  os << "# scale\t" << scale << '\n';
  os << "# degradation\t" << recipe.kind_name() << '\t' << recipe.params() << '\n';
  if (!codec.empty()) os << "# codec\t" << codec << '\n';
  os << kColumns << '\n';
  for (const auto& e : entries) {
    os << roles_to_string(e.roles) << '\t' << e.path << '\t' << e.source_id << '\t'
       << e.recipe_kind << '\t' << e.params << '\t' << e.seed << '\n';
  }
  return os.str();
}

DatasetManifest DatasetManifest::parse(const std::string& text) {
  DatasetManifest m;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kManifestMagic) {
    throw ValidationError("not a realsr manifest (bad first line)");
  }
  bool columns_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (!columns_seen && line.rfind("# ", 0) == 0) {
      const auto f = split(line.substr(2), '\t');
      const std::string& key = f[0];
      if (f.size() < 2) throw ValidationError("malformed manifest header: " + line);
      if (key == "tool_version") {
        m.tool_version = f[1];
      } else if (key == "master_seed") {
        m.master_seed = std::stoull(f[1]);
      } else if (key == "scenario") {
        m.scenario = parse_scenario(f[1]);
      } else if (key == "scale") {
        m.scale = std::stoi(f[1]);
      } else if (key == "degradation") {
        if (f.size() != 3) throw ValidationError("malformed degradation header");
        if (f[1] == "sensor_noise" && f[2].rfind("sigma_8bit=", 0) == 0) {
          m.recipe = DegradationRecipe::sensor_noise(std::stod(f[2].substr(11)), 0);
        } else if (f[1] == "jpeg" && f[2].rfind("quality=", 0) == 0) {
          m.recipe = DegradationRecipe::jpeg(std::stoi(f[2].substr(8)));
        } else {
          throw ValidationError("unknown degradation header: " + line);
        }
      } else if (key == "codec") {
        m.codec = f[1];
      } else {
        throw ValidationError("unknown manifest header key '" + key + "'");
      }
      continue;
    }
    if (!columns_seen) {
      if (line != kColumns) throw ValidationError("manifest column header missing");
      columns_seen = true;
      continue;
    }
    const auto f = split(line, '\t');
    if (f.size() != 6) throw ValidationError("manifest record needs 6 fields: " + line);
    ManifestEntry e;
    e.roles = parse_roles(f[0]);
    e.path = f[1];
    e.source_id = f[2];
    e.recipe_kind = f[3];
    e.params = f[4];
    e.seed = std::stoull(f[5]);
    m.entries.push_back(std::move(e));
  }
  if (!columns_seen) throw ValidationError("manifest column header missing");
  m.recipe.seed = m.master_seed;
  m.validate();
  return m;
}

bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
  return a.serialize() == b.serialize();
}

GeneratedBenchmark build_training_sets(const TrainingSources& sources, Scenario scenario,
                                       int scale, const DegradationRecipe& recipe,
                                       uint64_t master_seed, int workers) {
  recipe.validate();
  check_disjoint(sources);
  return run_jobs(manifest_header(scenario, scale, recipe, master_seed),
                  training_jobs(sources, scenario, recipe, master_seed), scale, scenario,
                  workers);
}

GeneratedBenchmark build_benchmark(const TrainingSources& sources, Scenario scenario, int scale,
                                   const DegradationRecipe& recipe, uint64_t master_seed,
                                   int workers) {
  recipe.validate();
  check_disjoint(sources);
  std::vector<Job> jobs = training_jobs(sources, scenario, recipe, master_seed);
  for (size_t i = 0; i < sources.eval.size(); ++i) {
    const auto& s = sources.eval[i];
    const DegradationRecipe pair_recipe = recipe.with_seed(derive_seed(master_seed, s.id, "eval"));
    Job in;
    in.kind = Job::Kind::kEvalInput;
    in.source = &s.image;
    in.recipe = pair_recipe;
    in.entry = {kEvalInput,      numbered("eval_input", i), s.id, recipe.kind_name(),
                recipe.params(), derive_seed(pair_recipe.seed, "pair", "eval_input")};
    jobs.push_back(in);
    Job gt = in;
    gt.kind = Job::Kind::kEvalGt;
    gt.entry.roles = kEvalGt;
    gt.entry.path = numbered("eval_gt", i);
    if (scenario == Scenario::kDSR) {
      gt.entry.seed = derive_seed(pair_recipe.seed, "pair", "eval_gt");
    } else {
      gt.entry.recipe_kind = "none";
      gt.entry.params = "";
      gt.entry.seed = 0;
    }
    jobs.push_back(gt);
  }
  return run_jobs(manifest_header(scenario, scale, recipe, master_seed), std::move(jobs), scale,
                  scenario, workers);
}

std::string benchmark_dir_name(Scenario scenario, const DegradationRecipe& recipe) {
  return (scenario == Scenario::kDSR ? "dsr_" : "csr_") + recipe.short_name();
}

WriteStats write_benchmark(const GeneratedBenchmark& bench, const fs::path& dir) {
  WriteStats stats;
  for (const char* sub : {"train_input", "train_output", "eval_input", "eval_gt"}) {
    fs::create_directories(dir / sub);
  }
  for (const auto& f : bench.files) {
    const auto bytes = encode_png(f.image);
    (write_file_if_changed(dir / f.path, bytes) ? stats.written : stats.unchanged)++;
  }
  const std::string text = bench.manifest.serialize();
  const std::span<const uint8_t> bytes(reinterpret_cast<const uint8_t*>(text.data()), text.size());
  (write_file_if_changed(dir / kManifestFile, bytes) ? stats.written : stats.unchanged)++;
  return stats;
}

DatasetManifest load_manifest(const fs::path& benchmark_dir) {
  const auto bytes = read_file(benchmark_dir / kManifestFile);
  return DatasetManifest::parse(std::string(bytes.begin(), bytes.end()));
}

}  // namespace realsr
