//
// Copyright 2026 The FedWalk Simulator Authors
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
//

#include "fedwalk/cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedwalk/error.h"
#include "fedwalk/walker.h"

namespace fedwalk::cli {
namespace {

namespace fs = std::filesystem;

// Config keys that can also be given as --<flag>. Flags use dashes.
constexpr std::pair<const char*, const char*> kConfigFlags[] = {
    {"k", "number of degree bins (0 = floor(ln |V|))"},
    {"epsilon", "privacy budget for degree noise and the sequence encoder"},
    {"l", "walk length in vertices"},
    {"p", "two-hop predictor trigger probability"},
    {"gamma", "walks per vertex"},
    {"d", "embedding dimension"},
    {"w", "SkipGram window"},
    {"seed", "root random seed"},
    {"train_ratios", "comma-separated training ratios T_R"},
    {"predictor_records", "skipped-hop or predicted-hop"},
    {"negatives", "negative samples per pair"},
    {"epochs", "SkipGram epochs"},
    {"lr_start", "initial SkipGram learning rate"},
    {"lr_end", "final SkipGram learning rate"},
    {"threads", "worker threads for parallel stages"},
};

std::string FlagName(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

std::ofstream CreateOutput(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  return out;
}

void Finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}

std::ifstream OpenInput(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path.string());
  return in;
}

// Holds values of config flags until the file has been applied.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path,
                    std::string("flat key = value config file (default: $") + kConfigEnv + ")");
    for (const auto& [key, help] : kConfigFlags) {
      options[key] = app->add_option(FlagName(key), values[key], help);
    }
    // Short name for the training ratio list.
    options["T_R"] = app->add_option("--T_R", values["T_R"], "alias of --train-ratios");
  }

  RunConfig Resolve() const {
    RunConfig config;
    std::string path = config_path;
    if (path.empty()) {
      if (const char* env = std::getenv(kConfigEnv); env != nullptr) path = env;
    }
    if (!path.empty()) ApplyConfigFile(path, config);
    for (const auto& [key, option] : options) {
      if (option->count() > 0) config.Set(key, values.at(key));
    }
    config.Validate();
    return config;
  }
};

template <typename T>
std::vector<T> ParseList(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream field(item);
    T value{};
    if (!(field >> value) || !(field >> std::ws).eof()) {
      throw std::invalid_argument(std::string("bad ") + what + " value: '" + item + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) throw std::invalid_argument(std::string("empty ") + what + " list");
  return out;
}

void WriteConfigEcho(const RunConfig& config, const fs::path& path) {
  auto out = CreateOutput(path);
  out << config.ProvenanceLine() << '\n';
  for (const auto& [key, value] : config.Echo()) out << key << " = " << value << '\n';
  Finish(out, path);
}

int RunHct(const std::string& edges, const fs::path& out_dir, const RunConfig& config,
           std::ostream& log) {
  Graph graph = RunStage("load", [&] { return LoadEdgeList(edges); });
  const auto devices = MakeDevices(graph);
  MessageLog messages;
  RunStage("hct", [&] {
    HctArtifacts hct = RunHctProtocol(devices, config, messages);
    SaveHctArtifacts(out_dir, hct, config);
    auto ids = CreateOutput(out_dir / "id_map.txt");
    ids << config.ProvenanceLine() << '\n';
    WriteIdMap(graph, ids);
    Finish(ids, out_dir / "id_map.txt");
    auto msg = CreateOutput(out_dir / "messages.log");
    msg << config.ProvenanceLine() << '\n';
    messages.Write(msg);
    Finish(msg, out_dir / "messages.log");
    WriteConfigEcho(config, out_dir / "config.txt");
    log << "hct: " << graph.num_vertices() << " vertices, k = " << hct.bins.k << ", "
        << messages.total_count() << " messages\n";
  });
  return kOk;
}

int RunWalk(const std::string& edges, const fs::path& hct_dir, const fs::path& out_dir,
            const RunConfig& config, std::ostream& log) {
  Graph graph = RunStage("load", [&] { return LoadEdgeList(edges); });
  HctArtifacts hct = RunStage("load", [&] { return LoadHctArtifacts(hct_dir); });
  const auto devices = MakeDevices(graph);
  MessageLog messages;
  RunStage("walk", [&] {
    WalkOutput walks = RunWalkProtocol(devices, hct, config, messages);
    auto corpus = CreateOutput(out_dir / "corpus.txt");
    corpus << config.ProvenanceLine() << '\n';
    WriteCorpus(walks.corpus, corpus);
    Finish(corpus, out_dir / "corpus.txt");
    auto report = CreateOutput(out_dir / "comm_report.json");
    report << CommReportJson(walks, messages, config, graph.num_vertices());
    Finish(report, out_dir / "comm_report.json");
    auto msg = CreateOutput(out_dir / "messages.log");
    msg << config.ProvenanceLine() << '\n';
    messages.Write(msg);
    Finish(msg, out_dir / "messages.log");
    log << "walk: " << walks.corpus.walks.size() << " walks, "
        << walks.stats.device_to_device << " device-to-device messages\n";
  });
  return kOk;
}

int RunEmbed(const std::string& corpus_path, std::optional<std::size_t> vertices,
             const fs::path& out_path, const RunConfig& config, std::ostream& log) {
  auto walks = RunStage("load", [&] {
    auto in = OpenInput(corpus_path);
    return ReadCorpus(in, corpus_path);
  });
  RunStage("embed", [&] {
    std::size_t n = 0;
    for (const auto& walk : walks) {
      for (VertexId v : walk) n = std::max<std::size_t>(n, std::size_t{v} + 1);
    }
    if (vertices) {
      if (*vertices < n) {
        throw DataError(corpus_path + ": corpus mentions vertex " + std::to_string(n - 1) +
                        " but --vertices is " + std::to_string(*vertices));
      }
      n = *vertices;
    }
    EmbeddingMatrix m = TrainSkipGram(walks, n, config.SkipGram(), config.seed);
    auto out = CreateOutput(out_path);
    out << config.ProvenanceLine() << '\n';
    WriteEmbeddings(m, out);
    Finish(out, out_path);
    log << "embed: " << n << " vectors of dimension " << m.dim() << "\n";
  });
  return kOk;
}

int RunEval(const std::string& embeddings_path, const std::string& labels_path,
            const std::string& edges, const std::string& id_map, const fs::path& out_path,
            const RunConfig& config, std::ostream& out, std::ostream& log) {
  auto embeddings = RunStage("load", [&] {
    auto in = OpenInput(embeddings_path);
    return ReadEmbeddings(in, embeddings_path);
  });
  LabelSet labels = RunStage("load", [&] {
    std::vector<std::uint64_t> ids;
    if (!id_map.empty()) {
      ids = LoadIdMap(id_map);
    } else {
      Graph graph = LoadEdgeList(edges);
      ids.assign(graph.original_ids().begin(), graph.original_ids().end());
    }
    auto in = OpenInput(labels_path);
    return LoadLabels(in, labels_path, ids);
  });
  RunStage("eval", [&] {
    std::vector<EvalResult> results;
    for (double ratio : config.train_ratios) {
      results.push_back(EvaluateEmbeddings(embeddings, labels, {ratio, config.seed}));
    }
    const std::string json = MetricsJson(results, config);
    if (out_path.empty()) {
      out << json;
    } else {
      auto file = CreateOutput(out_path);
      file << json;
      Finish(file, out_path);
    }
    for (const auto& r : results) {
      log << "eval: T_R = " << r.train_ratio << " micro-F1 = " << r.f1.micro
          << " macro-F1 = " << r.f1.macro << "\n";
    }
  });
  return kOk;
}

int RunPipelineCommand(const std::string& edges, const std::string& labels,
                       const fs::path& out_dir, const RunConfig& config, std::ostream& out) {
  PipelinePaths paths;
  paths.edges = edges;
  if (!labels.empty()) paths.labels = labels;
  paths.out_dir = out_dir;
  PipelineResult result = RunPipeline(paths, config);
  out << "pipeline: " << result.num_vertices << " vertices, " << result.num_walks
      << " walks, " << result.walk_stats.device_to_device
      << " device-to-device messages\n";
  for (const auto& r : result.metrics) {
    out << "T_R = " << r.train_ratio << "  micro-F1 = " << std::fixed << std::setprecision(4)
        << r.f1.micro << "  macro-F1 = " << r.f1.macro << std::defaultfloat << "\n";
  }
  out << "artifacts in " << out_dir.string() << "\n";
  return kOk;
}

}  // namespace

void ApplyConfigFile(const std::string& path, RunConfig& config) {
  auto in = OpenInput(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path, line_no, "expected `key = value`");
    }
    try {
      config.Set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::vector<TheoryRow> TheoryTable(std::span<const std::size_t> lengths,
                                   std::span<const double> ps,
                                   std::optional<std::uint64_t> num_vertices,
                                   std::size_t gamma) {
  std::vector<TheoryRow> rows;
  for (std::size_t l : lengths) {
    if (l < 1) throw std::invalid_argument("walk length must be >= 1");
    for (double p : ps) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
      TheoryRow row;
      row.l = l;
      row.p = p;
      row.expected = ExpectedMessages(l, p);
      row.expected_exact = ExactExpectedMessages(l, p);
      row.savings = static_cast<double>(l - 1) - row.expected;
      if (num_vertices) {
        row.total_savings = ExpectedSavings(l, p, static_cast<std::size_t>(*num_vertices), gamma);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void PrintTheoryTable(std::span<const TheoryRow> rows, int precision, std::ostream& out) {
  const bool totals = !rows.empty() && rows.front().total_savings.has_value();
  out << std::left << std::setw(6) << "l" << std::setw(8) << "p" << std::right
      << std::setw(12) << "E_l" << std::setw(14) << "E_l(exact)" << std::setw(12)
      << "savings";
  if (totals) out << std::setw(18) << "total_savings";
  out << '\n';
  for (const auto& r : rows) {
    std::ostringstream p;
    p << r.p;
    out << std::left << std::setw(6) << r.l << std::setw(8) << p.str() << std::right
        << std::fixed << std::setprecision(precision) << std::setw(12) << r.expected
        << std::setw(14) << r.expected_exact << std::setw(12) << r.savings;
    if (totals) out << std::setw(18) << *r.total_savings;
    out << std::defaultfloat << '\n';
  }
}

int ParseAndDispatch(int argc, const char* const* argv, std::ostream& out,
                     std::ostream& err) {
  CLI::App app{"Simulated federated random-walk graph embedding"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string edges;
  std::string labels;
  std::string out_path;
  std::string hct_dir;
  std::string corpus;
  std::string embeddings;
  std::string id_map;
  std::size_t vertices = 0;

  auto* hct = app.add_subcommand("hct", "build degree vectors, dissimilarities and the tree");
  ConfigOptions hct_config;
  hct_config.Register(hct);
  hct->add_option("--edges", edges, "edge list")->required();
  hct->add_option("--out", out_path, "output directory")->required();

  auto* walk = app.add_subcommand("walk", "generate the encoded walk corpus");
  ConfigOptions walk_config;
  walk_config.Register(walk);
  walk->add_option("--edges", edges, "edge list")->required();
  walk->add_option("--hct-dir", hct_dir, "directory written by `hct`")->required();
  walk->add_option("--out", out_path, "output directory")->required();

  auto* embed = app.add_subcommand("embed", "train SkipGram on a corpus");
  ConfigOptions embed_config;
  embed_config.Register(embed);
  embed->add_option("--corpus", corpus, "corpus file")->required();
  auto* vertices_opt =
      embed->add_option("--vertices", vertices, "vertex count (default: max id + 1)");
  embed->add_option("--out", out_path, "embedding file")->required();

  auto* eval = app.add_subcommand("eval", "multi-label node classification");
  ConfigOptions eval_config;
  eval_config.Register(eval);
  eval->add_option("--embeddings", embeddings, "embedding file")->required();
  eval->add_option("--labels", labels, "label file")->required();
  auto* id_source = eval->add_option_group("ids", "vertex id mapping");
  id_source->add_option("--edges", edges, "edge list the embeddings were built from");
  id_source->add_option("--id-map", id_map, "id_map.txt written by `hct`");
  id_source->require_option(1);
  eval->add_option("--out", out_path, "metrics file (default: stdout)");

  auto* pipeline = app.add_subcommand("pipeline", "hct, walk, embed and eval in one run");
  ConfigOptions pipeline_config;
  pipeline_config.Register(pipeline);
  pipeline->add_option("--edges", edges, "edge list")->required();
  pipeline->add_option("--labels", labels, "label file (eval is skipped without it)");
  std::string pipeline_out = "fedwalk_out";
  pipeline->add_option("--out", pipeline_out, "output directory")->capture_default_str();

  auto* theory = app.add_subcommand("theory", "expected device-to-device messages per walk");
  std::string theory_l = "40";
  std::string theory_p = "0,0.1,0.2,0.3,0.4";
  std::uint64_t theory_vertices = 0;
  std::size_t theory_gamma = 80;
  int precision = 2;
  theory->add_option("--l", theory_l, "comma-separated walk lengths")->capture_default_str();
  theory->add_option("--p", theory_p, "comma-separated predictor probabilities")->capture_default_str();
  auto* theory_vertices_opt =
      theory->add_option("--vertices", theory_vertices, "|V| for the total savings column");
  theory->add_option("--gamma", theory_gamma, "walks per vertex for the total")->capture_default_str();
  theory->add_option("--precision", precision, "decimal places")->capture_default_str()
      ->check(CLI::Range(0, 12));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (hct->parsed()) return RunHct(edges, out_path, hct_config.Resolve(), err);
    if (walk->parsed()) {
      return RunWalk(edges, hct_dir, out_path, walk_config.Resolve(), err);
    }
    if (embed->parsed()) {
      std::optional<std::size_t> n;
      if (vertices_opt->count() > 0) n = vertices;
      return RunEmbed(corpus, n, out_path, embed_config.Resolve(), err);
    }
    if (eval->parsed()) {
      return RunEval(embeddings, labels, edges, id_map, out_path, eval_config.Resolve(), out,
                     err);
    }
    if (pipeline->parsed()) {
      return RunPipelineCommand(edges, labels, pipeline_out, pipeline_config.Resolve(), out);
    }
    if (theory->parsed()) {
      const auto ls = ParseList<std::size_t>(theory_l, "--l");
      const auto ps = ParseList<double>(theory_p, "--p");
      std::optional<std::uint64_t> n;
      if (theory_vertices_opt->count() > 0) n = theory_vertices;
      const auto rows = TheoryTable(ls, ps, n, theory_gamma);
      out << "# fedwalk " << kToolVersion << " theory\n";
      PrintTheoryTable(rows, precision, out);
      return kOk;
    }
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  err << app.help();
  return kUsage;
}

}  // namespace fedwalk::cli
