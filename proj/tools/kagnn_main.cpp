// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

// kagnn: featurize molecules, train/evaluate KA-GNN and KA-GAT models, run
// the function-fitting harness, gradient checks and hyperparameter sweeps.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kagnn/errors.hpp"
#include "kagnn/fitfn.hpp"
#include "kagnn/gradcheck.hpp"
#include "kagnn/graph.hpp"
#include "kagnn/model.hpp"
#include "kagnn/molecule.hpp"
#include "kagnn/sdf.hpp"
#include "kagnn/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kagnn;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

// Bad flag values or inconsistent options.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative paths that do not exist are retried under $KAGNN_DATA_DIR.
fs::path resolve_data_path(const std::string &path) {
  fs::path p(path);
  if (fs::exists(p) || p.is_absolute())
    return p;
  if (const char *root = std::getenv("KAGNN_DATA_DIR")) {
    fs::path alt = fs::path(root) / p;
    if (fs::exists(alt))
      return alt;
  }
  return p;
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json_file(const fs::path &path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_file(const fs::path &path, const std::string &text) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ParseError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path &path, const json &doc) {
  write_file(path, doc.dump(2) + "\n");
}

std::string format_of(const fs::path &path, const std::string &requested) {
  if (!requested.empty())
    return requested;
  auto ext = path.extension().string();
  for (auto &c : ext)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".sdf" || ext == ".mol" ? "sdf" : "json";
}

std::vector<Molecule> load_molecules(const std::string &path_arg,
                                     const std::string &format_arg = "") {
  const fs::path path = resolve_data_path(path_arg);
  const std::string text = read_file(path);
  if (format_of(path, format_arg) == "sdf")
    return parse_sdf_v2000(text);
  std::istringstream in(text);
  return read_molecules_jsonl(in, path.string());
}

std::vector<MolecularGraph> build_graphs(const std::vector<Molecule> &mols,
                                         double cutoff) {
  std::vector<MolecularGraph> graphs;
  graphs.reserve(mols.size());
  for (const auto &m : mols) {
    try {
      graphs.push_back(build_graph(m, cutoff));
    } catch (const std::exception &e) {
      throw FeaturizeError("molecule '" + m.id + "': " + e.what());
    }
  }
  return graphs;
}

std::vector<MolecularGraph> labeled_graphs(const std::vector<Molecule> &mols,
                                           double cutoff) {
  if (mols.empty())
    throw ParseError("dataset contains no molecules");
  for (const auto &m : mols)
    if (m.labels.empty())
      throw ParseError("molecule '" + m.id + "' has no labels");
  return build_graphs(mols, cutoff);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm {};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

// Training flags shared by `train` and `sweep`; unset flags keep the
// configuration file's values.
struct TrainFlags {
  std::string config_path;
  std::optional<double> cutoff, lr;
  std::optional<std::size_t> k, layers, batch_size, epochs, threads, hidden_dim,
      patience;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;

  void add_to(CLI::App &cmd) {
    cmd.add_option("--config", config_path, "JSON training configuration");
    cmd.add_option("--cutoff", cutoff, "cutoff-edge distance in Angstrom (default 5.0)");
    cmd.add_option("--k", k, "Fourier harmonics K");
    cmd.add_option("--layers", layers, "message-passing layers");
    cmd.add_option("--batch-size", batch_size, "minibatch size");
    cmd.add_option("--lr", lr, "Adam learning rate");
    cmd.add_option("--epochs", epochs, "maximum epochs");
    cmd.add_option("--seed", seed, "seed for split, initialization and shuffling");
    cmd.add_option("--variant", variant, "kagnn or kagat")
        ->check(CLI::IsMember({ "kagnn", "kagat" }));
    cmd.add_option("--threads", threads, "worker threads (default 1)");
    cmd.add_option("--hidden-dim", hidden_dim, "hidden width (default 64)");
    cmd.add_option("--patience", patience, "early-stopping patience in epochs");
  }

  TrainConfig resolve() const {
    TrainConfig c;
    if (!config_path.empty()) {
      try {
        c = TrainConfig::from_json(read_json_file(resolve_data_path(config_path)));
      } catch (const ParseError &e) {
        throw UsageError(config_path + ": " + e.what());
      }
    }
    if (cutoff) c.cutoff = *cutoff;
    if (lr) c.learning_rate = *lr;
    if (k) c.harmonics = *k;
    if (layers) c.n_layers = *layers;
    if (batch_size) c.batch_size = *batch_size;
    if (epochs) c.epochs = *epochs;
    if (seed) c.seed = *seed;
    if (variant) c.variant = *parse_variant(*variant);
    if (threads) c.threads = *threads;
    if (hidden_dim) c.hidden_dim = *hidden_dim;
    if (patience) c.patience = *patience;
    try {
      c.validate();
    } catch (const std::invalid_argument &e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

struct RunOutcome {
  RunReport report;
  Model model;
};

// Repeat r trains with seed + r; without a split file the split is also
// redrawn from seed + r.
std::vector<RunOutcome> train_repeats(const std::vector<MolecularGraph> &graphs,
                                      TrainConfig config, std::size_t repeats,
                                      const std::optional<SplitSpec> &split_file) {
  std::vector<RunOutcome> runs;
  const std::uint64_t base_seed = config.seed;
  for (std::size_t r = 0; r < repeats; ++r) {
    config.seed = base_seed + r;
    const SplitSpec split = split_file ? *split_file : random_split(graphs.size(), config.seed);
    TrainResult result = train_loop(graphs, config, split);
    runs.push_back({ std::move(result.report), std::move(result.model) });
  }
  return runs;
}

std::optional<SplitSpec> load_split(const std::string &path, std::size_t n) {
  if (path.empty())
    return std::nullopt;
  return split_from_json(read_json_file(resolve_data_path(path)), n);
}

// ---------------------------------------------------------------------------

int cmd_featurize(const std::string &input, const std::string &format,
                  double cutoff, const std::string &output) {
  const auto mols = load_molecules(input, format);
  std::ostringstream out;
  std::size_t covalent = 0, cut = 0;
  for (const auto &g : build_graphs(mols, cutoff)) {
    covalent += g.count_edges(EdgeKind::Covalent);
    cut += g.count_edges(EdgeKind::Cutoff);
    out << graph_to_json(g, cutoff).dump() << '\n';
  }
  if (output.empty() || output == "-")
    std::cout << out.str();
  else
    write_file(output, out.str());
  std::cerr << "featurized " << mols.size() << " molecules: " << covalent
            << " covalent edges, " << cut << " cutoff edges (cutoff " << cutoff
            << " A)\n";
  return kOk;
}

int cmd_train(const TrainFlags &flags, const std::string &data,
              const std::string &split_path, const std::string &out_dir,
              std::size_t repeats) {
  const TrainConfig config = flags.resolve();
  if (repeats == 0)
    throw UsageError("--repeats must be at least 1");
  const auto started = utc_timestamp();
  const auto graphs = labeled_graphs(load_molecules(data), config.cutoff);
  const auto split = load_split(split_path, graphs.size());

  const auto runs = train_repeats(graphs, config, repeats, split);
  std::vector<RunReport> reports;
  json wall = json::array();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const fs::path dir = fs::path(out_dir) / ("run_" + std::to_string(r));
    write_json(dir / "checkpoint.json", checkpoint_to_json(runs[r].model, config.cutoff));
    write_file(dir / "epochs.csv", runs[r].report.epochs_csv());
    const auto &rep = runs[r].report;
    std::cout << "run " << r << ": test ROC-AUC " << std::fixed << std::setprecision(4)
              << rep.test_auc << " (best epoch " << rep.best_epoch << ", "
              << rep.parameter_count << " parameters, " << rep.covalent_edges
              << " covalent + " << rep.cutoff_edges << " cutoff edges)\n";
    wall.push_back(rep.wall_seconds);
    reports.push_back(rep);
  }
  const RepeatedRuns agg = aggregate_runs(std::move(reports));
  write_json(fs::path(out_dir) / "report.json", agg.to_json());
  write_json(fs::path(out_dir) / "metadata.json",
             { { "started", started },
               { "finished", utc_timestamp() },
               { "wall_seconds", wall },
               { "data", data } });
  std::cout << "test ROC-AUC " << std::fixed << std::setprecision(4) << agg.test_auc_mean
            << " +/- " << agg.test_auc_std << " over " << agg.runs.size() << " run(s)\n";
  return kOk;
}

int cmd_eval(const std::string &checkpoint, const std::string &data,
             const std::string &split_path, const std::string &output) {
  const auto [model, cutoff] = checkpoint_from_json(read_json_file(checkpoint));
  const auto graphs = labeled_graphs(load_molecules(data), cutoff);
  if (graphs.front().num_tasks() != model.config().n_tasks)
    throw ParseError("dataset has " + std::to_string(graphs.front().num_tasks()) +
                     " tasks, checkpoint expects " + std::to_string(model.config().n_tasks));
  std::vector<std::size_t> indices;
  if (const auto split = load_split(split_path, graphs.size()))
    indices = split->test;
  else
    for (std::size_t i = 0; i < graphs.size(); ++i)
      indices.push_back(i);

  const Evaluation ev = evaluate(model, graphs, indices);
  json task_auc = json::array();
  for (const auto &t : ev.auc.per_task)
    task_auc.push_back(t ? json(*t) : json(nullptr));
  json predictions = json::array();
  for (std::size_t n = 0; n < indices.size(); ++n)
    predictions.push_back({ { "id", graphs[indices[n]].id },
                            { "probabilities", ev.probabilities[n] } });
  const json doc = { { "n", indices.size() },
                     { "cutoff", cutoff },
                     { "auc", ev.auc.mean },
                     { "task_auc", task_auc },
                     { "mean_loss", ev.mean_loss },
                     { "parameter_count", model.parameter_count() },
                     { "predictions", predictions } };
  if (output.empty() || output == "-")
    std::cout << doc.dump(2) << "\n";
  else
    write_json(output, doc);
  std::cerr << "ROC-AUC " << ev.auc.mean << " on " << indices.size() << " molecules\n";
  return kOk;
}

std::vector<std::size_t> parse_size_list(const std::string &text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception &) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || v == 0)
      throw UsageError("expected a comma-separated list of positive integers, got '" +
                       text + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

json fit_summary(const FitResult &r) {
  json j = r.to_json();
  for (const char *key : { "x", "y_true", "y_pred" })
    j.erase(key);
  return j;
}

int cmd_fitfn(const std::string &target_arg, const std::string &arm_arg,
              std::optional<std::size_t> k, std::uint64_t seed,
              std::optional<std::size_t> steps, const std::string &sweep,
              const std::string &out_dir) {
  std::vector<FitTarget> targets;
  if (target_arg == "all")
    targets = standard_targets();
  else if (const auto t = parse_fit_target(target_arg))
    targets.push_back(*t);
  else
    throw UsageError("unknown target '" + target_arg + "'");
  std::vector<FitArm> arms;
  if (arm_arg == "both" || arm_arg == "kan")
    arms.push_back(FitArm::FourierKan);
  if (arm_arg == "both" || arm_arg == "mlp")
    arms.push_back(FitArm::Mlp);

  json results = json::array();
  std::printf("%-14s %-4s %6s %12s %12s %8s\n", "target", "arm", "K", "train_mse",
              "test_mse", "params");
  if (sweep.empty()) {
    for (auto target : targets) {
      FitTask task = default_task(target);
      if (k)
        task.harmonics = *k;
      if (steps)
        task.steps = *steps;
      for (auto arm : arms) {
        const FitResult r = run_fit(task, arm, seed);
        write_file(fs::path(out_dir) / (r.target + "_" + std::string(to_string(arm)) + ".csv"),
                   r.predictions_csv());
        results.push_back(fit_summary(r));
        std::printf("%-14s %-4s %6zu %12.4e %12.4e %8zu\n", r.target.c_str(),
                    std::string(to_string(arm)).c_str(), r.harmonics, r.train_mse,
                    r.test_mse, r.parameter_count);
      }
    }
    write_json(fs::path(out_dir) / "summary.json", { { "seed", seed }, { "results", results } });
    return kOk;
  }

  const auto k_list = parse_size_list(sweep);
  const FitTarget target = target_arg == "all" ? FitTarget::Polynomial : targets.front();
  FitTask task = default_task(target);
  if (steps)
    task.steps = *steps;
  task.n_samples = std::max(task.n_samples,
                            4 * *std::max_element(k_list.begin(), k_list.end()));
  for (const auto &r : sweep_k(task, k_list, seed)) {
    write_file(fs::path(out_dir) / (r.target + "_K" + std::to_string(r.harmonics) + ".csv"),
               r.predictions_csv());
    results.push_back(fit_summary(r));
    std::printf("%-14s %-4s %6zu %12.4e %12.4e %8zu\n", r.target.c_str(), "kan",
                r.harmonics, r.train_mse, r.test_mse, r.parameter_count);
  }
  write_json(fs::path(out_dir) / "sweep_k.json", { { "seed", seed }, { "results", results } });
  return kOk;
}

int cmd_gradcheck(const GradCheckSuiteOptions &options, const std::string &output) {
  const auto result = run_gradcheck_suite(options);
  json rows = json::array();
  std::printf("%-7s %-24s %6s %14s %10s  %s\n", "suite", "group", "cases", "max_rel_err",
              "tolerance", "status");
  for (const auto &r : result.rows) {
    std::printf("%-7s %-24s %6zu %14.3e %10.0e  %s\n", r.suite.c_str(), r.group.c_str(),
                r.cases, r.max_relative_error, r.tolerance, r.passed() ? "PASS" : "FAIL");
    rows.push_back({ { "suite", r.suite },
                     { "group", r.group },
                     { "cases", r.cases },
                     { "max_relative_error", r.max_relative_error },
                     { "tolerance", r.tolerance },
                     { "passed", r.passed() } });
  }
  if (!output.empty())
    write_json(output, { { "passed", result.passed() }, { "rows", rows } });
  std::printf("gradcheck %s\n", result.passed() ? "PASSED" : "FAILED");
  return result.passed() ? kOk : kNumeric;
}

// Default grids: harmonics 1..5, cutoff 0..5 A, and the batch size, learning
// rate and depth rows of the sensitivity study.
json default_manifest() {
  return { { "grids",
             { { "K", { 1, 2, 3, 4, 5 } },
               { "cutoff", { 0.0, 1.0, 2.0, 3.0, 4.0, 5.0 } },
               { "batch_size", { 64, 128, 256, 512 } },
               { "lr", { 1e-3, 5e-4, 1e-4, 5e-5 } },
               { "layers", { 0, 1, 2, 3 } } } } };
}

int cmd_sweep(const TrainFlags &flags, const std::string &data,
              const std::string &split_path, const std::string &out_dir,
              const std::string &manifest_path, const std::vector<std::string> &axes,
              std::size_t repeats) {
  TrainConfig base = flags.resolve();
  const json manifest =
      manifest_path.empty() ? default_manifest() : read_json_file(resolve_data_path(manifest_path));
  if (manifest.contains("base")) {
    try {
      base = TrainConfig::from_json(manifest.at("base"), base);
    } catch (const ParseError &e) {
      throw UsageError(std::string("manifest base: ") + e.what());
    }
  }
  if (!manifest.contains("grids") || !manifest.at("grids").is_object())
    throw UsageError("manifest needs a \"grids\" object");
  if (repeats == 0)
    throw UsageError("--repeats must be at least 1");
  const auto mols = load_molecules(data);
  const auto started = utc_timestamp();

  std::map<double, std::vector<MolecularGraph>> graphs_by_cutoff;
  auto graphs_for = [&](double cutoff) -> const std::vector<MolecularGraph> & {
    auto it = graphs_by_cutoff.find(cutoff);
    if (it == graphs_by_cutoff.end())
      it = graphs_by_cutoff.emplace(cutoff, labeled_graphs(mols, cutoff)).first;
    return it->second;
  };

  json rows = json::array();
  std::printf("%-10s %10s %10s %8s %8s %10s %10s\n", "axis", "value", "test_auc", "std",
              "params", "covalent", "cutoff");
  for (const auto &[axis, values] : manifest.at("grids").items()) {
    if (!axes.empty() && std::find(axes.begin(), axes.end(), axis) == axes.end())
      continue;
    for (const auto &value : values) {
      TrainConfig config;
      try {
        config = TrainConfig::from_json({ { axis, value } }, base);
      } catch (const ParseError &e) {
        throw UsageError("manifest grid '" + axis + "': " + e.what());
      }
      const auto &graphs = graphs_for(config.cutoff);
      const auto split = load_split(split_path, graphs.size());
      std::vector<RunReport> reports;
      for (auto &run : train_repeats(graphs, config, repeats, split))
        reports.push_back(std::move(run.report));
      const RepeatedRuns agg = aggregate_runs(std::move(reports));
      const auto &first = agg.runs.front();
      rows.push_back({ { "axis", axis },
                       { "value", value },
                       { "test_auc_mean", agg.test_auc_mean },
                       { "test_auc_std", agg.test_auc_std },
                       { "parameter_count", first.parameter_count },
                       { "covalent_edges", first.covalent_edges },
                       { "cutoff_edges", first.cutoff_edges },
                       { "config", config.to_json() } });
      std::printf("%-10s %10s %10.4f %8.4f %8zu %10zu %10zu\n", axis.c_str(),
                  value.dump().c_str(), agg.test_auc_mean, agg.test_auc_std,
                  first.parameter_count, first.covalent_edges, first.cutoff_edges);
    }
  }
  write_json(fs::path(out_dir) / "sweep.json",
             { { "base", base.to_json() }, { "repeats", repeats }, { "rows", rows } });
  write_json(fs::path(out_dir) / "metadata.json",
             { { "started", started }, { "finished", utc_timestamp() }, { "data", data } });
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "KA-GNN: Fourier KAN graph networks for molecular property prediction" };
  app.require_subcommand(1);

  // featurize
  auto *featurize = app.add_subcommand("featurize", "molecules -> featurized graph JSON-lines");
  std::string f_input, f_format, f_output;
  double f_cutoff = kDefaultCutoff;
  featurize->add_option("input", f_input, "molecule file (.jsonl or .sdf)")->required();
  featurize->add_option("--format", f_format, "json or sdf (default: from extension)")
      ->check(CLI::IsMember({ "json", "sdf" }));
  featurize->add_option("--cutoff", f_cutoff, "cutoff-edge distance in Angstrom");
  featurize->add_option("-o,--output", f_output, "output file (default stdout)");

  // train
  auto *train = app.add_subcommand("train", "train a model and write checkpoint + report");
  TrainFlags t_flags;
  std::string t_data, t_split, t_out;
  std::size_t t_repeats = 1;
  t_flags.add_to(*train);
  train->add_option("--data", t_data, "molecule JSON-lines with labels")->required();
  train->add_option("--split", t_split, "split file {train, valid, test}");
  train->add_option("--out", t_out, "output directory")->required();
  train->add_option("--repeats", t_repeats, "independent runs (seeds seed..seed+R-1)");

  // eval
  auto *eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string e_ckpt, e_data, e_split, e_output;
  eval->add_option("--checkpoint", e_ckpt, "checkpoint.json")->required();
  eval->add_option("--data", e_data, "molecule JSON-lines with labels")->required();
  eval->add_option("--split", e_split, "evaluate the test part of this split");
  eval->add_option("-o,--output", e_output, "output JSON (default stdout)");

  // fitfn
  auto *fitfn = app.add_subcommand("fitfn", "univariate fitting: Fourier KAN vs MLP");
  std::string ff_target = "all", ff_arm = "both", ff_sweep, ff_out;
  std::optional<std::size_t> ff_k, ff_steps;
  std::uint64_t ff_seed = 0;
  fitfn->add_option("--target", ff_target,
                    "all, logarithmic, sin_plus_cos, linear, sin, polynomial, exponential");
  fitfn->add_option("--arm", ff_arm, "both, kan or mlp")
      ->check(CLI::IsMember({ "both", "kan", "mlp" }));
  fitfn->add_option("--k", ff_k, "override the target's harmonics");
  fitfn->add_option("--steps", ff_steps, "Adam steps (default 5000)");
  fitfn->add_option("--seed", ff_seed, "initialization seed");
  fitfn->add_option("--sweep-k", ff_sweep, "comma-separated K list (KAN arm only)");
  fitfn->add_option("--out", ff_out, "output directory")->required();

  // gradcheck
  auto *gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  GradCheckSuiteOptions g_opts;
  std::string g_variant = "both", g_output;
  gradcheck->add_option("--k", g_opts.harmonics, "harmonics");
  gradcheck->add_option("--layers", g_opts.n_layers, "message-passing layers");
  gradcheck->add_option("--hidden-dim", g_opts.hidden_dim, "hidden width");
  gradcheck->add_option("--graphs", g_opts.graphs, "random graphs per variant");
  gradcheck->add_option("--seed", g_opts.seed, "seed");
  gradcheck->add_option("--variant", g_variant, "both, kagnn or kagat")
      ->check(CLI::IsMember({ "both", "kagnn", "kagat" }));
  gradcheck->add_flag("--corrupt", g_opts.corrupt,
                      "perturb one analytic gradient entry (negative control)");
  gradcheck->add_option("-o,--output", g_output, "also write the table as JSON");

  // sweep
  auto *sweep = app.add_subcommand("sweep", "one-factor sensitivity sweeps");
  TrainFlags s_flags;
  std::string s_data, s_split, s_out, s_manifest;
  std::vector<std::string> s_axes;
  std::size_t s_repeats = 1;
  s_flags.add_to(*sweep);
  sweep->add_option("--data", s_data, "molecule JSON-lines with labels")->required();
  sweep->add_option("--split", s_split, "split file {train, valid, test}");
  sweep->add_option("--out", s_out, "output directory")->required();
  sweep->add_option("--manifest", s_manifest, "JSON {\"base\": {...}, \"grids\": {axis: [values]}}");
  sweep->add_option("--grid", s_axes, "restrict to these axes (K, cutoff, batch_size, lr, layers)")
      ->delimiter(',');
  sweep->add_option("--repeats", s_repeats, "runs per grid point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*featurize)
      return cmd_featurize(f_input, f_format, f_cutoff, f_output);
    if (*train)
      return cmd_train(t_flags, t_data, t_split, t_out, t_repeats);
    if (*eval)
      return cmd_eval(e_ckpt, e_data, e_split, e_output);
    if (*fitfn)
      return cmd_fitfn(ff_target, ff_arm, ff_k, ff_seed, ff_steps, ff_sweep, ff_out);
    if (*gradcheck) {
      if (g_variant != "both")
        g_opts.variants = { *parse_variant(g_variant) };
      return cmd_gradcheck(g_opts, g_output);
    }
    if (*sweep)
      return cmd_sweep(s_flags, s_data, s_split, s_out, s_manifest, s_axes, s_repeats);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError &e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ShapeError &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
