// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kagnn/errors.hpp"
#include "kagnn/rng.hpp"

namespace kagnn {
namespace {

using nlohmann::json;

json optional_number(const std::optional<double> &v) {
  return v ? json(*v) : json(nullptr);
}

std::size_t labeled_entries(const std::vector<MolecularGraph> &data,
                            const std::vector<std::size_t> &indices) {
  std::size_t count = 0;
  for (auto i : indices)
    count += static_cast<std::size_t>(
        std::count(data[i].mask.begin(), data[i].mask.end(), std::uint8_t { 1 }));
  return count;
}

void add_gradients(Model &into, Model &from) {
  auto dst = into.parameters();
  const auto src = from.parameters();
  for (std::size_t p = 0; p < dst.size(); ++p)
    for (std::size_t i = 0; i < dst[p].values.size(); ++i)
      dst[p].values[i] += src[p].values[i];
}

// Sum of per-graph losses and gradients over `batch`. With several threads
// each worker owns a contiguous chunk; chunk results are reduced in order.
double batch_gradients(const Model &model, const std::vector<MolecularGraph> &data,
                       const std::vector<std::size_t> &batch, std::size_t threads,
                       Model &grad) {
  threads = std::max<std::size_t>(1, std::min(threads, batch.size()));
  if (threads == 1) {
    double loss = 0.0;
    for (auto i : batch)
      loss += model.accumulate_gradients(data[i], grad);
    return loss;
  }
  std::vector<Model> partial(threads, model.zeros_like());
  std::vector<double> losses(threads, 0.0);
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  const std::size_t chunk = (batch.size() + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t]() {
      try {
        const auto begin = t * chunk;
        const auto end = std::min(batch.size(), begin + chunk);
        for (auto k = begin; k < end; ++k)
          losses[t] += model.accumulate_gradients(data[batch[k]], partial[t]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto &w : workers)
    w.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
  double loss = 0.0;
  for (std::size_t t = 0; t < threads; ++t) {
    add_gradients(grad, partial[t]);
    loss += losses[t];
  }
  return loss;
}

void zero(Model &grad) {
  for (auto &p : grad.parameters())
    std::fill(p.values.begin(), p.values.end(), 0.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Adam

void adam_step(std::vector<ParamView> &params,
               const std::vector<ParamView> &grads, AdamState &state,
               double learning_rate, const AdamOptions &options) {
  if (params.size() != grads.size())
    throw ShapeError("parameter and gradient lists differ in length");
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].values.size() != grads[p].values.size())
      throw ShapeError("gradient for '" + params[p].name + "' has wrong size");
    for (std::size_t i = 0; i < grads[p].values.size(); ++i) {
      if (!std::isfinite(grads[p].values[i]))
        throw NumericError("non-finite gradient in '" + grads[p].name +
                           "' at entry " + std::to_string(i));
    }
  }
  if (state.first_moment.empty()) {
    for (const auto &p : params) {
      state.first_moment.emplace_back(p.values.size(), 0.0);
      state.second_moment.emplace_back(p.values.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size())
    throw ShapeError("Adam state does not match parameter list");

  ++state.step;
  const auto t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto &m = state.first_moment[p];
    auto &v = state.second_moment[p];
    auto values = params[p].values;
    const auto g = grads[p].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g[i];
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + options.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Splits

std::string_view to_string(SplitProvenance provenance) {
  return provenance == SplitProvenance::RandomSeeded ? "random_seeded"
                                                     : "external_file";
}

void SplitSpec::validate(std::size_t n) const {
  std::vector<int> seen(n, 0);
  for (const auto *list : { &train, &valid, &test }) {
    for (auto i : *list) {
      if (i >= n)
        throw std::invalid_argument("split index " + std::to_string(i) +
                                    " out of range for " + std::to_string(n) +
                                    " molecules");
      if (seen[i]++)
        throw std::invalid_argument("split index " + std::to_string(i) +
                                    " appears more than once");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i])
      throw std::invalid_argument("split does not cover index " + std::to_string(i));
}

json SplitSpec::to_json() const {
  return { { "train", train },
           { "valid", valid },
           { "test", test },
           { "provenance", to_string(provenance) } };
}

SplitSpec random_split(std::size_t n, std::uint64_t seed, double train_ratio,
                       double valid_ratio) {
  if (n < 3)
    throw std::invalid_argument("random_split needs at least 3 items");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t { 0 });
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(n)));
  const auto n_valid = static_cast<std::size_t>(std::floor(valid_ratio * static_cast<double>(n)));
  SplitSpec split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.valid.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                     order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid),
                    order.end());
  split.provenance = SplitProvenance::RandomSeeded;
  return split;
}

SplitSpec split_from_json(const json &doc, std::size_t n) {
  SplitSpec split;
  try {
    split.train = doc.at("train").get<std::vector<std::size_t>>();
    split.valid = doc.at("valid").get<std::vector<std::size_t>>();
    split.test = doc.at("test").get<std::vector<std::size_t>>();
  } catch (const json::exception &e) {
    throw ParseError(std::string("invalid split file: ") + e.what());
  }
  split.provenance = SplitProvenance::ExternalFile;
  try {
    split.validate(n);
  } catch (const std::invalid_argument &e) {
    throw ParseError(std::string("invalid split file: ") + e.what());
  }
  return split;
}

// ---------------------------------------------------------------------------
// Metrics

double roc_auc(const std::vector<double> &scores, const std::vector<int> &labels) {
  if (scores.size() != labels.size())
    throw ShapeError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t { 0 });
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks of the positives.
  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && scores[order[end]] == scores[order[start]])
      ++end;
    const double midrank = 0.5 * static_cast<double>(start + 1 + end);
    for (auto k = start; k < end; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += midrank;
        ++n_pos;
      }
    }
    start = end;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw EvaluationError("ROC-AUC needs both positive and negative labels");
  const double pos = static_cast<double>(n_pos);
  const double u = positive_rank_sum - pos * (pos + 1.0) / 2.0;
  return u / (pos * static_cast<double>(n_neg));
}

MacroAuc macro_roc_auc(const std::vector<std::vector<double>> &scores,
                       const std::vector<std::vector<double>> &labels,
                       const std::vector<std::vector<std::uint8_t>> &mask) {
  if (scores.size() != labels.size() || labels.size() != mask.size())
    throw ShapeError("scores, labels and mask differ in sample count");
  MacroAuc result;
  const std::size_t n_tasks = scores.empty() ? 0 : scores.front().size();
  double total = 0.0;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!mask[i][t])
        continue;
      s.push_back(scores[i][t]);
      y.push_back(labels[i][t] > 0.5 ? 1 : 0);
    }
    const auto positives = std::count(y.begin(), y.end(), 1);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(y.size())) {
      result.per_task.emplace_back(std::nullopt);
      continue;
    }
    const double auc = roc_auc(s, y);
    result.per_task.emplace_back(auc);
    total += auc;
    ++result.evaluated_tasks;
  }
  if (result.evaluated_tasks == 0)
    throw EvaluationError("no task has both classes among the evaluated labels");
  result.mean = total / static_cast<double>(result.evaluated_tasks);
  return result;
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
  auto require = [](bool ok, const char *field, const char *what) {
    if (!ok)
      throw std::invalid_argument(std::string("config field '") + field + "' " + what);
  };
  require(batch_size > 0, "batch_size", "must be positive");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "lr", "must be positive");
  require(harmonics > 0, "K", "must be positive");
  require(cutoff >= 0.0 && std::isfinite(cutoff), "cutoff", "must be non-negative");
  require(hidden_dim > 0, "hidden_dim", "must be positive");
  require(threads > 0, "threads", "must be positive");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "beta1", "must lie in [0, 1)");
  require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "beta2", "must lie in [0, 1)");
  require(adam.epsilon > 0.0, "epsilon", "must be positive");
}

ModelConfig TrainConfig::model_config(std::size_t n_tasks) const {
  ModelConfig mc;
  mc.variant = variant;
  mc.n_layers = n_layers;
  mc.harmonics = harmonics;
  mc.hidden_dim = hidden_dim;
  mc.n_tasks = n_tasks;
  mc.readout_layers = readout_layers;
  mc.kan_bias = kan_bias;
  mc.seed = seed;
  return mc;
}

json TrainConfig::to_json() const {
  return { { "batch_size", batch_size },
           { "lr", learning_rate },
           { "K", harmonics },
           { "layers", n_layers },
           { "cutoff", cutoff },
           { "epochs", epochs },
           { "seed", seed },
           { "variant", to_string(variant) },
           { "beta1", adam.beta1 },
           { "beta2", adam.beta2 },
           { "epsilon", adam.epsilon },
           { "patience", patience },
           { "hidden_dim", hidden_dim },
           { "readout_layers", readout_layers },
           { "kan_bias", kan_bias },
           { "threads", threads } };
}

TrainConfig TrainConfig::from_json(const json &doc, TrainConfig base) {
  if (!doc.is_object())
    throw ParseError("config must be a JSON object");
  static const char *kKnown[] = { "batch_size", "lr", "learning_rate", "K",
                                  "layers", "n_layers", "cutoff", "epochs",
                                  "seed", "variant", "beta1", "beta2",
                                  "epsilon", "patience", "hidden_dim",
                                  "readout_layers", "kan_bias", "threads" };
  for (const auto &[key, value] : doc.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown))
      throw ParseError("config field '" + key + "' is not recognized");
  }
  auto read = [&](const char *key, auto &out) {
    auto it = doc.find(key);
    if (it == doc.end())
      return;
    try {
      out = it->get<std::decay_t<decltype(out)>>();
    } catch (const json::exception &) {
      throw ParseError(std::string("config field '") + key + "' has the wrong type");
    }
  };
  auto read_count = [&](const char *key, std::size_t &out) {
    auto it = doc.find(key);
    if (it == doc.end())
      return;
    if (!it->is_number_integer() || it->get<long long>() < 0)
      throw ParseError(std::string("config field '") + key +
                       "' must be a non-negative integer");
    out = it->get<std::size_t>();
  };
  TrainConfig c = base;
  read_count("batch_size", c.batch_size);
  read("lr", c.learning_rate);
  read("learning_rate", c.learning_rate);
  read_count("K", c.harmonics);
  read_count("layers", c.n_layers);
  read_count("n_layers", c.n_layers);
  read("cutoff", c.cutoff);
  read_count("epochs", c.epochs);
  read("seed", c.seed);
  if (auto it = doc.find("variant"); it != doc.end()) {
    const auto v = it->is_string() ? parse_variant(it->get<std::string>()) : std::nullopt;
    if (!v)
      throw ParseError("config field 'variant' must be \"kagnn\" or \"kagat\"");
    c.variant = *v;
  }
  read("beta1", c.adam.beta1);
  read("beta2", c.adam.beta2);
  read("epsilon", c.adam.epsilon);
  read_count("patience", c.patience);
  read_count("hidden_dim", c.hidden_dim);
  read_count("readout_layers", c.readout_layers);
  read("kan_bias", c.kan_bias);
  read_count("threads", c.threads);
  try {
    c.validate();
  } catch (const std::invalid_argument &e) {
    throw ParseError(e.what());
  }
  return c;
}

TrainConfig TrainConfig::from_json(const json &doc) {
  return from_json(doc, TrainConfig {});
}

json RunReport::to_json() const {
  json epochs_json = json::array();
  for (const auto &e : epochs)
    epochs_json.push_back({ { "epoch", e.epoch },
                            { "train_loss", e.train_loss },
                            { "valid_auc", optional_number(e.valid_auc) },
                            { "valid_loss", e.valid_loss } });
  json task_auc = json::array();
  for (const auto &t : test_task_auc)
    task_auc.push_back(optional_number(t));
  return { { "config", config.to_json() },
           { "split_provenance", to_string(split_provenance) },
           { "paper_comparable", false },
           { "n_train", n_train },
           { "n_valid", n_valid },
           { "n_test", n_test },
           { "parameter_count", parameter_count },
           { "covalent_edges", covalent_edges },
           { "cutoff_edges", cutoff_edges },
           { "selection_metric", selection_metric },
           { "best_epoch", best_epoch },
           { "best_valid_auc", optional_number(best_valid_auc) },
           { "test_auc", test_auc },
           { "test_task_auc", std::move(task_auc) },
           { "epochs", std::move(epochs_json) } };
}

std::string RunReport::epochs_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,valid_auc,valid_loss\n";
  for (const auto &e : epochs) {
    out << e.epoch << ',' << e.train_loss << ',';
    if (e.valid_auc)
      out << *e.valid_auc;
    out << ',' << e.valid_loss << '\n';
  }
  return out.str();
}

double mean_loss(const Model &model, const std::vector<MolecularGraph> &data,
                 const std::vector<std::size_t> &indices) {
  double total = 0.0;
  for (auto i : indices)
    total += model.loss(data[i]);
  const auto count = labeled_entries(data, indices);
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

Evaluation evaluate(const Model &model, const std::vector<MolecularGraph> &data,
                    const std::vector<std::size_t> &indices) {
  Evaluation ev;
  std::vector<std::vector<double>> labels;
  std::vector<std::vector<std::uint8_t>> masks;
  double total = 0.0;
  for (auto i : indices) {
    const auto trace = model.forward(data[i]);
    total += bce_loss(trace.probabilities, data[i].labels, data[i].mask);
    ev.probabilities.push_back(trace.probabilities);
    labels.push_back(data[i].labels);
    masks.push_back(data[i].mask);
  }
  const auto count = labeled_entries(data, indices);
  ev.mean_loss = count == 0 ? 0.0 : total / static_cast<double>(count);
  ev.auc = macro_roc_auc(ev.probabilities, labels, masks);
  return ev;
}

TrainResult train_loop(const std::vector<MolecularGraph> &data,
                       const TrainConfig &config, const SplitSpec &split) {
  config.validate();
  if (data.empty())
    throw std::invalid_argument("training set is empty");
  split.validate(data.size());
  const auto n_tasks = data.front().num_tasks();
  for (const auto &g : data)
    if (g.num_tasks() != n_tasks)
      throw std::invalid_argument("molecules disagree on the number of tasks");

  const auto started = std::chrono::steady_clock::now();
  Model model = Model::init(config.model_config(n_tasks));
  Model grad = model.zeros_like();
  AdamState adam;

  TrainResult result;
  RunReport &report = result.report;
  report.config = config;
  report.split_provenance = split.provenance;
  report.n_train = split.train.size();
  report.n_valid = split.valid.size();
  report.n_test = split.test.size();
  report.parameter_count = model.parameter_count();
  for (const auto &g : data) {
    report.covalent_edges += g.count_edges(EdgeKind::Covalent);
    report.cutoff_edges += g.count_edges(EdgeKind::Cutoff);
  }

  // Select on validation ROC-AUC when it is defined (ties broken by lower
  // validation loss, since AUC saturates quickly on small sets), else on
  // validation loss alone.
  auto valid_auc = [&](const Model &m) -> std::optional<double> {
    if (split.valid.empty())
      return std::nullopt;
    try {
      return evaluate(m, data, split.valid).auc.mean;
    } catch (const EvaluationError &) {
      return std::nullopt;
    }
  };
  const bool select_on_auc = valid_auc(model).has_value();
  report.selection_metric = select_on_auc ? "valid_auc" : "valid_loss";
  struct Score {
    double auc;
    double loss;
    bool better_than(const Score &o) const {
      return auc > o.auc || (auc == o.auc && loss < o.loss);
    }
  };
  auto score = [&](const std::optional<double> &auc, double loss) {
    return Score { select_on_auc && auc ? *auc : 0.0, loss };
  };

  Model best = model;
  Score best_score = score(valid_auc(model), mean_loss(model, data, split.valid));
  report.best_valid_auc = select_on_auc ? valid_auc(model) : std::nullopt;
  std::size_t since_improvement = 0;

  std::vector<std::size_t> order = split.train;
  Rng shuffle_rng(mix_seed(config.seed, 0x5eed));
  const auto train_entries = labeled_entries(data, split.train);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch_id = 0; start < order.size();
         start += config.batch_size, ++batch_id) {
      const auto end = std::min(order.size(), start + config.batch_size);
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
      zero(grad);
      double loss = 0.0;
      try {
        loss = batch_gradients(model, data, batch, config.threads, grad);
      } catch (const DomainError &e) {
        // inputs were validated when the graphs were built, so non-finite
        // activations here mean the weights have diverged
        throw NumericError("diverged in epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_id) + ": " + e.what());
      }
      if (!std::isfinite(loss))
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_id));
      epoch_loss += loss;
      auto params = model.parameters();
      const auto grads = grad.parameters();
      try {
        adam_step(params, grads, adam, config.learning_rate, config.adam);
      } catch (const NumericError &e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_id) + ": " + e.what());
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss =
        train_entries == 0 ? 0.0 : epoch_loss / static_cast<double>(train_entries);
    try {
      record.valid_auc = valid_auc(model);
      record.valid_loss = mean_loss(model, data, split.valid);
    } catch (const DomainError &e) {
      throw NumericError("diverged in epoch " + std::to_string(epoch) +
                         ", validation pass: " + e.what());
    }
    report.epochs.push_back(record);

    const Score s = score(record.valid_auc, record.valid_loss);
    if (s.better_than(best_score)) {
      best_score = s;
      best = model;
      report.best_epoch = epoch;
      if (select_on_auc)
        report.best_valid_auc = record.valid_auc;
      since_improvement = 0;
    } else if (++since_improvement >= config.patience) {
      break;
    }
  }

  const Evaluation test = evaluate(best, data, split.test);
  report.test_auc = test.auc.mean;
  report.test_task_auc = test.auc.per_task;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.model = std::move(best);
  return result;
}

json RepeatedRuns::to_json() const {
  json arr = json::array();
  for (const auto &r : runs)
    arr.push_back(r.to_json());
  return { { "runs", std::move(arr) },
           { "test_auc_mean", test_auc_mean },
           { "test_auc_std", test_auc_std },
           { "seed_policy", "run r uses seed + r for initialization, shuffling "
                            "and (for random splits) the split" } };
}

RepeatedRuns aggregate_runs(std::vector<RunReport> runs) {
  RepeatedRuns out;
  out.runs = std::move(runs);
  if (out.runs.empty())
    return out;
  double sum = 0.0;
  for (const auto &r : out.runs)
    sum += r.test_auc;
  out.test_auc_mean = sum / static_cast<double>(out.runs.size());
  double sq = 0.0;
  for (const auto &r : out.runs)
    sq += (r.test_auc - out.test_auc_mean) * (r.test_auc - out.test_auc_mean);
  out.test_auc_std = std::sqrt(sq / static_cast<double>(out.runs.size()));
  return out;
}

}  // namespace kagnn
