// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kagnn/errors.hpp"
#include "kagnn/rng.hpp"

namespace kagnn {
namespace {

using nlohmann::json;

constexpr std::size_t kInitInputDim = kNodeFeatureDim + kEdgeFeatureDim;

std::vector<std::size_t> readout_widths(const ModelConfig &config) {
  std::vector<std::size_t> widths { config.hidden_dim };
  for (std::size_t t = 1; t < config.resolved_readout_layers(); ++t)
    widths.push_back(config.hidden_dim);
  widths.push_back(config.n_tasks);
  return widths;
}

Matrix row_vector(const std::vector<double> &v) {
  return Matrix(1, v.size(), v);
}

void add_into(Matrix &dst, const Matrix &src) {
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst.data()[i] += src.data()[i];
}

ModelConfig config_from_json(const json &doc) {
  ModelConfig config;
  const auto variant = parse_variant(doc.at("variant").get<std::string>());
  if (!variant)
    throw ParseError("unknown model variant '" +
                     doc.at("variant").get<std::string>() + "'");
  config.variant = *variant;
  config.n_layers = doc.at("L").get<std::size_t>();
  config.harmonics = doc.at("K").get<std::size_t>();
  config.hidden_dim = doc.at("hidden_dim").get<std::size_t>();
  config.n_tasks = doc.at("n_tasks").get<std::size_t>();
  config.readout_layers = doc.value("readout_layers", std::size_t { 0 });
  config.kan_bias = doc.value("kan_bias", false);
  config.seed = doc.value("seed", std::uint64_t { 0 });
  return config;
}

json config_to_json(const ModelConfig &config) {
  return { { "variant", to_string(config.variant) },
           { "L", config.n_layers },
           { "K", config.harmonics },
           { "hidden_dim", config.hidden_dim },
           { "n_tasks", config.n_tasks },
           { "readout_layers", config.resolved_readout_layers() },
           { "kan_bias", config.kan_bias },
           { "seed", config.seed } };
}

template <class T, class F>
json array_of(const std::vector<T> &items, F &&to) {
  json arr = json::array();
  for (const auto &item : items)
    arr.push_back(to(item));
  return arr;
}

}  // namespace

std::string_view to_string(Variant variant) {
  return variant == Variant::KaGnn ? "kagnn" : "kagat";
}

std::optional<Variant> parse_variant(std::string_view text) {
  if (text == "kagnn" || text == "KaGnn" || text == "ka-gnn")
    return Variant::KaGnn;
  if (text == "kagat" || text == "KaGat" || text == "ka-gat")
    return Variant::KaGat;
  return std::nullopt;
}

std::size_t ModelConfig::resolved_readout_layers() const {
  if (readout_layers != 0)
    return readout_layers;
  return n_tasks == 1 ? 1 : 2;
}

void ModelConfig::validate() const {
  if (harmonics == 0)
    throw std::invalid_argument("K (harmonics) must be positive");
  if (hidden_dim == 0)
    throw std::invalid_argument("hidden_dim must be positive");
  if (n_tasks == 0)
    throw std::invalid_argument("n_tasks must be positive");
}

KaGnnModel KaGnnModel::init(const ModelConfig &config) {
  config.validate();
  Rng rng(config.seed);
  KaGnnModel m;
  m.config = config;
  m.config.variant = Variant::KaGnn;
  const auto h = config.hidden_dim;
  m.kan_ini = FourierKanLayer::init(kInitInputDim, h, config.harmonics, rng,
                                    config.kan_bias);
  for (std::size_t l = 0; l < config.n_layers; ++l)
    m.mp_layers.push_back(FourierKanLayer::init(2 * h, h, config.harmonics, rng,
                                                config.kan_bias));
  m.readout_head = KanStack::init(readout_widths(config), config.harmonics, rng,
                                  config.kan_bias);
  return m;
}

KaGatModel KaGatModel::init(const ModelConfig &config) {
  config.validate();
  Rng rng(config.seed);
  KaGatModel m;
  m.config = config;
  m.config.variant = Variant::KaGat;
  const auto h = config.hidden_dim;
  m.kan_ini = FourierKanLayer::init(kInitInputDim, h, config.harmonics, rng,
                                    config.kan_bias);
  // Edge states only ever reach the loss through the per-channel attention
  // softmax, which cancels any per-channel constant, so the edge stream
  // carries no biases (they would be dead parameters).
  m.edge_init_dst = AffineMap::init(kNodeFeatureDim, h, rng, false);
  m.edge_init_edge = AffineMap::init(kEdgeFeatureDim, h, rng, false);
  m.edge_init_src = AffineMap::init(kNodeFeatureDim, h, rng, false);
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    m.node_proj.push_back(AffineMap::init(h, h, rng));
    m.nbr_proj.push_back(AffineMap::init(h, h, rng));
    m.mp_kan_layers.push_back(
        FourierKanLayer::init(h, h, config.harmonics, rng, config.kan_bias));
    m.edge_kan_layers.push_back(
        FourierKanLayer::init(h, h, config.harmonics, rng, false));
  }
  m.readout_head = KanStack::init(readout_widths(config), config.harmonics, rng,
                                  config.kan_bias);
  return m;
}

std::vector<DirectedEdge> directed_edges(const MolecularGraph &graph) {
  std::vector<DirectedEdge> out;
  out.reserve(2 * graph.edges.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    out.push_back({ graph.edges[e].u, graph.edges[e].v, e });
    out.push_back({ graph.edges[e].v, graph.edges[e].u, e });
  }
  return out;
}

Matrix node_init_inputs(const MolecularGraph &graph) {
  const auto n = graph.num_nodes();
  Matrix x(n, kInitInputDim);
  for (std::size_t v = 0; v < n; ++v) {
    auto row = x.row(v);
    const auto f = graph.node_features.row(v);
    std::copy(f.begin(), f.end(), row.begin());
    const auto &nbrs = graph.adjacency[v];
    if (nbrs.empty())
      continue;
    for (const auto &inc : nbrs) {
      const auto fe = graph.features_toward(inc.edge, v);
      for (std::size_t c = 0; c < kEdgeFeatureDim; ++c)
        row[kNodeFeatureDim + c] += fe[c];
    }
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    for (std::size_t c = 0; c < kEdgeFeatureDim; ++c)
      row[kNodeFeatureDim + c] *= inv;
  }
  return x;
}

Matrix init_node_states(const FourierKanLayer &kan_ini,
                        const MolecularGraph &graph) {
  return kan_ini.forward(node_init_inputs(graph));
}

Matrix neighbor_mean(const Matrix &states, const MolecularGraph &graph) {
  if (states.rows() != graph.num_nodes())
    throw ShapeError("node state rows do not match graph size");
  Matrix out(states.rows(), states.cols());
  for (std::size_t v = 0; v < states.rows(); ++v) {
    const auto &nbrs = graph.adjacency[v];
    if (nbrs.empty())
      continue;
    auto row = out.row(v);
    for (const auto &inc : nbrs) {
      const auto h = states.row(inc.neighbor);
      for (std::size_t c = 0; c < states.cols(); ++c)
        row[c] += h[c];
    }
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    for (double &x : row)
      x *= inv;
  }
  return out;
}

namespace {

Matrix concat_with_neighbor_mean(const Matrix &states,
                                 const MolecularGraph &graph) {
  const Matrix mean = neighbor_mean(states, graph);
  const auto width = states.cols();
  Matrix x(states.rows(), 2 * width);
  for (std::size_t v = 0; v < states.rows(); ++v) {
    auto row = x.row(v);
    const auto h = states.row(v);
    const auto m = mean.row(v);
    std::copy(h.begin(), h.end(), row.begin());
    std::copy(m.begin(), m.end(), row.begin() + static_cast<std::ptrdiff_t>(width));
  }
  return x;
}

Matrix gather_rows(const Matrix &src, const std::vector<DirectedEdge> &edges,
                   bool use_dst) {
  Matrix out(edges.size(), src.cols());
  for (std::size_t d = 0; d < edges.size(); ++d) {
    const auto row = src.row(use_dst ? edges[d].dst : edges[d].src);
    std::copy(row.begin(), row.end(), out.row(d).begin());
  }
  return out;
}

Matrix oriented_edge_features(const MolecularGraph &graph,
                              const std::vector<DirectedEdge> &edges) {
  Matrix out(edges.size(), kEdgeFeatureDim);
  for (std::size_t d = 0; d < edges.size(); ++d) {
    const auto f = graph.features_toward(edges[d].edge, edges[d].dst);
    std::copy(f.begin(), f.end(), out.row(d).begin());
  }
  return out;
}

Matrix aggregate_messages(const Matrix &z_self, const Matrix &z_nbr,
                          const Matrix &alpha,
                          const std::vector<DirectedEdge> &edges) {
  Matrix m = z_self;
  for (std::size_t d = 0; d < edges.size(); ++d) {
    auto out = m.row(edges[d].dst);
    const auto z = z_nbr.row(edges[d].src);
    const auto a = alpha.row(d);
    for (std::size_t c = 0; c < out.size(); ++c)
      out[c] += z[c] * a[c];
  }
  return m;
}

}  // namespace

Matrix kagnn_message_pass(const FourierKanLayer &layer, const Matrix &states,
                          const MolecularGraph &graph) {
  Matrix next = layer.forward(concat_with_neighbor_mean(states, graph));
  add_into(next, states);
  return next;
}

Matrix kagat_init_edges(const KaGatModel &model, const MolecularGraph &graph) {
  const auto edges = directed_edges(graph);
  if (edges.empty())
    return Matrix(0, model.config.hidden_dim);
  Matrix e = model.edge_init_dst.forward(gather_rows(graph.node_features, edges, true));
  add_into(e, model.edge_init_edge.forward(oriented_edge_features(graph, edges)));
  add_into(e, model.edge_init_src.forward(gather_rows(graph.node_features, edges, false)));
  return e;
}

Matrix attention_weights(const Matrix &edge_states, const MolecularGraph &graph) {
  const auto edges = directed_edges(graph);
  if (edge_states.rows() != edges.size())
    throw ShapeError("edge state rows do not match directed edge count");
  const auto width = edge_states.cols();
  const auto n = graph.num_nodes();
  Matrix alpha(edges.size(), width);
  Matrix peak(n, width, -std::numeric_limits<double>::infinity());
  for (std::size_t d = 0; d < edges.size(); ++d) {
    auto p = peak.row(edges[d].dst);
    const auto e = edge_states.row(d);
    for (std::size_t c = 0; c < width; ++c)
      p[c] = std::max(p[c], e[c]);
  }
  Matrix total(n, width);
  for (std::size_t d = 0; d < edges.size(); ++d) {
    const auto p = peak.row(edges[d].dst);
    const auto e = edge_states.row(d);
    auto a = alpha.row(d);
    auto t = total.row(edges[d].dst);
    for (std::size_t c = 0; c < width; ++c) {
      a[c] = std::exp(e[c] - p[c]);
      t[c] += a[c];
    }
  }
  for (std::size_t d = 0; d < edges.size(); ++d) {
    const auto t = total.row(edges[d].dst);
    auto a = alpha.row(d);
    for (std::size_t c = 0; c < width; ++c)
      a[c] /= t[c];
  }
  return alpha;
}

std::pair<Matrix, Matrix> kagat_message_pass(const KaGatModel &model,
                                             std::size_t layer,
                                             const Matrix &node_states,
                                             const Matrix &edge_states,
                                             const MolecularGraph &graph) {
  const auto edges = directed_edges(graph);
  const Matrix z_self = model.node_proj.at(layer).forward(node_states);
  const Matrix z_nbr = model.nbr_proj.at(layer).forward(node_states);
  const Matrix alpha = attention_weights(edge_states, graph);
  const Matrix m = aggregate_messages(z_self, z_nbr, alpha, edges);
  Matrix next_nodes = model.mp_kan_layers.at(layer).forward(m);
  Matrix next_edges = edge_states.rows() == 0
                          ? Matrix(0, edge_states.cols())
                          : model.edge_kan_layers.at(layer).forward(edge_states);
  return { std::move(next_nodes), std::move(next_edges) };
}

std::vector<double> mean_pool(const Matrix &states) {
  if (states.rows() == 0)
    throw std::invalid_argument("cannot pool an empty graph");
  std::vector<double> pooled(states.cols(), 0.0);
  for (std::size_t v = 0; v < states.rows(); ++v) {
    const auto row = states.row(v);
    for (std::size_t c = 0; c < pooled.size(); ++c)
      pooled[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(states.rows());
  for (double &x : pooled)
    x *= inv;
  return pooled;
}

std::vector<double> readout(const KanStack &head, const Matrix &states) {
  return head.forward(row_vector(mean_pool(states))).data();
}

double sigmoid(double x) {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce_loss(const std::vector<double> &probabilities,
                const std::vector<double> &labels,
                const std::vector<std::uint8_t> &mask) {
  if (probabilities.size() != labels.size() || labels.size() != mask.size())
    throw ShapeError("probabilities, labels and mask must have equal length");
  double loss = 0.0;
  for (std::size_t t = 0; t < probabilities.size(); ++t) {
    if (!mask[t])
      continue;
    const double p = std::clamp(probabilities[t], kProbabilityClamp,
                                1.0 - kProbabilityClamp);
    loss -= labels[t] * std::log(p) + (1.0 - labels[t]) * std::log(1.0 - p);
  }
  return loss;
}

std::vector<double> bce_logit_gradient(const std::vector<double> &probabilities,
                                       const std::vector<double> &labels,
                                       const std::vector<std::uint8_t> &mask) {
  if (probabilities.size() != labels.size() || labels.size() != mask.size())
    throw ShapeError("probabilities, labels and mask must have equal length");
  std::vector<double> grad(probabilities.size(), 0.0);
  for (std::size_t t = 0; t < probabilities.size(); ++t) {
    const double p = probabilities[t];
    if (!mask[t] || p < kProbabilityClamp || p > 1.0 - kProbabilityClamp)
      continue;
    const double y = labels[t];
    const double dp = -y / p + (1.0 - y) / (1.0 - p);
    grad[t] = dp * p * (1.0 - p);
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Model

Model Model::init(const ModelConfig &config) {
  if (config.variant == Variant::KaGnn)
    return Model(KaGnnModel::init(config));
  return Model(KaGatModel::init(config));
}

const ModelConfig &Model::config() const {
  return std::visit([](const auto &m) -> const ModelConfig & { return m.config; },
                    impl_);
}

namespace {

void run_readout(const KanStack &head, ForwardTrace &trace) {
  trace.pooled = mean_pool(trace.node_states.back());
  Matrix h = row_vector(trace.pooled);
  for (const auto &layer : head.layers()) {
    trace.readout_inputs.push_back(h);
    trace.readout_bases.emplace_back(h, layer.harmonics());
    h = layer.forward(trace.readout_bases.back());
  }
  trace.logits = h.data();
  trace.probabilities.resize(trace.logits.size());
  for (std::size_t t = 0; t < trace.logits.size(); ++t)
    trace.probabilities[t] = sigmoid(trace.logits[t]);
}

ForwardTrace forward_gnn(const KaGnnModel &m, const MolecularGraph &g) {
  if (g.num_nodes() == 0)
    throw std::invalid_argument("graph has no atoms");
  ForwardTrace trace;
  trace.init_input = node_init_inputs(g);
  trace.init_basis = FourierBasis(trace.init_input, m.kan_ini.harmonics());
  trace.node_states.push_back(m.kan_ini.forward(trace.init_basis));
  for (const auto &layer : m.mp_layers) {
    const Matrix &h = trace.node_states.back();
    trace.layer_bases.emplace_back(concat_with_neighbor_mean(h, g),
                                   layer.harmonics());
    Matrix next = layer.forward(trace.layer_bases.back());
    add_into(next, h);
    trace.node_states.push_back(std::move(next));
  }
  run_readout(m.readout_head, trace);
  return trace;
}

ForwardTrace forward_gat(const KaGatModel &m, const MolecularGraph &g) {
  if (g.num_nodes() == 0)
    throw std::invalid_argument("graph has no atoms");
  ForwardTrace trace;
  const auto edges = directed_edges(g);
  trace.init_input = node_init_inputs(g);
  trace.init_basis = FourierBasis(trace.init_input, m.kan_ini.harmonics());
  trace.node_states.push_back(m.kan_ini.forward(trace.init_basis));

  const auto h = m.config.hidden_dim;
  if (edges.empty()) {
    trace.edge_states.emplace_back(0, h);
  } else {
    trace.edge_init_dst_input = gather_rows(g.node_features, edges, true);
    trace.edge_init_edge_input = oriented_edge_features(g, edges);
    trace.edge_init_src_input = gather_rows(g.node_features, edges, false);
    Matrix e0 = m.edge_init_dst.forward(trace.edge_init_dst_input);
    add_into(e0, m.edge_init_edge.forward(trace.edge_init_edge_input));
    add_into(e0, m.edge_init_src.forward(trace.edge_init_src_input));
    trace.edge_states.push_back(std::move(e0));
  }

  for (std::size_t l = 0; l < m.mp_kan_layers.size(); ++l) {
    const Matrix &hv = trace.node_states.back();
    const Matrix &he = trace.edge_states.back();
    trace.z_self.push_back(m.node_proj[l].forward(hv));
    trace.z_nbr.push_back(m.nbr_proj[l].forward(hv));
    trace.attention.push_back(edges.empty() ? Matrix(0, h)
                                            : attention_weights(he, g));
    const Matrix msg = aggregate_messages(trace.z_self.back(), trace.z_nbr.back(),
                                          trace.attention.back(), edges);
    trace.layer_bases.emplace_back(msg, m.mp_kan_layers[l].harmonics());
    trace.edge_bases.emplace_back(he, m.edge_kan_layers[l].harmonics());
    Matrix next_nodes = m.mp_kan_layers[l].forward(trace.layer_bases.back());
    Matrix next_edges = edges.empty()
                            ? Matrix(0, h)
                            : m.edge_kan_layers[l].forward(trace.edge_bases.back());
    trace.node_states.push_back(std::move(next_nodes));
    trace.edge_states.push_back(std::move(next_edges));
  }
  run_readout(m.readout_head, trace);
  return trace;
}

// dLoss/d(final node states) from the readout head.
Matrix backward_readout(const KanStack &head, const ForwardTrace &trace,
                        const MolecularGraph &g, KanStack &grad) {
  Matrix up = row_vector(bce_logit_gradient(trace.probabilities, g.labels, g.mask));
  for (std::size_t t = head.depth(); t-- > 0;)
    up = head.layers()[t].backward_into(trace.readout_bases[t], up,
                                        grad.layers()[t]);
  const auto &final_states = trace.node_states.back();
  const double inv = 1.0 / static_cast<double>(final_states.rows());
  Matrix d(final_states.rows(), final_states.cols());
  for (std::size_t v = 0; v < d.rows(); ++v) {
    auto row = d.row(v);
    for (std::size_t c = 0; c < d.cols(); ++c)
      row[c] = up(0, c) * inv;
  }
  return d;
}

void backward_gnn(const KaGnnModel &m, const MolecularGraph &g,
                  const ForwardTrace &trace, KaGnnModel &grad) {
  Matrix dh = backward_readout(m.readout_head, trace, g, grad.readout_head);
  const auto width = m.config.hidden_dim;
  for (std::size_t l = m.mp_layers.size(); l-- > 0;) {
    const Matrix dz = m.mp_layers[l].backward_into(trace.layer_bases[l], dh,
                                                   grad.mp_layers[l]);
    // Residual path keeps dh; add the self block and scatter the mean block.
    for (std::size_t v = 0; v < dh.rows(); ++v) {
      auto self = dh.row(v);
      const auto dzv = dz.row(v);
      for (std::size_t c = 0; c < width; ++c)
        self[c] += dzv[c];
    }
    for (std::size_t v = 0; v < dh.rows(); ++v) {
      const auto &nbrs = g.adjacency[v];
      if (nbrs.empty())
        continue;
      const double inv = 1.0 / static_cast<double>(nbrs.size());
      const auto dzv = dz.row(v);
      for (const auto &inc : nbrs) {
        auto target = dh.row(inc.neighbor);
        for (std::size_t c = 0; c < width; ++c)
          target[c] += dzv[width + c] * inv;
      }
    }
  }
  m.kan_ini.backward_into(trace.init_basis, dh, grad.kan_ini, false);
}

void backward_gat(const KaGatModel &m, const MolecularGraph &g,
                  const ForwardTrace &trace, KaGatModel &grad) {
  const auto edges = directed_edges(g);
  const auto width = m.config.hidden_dim;
  Matrix dh = backward_readout(m.readout_head, trace, g, grad.readout_head);
  Matrix de(edges.size(), width);  // final edge states feed nothing

  for (std::size_t l = m.mp_kan_layers.size(); l-- > 0;) {
    const Matrix dm = m.mp_kan_layers[l].backward_into(trace.layer_bases[l], dh,
                                                       grad.mp_kan_layers[l]);
    Matrix de_prev = edges.empty()
                         ? Matrix(0, width)
                         : m.edge_kan_layers[l].backward_into(
                               trace.edge_bases[l], de, grad.edge_kan_layers[l]);

    const Matrix &alpha = trace.attention[l];
    const Matrix &z_nbr = trace.z_nbr[l];
    Matrix dz_nbr(dh.rows(), width);
    Matrix dalpha(edges.size(), width);
    for (std::size_t d = 0; d < edges.size(); ++d) {
      const auto dmv = dm.row(edges[d].dst);
      const auto a = alpha.row(d);
      const auto z = z_nbr.row(edges[d].src);
      auto dzn = dz_nbr.row(edges[d].src);
      auto da = dalpha.row(d);
      for (std::size_t c = 0; c < width; ++c) {
        dzn[c] += dmv[c] * a[c];
        da[c] = dmv[c] * z[c];
      }
    }
    // Softmax Jacobian, per destination node and channel.
    Matrix weighted(dh.rows(), width);
    for (std::size_t d = 0; d < edges.size(); ++d) {
      auto w = weighted.row(edges[d].dst);
      const auto a = alpha.row(d);
      const auto da = dalpha.row(d);
      for (std::size_t c = 0; c < width; ++c)
        w[c] += a[c] * da[c];
    }
    for (std::size_t d = 0; d < edges.size(); ++d) {
      const auto w = weighted.row(edges[d].dst);
      const auto a = alpha.row(d);
      const auto da = dalpha.row(d);
      auto out = de_prev.row(d);
      for (std::size_t c = 0; c < width; ++c)
        out[c] += a[c] * (da[c] - w[c]);
    }

    const Matrix &h = trace.node_states[l];
    Matrix dh_prev = m.node_proj[l].backward_into(h, dm, grad.node_proj[l]);
    add_into(dh_prev, m.nbr_proj[l].backward_into(h, dz_nbr, grad.nbr_proj[l]));
    dh = std::move(dh_prev);
    de = std::move(de_prev);
  }

  m.kan_ini.backward_into(trace.init_basis, dh, grad.kan_ini, false);
  if (!edges.empty()) {
    m.edge_init_dst.backward_into(trace.edge_init_dst_input, de,
                                  grad.edge_init_dst, false);
    m.edge_init_edge.backward_into(trace.edge_init_edge_input, de,
                                   grad.edge_init_edge, false);
    m.edge_init_src.backward_into(trace.edge_init_src_input, de,
                                  grad.edge_init_src, false);
  }
}

}  // namespace

ForwardTrace Model::forward(const MolecularGraph &graph) const {
  if (is_gat())
    return forward_gat(gat(), graph);
  return forward_gnn(gnn(), graph);
}

void Model::backward(const MolecularGraph &graph, const ForwardTrace &trace,
                     Model &grad) const {
  if (graph.num_tasks() != config().n_tasks)
    throw ShapeError("graph has " + std::to_string(graph.num_tasks()) +
                     " labels, model predicts " + std::to_string(config().n_tasks));
  if (is_gat())
    backward_gat(gat(), graph, trace, grad.gat());
  else
    backward_gnn(gnn(), graph, trace, grad.gnn());
}

double Model::accumulate_gradients(const MolecularGraph &graph, Model &grad) const {
  const ForwardTrace trace = forward(graph);
  backward(graph, trace, grad);
  return bce_loss(trace.probabilities, graph.labels, graph.mask);
}

double Model::loss(const MolecularGraph &graph) const {
  const ForwardTrace trace = forward(graph);
  return bce_loss(trace.probabilities, graph.labels, graph.mask);
}

Model Model::zeros_like() const {
  if (is_gat()) {
    const auto &m = gat();
    KaGatModel z;
    z.config = m.config;
    z.kan_ini = m.kan_ini.zeros_like();
    z.edge_init_dst = m.edge_init_dst.zeros_like();
    z.edge_init_edge = m.edge_init_edge.zeros_like();
    z.edge_init_src = m.edge_init_src.zeros_like();
    for (const auto &p : m.node_proj)
      z.node_proj.push_back(p.zeros_like());
    for (const auto &p : m.nbr_proj)
      z.nbr_proj.push_back(p.zeros_like());
    for (const auto &k : m.mp_kan_layers)
      z.mp_kan_layers.push_back(k.zeros_like());
    for (const auto &k : m.edge_kan_layers)
      z.edge_kan_layers.push_back(k.zeros_like());
    z.readout_head = m.readout_head.zeros_like();
    return Model(std::move(z));
  }
  const auto &m = gnn();
  KaGnnModel z;
  z.config = m.config;
  z.kan_ini = m.kan_ini.zeros_like();
  for (const auto &k : m.mp_layers)
    z.mp_layers.push_back(k.zeros_like());
  z.readout_head = m.readout_head.zeros_like();
  return Model(std::move(z));
}

std::vector<ParamView> Model::parameters() {
  std::vector<ParamView> out;
  if (is_gat()) {
    auto &m = gat();
    m.kan_ini.append_parameters("kan_ini", out);
    m.edge_init_dst.append_parameters("edge_init_dst", out);
    m.edge_init_edge.append_parameters("edge_init_edge", out);
    m.edge_init_src.append_parameters("edge_init_src", out);
    for (std::size_t l = 0; l < m.mp_kan_layers.size(); ++l) {
      const auto tag = std::to_string(l);
      m.node_proj[l].append_parameters("node_proj." + tag, out);
      m.nbr_proj[l].append_parameters("nbr_proj." + tag, out);
      m.mp_kan_layers[l].append_parameters("mp_kan." + tag, out);
      m.edge_kan_layers[l].append_parameters("edge_kan." + tag, out);
    }
    m.readout_head.append_parameters("readout", out);
  } else {
    auto &m = gnn();
    m.kan_ini.append_parameters("kan_ini", out);
    for (std::size_t l = 0; l < m.mp_layers.size(); ++l)
      m.mp_layers[l].append_parameters("mp_kan." + std::to_string(l), out);
    m.readout_head.append_parameters("readout", out);
  }
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t total = 0;
  for (const auto &p : const_cast<Model &>(*this).parameters())
    total += p.values.size();
  return total;
}

std::size_t parameter_count(const Model &model) {
  return model.parameter_count();
}

json Model::to_json() const {
  json layers;
  auto kan = [](const FourierKanLayer &l) { return l.to_json(); };
  auto aff = [](const AffineMap &a) { return a.to_json(); };
  if (is_gat()) {
    const auto &m = gat();
    layers = { { "kan_ini", m.kan_ini.to_json() },
               { "edge_init_dst", m.edge_init_dst.to_json() },
               { "edge_init_edge", m.edge_init_edge.to_json() },
               { "edge_init_src", m.edge_init_src.to_json() },
               { "node_proj", array_of(m.node_proj, aff) },
               { "nbr_proj", array_of(m.nbr_proj, aff) },
               { "mp_kan_layers", array_of(m.mp_kan_layers, kan) },
               { "edge_kan_layers", array_of(m.edge_kan_layers, kan) },
               { "readout_head", m.readout_head.to_json() } };
  } else {
    const auto &m = gnn();
    layers = { { "kan_ini", m.kan_ini.to_json() },
               { "mp_layers", array_of(m.mp_layers, kan) },
               { "readout_head", m.readout_head.to_json() } };
  }
  json doc = config_to_json(config());
  doc["layers"] = std::move(layers);
  return doc;
}

Model Model::from_json(const json &doc) {
  try {
    const ModelConfig config = config_from_json(doc);
    const auto &layers = doc.at("layers");
    auto kan_list = [&](const char *key) {
      std::vector<FourierKanLayer> out;
      for (const auto &item : layers.at(key))
        out.push_back(FourierKanLayer::from_json(item));
      return out;
    };
    Model model;
    if (config.variant == Variant::KaGat) {
      KaGatModel m;
      m.config = config;
      m.kan_ini = FourierKanLayer::from_json(layers.at("kan_ini"));
      m.edge_init_dst = AffineMap::from_json(layers.at("edge_init_dst"));
      m.edge_init_edge = AffineMap::from_json(layers.at("edge_init_edge"));
      m.edge_init_src = AffineMap::from_json(layers.at("edge_init_src"));
      for (const auto &item : layers.at("node_proj"))
        m.node_proj.push_back(AffineMap::from_json(item));
      for (const auto &item : layers.at("nbr_proj"))
        m.nbr_proj.push_back(AffineMap::from_json(item));
      m.mp_kan_layers = kan_list("mp_kan_layers");
      m.edge_kan_layers = kan_list("edge_kan_layers");
      m.readout_head = KanStack::from_json(layers.at("readout_head"));
      if (m.node_proj.size() != config.n_layers ||
          m.nbr_proj.size() != config.n_layers ||
          m.mp_kan_layers.size() != config.n_layers ||
          m.edge_kan_layers.size() != config.n_layers)
        throw ParseError("checkpoint layer lists do not match L");
      model = Model(std::move(m));
    } else {
      KaGnnModel m;
      m.config = config;
      m.kan_ini = FourierKanLayer::from_json(layers.at("kan_ini"));
      m.mp_layers = kan_list("mp_layers");
      m.readout_head = KanStack::from_json(layers.at("readout_head"));
      if (m.mp_layers.size() != config.n_layers)
        throw ParseError("checkpoint layer list does not match L");
      model = Model(std::move(m));
    }
    return model;
  } catch (const json::exception &e) {
    throw ParseError(std::string("invalid model document: ") + e.what());
  }
}

json checkpoint_to_json(const Model &model, double cutoff) {
  json doc = model.to_json();
  doc["schema"] = kCheckpointSchema;
  doc["cutoff"] = cutoff;
  return doc;
}

std::pair<Model, double> checkpoint_from_json(const json &doc) {
  if (!doc.is_object() || doc.value("schema", std::string()) != kCheckpointSchema)
    throw ParseError(std::string("checkpoint schema tag must be '") +
                     kCheckpointSchema + "'");
  const double cutoff = doc.value("cutoff", kDefaultCutoff);
  return { Model::from_json(doc), cutoff };
}

}  // namespace kagnn
