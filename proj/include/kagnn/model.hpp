// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

//! KA-GNN and KA-GAT molecular property models.
//!
//! Both variants start from h_v^(0) = KAN_ini(f_v ++ mean_{u in N(v)} f_uv),
//! run L message-passing layers over the union (covalent + cutoff) edge set,
//! mean-pool node states and apply a KAN readout head whose outputs are
//! per-task logits. Empty neighborhoods contribute a zero mean.
//!
//! KA-GNN layer:  h_v' = h_v + KAN_l(h_v ++ mean_{u in N(v)} h_u)
//!
//! KA-GAT layer (edge states are directed, one per u -> v):
//!   z_v = P_l(h_v),  z_u = Q_l(h_u)
//!   alpha_uv = softmax over u in N(v), independently per channel, of h_uv
//!   m_v = z_v + sum_u z_u * alpha_uv   (elementwise)
//!   h_v' = KAN_l(m_v),  h_uv' = KANedge_l(h_uv)
//!   h_uv^(0) = R_dst(f_v) + R_edge(f_uv) + R_src(f_u)

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "kagnn/affine.hpp"
#include "kagnn/fkan.hpp"
#include "kagnn/graph.hpp"
#include "kagnn/tensor.hpp"

namespace kagnn {

enum class Variant { KaGnn, KaGat };

std::string_view to_string(Variant variant);
std::optional<Variant> parse_variant(std::string_view text);

inline constexpr double kProbabilityClamp = 1e-7;

struct ModelConfig {
  Variant variant = Variant::KaGnn;
  std::size_t n_layers = 1;
  std::size_t harmonics = 2;
  std::size_t hidden_dim = 64;
  std::size_t n_tasks = 1;
  // 0 picks 1 layer for a single task and 2 layers otherwise.
  std::size_t readout_layers = 0;
  bool kan_bias = false;
  std::uint64_t seed = 0;

  std::size_t resolved_readout_layers() const;
  void validate() const;
};

struct KaGnnModel {
  ModelConfig config;
  FourierKanLayer kan_ini;
  std::vector<FourierKanLayer> mp_layers;
  KanStack readout_head;

  static KaGnnModel init(const ModelConfig &config);
};

struct KaGatModel {
  ModelConfig config;
  FourierKanLayer kan_ini;
  AffineMap edge_init_dst;   // f_v  -> hidden
  AffineMap edge_init_edge;  // f_uv -> hidden
  AffineMap edge_init_src;   // f_u  -> hidden
  std::vector<AffineMap> node_proj;
  std::vector<AffineMap> nbr_proj;
  std::vector<FourierKanLayer> mp_kan_layers;
  std::vector<FourierKanLayer> edge_kan_layers;
  KanStack readout_head;

  static KaGatModel init(const ModelConfig &config);
};

/// Directed view of an undirected edge list: edge e yields 2e = (u -> v)
/// and 2e + 1 = (v -> u).
struct DirectedEdge {
  std::size_t src;
  std::size_t dst;
  std::size_t edge;
};
std::vector<DirectedEdge> directed_edges(const MolecularGraph &graph);

/// Everything a forward pass produces, including what backward needs.
struct ForwardTrace {
  std::vector<Matrix> node_states;  // h^(0) .. h^(L)
  std::vector<Matrix> edge_states;  // KA-GAT only, h_uv^(0) .. h_uv^(L)
  std::vector<double> pooled;
  std::vector<double> logits;
  std::vector<double> probabilities;

  Matrix init_input;
  FourierBasis init_basis;
  std::vector<FourierBasis> layer_bases;
  std::vector<FourierBasis> edge_bases;
  std::vector<Matrix> z_self;
  std::vector<Matrix> z_nbr;
  std::vector<Matrix> attention;
  std::vector<Matrix> readout_inputs;
  std::vector<FourierBasis> readout_bases;
  Matrix edge_init_dst_input;
  Matrix edge_init_edge_input;
  Matrix edge_init_src_input;
};

// Building blocks, exposed for testing and inspection.

/// Rows f_v ++ mean incident f_uv (oriented toward v), shape [n, 113].
Matrix node_init_inputs(const MolecularGraph &graph);
Matrix init_node_states(const FourierKanLayer &kan_ini,
                        const MolecularGraph &graph);
Matrix neighbor_mean(const Matrix &states, const MolecularGraph &graph);
Matrix kagnn_message_pass(const FourierKanLayer &layer, const Matrix &states,
                          const MolecularGraph &graph);
Matrix kagat_init_edges(const KaGatModel &model, const MolecularGraph &graph);
/// Per-destination, per-channel softmax of directed edge states.
Matrix attention_weights(const Matrix &edge_states, const MolecularGraph &graph);
std::pair<Matrix, Matrix> kagat_message_pass(const KaGatModel &model,
                                             std::size_t layer,
                                             const Matrix &node_states,
                                             const Matrix &edge_states,
                                             const MolecularGraph &graph);
std::vector<double> mean_pool(const Matrix &states);
std::vector<double> readout(const KanStack &head, const Matrix &states);

double sigmoid(double x);
double bce_loss(const std::vector<double> &probabilities,
                const std::vector<double> &labels,
                const std::vector<std::uint8_t> &mask);
/// dLoss/dlogit for each task, zero where the clamp is active or masked.
std::vector<double> bce_logit_gradient(const std::vector<double> &probabilities,
                                       const std::vector<double> &labels,
                                       const std::vector<std::uint8_t> &mask);

/// Either model variant behind one interface. Gradients are held in a
/// Model of identical shape (see zeros_like), so parameters() of the model
/// and of its gradient line up entry for entry.
class Model {
 public:
  Model() = default;
  explicit Model(KaGnnModel m) : impl_(std::move(m)) { }
  explicit Model(KaGatModel m) : impl_(std::move(m)) { }

  static Model init(const ModelConfig &config);

  const ModelConfig &config() const;
  Variant variant() const { return config().variant; }
  bool is_gat() const { return std::holds_alternative<KaGatModel>(impl_); }
  const KaGnnModel &gnn() const { return std::get<KaGnnModel>(impl_); }
  KaGnnModel &gnn() { return std::get<KaGnnModel>(impl_); }
  const KaGatModel &gat() const { return std::get<KaGatModel>(impl_); }
  KaGatModel &gat() { return std::get<KaGatModel>(impl_); }

  ForwardTrace forward(const MolecularGraph &graph) const;

  /// Reverse pass of `trace` for the masked BCE loss; adds into `grad`.
  void backward(const MolecularGraph &graph, const ForwardTrace &trace,
                Model &grad) const;

  /// forward + loss + backward. Returns the loss.
  double accumulate_gradients(const MolecularGraph &graph, Model &grad) const;

  double loss(const MolecularGraph &graph) const;

  Model zeros_like() const;
  std::vector<ParamView> parameters();
  std::size_t parameter_count() const;

  nlohmann::json to_json() const;
  static Model from_json(const nlohmann::json &doc);

 private:
  std::variant<KaGnnModel, KaGatModel> impl_;
};

std::size_t parameter_count(const Model &model);

/// Checkpoint document: {"schema": "kagnn.checkpoint/v1", "variant", "L",
/// "K", "hidden_dim", "n_tasks", "readout_layers", "kan_bias", "cutoff",
/// "layers": {...}}.
inline constexpr const char *kCheckpointSchema = "kagnn.checkpoint/v1";
nlohmann::json checkpoint_to_json(const Model &model, double cutoff);
/// Returns the model and the cutoff it was trained with.
std::pair<Model, double> checkpoint_from_json(const nlohmann::json &doc);

}  // namespace kagnn
