// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kagnn/tensor.hpp"

namespace kagnn {

class Rng;

/// y = W x + b, with W stored [n_out][n_in]. The bias is optional.
class AffineMap {
 public:
  AffineMap() = default;
  AffineMap(std::size_t n_in, std::size_t n_out, bool with_bias = true);

  /// W ~ N(0, 1/n_in), b = 0.
  static AffineMap init(std::size_t n_in, std::size_t n_out, Rng &rng,
                        bool with_bias = true);

  std::size_t n_in() const { return n_in_; }
  std::size_t n_out() const { return n_out_; }
  bool has_bias() const { return !bias_.empty(); }

  double &weight(std::size_t j, std::size_t i) { return weight_[j * n_in_ + i]; }
  double weight(std::size_t j, std::size_t i) const {
    return weight_[j * n_in_ + i];
  }
  std::vector<double> &weights() { return weight_; }
  const std::vector<double> &weights() const { return weight_; }
  std::vector<double> &bias() { return bias_; }
  const std::vector<double> &bias() const { return bias_; }

  Matrix forward(const Matrix &x) const;
  Matrix backward_into(const Matrix &x, const Matrix &upstream,
                       AffineMap &grad, bool want_dx = true) const;

  std::size_t parameter_count() const { return weight_.size() + bias_.size(); }
  AffineMap zeros_like() const { return AffineMap(n_in_, n_out_, has_bias()); }

  void append_parameters(const std::string &prefix,
                         std::vector<ParamView> &out);

  nlohmann::json to_json() const;
  static AffineMap from_json(const nlohmann::json &doc);

  friend bool operator==(const AffineMap &, const AffineMap &) = default;

 private:
  std::size_t n_in_ = 0;
  std::size_t n_out_ = 0;
  std::vector<double> weight_;
  std::vector<double> bias_;  // empty when the map has no bias
};

}  // namespace kagnn
