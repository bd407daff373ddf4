// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

//! Fourier-series Kolmogorov-Arnold layers.
//!
//! A layer maps x in R^n_in to y in R^n_out with
//!
//!   y_j = sum_i sum_{k=1..K} A[k,j,i] cos(k x_i) + B[k,j,i] sin(k x_i)
//!
//! plus an optional per-output bias. Inputs are used as-is (no range
//! reduction), and there is no k = 0 term; a constant offset is only
//! expressible through the bias.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kagnn/tensor.hpp"

namespace kagnn {

class Rng;

/// cos(k x) and sin(k x) for every row of an input batch, k = 1..K.
///
/// Evaluating the basis once lets forward and backward passes (and the
/// full-batch fitting loop, whose inputs never change) share the trig work.
class FourierBasis {
 public:
  FourierBasis() = default;
  FourierBasis(const Matrix &x, std::size_t harmonics);

  std::size_t batch() const { return batch_; }
  std::size_t width() const { return width_; }
  std::size_t harmonics() const { return harmonics_; }

  // k is the harmonic (1-based).
  double cos(std::size_t b, std::size_t k, std::size_t i) const {
    return cos_[index(b, k, i)];
  }
  double sin(std::size_t b, std::size_t k, std::size_t i) const {
    return sin_[index(b, k, i)];
  }

  const double *cos_row(std::size_t b, std::size_t k) const {
    return cos_.data() + index(b, k, 0);
  }
  const double *sin_row(std::size_t b, std::size_t k) const {
    return sin_.data() + index(b, k, 0);
  }

 private:
  std::size_t index(std::size_t b, std::size_t k, std::size_t i) const {
    return (b * harmonics_ + (k - 1)) * width_ + i;
  }

  std::size_t batch_ = 0;
  std::size_t width_ = 0;
  std::size_t harmonics_ = 0;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

class FourierKanLayer;

struct LayerGradients {
  std::vector<double> dA;  // [K][n_out][n_in]
  std::vector<double> dB;
  std::optional<std::vector<double>> dBias;
  Matrix dX;  // [batch][n_in]
};

class FourierKanLayer {
 public:
  FourierKanLayer() = default;

  /// Zero-coefficient layer.
  FourierKanLayer(std::size_t n_in, std::size_t n_out, std::size_t harmonics,
                  bool with_bias = false);

  /// Coefficients drawn i.i.d. from N(0, 1 / (n_out * K)); bias starts at 0.
  /// A is filled first (in storage order), then B.
  static FourierKanLayer init(std::size_t n_in, std::size_t n_out,
                              std::size_t harmonics, std::uint64_t seed,
                              bool with_bias = false);
  static FourierKanLayer init(std::size_t n_in, std::size_t n_out,
                              std::size_t harmonics, Rng &rng,
                              bool with_bias = false);

  std::size_t n_in() const { return n_in_; }
  std::size_t n_out() const { return n_out_; }
  std::size_t harmonics() const { return harmonics_; }
  bool has_bias() const { return bias_.has_value(); }

  // Coefficient accessors; k is the harmonic, 1..K.
  double &cos_coeff(std::size_t k, std::size_t j, std::size_t i) {
    return cos_coeffs_[index(k, j, i)];
  }
  double cos_coeff(std::size_t k, std::size_t j, std::size_t i) const {
    return cos_coeffs_[index(k, j, i)];
  }
  double &sin_coeff(std::size_t k, std::size_t j, std::size_t i) {
    return sin_coeffs_[index(k, j, i)];
  }
  double sin_coeff(std::size_t k, std::size_t j, std::size_t i) const {
    return sin_coeffs_[index(k, j, i)];
  }

  std::vector<double> &cos_coeffs() { return cos_coeffs_; }
  const std::vector<double> &cos_coeffs() const { return cos_coeffs_; }
  std::vector<double> &sin_coeffs() { return sin_coeffs_; }
  const std::vector<double> &sin_coeffs() const { return sin_coeffs_; }
  std::optional<std::vector<double>> &bias() { return bias_; }
  const std::optional<std::vector<double>> &bias() const { return bias_; }

  Matrix forward(const Matrix &x) const;
  Matrix forward(const FourierBasis &basis) const;

  LayerGradients backward(const Matrix &x, const Matrix &upstream) const;

  /// Adds parameter gradients into `grad` (a layer of identical shape) and
  /// returns the gradient with respect to the inputs when `want_dx` is set
  /// (an empty matrix otherwise).
  Matrix backward_into(const FourierBasis &basis, const Matrix &upstream,
                       FourierKanLayer &grad, bool want_dx = true) const;

  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Same shape, all coefficients zero.
  FourierKanLayer zeros_like() const;

  void append_parameters(const std::string &prefix,
                         std::vector<ParamView> &out);

  nlohmann::json to_json() const;
  static FourierKanLayer from_json(const nlohmann::json &doc);

  friend bool operator==(const FourierKanLayer &,
                         const FourierKanLayer &) = default;

 private:
  std::size_t index(std::size_t k, std::size_t j, std::size_t i) const {
    return ((k - 1) * n_out_ + j) * n_in_ + i;
  }
  void check_basis(const FourierBasis &basis) const;

  std::size_t n_in_ = 0;
  std::size_t n_out_ = 0;
  std::size_t harmonics_ = 0;
  std::vector<double> cos_coeffs_;
  std::vector<double> sin_coeffs_;
  std::optional<std::vector<double>> bias_;
};

/// Composition KAN_L o ... o KAN_0.
class KanStack {
 public:
  KanStack() = default;
  explicit KanStack(std::vector<FourierKanLayer> layers);

  /// Seeded stack with the given widths (widths.size() >= 2).
  static KanStack init(const std::vector<std::size_t> &widths,
                       std::size_t harmonics, Rng &rng,
                       bool with_bias = false);

  const std::vector<FourierKanLayer> &layers() const { return layers_; }
  std::vector<FourierKanLayer> &layers() { return layers_; }
  std::size_t depth() const { return layers_.size(); }
  std::size_t n_in() const { return layers_.front().n_in(); }
  std::size_t n_out() const { return layers_.back().n_out(); }

  Matrix forward(const Matrix &x) const;

  std::size_t parameter_count() const;
  KanStack zeros_like() const;

  void append_parameters(const std::string &prefix,
                         std::vector<ParamView> &out);

  nlohmann::json to_json() const;
  static KanStack from_json(const nlohmann::json &doc);

  friend bool operator==(const KanStack &, const KanStack &) = default;

 private:
  std::vector<FourierKanLayer> layers_;
};

inline std::size_t parameter_count(const FourierKanLayer &layer) {
  return layer.parameter_count();
}
inline std::size_t parameter_count(const KanStack &stack) {
  return stack.parameter_count();
}

}  // namespace kagnn
