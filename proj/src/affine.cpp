// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/affine.hpp"

#include <cmath>
#include <stdexcept>

#include "kagnn/errors.hpp"
#include "kagnn/rng.hpp"

namespace kagnn {

AffineMap::AffineMap(std::size_t n_in, std::size_t n_out, bool with_bias)
    : n_in_(n_in), n_out_(n_out), weight_(n_in * n_out, 0.0),
      bias_(with_bias ? n_out : 0, 0.0) {
  if (n_in == 0 || n_out == 0)
    throw std::invalid_argument("affine map dimensions must be positive");
}

AffineMap AffineMap::init(std::size_t n_in, std::size_t n_out, Rng &rng,
                          bool with_bias) {
  AffineMap map(n_in, n_out, with_bias);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(n_in));
  for (double &w : map.weight_)
    w = rng.normal(0.0, stddev);
  return map;
}

Matrix AffineMap::forward(const Matrix &x) const {
  if (x.cols() != n_in_)
    throw ShapeError("affine map input has " + std::to_string(x.cols()) +
                     " columns, expected " + std::to_string(n_in_));
  Matrix out(x.rows(), n_out_);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto in = x.row(b);
    auto y = out.row(b);
    for (std::size_t j = 0; j < n_out_; ++j) {
      const double *w = &weight_[j * n_in_];
      double acc = bias_.empty() ? 0.0 : bias_[j];
      for (std::size_t i = 0; i < n_in_; ++i)
        acc += w[i] * in[i];
      y[j] = acc;
    }
  }
  return out;
}

Matrix AffineMap::backward_into(const Matrix &x, const Matrix &upstream,
                                AffineMap &grad, bool want_dx) const {
  if (x.cols() != n_in_ || upstream.cols() != n_out_ ||
      upstream.rows() != x.rows())
    throw ShapeError("affine map backward shapes do not match");
  if (grad.n_in_ != n_in_ || grad.n_out_ != n_out_ || grad.has_bias() != has_bias())
    throw ShapeError("gradient accumulator shape does not match affine map");
  Matrix dx;
  if (want_dx)
    dx = Matrix(x.rows(), n_in_);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto in = x.row(b);
    const auto up = upstream.row(b);
    for (std::size_t j = 0; j < n_out_; ++j) {
      const double u = up[j];
      if (u == 0.0)
        continue;
      if (!grad.bias_.empty())
        grad.bias_[j] += u;
      double *gw = &grad.weight_[j * n_in_];
      for (std::size_t i = 0; i < n_in_; ++i)
        gw[i] += u * in[i];
      if (want_dx) {
        const double *w = &weight_[j * n_in_];
        auto d = dx.row(b);
        for (std::size_t i = 0; i < n_in_; ++i)
          d[i] += u * w[i];
      }
    }
  }
  return dx;
}

void AffineMap::append_parameters(const std::string &prefix,
                                  std::vector<ParamView> &out) {
  out.push_back({ prefix + ".weight", weight_ });
  if (!bias_.empty())
    out.push_back({ prefix + ".bias", bias_ });
}

nlohmann::json AffineMap::to_json() const {
  return { { "n_in", n_in_ },
           { "n_out", n_out_ },
           { "weight", weight_ },
           { "bias", bias_.empty() ? nlohmann::json(nullptr) : nlohmann::json(bias_) } };
}

AffineMap AffineMap::from_json(const nlohmann::json &doc) {
  try {
    const auto &bias_doc = doc.at("bias");
    AffineMap map(doc.at("n_in").get<std::size_t>(),
                  doc.at("n_out").get<std::size_t>(), !bias_doc.is_null());
    auto weight = doc.at("weight").get<std::vector<double>>();
    auto bias = bias_doc.is_null() ? std::vector<double> {}
                                   : bias_doc.get<std::vector<double>>();
    if (weight.size() != map.weight_.size() || bias.size() != map.bias_.size())
      throw ParseError("affine map weight/bias length mismatch");
    map.weight_ = std::move(weight);
    map.bias_ = std::move(bias);
    return map;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid affine map: ") + e.what());
  } catch (const std::invalid_argument &e) {
    throw ParseError(std::string("invalid affine map: ") + e.what());
  }
}

}  // namespace kagnn
