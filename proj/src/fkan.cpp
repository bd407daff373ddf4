// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#include "kagnn/fkan.hpp"

#include <algorithm>
#include <cmath>

#include "kagnn/errors.hpp"
#include "kagnn/rng.hpp"

namespace kagnn {

FourierBasis::FourierBasis(const Matrix &x, std::size_t harmonics)
    : batch_(x.rows()), width_(x.cols()), harmonics_(harmonics),
      cos_(batch_ * harmonics_ * width_), sin_(batch_ * harmonics_ * width_) {
  if (!x.all_finite())
    throw DomainError("Fourier KAN input contains non-finite values");
  for (std::size_t b = 0; b < batch_; ++b) {
    for (std::size_t k = 1; k <= harmonics_; ++k) {
      const auto freq = static_cast<double>(k);
      for (std::size_t i = 0; i < width_; ++i) {
        const double arg = freq * x(b, i);
        cos_[index(b, k, i)] = std::cos(arg);
        sin_[index(b, k, i)] = std::sin(arg);
      }
    }
  }
}

FourierKanLayer::FourierKanLayer(std::size_t n_in, std::size_t n_out,
                                 std::size_t harmonics, bool with_bias)
    : n_in_(n_in), n_out_(n_out), harmonics_(harmonics) {
  if (n_in == 0 || n_out == 0 || harmonics == 0)
    throw std::invalid_argument(
        "Fourier KAN layer dimensions must be positive (n_in=" +
        std::to_string(n_in) + ", n_out=" + std::to_string(n_out) +
        ", K=" + std::to_string(harmonics) + ")");
  cos_coeffs_.assign(harmonics * n_out * n_in, 0.0);
  sin_coeffs_.assign(harmonics * n_out * n_in, 0.0);
  if (with_bias)
    bias_.emplace(n_out, 0.0);
}

FourierKanLayer FourierKanLayer::init(std::size_t n_in, std::size_t n_out,
                                      std::size_t harmonics,
                                      std::uint64_t seed, bool with_bias) {
  Rng rng(seed);
  return init(n_in, n_out, harmonics, rng, with_bias);
}

FourierKanLayer FourierKanLayer::init(std::size_t n_in, std::size_t n_out,
                                      std::size_t harmonics, Rng &rng,
                                      bool with_bias) {
  FourierKanLayer layer(n_in, n_out, harmonics, with_bias);
  const double stddev =
      1.0 / std::sqrt(static_cast<double>(n_out) * static_cast<double>(harmonics));
  for (double &a : layer.cos_coeffs_)
    a = rng.normal(0.0, stddev);
  for (double &b : layer.sin_coeffs_)
    b = rng.normal(0.0, stddev);
  return layer;
}

void FourierKanLayer::check_basis(const FourierBasis &basis) const {
  if (basis.width() != n_in_)
    throw ShapeError("Fourier KAN input has " + std::to_string(basis.width()) +
                     " columns, layer expects " + std::to_string(n_in_));
  if (basis.harmonics() < harmonics_)
    throw ShapeError("Fourier basis has fewer harmonics than the layer");
}

Matrix FourierKanLayer::forward(const Matrix &x) const {
  if (x.cols() != n_in_)
    throw ShapeError("Fourier KAN input has " + std::to_string(x.cols()) +
                     " columns, layer expects " + std::to_string(n_in_));
  return forward(FourierBasis(x, harmonics_));
}

Matrix FourierKanLayer::forward(const FourierBasis &basis) const {
  check_basis(basis);
  Matrix out(basis.batch(), n_out_);
  // With a single output the (k, i) axes are contiguous in both the basis
  // and the coefficients, so each row is one flat dot product.
  const std::size_t flat = harmonics_ * n_in_;
  for (std::size_t b = 0; b < basis.batch(); ++b) {
    auto y = out.row(b);
    if (n_out_ == 1) {
      const double *c = basis.cos_row(b, 1);
      const double *s = basis.sin_row(b, 1);
      double acc = 0.0;
      for (std::size_t m = 0; m < flat; ++m)
        acc += cos_coeffs_[m] * c[m] + sin_coeffs_[m] * s[m];
      y[0] = acc + (bias_ ? (*bias_)[0] : 0.0);
      continue;
    }
    for (std::size_t k = 1; k <= harmonics_; ++k) {
      const double *c = basis.cos_row(b, k);
      const double *s = basis.sin_row(b, k);
      for (std::size_t j = 0; j < n_out_; ++j) {
        const double *a_row = &cos_coeffs_[index(k, j, 0)];
        const double *b_row = &sin_coeffs_[index(k, j, 0)];
        double acc = 0.0;
        for (std::size_t i = 0; i < n_in_; ++i)
          acc += a_row[i] * c[i] + b_row[i] * s[i];
        y[j] += acc;
      }
    }
    if (bias_) {
      for (std::size_t j = 0; j < n_out_; ++j)
        y[j] += (*bias_)[j];
    }
  }
  return out;
}

LayerGradients FourierKanLayer::backward(const Matrix &x,
                                         const Matrix &upstream) const {
  if (x.cols() != n_in_)
    throw ShapeError("Fourier KAN input has " + std::to_string(x.cols()) +
                     " columns, layer expects " + std::to_string(n_in_));
  FourierKanLayer grad = zeros_like();
  Matrix dx = backward_into(FourierBasis(x, harmonics_), upstream, grad);
  LayerGradients out;
  out.dA = std::move(grad.cos_coeffs_);
  out.dB = std::move(grad.sin_coeffs_);
  out.dBias = std::move(grad.bias_);
  out.dX = std::move(dx);
  return out;
}

Matrix FourierKanLayer::backward_into(const FourierBasis &basis,
                                      const Matrix &upstream,
                                      FourierKanLayer &grad,
                                      bool want_dx) const {
  check_basis(basis);
  if (upstream.rows() != basis.batch() || upstream.cols() != n_out_)
    throw ShapeError("upstream gradient shape does not match layer output");
  if (grad.n_in_ != n_in_ || grad.n_out_ != n_out_ ||
      grad.harmonics_ != harmonics_ || grad.has_bias() != has_bias())
    throw ShapeError("gradient accumulator shape does not match layer");

  Matrix dx;
  if (want_dx)
    dx = Matrix(basis.batch(), n_in_);

  const std::size_t flat = harmonics_ * n_in_;
  for (std::size_t b = 0; b < basis.batch(); ++b) {
    const auto up = upstream.row(b);
    if (n_out_ == 1 && !want_dx) {
      const double u = up[0];
      const double *c = basis.cos_row(b, 1);
      const double *s = basis.sin_row(b, 1);
      double *ga = grad.cos_coeffs_.data();
      double *gb = grad.sin_coeffs_.data();
      for (std::size_t m = 0; m < flat; ++m) {
        ga[m] += u * c[m];
        gb[m] += u * s[m];
      }
      if (bias_)
        (*grad.bias_)[0] += u;
      continue;
    }
    for (std::size_t k = 1; k <= harmonics_; ++k) {
      const double *c = basis.cos_row(b, k);
      const double *s = basis.sin_row(b, k);
      const auto freq = static_cast<double>(k);
      for (std::size_t j = 0; j < n_out_; ++j) {
        const double u = up[j];
        if (u == 0.0)
          continue;
        double *ga = &grad.cos_coeffs_[index(k, j, 0)];
        double *gb = &grad.sin_coeffs_[index(k, j, 0)];
        for (std::size_t i = 0; i < n_in_; ++i) {
          ga[i] += u * c[i];
          gb[i] += u * s[i];
        }
        if (want_dx) {
          const double *a_row = &cos_coeffs_[index(k, j, 0)];
          const double *b_row = &sin_coeffs_[index(k, j, 0)];
          auto dx_row = dx.row(b);
          const double scale = u * freq;
          for (std::size_t i = 0; i < n_in_; ++i)
            dx_row[i] += scale * (b_row[i] * c[i] - a_row[i] * s[i]);
        }
      }
    }
    if (bias_) {
      for (std::size_t j = 0; j < n_out_; ++j)
        (*grad.bias_)[j] += up[j];
    }
  }
  return dx;
}

std::size_t FourierKanLayer::parameter_count() const {
  return 2 * harmonics_ * n_in_ * n_out_ + (bias_ ? n_out_ : 0);
}

bool FourierKanLayer::all_finite() const {
  auto finite = [](const std::vector<double> &v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  return finite(cos_coeffs_) && finite(sin_coeffs_) &&
         (!bias_ || finite(*bias_));
}

FourierKanLayer FourierKanLayer::zeros_like() const {
  return FourierKanLayer(n_in_, n_out_, harmonics_, has_bias());
}

void FourierKanLayer::append_parameters(const std::string &prefix,
                                        std::vector<ParamView> &out) {
  out.push_back({ prefix + ".A", cos_coeffs_ });
  out.push_back({ prefix + ".B", sin_coeffs_ });
  if (bias_)
    out.push_back({ prefix + ".bias", *bias_ });
}

nlohmann::json FourierKanLayer::to_json() const {
  using nlohmann::json;
  auto nested = [this](const std::vector<double> &flat) {
    json outer = json::array();
    for (std::size_t k = 1; k <= harmonics_; ++k) {
      json rows = json::array();
      for (std::size_t j = 0; j < n_out_; ++j) {
        const auto begin = flat.begin() + static_cast<std::ptrdiff_t>(index(k, j, 0));
        rows.push_back(std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(n_in_)));
      }
      outer.push_back(std::move(rows));
    }
    return outer;
  };
  json doc = {
    { "n_in", n_in_ },
    { "n_out", n_out_ },
    { "K", harmonics_ },
    { "A", nested(cos_coeffs_) },
    { "B", nested(sin_coeffs_) },
  };
  if (bias_)
    doc["bias"] = *bias_;
  return doc;
}

FourierKanLayer FourierKanLayer::from_json(const nlohmann::json &doc) {
  try {
    const auto n_in = doc.at("n_in").get<std::size_t>();
    const auto n_out = doc.at("n_out").get<std::size_t>();
    const auto harmonics = doc.at("K").get<std::size_t>();
    const bool with_bias = doc.contains("bias") && !doc.at("bias").is_null();
    FourierKanLayer layer(n_in, n_out, harmonics, with_bias);

    auto unpack = [&](const char *key, std::vector<double> &flat) {
      const auto &outer = doc.at(key);
      if (outer.size() != harmonics)
        throw ParseError(std::string("layer field '") + key +
                         "' must have K entries");
      for (std::size_t k = 1; k <= harmonics; ++k) {
        const auto &rows = outer.at(k - 1);
        if (rows.size() != n_out)
          throw ParseError(std::string("layer field '") + key +
                           "' must have n_out rows per harmonic");
        for (std::size_t j = 0; j < n_out; ++j) {
          const auto &row = rows.at(j);
          if (row.size() != n_in)
            throw ParseError(std::string("layer field '") + key +
                             "' must have n_in columns");
          for (std::size_t i = 0; i < n_in; ++i)
            flat[layer.index(k, j, i)] = row.at(i).get<double>();
        }
      }
    };
    unpack("A", layer.cos_coeffs_);
    unpack("B", layer.sin_coeffs_);
    if (with_bias) {
      auto bias = doc.at("bias").get<std::vector<double>>();
      if (bias.size() != n_out)
        throw ParseError("layer field 'bias' must have n_out entries");
      layer.bias_ = std::move(bias);
    }
    if (!layer.all_finite())
      throw ParseError("layer coefficients must be finite");
    return layer;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("invalid Fourier KAN layer: ") + e.what());
  } catch (const std::invalid_argument &e) {
    throw ParseError(std::string("invalid Fourier KAN layer: ") + e.what());
  }
}

KanStack::KanStack(std::vector<FourierKanLayer> layers)
    : layers_(std::move(layers)) {
  if (layers_.empty())
    throw std::invalid_argument("KAN stack needs at least one layer");
  for (std::size_t t = 0; t + 1 < layers_.size(); ++t) {
    if (layers_[t].n_out() != layers_[t + 1].n_in())
      throw ShapeError("KAN stack widths do not chain at layer " +
                       std::to_string(t));
  }
}

KanStack KanStack::init(const std::vector<std::size_t> &widths,
                        std::size_t harmonics, Rng &rng, bool with_bias) {
  if (widths.size() < 2)
    throw std::invalid_argument("KAN stack needs at least two widths");
  std::vector<FourierKanLayer> layers;
  for (std::size_t t = 0; t + 1 < widths.size(); ++t)
    layers.push_back(FourierKanLayer::init(widths[t], widths[t + 1], harmonics,
                                           rng, with_bias));
  return KanStack(std::move(layers));
}

Matrix KanStack::forward(const Matrix &x) const {
  Matrix h = x;
  for (const auto &layer : layers_)
    h = layer.forward(h);
  return h;
}

std::size_t KanStack::parameter_count() const {
  std::size_t total = 0;
  for (const auto &layer : layers_)
    total += layer.parameter_count();
  return total;
}

KanStack KanStack::zeros_like() const {
  std::vector<FourierKanLayer> zeros;
  zeros.reserve(layers_.size());
  for (const auto &layer : layers_)
    zeros.push_back(layer.zeros_like());
  return KanStack(std::move(zeros));
}

void KanStack::append_parameters(const std::string &prefix,
                                 std::vector<ParamView> &out) {
  for (std::size_t t = 0; t < layers_.size(); ++t)
    layers_[t].append_parameters(prefix + "." + std::to_string(t), out);
}

nlohmann::json KanStack::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &layer : layers_)
    arr.push_back(layer.to_json());
  return arr;
}

KanStack KanStack::from_json(const nlohmann::json &doc) {
  if (!doc.is_array() || doc.empty())
    throw ParseError("KAN stack must be a non-empty array of layers");
  std::vector<FourierKanLayer> layers;
  for (const auto &item : doc)
    layers.push_back(FourierKanLayer::from_json(item));
  try {
    return KanStack(std::move(layers));
  } catch (const std::invalid_argument &e) {
    throw ParseError(e.what());
  }
}

}  // namespace kagnn
