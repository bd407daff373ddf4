// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

//! Central finite-difference checks of the analytic gradients.
//!
//! The numeric side only ever calls forward passes, so it is independent
//! of the backward code it checks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kagnn/affine.hpp"
#include "kagnn/fkan.hpp"
#include "kagnn/graph.hpp"
#include "kagnn/model.hpp"

namespace kagnn {

// All checks compare against fourth-order central differences.

/// |a - n| / max(|a|, |n|, floor).
double gradient_relative_error(double analytic, double numeric,
                               double floor = 1e-8);

// Denominator floor for end-to-end checks. Finite differences of the full
// loss carry roundoff of a few 1e-11, and some directions are exactly flat
// (a weight on a feature that is constant across one node's incoming edges
// cancels in its attention softmax), so entries below the floor are in
// effect held to an absolute error of floor * tolerance.
inline constexpr double kModelGradientFloor = 1e-5;

struct GradCheckGroup {
  std::string name;
  std::size_t entries = 0;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double max_relative_error() const;
  bool passed(double tolerance) const { return max_relative_error() < tolerance; }
};

/// Loss sum(upstream * layer(x)); checks dA, dB, dBias and dX.
GradCheckReport check_layer_gradients(const FourierKanLayer &layer,
                                      const Matrix &x, const Matrix &upstream,
                                      double step = 1e-5);

GradCheckReport check_affine_gradients(const AffineMap &map, const Matrix &x,
                                       const Matrix &upstream,
                                       double step = 1e-5);

/// Checks every parameter tensor of the model against the masked BCE loss
/// on `graph`. `tamper`, when set, edits the analytic gradients before the
/// comparison (negative-control hook).
GradCheckReport check_model_gradients(
    const Model &model, const MolecularGraph &graph, double step = 1e-4,
    const std::function<void(Model &)> &tamper = {},
    double floor = kModelGradientFloor);

// The full finite-difference suite behind `kagnn gradcheck`: seeded random
// Fourier KAN and affine layers (tolerance 1e-6), then both model variants on
// `graphs` small random molecules (tolerance 1e-5).
struct GradCheckSuiteOptions {
  std::size_t harmonics = 2;
  std::size_t n_layers = 2;
  std::size_t hidden_dim = 6;
  std::size_t graphs = 10;
  std::size_t layer_cases = 10;
  std::uint64_t seed = 0;
  std::vector<Variant> variants { Variant::KaGnn, Variant::KaGat };
  // Negative control: perturbs one analytic gradient entry per model check.
  bool corrupt = false;
};

inline constexpr double kLayerGradientTolerance = 1e-6;
inline constexpr double kModelGradientTolerance = 1e-5;

struct GradCheckSuiteRow {
  std::string suite;  // "fkan", "affine", "kagnn" or "kagat"
  std::string group;  // parameter tensor name
  std::size_t cases = 0;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_relative_error < tolerance; }
};

struct GradCheckSuiteResult {
  std::vector<GradCheckSuiteRow> rows;
  bool passed() const;
};

GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuiteOptions &options);

}  // namespace kagnn
