// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace kagnn {

// Tensor shapes do not line up with a layer or model.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input value outside the domain of an operation (non-finite inputs etc).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed molecule, config, split or checkpoint documents.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FeaturizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during optimization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Metric undefined on the supplied labels (e.g. every task single-class).
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kagnn
