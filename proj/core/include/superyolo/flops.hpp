/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace superyolo::nn {

/// Collects floating-point operation counts emitted by ops while installed.
///
/// Counting convention: a convolution costs 2*k*k*Cin*Cout per output pixel
/// (multiply and add) plus one add per output element for its bias; batch
/// norm costs 2 per element; activations and elementwise arithmetic cost 1
/// per output element; max pooling costs k*k per output element; average
/// pooling 1 per input element; concatenation, upsampling and reshuffles are free.
class FlopCounter {
 public:
  FlopCounter();
  ~FlopCounter();
  FlopCounter(const FlopCounter&) = delete;
  FlopCounter& operator=(const FlopCounter&) = delete;

  double total() const { return total_; }
  /// Per top-level scope (first path component) totals.
  const std::map<std::string, double>& by_scope() const { return by_scope_; }

  /// Adds `flops` to the innermost active counter, if any.
  static void record(double flops);
  static bool active();

 private:
  friend class FlopScope;
  FlopCounter* previous_;
  double total_ = 0.0;
  std::map<std::string, double> by_scope_;
  std::vector<std::string> scopes_;
};

/// Attributes FLOPs recorded during its lifetime to `name` in the active counter.
class FlopScope {
 public:
  explicit FlopScope(std::string name);
  ~FlopScope();
  FlopScope(const FlopScope&) = delete;
  FlopScope& operator=(const FlopScope&) = delete;

 private:
  bool pushed_ = false;
};

}  // namespace superyolo::nn
