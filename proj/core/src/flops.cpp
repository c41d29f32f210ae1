/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/flops.hpp"

namespace superyolo::nn {

namespace {
thread_local FlopCounter* g_counter = nullptr;
}

FlopCounter::FlopCounter() : previous_(g_counter) { g_counter = this; }
FlopCounter::~FlopCounter() { g_counter = previous_; }

void FlopCounter::record(double flops) {
  FlopCounter* c = g_counter;
  if (!c) return;
  c->total_ += flops;
  c->by_scope_[c->scopes_.empty() ? std::string("other") : c->scopes_.front()] += flops;
}

bool FlopCounter::active() { return g_counter != nullptr; }

FlopScope::FlopScope(std::string name) {
  if (g_counter) {
    g_counter->scopes_.push_back(std::move(name));
    pushed_ = true;
  }
}

FlopScope::~FlopScope() {
  if (pushed_ && g_counter) g_counter->scopes_.pop_back();
}

}  // namespace superyolo::nn
