/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <vector>

#include "superyolo/head.hpp"

namespace superyolo::model {

/// k-means over box sizes with 1 - IoU (boxes aligned at a common corner) as
/// the distance. Initial centres are the area quantiles, so the result is
/// deterministic. Sizes below 2 pixels are ignored; returns `default_anchors`
/// when no usable size remains. Output is sorted by ascending area.
std::vector<Anchor> kmeans_anchors(const std::vector<Anchor>& sizes, int k, int iterations = 100);

/// Mean over sizes of the best anchor IoU (fitness diagnostic).
double anchor_fitness(const std::vector<Anchor>& sizes, const std::vector<Anchor>& anchors);

}  // namespace superyolo::model
