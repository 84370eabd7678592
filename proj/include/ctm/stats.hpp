// Copyright 2026 The ctm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ctm::stats {

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;    // large-sample Kolmogorov approximation
};

// One-sample Kolmogorov-Smirnov test against the uniform law on [0,1].
KsResult ks_uniform(std::span<const double> samples);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

// Pearson correlation of paired samples; 0 when either side is constant.
double pearson(std::span<const std::pair<double, double>> pairs);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample sd / sqrt(n)
};

MeanSe mean_se(std::span<const double> xs);

// Linear-interpolated quantile of unsorted data (type 7).
double quantile(std::vector<double> xs, double q);

}  // namespace ctm::stats
