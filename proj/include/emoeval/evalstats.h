// include/emoeval/evalstats.h

// Copyright 2026 The emoeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EMOEVAL_EVALSTATS_H_
#define EMOEVAL_EVALSTATS_H_

#include <optional>
#include <span>
#include <vector>

namespace emoeval {
namespace evalstats {

struct UarResult {
  double value = 0.0;
  std::vector<double> recalls;       // per class; NaN for excluded classes
  std::vector<int> excluded_classes;  // classes with no reference samples
};

// Unweighted average recall over the classes present in `labels`.
UarResult Uar(std::span<const int> preds, std::span<const int> labels, int n_classes);

double Rmse(std::span<const double> preds, std::span<const double> targets);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int dof = 0;
};

// Two-sided paired t-test on a - b. All-zero differences give t = 0, p = 1;
// constant non-zero differences give t = +/-inf, p = 0.
TTestResult PairedT(std::span<const double> a, std::span<const double> b);

struct BhResult {
  std::vector<bool> significant;
  std::vector<double> adjusted;  // in input order
};

BhResult BenjaminiHochberg(std::span<const double> pvals, double fdr = 0.05);

double Pearson(std::span<const double> x, std::span<const double> y);

// successes_adv/runs - successes_norm/runs.
double Aps(int successes_adv, int successes_norm, int runs = 15);

// Annotator x item table; nullopt marks an item the annotator did not rate.
using RatingTable = std::vector<std::vector<std::optional<int>>>;

// Cohen's kappa with annotators kept as individuals. Every annotator pair is
// compared on the items both rated; observed and chance agreement are pooled
// over pairs, weighted by overlap size. Reduces to the classic two-rater
// kappa on a complete two-row table.
double CohenKappaIndividual(const RatingTable& table);

}  // namespace evalstats
}  // namespace emoeval

#endif  // EMOEVAL_EVALSTATS_H_
