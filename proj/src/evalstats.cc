// src/evalstats.cc

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

#include "emoeval/evalstats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "emoeval/error.h"

namespace emoeval {
namespace evalstats {

UarResult Uar(std::span<const int> preds, std::span<const int> labels, int n_classes) {
  if (labels.empty()) throw DomainError("uar: empty input");
  if (preds.size() != labels.size()) throw DomainError("uar: length mismatch");
  if (n_classes <= 0) throw DomainError("uar: n_classes must be positive");
  std::vector<long> support(n_classes, 0), hits(n_classes, 0);
  for (size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= n_classes) throw DomainError("uar: label out of range");
    ++support[y];
    if (preds[i] == y) ++hits[y];
  }
  UarResult r;
  r.recalls.assign(n_classes, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < n_classes; ++c) {
    if (support[c] == 0) {
      r.excluded_classes.push_back(c);
      continue;
    }
    r.recalls[c] = static_cast<double>(hits[c]) / static_cast<double>(support[c]);
    sum += r.recalls[c];
    ++present;
  }
  r.value = sum / present;
  return r;
}

double Rmse(std::span<const double> preds, std::span<const double> targets) {
  if (preds.empty()) throw DomainError("rmse: empty input");
  if (preds.size() != targets.size()) throw DomainError("rmse: length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - targets[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(preds.size()));
}

TTestResult PairedT(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("paired t: length mismatch");
  if (a.size() < 2) throw DomainError("paired t: need at least two pairs");
  const size_t n = a.size();
  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  TTestResult r;
  r.dof = static_cast<int>(n) - 1;
  if (ss == 0.0) {
    if (mean == 0.0) return r;
    r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  const double sd = std::sqrt(ss / (n - 1));
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(r.dof);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
  return r;
}

BhResult BenjaminiHochberg(std::span<const double> pvals, double fdr) {
  const size_t m = pvals.size();
  for (double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bh: p-value outside [0, 1]");
  }
  BhResult r;
  r.significant.assign(m, false);
  r.adjusted.assign(m, 1.0);
  if (m == 0) return r;
  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return pvals[i] < pvals[j]; });
  // Step-up: running minimum from the largest rank down.
  double running = 1.0;
  for (size_t k = m; k-- > 0;) {
    const size_t idx = order[k];
    running = std::min(running, pvals[idx] * static_cast<double>(m) / (k + 1));
    r.adjusted[idx] = running;
  }
  for (size_t i = 0; i < m; ++i) r.significant[i] = r.adjusted[i] <= fdr;
  return r;
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson: length mismatch");
  if (x.size() < 2) throw DomainError("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedMetricError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double Aps(int successes_adv, int successes_norm, int runs) {
  if (runs <= 0) throw DomainError("aps: runs must be positive");
  if (successes_adv < 0 || successes_adv > runs || successes_norm < 0 ||
      successes_norm > runs) {
    throw DomainError("aps: successes must be within [0, runs]");
  }
  return static_cast<double>(successes_adv) / runs -
         static_cast<double>(successes_norm) / runs;
}

double CohenKappaIndividual(const RatingTable& table) {
  if (table.size() < 2) throw UndefinedMetricError("kappa: need two annotators");
  double agree = 0.0, chance = 0.0;
  long total = 0;
  for (size_t a = 0; a < table.size(); ++a) {
    for (size_t b = a + 1; b < table.size(); ++b) {
      const size_t items = std::min(table[a].size(), table[b].size());
      std::map<int, long> count_a, count_b;
      long overlap = 0, same = 0;
      for (size_t i = 0; i < items; ++i) {
        if (!table[a][i] || !table[b][i]) continue;
        ++overlap;
        ++count_a[*table[a][i]];
        ++count_b[*table[b][i]];
        if (*table[a][i] == *table[b][i]) ++same;
      }
      if (overlap == 0) continue;
      double pe = 0.0;
      for (const auto& [label, ca] : count_a) {
        auto it = count_b.find(label);
        if (it != count_b.end()) {
          pe += static_cast<double>(ca) * it->second / (static_cast<double>(overlap) * overlap);
        }
      }
      agree += same;
      chance += pe * overlap;
      total += overlap;
    }
  }
  if (total == 0) throw UndefinedMetricError("kappa: no annotator pair shares an item");
  const double po = agree / total;
  const double pe = chance / total;
  if (po == 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

}  // namespace evalstats
}  // namespace emoeval
