// Copyright 2026 The mrank Authors. All Rights Reserved.
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

// Experiment harness behind the table commands: seeded trials of the rank
// and recovery experiments, run in parallel and aggregated into reports.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "mrank/io.hpp"
#include "mrank/ranks.hpp"
#include "mrank/solvers.hpp"
#include "mrank/synth.hpp"

namespace mrank {

/// One row setting of a table: instance dims and ranks plus the sampling
/// ratio (completion) or corruption density (robust recovery).
struct RowSpec {
  Dims dims;
  int r = 0;
  int k = 0;
  double ratio = 1.0;
  double density = 0.0;
};

/// A trial metric: a scalar or a per-mode vector (Tucker rank).
using Metric = std::variant<double, std::vector<double>>;

struct TrialRecord {
  std::size_t row = 0;
  std::uint64_t seed = 0;
  std::vector<Metric> metrics;
  std::string error;  // non-empty when the trial threw
};

struct TableDefinition {
  std::string name;
  std::vector<std::string> key_columns;
  std::vector<std::string> metric_columns;
  std::function<std::vector<Cell>(const RowSpec&)> keys;
  std::function<std::vector<Metric>(const RowSpec&, std::uint64_t, const SolverConfig&)> trial;
};

namespace detail {

inline std::vector<double> to_doubles(const std::vector<int>& v) {
  return {v.begin(), v.end()};
}

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline double flag(bool b) { return b ? 1.0 : 0.0; }

inline Observations observe(const Tensor& truth, double ratio, std::uint64_t seed) {
  return Observations::sample(truth, gen_mask(truth.dims(), ratio, derive_seed(seed, Stream::mask)));
}

}  // namespace detail

// ---------------------------------------------------------------- trials

struct RankTrial {
  std::vector<int> tucker;
  int m_plus = 0;
  int m_minus = 0;
  long long bound = 0;
};

/// Ranks of a CP-form instance.
inline RankTrial cp_rank_trial(const RowSpec& row, std::uint64_t seed, double rank_tol) {
  const auto [t, bound] = gen_cp({row.dims, row.r, 0, InstanceForm::cp, seed});
  const RankReport rep = m_ranks(t, rank_tol);
  return {rep.tucker, rep.m_plus, rep.m_minus, bound};
}

/// Ranks of a Kronecker-form instance.
inline RankTrial kron_rank_trial(const RowSpec& row, std::uint64_t seed, double rank_tol) {
  const auto [t, bound] = gen_kron({row.dims, row.r, row.k, InstanceForm::kron, seed});
  const RankReport rep = m_ranks(t, rank_tol);
  return {rep.tucker, rep.m_plus, rep.m_minus, bound};
}

struct CompletionTrial {
  SolveResult low_n;
  SolveResult low_m;
};

/// Completion of a CP-form instance by both models.
inline CompletionTrial completion_trial(const RowSpec& row, std::uint64_t seed,
                                        const SolverConfig& cfg, bool with_baseline = true) {
  const Tensor truth = gen_cp({row.dims, row.r, 0, InstanceForm::cp, seed}).first;
  const Observations obs = detail::observe(truth, row.ratio, seed);
  CompletionTrial out;
  out.low_m = complete_m(obs, Pairing::leading(row.dims.size()), cfg);
  attach_truth(out.low_m, truth);
  if (with_baseline) {
    out.low_n = complete_n(obs, cfg);
    attach_truth(out.low_n, truth);
  }
  return out;
}

struct SupersymTrial {
  SolveResult result;
  bool super_symmetric = false;
  double seconds = 0.0;
};

inline SupersymTrial supersym_trial(const RowSpec& row, std::uint64_t seed,
                                    const SolverConfig& cfg) {
  const Tensor truth = gen_supersym({row.dims, row.r, 0, InstanceForm::supersym, seed});
  const Observations obs = detail::observe(truth, row.ratio, seed);
  SupersymTrial out;
  const auto t0 = std::chrono::steady_clock::now();
  out.result = complete_supersym(obs, cfg);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  attach_truth(out.result, truth);
  out.super_symmetric = is_super_symmetric(out.result.recovered, 1e-6);
  return out;
}

struct RobustTrial {
  SolveResult low_n;
  SolveResult low_m;
};

/// Robust recovery of CP-form plus sparse corruption by both models.
inline RobustTrial robust_trial(const RowSpec& row, std::uint64_t seed, const SolverConfig& cfg,
                                bool with_baseline = true) {
  const Tensor low = gen_cp({row.dims, row.r, 0, InstanceForm::cp, seed}).first;
  const Tensor f = low + gen_sparse_noise(row.dims, row.density, derive_seed(seed, Stream::noise));
  RobustTrial out;
  out.low_m = rpca_m(f, Pairing::leading(row.dims.size()), cfg);
  attach_truth(out.low_m, low);
  if (with_baseline) {
    out.low_n = rpca_n(f, cfg);
    attach_truth(out.low_n, low);
  }
  return out;
}

// ---------------------------------------------------------------- tables

inline TableDefinition rank_table(std::string name, bool kron) {
  TableDefinition t;
  t.name = std::move(name);
  t.key_columns = kron ? std::vector<std::string>{"dims", "r", "k", "cp_bound"}
                       : std::vector<std::string>{"dims", "r", "cp_bound"};
  t.metric_columns = {"tucker", "m_plus", "m_minus"};
  t.keys = [kron](const RowSpec& row) -> std::vector<Cell> {
    long long bound = row.r;
    if (kron)
      for (std::size_t j = 0; j < row.dims.size() / 2; ++j) bound *= row.k;
    std::vector<Cell> c{dims_to_string(row.dims), static_cast<long long>(row.r)};
    if (kron) c.emplace_back(static_cast<long long>(row.k));
    c.emplace_back(bound);
    return c;
  };
  t.trial = [kron](const RowSpec& row, std::uint64_t seed, const SolverConfig& cfg) {
    const RankTrial tr = kron ? kron_rank_trial(row, seed, cfg.rank_tol)
                              : cp_rank_trial(row, seed, cfg.rank_tol);
    return std::vector<Metric>{detail::to_doubles(tr.tucker), double(tr.m_plus),
                               double(tr.m_minus)};
  };
  return t;
}

inline TableDefinition completion_table() {
  TableDefinition t;
  t.name = "table3";
  t.key_columns = {"dims", "r", "ratio"};
  t.metric_columns = {"n_rel_err", "n_tucker", "n_converged", "m_rel_err",
                      "m_plus",    "m_minus",  "m_converged", "m_iters"};
  t.keys = [](const RowSpec& row) -> std::vector<Cell> {
    return {dims_to_string(row.dims), static_cast<long long>(row.r), row.ratio};
  };
  t.trial = [](const RowSpec& row, std::uint64_t seed, const SolverConfig& cfg) {
    const CompletionTrial tr = completion_trial(row, seed, cfg);
    return std::vector<Metric>{*tr.low_n.rel_err_vs_truth,
                               detail::to_doubles(tr.low_n.rank_report.tucker),
                               detail::flag(tr.low_n.converged),
                               *tr.low_m.rel_err_vs_truth,
                               double(tr.low_m.rank_report.m_plus),
                               double(tr.low_m.rank_report.m_minus),
                               detail::flag(tr.low_m.converged),
                               double(tr.low_m.iters)};
  };
  return t;
}

inline TableDefinition supersym_table() {
  TableDefinition t;
  t.name = "table4";
  t.key_columns = {"dims", "r", "ratio"};
  t.metric_columns = {"rel_err", "rank_m", "super_symmetric", "converged", "iters"};
  t.keys = [](const RowSpec& row) -> std::vector<Cell> {
    return {dims_to_string(row.dims), static_cast<long long>(row.r), row.ratio};
  };
  t.trial = [](const RowSpec& row, std::uint64_t seed, const SolverConfig& cfg) {
    const SupersymTrial tr = supersym_trial(row, seed, cfg);
    return std::vector<Metric>{*tr.result.rel_err_vs_truth,
                               double(tr.result.rank_report.m_plus),
                               detail::flag(tr.super_symmetric), detail::flag(tr.result.converged),
                               double(tr.result.iters)};
  };
  return t;
}

inline TableDefinition robust_table() {
  TableDefinition t;
  t.name = "table5";
  t.key_columns = {"dims", "r", "density"};
  t.metric_columns = {"n_rel_err_all", "n_rel_err_lr", "n_tucker",  "n_converged",
                      "m_rel_err_all", "m_rel_err_lr", "m_plus",    "m_minus",
                      "m_converged"};
  t.keys = [](const RowSpec& row) -> std::vector<Cell> {
    return {dims_to_string(row.dims), static_cast<long long>(row.r), row.density};
  };
  t.trial = [](const RowSpec& row, std::uint64_t seed, const SolverConfig& cfg) {
    const RobustTrial tr = robust_trial(row, seed, cfg);
    return std::vector<Metric>{*tr.low_n.rel_err_all,
                               *tr.low_n.rel_err_vs_truth,
                               detail::to_doubles(tr.low_n.rank_report.tucker),
                               detail::flag(tr.low_n.converged),
                               *tr.low_m.rel_err_all,
                               *tr.low_m.rel_err_vs_truth,
                               double(tr.low_m.rank_report.m_plus),
                               double(tr.low_m.rank_report.m_minus),
                               detail::flag(tr.low_m.converged)};
  };
  return t;
}

inline TableDefinition table_definition(int which) {
  switch (which) {
    case 1: return rank_table("table1", false);
    case 2: return rank_table("table2", true);
    case 3: return completion_table();
    case 4: return supersym_table();
    case 5: return robust_table();
  }
  throw Error(ErrorKind::invalid_argument, "tables are numbered 1 to 5");
}

/// Row settings: desk scale by default, the larger grids with `full`.
inline std::vector<RowSpec> table_rows(int which, bool full) {
  auto sq = [](std::size_t a, std::size_t b) { return Dims{a, a, b, b}; };
  auto cube = [](std::size_t n) { return Dims{n, n, n, n}; };
  std::vector<RowSpec> rows;
  switch (which) {
    case 1:
      if (!full) return {{cube(10), 12}, {cube(15), 18}};
      return {{cube(10), 12},    {sq(10, 15), 12}, {cube(15), 18}, {sq(15, 20), 18},
              {cube(20), 30},    {sq(20, 25), 30}, {sq(25, 30), 40}, {cube(30), 40}};
    case 2: {
      if (!full) return {{cube(10), 2, 2}, {cube(10), 3, 3}, {cube(10), 4, 4}};
      for (const auto& d : {cube(10), sq(10, 15), sq(15, 20)})
        for (int r : {2, 3, 4}) rows.push_back({d, r, r});
      for (const auto& d : {cube(20), sq(20, 30)})
        for (int r : {3, 4, 5}) rows.push_back({d, r, r});
      return rows;
    }
    case 3: {
      if (!full) return {{cube(10), 6, 0, 0.3}};
      const std::vector<std::pair<std::size_t, std::vector<int>>> grid{
          {10, {2, 4, 6}}, {15, {3, 6, 9}}, {20, {4, 8, 12}}};
      for (const auto& [n, ranks] : grid)
        for (int r : ranks)
          for (double p : {0.7, 0.5, 0.3}) rows.push_back({cube(n), r, 0, p});
      return rows;
    }
    case 4: {
      if (!full) return {{cube(10), 8, 0, 0.4}};
      const std::vector<std::pair<std::size_t, std::vector<int>>> grid{
          {10, {8, 12}}, {15, {8, 20}}, {20, {15, 25}}, {25, {15, 30}}};
      for (const auto& [n, ranks] : grid)
        for (int r : ranks) rows.push_back({cube(n), r, 0, 0.4});
      return rows;
    }
    case 5: {
      if (!full) return {{cube(10), 4, 0, 1.0, 0.05}};
      const std::vector<std::pair<std::size_t, std::vector<int>>> grid{
          {10, {2, 4, 6, 8, 12}}, {15, {3, 6, 9, 12, 18}}, {20, {4, 8, 12, 16, 24}}};
      for (const auto& [n, ranks] : grid)
        for (int r : ranks) rows.push_back({cube(n), r, 0, 1.0, 0.05});
      return rows;
    }
  }
  throw Error(ErrorKind::invalid_argument, "tables are numbered 1 to 5");
}

/// MRANK_THREADS if set to a positive integer, else the hardware count.
inline unsigned worker_count() {
  if (const char* env = std::getenv("MRANK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `trials` seeds (base_seed, base_seed + 1, ...) per row. Trials run on
/// up to `threads` workers; records are ordered by row, then seed. A trial
/// that throws is recorded with NaN metrics and its message.
inline std::vector<TrialRecord> run_trials(const TableDefinition& def,
                                           const std::vector<RowSpec>& rows, int trials,
                                           std::uint64_t base_seed, const SolverConfig& cfg,
                                           unsigned threads) {
  require(trials >= 1, "trials must be positive");
  std::vector<TrialRecord> out(rows.size() * static_cast<std::size_t>(trials));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].row = i / static_cast<std::size_t>(trials);
    out[i].seed = base_seed + i % static_cast<std::size_t>(trials);
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < out.size();) {
      auto& rec = out[i];
      try {
        rec.metrics = def.trial(rows[rec.row], rec.seed, cfg);
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(out.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

namespace detail {

inline std::string format_vector(const std::vector<double>& v) {
  std::string s = "(";
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4g", v[i]);
    s += (i ? "," : "") + std::string(buf);
  }
  return s + ")";
}

inline Cell metric_cell(const Metric& m) {
  if (const auto* d = std::get_if<double>(&m)) return *d;
  return format_vector(std::get<std::vector<double>>(m));
}

}  // namespace detail

/// One row per trial (with its seed), or per row setting averaged over
/// the trials that ran to completion; trials that threw count in `failed`.
inline ReportTable tabulate(const TableDefinition& def, const std::vector<RowSpec>& rows,
                            const std::vector<TrialRecord>& records, bool per_trial) {
  ReportTable t;
  t.columns = def.key_columns;
  t.columns.insert(t.columns.end(), per_trial ? "seed" : "trials");
  if (!per_trial) t.columns.push_back("failed");
  t.columns.insert(t.columns.end(), def.metric_columns.begin(), def.metric_columns.end());
  if (per_trial) t.columns.push_back("error");

  const std::size_t width = def.metric_columns.size();
  if (per_trial) {
    for (const auto& rec : records) {
      auto cells = def.keys(rows[rec.row]);
      cells.emplace_back(static_cast<long long>(rec.seed));
      for (std::size_t m = 0; m < width; ++m)
        cells.push_back(rec.error.empty() ? detail::metric_cell(rec.metrics[m])
                                          : Cell{detail::nan()});
      cells.emplace_back(rec.error);
      t.add(std::move(cells));
    }
    return t;
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<const TrialRecord*> mine;
    for (const auto& rec : records)
      if (rec.row == r) mine.push_back(&rec);
    long long failed = 0;
    std::vector<Metric> sum;
    for (const auto* rec : mine) {
      if (!rec->error.empty()) {
        ++failed;
        continue;
      }
      if (sum.empty()) {
        sum = rec->metrics;
        continue;
      }
      for (std::size_t m = 0; m < width; ++m) {
        if (auto* d = std::get_if<double>(&sum[m])) {
          *d += std::get<double>(rec->metrics[m]);
        } else {
          auto& v = std::get<std::vector<double>>(sum[m]);
          const auto& w = std::get<std::vector<double>>(rec->metrics[m]);
          for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
        }
      }
    }
    auto cells = def.keys(rows[r]);
    cells.emplace_back(static_cast<long long>(mine.size()));
    cells.emplace_back(failed);
    const double ok = static_cast<double>(mine.size()) - static_cast<double>(failed);
    for (std::size_t m = 0; m < width; ++m) {
      if (sum.empty()) {
        cells.emplace_back(detail::nan());
        continue;
      }
      if (auto* d = std::get_if<double>(&sum[m])) {
        cells.emplace_back(*d / ok);
      } else {
        auto v = std::get<std::vector<double>>(sum[m]);
        for (auto& x : v) x /= ok;
        cells.emplace_back(detail::format_vector(v));
      }
    }
    t.add(std::move(cells));
  }
  return t;
}

}  // namespace mrank
