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

// The mrank command line. run() is the whole program minus process setup so
// tests can drive it in-process.

#pragma once

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrank/mrank.hpp"

namespace mrank::cli {

enum Exit : int { ok = 0, failure = 1, bad_flags = 2, io_error = 3, not_converged = 4 };

struct SolverFlags {
  int max_iters = SolverConfig{}.max_iters;
  double abs_tol = SolverConfig{}.abs_tol;
  double rel_tol = SolverConfig{}.rel_tol;
  double rho = SolverConfig{}.rho;
  double rank_tol = SolverConfig{}.rank_tol;
  std::optional<double> lambda;

  void add_to(CLI::App* app, bool with_lambda) {
    app->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    app->add_option("--abs-tol", abs_tol, "Absolute stopping tolerance")->check(CLI::NonNegativeNumber);
    app->add_option("--rel-tol", rel_tol, "Relative stopping tolerance")->check(CLI::NonNegativeNumber);
    app->add_option("--rho", rho, "ADMM penalty multiplier")->check(CLI::PositiveNumber);
    app->add_option("--rank-tol", rank_tol, "Relative singular-value cut for ranks")
        ->check(CLI::PositiveNumber);
    if (with_lambda)
      app->add_option("--lambda", lambda, "Sparsity weight (default 1/sqrt(n1 n2))")
          ->check(CLI::PositiveNumber);
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.max_iters = max_iters;
    cfg.abs_tol = abs_tol;
    cfg.rel_tol = rel_tol;
    cfg.rho = rho;
    cfg.rank_tol = rank_tol;
    cfg.lambda = lambda;
    return cfg;
  }
};

struct ReportFlags {
  std::string path;
  std::string format = "json";
  bool trace = false;

  void add_to(CLI::App* app) {
    app->add_option("--report", path, "Write the solve summary here");
    app->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    app->add_flag("--trace", trace, "Include the residual trace in JSON output");
  }
};

inline Dims parse_dims(const std::vector<std::size_t>& v) {
  require(!v.empty(), "--dims needs at least one value");
  for (auto n : v) require(n >= 1, "--dims values must be positive");
  return Dims(v.begin(), v.end());
}

inline std::string sidecar(const std::string& path, const std::string& tag) {
  fs::path p(path);
  const std::string stem = p.extension() == ".mten" ? p.stem().string() : p.filename().string();
  return (p.parent_path() / (stem + tag)).string();
}

// Observations of `input` under --mask (an indicator tensor) or a fresh
// --ratio/--seed mask. Without either, nonzero entries count as observed.
inline Observations load_observations(const Tensor& input, const std::string& mask_path,
                                      std::optional<double> ratio, std::uint64_t seed) {
  require(mask_path.empty() || !ratio, "--mask and --ratio are mutually exclusive");
  Mask mask;
  if (!mask_path.empty()) {
    mask = mask_from_tensor(read_tensor(mask_path));
    require(mask.dims == input.dims(), "mask dims do not match the input");
  } else if (ratio) {
    mask = gen_mask(input.dims(), *ratio, derive_seed(seed, Stream::mask));
  } else {
    mask = Mask{input.dims(), {}, 0.0};
    for (std::size_t k = 0; k < input.size(); ++k)
      if (input[k] != Complex{}) mask.observed.push_back(k);
    mask.ratio = static_cast<double>(mask.observed.size()) / static_cast<double>(input.size());
  }
  return Observations::sample(input, std::move(mask));
}

inline int emit_solve(const SolveResult& res, const ReportFlags& rf, std::ostream& out) {
  out << solve_summary(res, rf.trace).dump(2) << "\n";
  if (!rf.path.empty()) write_report({res}, rf.path, parse_report_format(rf.format), rf.trace);
  return res.converged ? ok : not_converged;
}

// complete_m on every canonical pairing; keeps the one whose own unfolding
// of the recovered tensor has the smallest rank (first on ties).
inline SolveResult complete_best_pairing(const Observations& obs, const SolverConfig& cfg,
                                         Pairing& chosen) {
  std::optional<SolveResult> best;
  int best_rank = 0;
  for (const auto& pr : canonical_pairings(obs.dims().size())) {
    SolveResult res = complete_m(obs, pr, cfg);
    const int rank = numerical_rank(square_unfold(res.recovered, pr), cfg.rank_tol);
    if (!best || rank < best_rank) {
      best = std::move(res);
      best_rank = rank;
      chosen = pr;
    }
  }
  return std::move(*best);
}

inline Pairing pairing_flag(const std::string& text, std::size_t order) {
  const Pairing pr = text.empty() ? Pairing::leading(order) : Pairing::parse(text);
  require(pr.is_valid_for(order), "pairing " + text + " does not fit order " +
                                      std::to_string(order));
  return pr;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"M-rank tools for even-order complex tensors", "mrank"};
  app.require_subcommand(1);
  std::function<int()> action;

  // rank
  std::string rank_input, rank_out, rank_format = "json";
  double rank_tol = kDefaultRankTol;
  auto* rank = app.add_subcommand("rank", "Rank report of an MTEN1 tensor");
  rank->add_option("input", rank_input, "Tensor file")->required();
  rank->add_option("--rank-tol", rank_tol, "Relative singular-value cut")->check(CLI::PositiveNumber);
  rank->add_option("--out", rank_out, "Write the report here");
  rank->add_option("--format", rank_format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  rank->callback([&] {
    action = [&] {
      const Tensor t = read_tensor(rank_input);
      const RankReport rep = m_ranks(t, rank_tol);
      out << json(rep).dump(2) << "\n";
      if (!rank_out.empty()) write_report({rep}, rank_out, parse_report_format(rank_format));
      return ok;
    };
  });

  // gen
  std::string gen_form = "cp", gen_out;
  std::vector<std::size_t> gen_dims;
  int gen_r = 1, gen_k = 0;
  std::uint64_t gen_seed = 0;
  std::optional<double> gen_ratio, gen_density;
  auto* gen = app.add_subcommand("gen", "Write a synthetic instance and its ground truth");
  gen->add_option("--form", gen_form, "Instance form")->check(CLI::IsMember({"cp", "kron", "supersym"}));
  gen->add_option("--dims", gen_dims, "Dimensions, comma separated")->delimiter(',')->required();
  gen->add_option("--r", gen_r, "Number of terms")->check(CLI::NonNegativeNumber);
  gen->add_option("--k", gen_k, "Factor rank (kron)")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--ratio", gen_ratio, "Also sample a mask with this observed fraction")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--density", gen_density, "Add sparse corruption with this density")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--out", gen_out, "Output tensor path (.mten)")->required();
  gen->callback([&] {
    action = [&] {
      InstanceSpec spec{parse_dims(gen_dims), gen_r, gen_k, parse_form(gen_form), gen_seed};
      const auto [truth, bound] = generate(spec);
      Tensor data = truth;
      if (gen_density) data += gen_sparse_noise(truth.dims(), *gen_density,
                                                derive_seed(gen_seed, Stream::noise));
      json meta = {{"spec", spec}, {"cp_bound", bound}, {"truth", sidecar(gen_out, ".truth.mten")}};
      if (gen_ratio) {
        const Mask m = gen_mask(truth.dims(), *gen_ratio, derive_seed(gen_seed, Stream::mask));
        write_tensor(mask_to_tensor(m), sidecar(gen_out, ".mask.mten"));
        meta["ratio"] = *gen_ratio;
        meta["mask"] = sidecar(gen_out, ".mask.mten");
      }
      if (gen_density) meta["density"] = *gen_density;
      write_tensor(data, gen_out);
      write_tensor(truth, sidecar(gen_out, ".truth.mten"));
      detail::write_bytes(sidecar(gen_out, ".json"), meta.dump(2) + "\n");
      out << meta.dump(2) << "\n";
      return ok;
    };
  });

  // complete
  std::string c_input, c_mask, c_truth, c_out, c_pairing, c_method = "m";
  std::optional<double> c_ratio;
  std::uint64_t c_seed = 0;
  SolverFlags c_solver;
  ReportFlags c_report;
  auto* complete = app.add_subcommand("complete", "Complete a partially observed tensor");
  complete->add_option("input", c_input, "Tensor file holding the observed values")->required();
  complete->add_option("--mask", c_mask, "Indicator tensor of observed entries");
  complete->add_option("--ratio", c_ratio, "Sample this observed fraction of the input")
      ->check(CLI::Range(0.0, 1.0));
  complete->add_option("--seed", c_seed, "Seed for --ratio");
  complete->add_option("--truth", c_truth, "Ground truth for the relative error");
  complete->add_option("--pairing", c_pairing, "Square-unfolding pairing, e.g. {1,2|3,4}, or argmin");
  complete->add_option("--method", c_method, "m: low-M-rank, n: low-n-rank baseline")
      ->check(CLI::IsMember({"m", "n"}));
  complete->add_option("--out", c_out, "Write the recovered tensor here");
  c_solver.add_to(complete, false);
  c_report.add_to(complete);
  complete->callback([&] {
    action = [&] {
      const Tensor input = read_tensor(c_input);
      const Observations obs = load_observations(input, c_mask, c_ratio, c_seed);
      const SolverConfig cfg = c_solver.config();
      SolveResult res;
      if (c_method == "n") {
        require(c_pairing.empty(), "--pairing applies to --method m only");
        res = complete_n(obs, cfg);
      } else if (c_pairing == "argmin") {
        Pairing chosen;
        res = complete_best_pairing(obs, cfg, chosen);
        err << "pairing " << chosen.to_string() << "\n";
      } else {
        res = complete_m(obs, pairing_flag(c_pairing, input.order()), cfg);
      }
      if (!c_truth.empty()) attach_truth(res, read_tensor(c_truth));
      if (!c_out.empty()) write_tensor(res.recovered, c_out);
      return emit_solve(res, c_report, out);
    };
  });

  // rpca
  std::string p_input, p_truth, p_out, p_sparse_out, p_pairing, p_method = "m";
  SolverFlags p_solver;
  ReportFlags p_report;
  auto* rpca = app.add_subcommand("rpca", "Split a tensor into low-rank and sparse parts");
  rpca->add_option("input", p_input, "Tensor file")->required();
  rpca->add_option("--truth", p_truth, "Low-rank ground truth for the relative error");
  rpca->add_option("--pairing", p_pairing, "Square-unfolding pairing");
  rpca->add_option("--method", p_method, "m: low-M-rank, n: low-n-rank baseline")
      ->check(CLI::IsMember({"m", "n"}));
  rpca->add_option("--out", p_out, "Write the low-rank part here");
  rpca->add_option("--sparse-out", p_sparse_out, "Write the sparse part here");
  p_solver.add_to(rpca, true);
  p_report.add_to(rpca);
  rpca->callback([&] {
    action = [&] {
      const Tensor f = read_tensor(p_input);
      const SolverConfig cfg = p_solver.config();
      SolveResult res;
      if (p_method == "n") {
        require(p_pairing.empty(), "--pairing applies to --method m only");
        res = rpca_n(f, cfg);
      } else {
        res = rpca_m(f, pairing_flag(p_pairing, f.order()), cfg);
      }
      if (!p_truth.empty()) attach_truth(res, read_tensor(p_truth));
      if (!p_out.empty()) write_tensor(res.recovered, p_out);
      if (!p_sparse_out.empty()) write_tensor(*res.sparse, p_sparse_out);
      return emit_solve(res, p_report, out);
    };
  });

  // sym-complete
  std::string s_input, s_mask, s_truth, s_out;
  std::optional<double> s_ratio;
  std::uint64_t s_seed = 0;
  SolverFlags s_solver;
  ReportFlags s_report;
  auto* sym = app.add_subcommand("sym-complete", "Complete a super-symmetric tensor");
  sym->add_option("input", s_input, "Tensor file holding the observed values")->required();
  sym->add_option("--mask", s_mask, "Indicator tensor of observed entries");
  sym->add_option("--ratio", s_ratio, "Sample this observed fraction of the input")
      ->check(CLI::Range(0.0, 1.0));
  sym->add_option("--seed", s_seed, "Seed for --ratio");
  sym->add_option("--truth", s_truth, "Ground truth for the relative error");
  sym->add_option("--out", s_out, "Write the recovered tensor here");
  s_solver.add_to(sym, false);
  s_report.add_to(sym);
  sym->callback([&] {
    action = [&] {
      const Tensor input = read_tensor(s_input);
      const Observations obs = load_observations(input, s_mask, s_ratio, s_seed);
      SolveResult res = complete_supersym(obs, s_solver.config());
      if (!s_truth.empty()) attach_truth(res, read_tensor(s_truth));
      if (!s_out.empty()) write_tensor(res.recovered, s_out);
      return emit_solve(res, s_report, out);
    };
  });

  // table1..table5
  struct TableFlags {
    int trials = 5;
    bool full = false;
    bool per_trial = false;
    std::uint64_t seed = 1;
    std::string out, format = "csv";
    unsigned threads = 0;
  };
  std::vector<TableFlags> tflags(5);
  const char* table_help[5] = {
      "Ranks of CP-form instances: M+ and M- against the Tucker rank",
      "Ranks of Kronecker-form instances",
      "Completion: low-M-rank against low-n-rank",
      "Super-symmetric completion",
      "Robust recovery: low-M-rank against low-n-rank"};
  for (int i = 0; i < 5; ++i) {
    auto& f = tflags[static_cast<std::size_t>(i)];
    auto* sub = app.add_subcommand("table" + std::to_string(i + 1), table_help[i]);
    sub->add_option("--trials", f.trials, "Seeds per row")->check(CLI::PositiveNumber);
    sub->add_flag("--full", f.full, "Paper-scale rows instead of desk scale");
    sub->add_flag("--per-trial", f.per_trial, "One output row per trial");
    sub->add_option("--seed", f.seed, "First trial seed");
    sub->add_option("--out", f.out, "Write the table here instead of stdout");
    sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", f.threads, "Parallel trials (default MRANK_THREADS or all cores)");
    sub->callback([&, i] {
      action = [&, i] {
        const auto& fl = tflags[static_cast<std::size_t>(i)];
        const TableDefinition def = table_definition(i + 1);
        const auto rows = table_rows(i + 1, fl.full);
        const auto records = run_trials(def, rows, fl.trials, fl.seed, SolverConfig{},
                                        fl.threads ? fl.threads : worker_count());
        for (const auto& rec : records)
          if (!rec.error.empty()) err << "trial seed " << rec.seed << " failed: " << rec.error << "\n";
        const std::string text =
            render(tabulate(def, rows, records, fl.per_trial), parse_report_format(fl.format));
        if (fl.out.empty()) out << text;
        else detail::write_bytes(fl.out, text);
        return ok;
      };
    });
  }

  // video-complete
  std::string vc_frames, vc_out, vc_pairing;
  double vc_ratio = 0.2;
  std::uint64_t vc_seed = 0;
  SolverFlags vc_solver;
  auto* vc = app.add_subcommand("video-complete", "Mask a PPM frame stack and complete it");
  vc->add_option("--frames", vc_frames, "Directory of P6 frames")->required();
  vc->add_option("--ratio", vc_ratio, "Observed fraction")->check(CLI::Range(0.0, 1.0));
  vc->add_option("--seed", vc_seed, "Mask seed");
  vc->add_option("--pairing", vc_pairing, "Square-unfolding pairing");
  vc->add_option("--out", vc_out, "Output directory")->required();
  vc_solver.add_to(vc, false);
  vc->callback([&] {
    action = [&] {
      const FrameStack stack = read_frames(vc_frames);
      const Observations obs = Observations::sample(
          stack.tensor, gen_mask(stack.tensor.dims(), vc_ratio, derive_seed(vc_seed, Stream::mask)));
      SolveResult res = complete_m(obs, pairing_flag(vc_pairing, 4), vc_solver.config());
      attach_truth(res, stack.tensor);
      FrameStack masked = FrameStack::from_tensor(obs.zero_filled());
      write_frames(masked, fs::path(vc_out) / "masked");
      const auto sum = write_frames(FrameStack::from_tensor(res.recovered), fs::path(vc_out) / "recovered");
      if (sum.imag_warning) err << "warning: recovered frames carry imaginary parts up to " << sum.max_imag << "\n";
      out << solve_summary(res, false).dump(2) << "\n";
      return res.converged ? ok : not_converged;
    };
  });

  // video-decompose
  std::string vd_frames, vd_out, vd_pairing;
  SolverFlags vd_solver;
  auto* vd = app.add_subcommand("video-decompose", "Split a PPM frame stack into background and foreground");
  vd->add_option("--frames", vd_frames, "Directory of P6 frames")->required();
  vd->add_option("--pairing", vd_pairing, "Square-unfolding pairing");
  vd->add_option("--out", vd_out, "Output directory")->required();
  vd_solver.add_to(vd, true);
  vd->callback([&] {
    action = [&] {
      const FrameStack stack = read_frames(vd_frames);
      const SolveResult res = rpca_m(stack.tensor, pairing_flag(vd_pairing, 4), vd_solver.config());
      const auto bg = write_frames(FrameStack::from_tensor(res.recovered), fs::path(vd_out) / "background");
      const auto fg = write_frames(FrameStack::from_tensor(*res.sparse), fs::path(vd_out) / "foreground");
      if (bg.imag_warning || fg.imag_warning)
        err << "warning: output frames carry imaginary parts up to "
            << std::max(bg.max_imag, fg.max_imag) << "\n";
      out << solve_summary(res, false).dump(2) << "\n";
      return res.converged ? ok : not_converged;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return bad_flags;
  }
  try {
    if (!action) {
      err << "error: no subcommand\n";
      return bad_flags;
    }
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::invalid_argument: return bad_flags;
      case ErrorKind::io: return io_error;
      case ErrorKind::convergence: return not_converged;
      case ErrorKind::infeasible: return failure;
    }
    return failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
}

}  // namespace mrank::cli
