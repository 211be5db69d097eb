#pragma once

// Self-checks against independent references. Each check returns one
// CheckResult; `run_verify` runs the ones that need no external data.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chain_file.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "links.hpp"
#include "loo.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "prediction.hpp"
#include "random.hpp"
#include "sampler.hpp"
#include "synthetic.hpp"

namespace bayesbin {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

inline std::string format_check(const CheckResult& r) {
  std::ostringstream s;
  s << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": measured " << std::setprecision(6)
    << r.measured << ", threshold " << r.threshold;
  if (!r.detail.empty()) s << " (" << r.detail << ")";
  return s.str();
}

// ---------------------------------------------------------------------------
// 1: analytic gradient against central differences

inline CheckResult check_gradients(std::uint64_t seed, int points_per_link = 100) {
  CheckResult r{1, "gradient vs finite differences", true, 0.0, 1e-6, ""};
  Engine eng = make_engine(seed, StreamTag::Synthetic, 100);
  int evaluated = 0;
  for (LinkKind link : {LinkKind::Logit, LinkKind::Probit}) {
    for (int point = 0; point < points_per_link; ++point) {
      const auto n = 1 + uniform_index(eng, 50);
      const auto k = 1 + uniform_index(eng, 5);
      const auto prob = synthetic_regression(n, k, link, eng(), 1.5);
      const PriorSpec prior{uniform(eng, -1, 1), uniform(eng, 0.5, 5), uniform(eng, -1, 1), uniform(eng, 0.5, 5)};
      const ModelSpec model(link, prior, prob.x, prob.y);
      Eigen::VectorXd beta(model.dim());
      for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = uniform(eng, -2.0, 2.0);
      Eigen::VectorXd grad(model.dim());
      model.log_density_gradient(beta, grad);
      const auto fd = oracle::finite_diff_gradient(
          [&](const Eigen::VectorXd& b) {
            Eigen::VectorXd g(model.dim());
            return model.log_density_gradient(b, g);
          },
          beta);
      for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double rel = std::abs(grad(j) - fd(j)) / std::max({1.0, std::abs(grad(j)), std::abs(fd(j))});
        r.measured = std::max(r.measured, rel);
      }
      ++evaluated;
    }
  }
  r.passed = r.measured < r.threshold;
  r.detail = std::to_string(evaluated) + " points, max relative error";
  return r;
}

// ---------------------------------------------------------------------------
// 2: NUTS moments against grid quadrature

inline CheckResult check_sampler_vs_grid(std::uint64_t seed, unsigned threads = 0) {
  CheckResult r{2, "sampler vs grid quadrature", true, 0.0, 1.0, ""};
  const auto prob = synthetic_regression(50, 1, LinkKind::Logit, seed);
  const PriorSpec prior{0.0, 2.5, 0.0, 2.5};
  const ModelSpec model(LinkKind::Logit, prior, prob.x, prob.y);

  oracle::GridSpec grid;
  grid.axes = {{-6.0, 6.0, 401}, {-6.0, 6.0, 401}};
  const auto exact = oracle::grid_posterior_moments(model, grid);

  SamplerConfig cfg;
  cfg.seed = seed;
  const auto draws = sample(model, cfg, {"Intercept", "x1"}, threads);
  // Worst ratio |error| / allowance over both moments of both parameters.
  std::ostringstream detail;
  for (std::size_t p = 0; p < 2; ++p) {
    const auto chains = draws.chains_of(p);
    std::vector<double> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    const double mean = detail::mean_of(all);
    const double sd = std::sqrt(detail::variance_of(all));
    const double ess = ess_bulk(chains);
    const double mcse_mean = sd / std::sqrt(ess);
    const double mcse_sd = sd / std::sqrt(2.0 * ess);
    const auto pi = static_cast<Eigen::Index>(p);
    const double ratio_mean = std::abs(mean - exact.mean(pi)) / std::max(0.05, 4.0 * mcse_mean);
    const double ratio_sd = std::abs(sd - exact.sd(pi)) / std::max(0.05, 4.0 * mcse_sd);
    r.measured = std::max({r.measured, ratio_mean, ratio_sd});
    detail << draws.param_names[p] << " mean " << std::setprecision(4) << mean << "/" << exact.mean(pi) << " sd "
           << sd << "/" << exact.sd(pi) << (p == 0 ? "; " : "");
  }
  r.passed = r.measured < r.threshold;
  r.detail = "worst error as a fraction of tolerance; " + detail.str();
  return r;
}

// ---------------------------------------------------------------------------
// 3: PSIS-LOO against brute-force refits

inline CheckResult check_psis_vs_exact(std::uint64_t seed, unsigned threads = 0) {
  CheckResult r{3, "PSIS-LOO vs exact LOO", true, 0.0, 0.5, ""};
  const auto prob = synthetic_regression(100, 2, LinkKind::Logit, seed + 1);
  const PriorSpec prior{0.0, 2.5, 0.0, 2.5};
  const ModelSpec model(LinkKind::Logit, prior, prob.x, prob.y);
  SamplerConfig cfg;
  cfg.seed = seed;
  const auto draws = sample(model, cfg, {}, threads);
  const LooResult loo = psis_loo(draws, model);
  SamplerConfig refit = cfg;
  refit.n_warmup = 500;
  const double exact = exact_loo(model, refit, threads);
  r.measured = std::abs(loo.elpd_loo - exact);
  r.passed = r.measured < r.threshold && loo.n_high_k < 2;
  std::ostringstream d;
  d << "psis " << std::fixed << std::setprecision(3) << loo.elpd_loo << ", exact " << exact << ", " << loo.n_high_k
    << " observations with k > 0.7";
  r.detail = d.str();
  return r;
}

// ---------------------------------------------------------------------------
// 4: Rhat / ESS calibration on iid chains and on shifted chains

inline ChainDraws iid_chains(Engine& eng, std::size_t chains, std::size_t draws,
                             const std::vector<double>& means = {}) {
  ChainDraws out(chains, std::vector<double>(draws));
  for (std::size_t c = 0; c < chains; ++c) {
    const double mu = means.empty() ? 0.0 : means[c % means.size()];
    for (auto& v : out[c]) v = mu + standard_normal(eng);
  }
  return out;
}

inline CheckResult check_diagnostic_calibration(std::uint64_t seed, int n_seeds = 50) {
  CheckResult r{4, "diagnostic calibration", true, 0.0, 48.0, ""};
  int good = 0;
  int shifted_ok = 0;
  for (int s = 0; s < n_seeds; ++s) {
    Engine eng = make_engine(seed, StreamTag::Synthetic, 1000 + static_cast<std::uint64_t>(s));
    const auto iid = iid_chains(eng, 4, 1000);
    const double rh = split_rhat(iid);
    const double eb = ess_bulk(iid);
    const double et = ess_tail(iid);
    const bool ok = rh >= 0.99 && rh <= 1.01 && std::abs(eb - 4000.0) <= 600.0 && std::abs(et - 4000.0) <= 600.0;
    good += ok ? 1 : 0;
    const auto shifted = iid_chains(eng, 4, 1000, {0.0, 5.0});
    shifted_ok += split_rhat(shifted) > 1.1 ? 1 : 0;
  }
  const double need = std::ceil(48.0 * n_seeds / 50.0);
  r.threshold = need;
  r.measured = good;
  r.passed = good >= need && shifted_ok == n_seeds;
  r.detail = std::to_string(good) + "/" + std::to_string(n_seeds) + " iid sets calibrated, " +
             std::to_string(shifted_ok) + "/" + std::to_string(n_seeds) + " shifted sets with Rhat > 1.1";
  return r;
}

// ---------------------------------------------------------------------------
// 8: outcome-scale prediction contract

inline PosteriorDraws constant_draws(std::size_t chains, std::size_t per_chain, const Eigen::VectorXd& q) {
  PosteriorDraws d;
  d.n_chains = chains;
  d.n_draws = per_chain;
  d.n_params = static_cast<std::size_t>(q.size());
  for (std::size_t s = 0; s < chains * per_chain; ++s) {
    for (Eigen::Index p = 0; p < q.size(); ++p) d.values.push_back(q(p));
  }
  for (Eigen::Index p = 0; p < q.size(); ++p) d.param_names.push_back(p == 0 ? "Intercept" : "x" + std::to_string(p));
  d.seed = 1;
  return d;
}

inline CheckResult check_prediction_contract(std::uint64_t seed) {
  CheckResult r{8, "prediction contract", true, 0.0, 0.0, ""};
  // (a) est_error^2 <= p(1-p) + 1/S on random posteriors and rows
  Engine eng = make_engine(seed, StreamTag::Synthetic, 200);
  double worst = -INFINITY;
  for (int rep = 0; rep < 20; ++rep) {
    PosteriorDraws d;
    d.n_chains = 4;
    d.n_draws = 250;
    d.n_params = 3;
    d.param_names = {"Intercept", "x1", "x2"};
    for (std::size_t s = 0; s < 1000 * 3; ++s) d.values.push_back(uniform(eng, -2, 2));
    DesignMatrix rows;
    rows.values.resize(10, 2);
    for (Eigen::Index i = 0; i < 10; ++i) {
      rows.values(i, 0) = standard_normal(eng);
      rows.values(i, 1) = standard_normal(eng);
    }
    for (LinkKind link : {LinkKind::Logit, LinkKind::Probit}) {
      for (const auto& p : posterior_predict(d, link, rows, PredictScale::Outcome, eng())) {
        worst = std::max(worst, p.est_error * p.est_error - p.estimate * (1 - p.estimate) - 1.0 / 1000.0);
      }
    }
  }
  // (b) known p = 0.257 at S = 4000
  const double p = 0.257;
  Eigen::VectorXd q(2);
  q << std::log(p / (1 - p)), 0.0;
  const auto draws = constant_draws(4, 1000, q);
  DesignMatrix one;
  one.values = Eigen::MatrixXd::Constant(1, 1, 0.7);
  const auto row = posterior_predict(draws, LinkKind::Logit, one, PredictScale::Outcome, seed).front();
  const double mc = std::sqrt(p * (1 - p) / 4000.0);
  const bool pattern = std::abs(row.estimate - p) < 4 * mc &&
                       std::abs(row.est_error - std::sqrt(row.estimate * (1 - row.estimate))) < 1e-9 &&
                       std::abs(row.est_error - std::sqrt(p * (1 - p))) < 0.01 && row.q2_5 == 0.0 &&
                       row.q97_5 == 1.0;
  r.measured = worst;
  r.passed = worst <= 0.0 && pattern;
  std::ostringstream d;
  d << "max est_error^2 - bound " << std::setprecision(3) << worst << "; p=0.257 row: " << std::fixed
    << std::setprecision(3) << row.estimate << " " << row.est_error << " " << row.q2_5 << " " << row.q97_5;
  r.detail = d.str();
  return r;
}

// ---------------------------------------------------------------------------
// 9: identical fits across repeats and thread counts

inline std::string run_artifacts(const fs::path& dir) {
  std::string all;
  for (const char* name : {"draws.chains", "config.json", "encoding.json", "balance.json", "holdout.csv",
                           "summary.txt", "summary.json"}) {
    all += std::string(name) + "\n" + read_file((dir / name).string());
  }
  return all;
}

inline CheckResult check_determinism(std::uint64_t seed, const fs::path& workdir) {
  CheckResult r{9, "end-to-end determinism", true, 0.0, 0.0, ""};
  fs::create_directories(workdir);
  const fs::path data = workdir / "surrogate.csv";
  {
    std::ostringstream s;
    write_dataset(synthetic_bank(1500, seed), s);
    write_text_file(data, s.str());
  }
  RunConfig c;
  c.data = data.string();
  c.subsample = 1000;
  c.sampler.seed = seed;
  c.sampler.n_warmup = 150;
  c.sampler.n_draws = 150;
  std::vector<std::string> outputs;
  const unsigned thread_counts[] = {1, 1, 2, 4};
  int run = 0;
  for (unsigned t : thread_counts) {
    c.out = (workdir / ("run" + std::to_string(run++))).string();
    std::ostringstream sink;
    cmd_fit(c, sink, t);
    // config.json records the output directory, which legitimately differs
    RunConfig same = c;
    same.out = "run";
    write_text_file(fs::path(c.out) / "config.json", emit_config(same));
    outputs.push_back(run_artifacts(c.out));
  }
  int differing = 0;
  for (const auto& o : outputs) differing += o != outputs.front() ? 1 : 0;
  r.measured = differing;
  r.passed = differing == 0;
  r.detail = std::to_string(outputs.size()) + " runs with 1, 1, 2, 4 threads; " + std::to_string(differing) +
             " differ from the first";
  return r;
}

// ---------------------------------------------------------------------------
// 5-7: the real bank-marketing pipeline (needs the data file)

struct ExpectedSign {
  const char* name;
  int sign;
};

inline constexpr ExpectedSign kExpectedSigns[] = {
    {"default", -1}, {"contact", -1}, {"month", -1},    {"nr.employed", -1},
    {"age", 1},      {"marital", 1},  {"education", 1}, {"duration", 1},
};

struct BankFits {
  PosteriorDraws logit, probit;
  std::vector<ParamSummary> logit_summary, probit_summary;
  LooComparison comparison;
};

/// Fits both links on the balanced subsample with default priors and compares them.
inline BankFits fit_bank_models(const std::string& data_path, std::uint64_t seed, unsigned threads,
                                  std::size_t subsample = 10000) {
  RunConfig c;
  c.data = data_path;
  c.subsample = subsample;
  c.holdout = 0;
  c.sampler.seed = seed;
  const TrainingData t = prepare_training(c);
  const auto names = parameter_names(t.encoded.design.meta);
  BankFits f;
  std::vector<std::pair<std::string, LooResult>> loos;
  for (LinkKind link : {LinkKind::Logit, LinkKind::Probit}) {
    const ModelSpec model(link, default_priors(link), t.encoded.design.values, t.encoded.target);
    auto draws = sample(model, c.sampler, names, threads);
    loos.emplace_back(std::string(to_string(link)), psis_loo(draws, model));
    (link == LinkKind::Logit ? f.logit : f.probit) = std::move(draws);
  }
  f.logit_summary = summarize(f.logit);
  f.probit_summary = summarize(f.probit);
  f.comparison = compare(loos);
  return f;
}

inline std::vector<CheckResult> check_bank_claims(const BankFits& f) {
  std::vector<CheckResult> out;

  CheckResult conv{5, "Rhat within 0.01 of 1.00 for both links", true, 0.0, 0.01, ""};
  for (const auto* rows : {&f.logit_summary, &f.probit_summary}) {
    for (const auto& row : *rows) {
      conv.measured = std::max(conv.measured, row.rhat ? std::abs(*row.rhat - 1.0) : INFINITY);
    }
  }
  conv.passed = conv.measured <= conv.threshold;
  conv.detail = "max |Rhat - 1| over " + std::to_string(f.logit_summary.size() + f.probit_summary.size()) +
                " parameters; divergences logit " + std::to_string(f.logit.total_divergences()) + ", probit " +
                std::to_string(f.probit.total_divergences());
  out.push_back(conv);

  CheckResult cmp{6, "logit preferred, probit elpd_diff < -2 se_diff", true, 0.0, -2.0, ""};
  const auto& rows = f.comparison;
  const bool logit_first = rows.size() == 2 && rows[0].model == "logit" && rows[0].elpd_diff == 0.0 &&
                           rows[0].se_diff == 0.0;
  const double z = rows.size() == 2 && rows[1].se_diff > 0 ? rows[1].elpd_diff / rows[1].se_diff : 0.0;
  cmp.measured = logit_first ? z : 0.0;
  cmp.passed = logit_first && z < -2.0;
  std::ostringstream d;
  d << "order " << (rows.empty() ? "" : rows[0].model) << ", " << (rows.size() > 1 ? rows[1].model : "")
    << "; elpd_diff " << std::fixed << std::setprecision(1) << (rows.size() > 1 ? rows[1].elpd_diff : 0.0)
    << ", se_diff " << (rows.size() > 1 ? rows[1].se_diff : 0.0);
  cmp.detail = d.str();
  out.push_back(cmp);

  CheckResult sign{7, "logit coefficient signs", true, 0.0, 7.0, ""};
  int agree = 0;
  std::string misses;
  for (const auto& pp : kExpectedSigns) {
    const auto it = std::find_if(f.logit_summary.begin(), f.logit_summary.end(),
                                 [&](const ParamSummary& s) { return s.name == pp.name; });
    if (it == f.logit_summary.end()) continue;
    const bool match = (it->estimate > 0 ? 1 : -1) == pp.sign;
    const bool ci_excludes_zero = it->ci_lower > 0 || it->ci_upper < 0;
    agree += match ? 1 : 0;
    if (!match || !ci_excludes_zero) {
      std::ostringstream m;
      m << " " << pp.name << (match ? "(sign ok, CI spans 0)" : "(flipped)");
      misses += m.str();
    }
  }
  sign.measured = agree;
  sign.passed = agree >= 7;
  sign.detail = std::to_string(agree) + "/8 agree" + (misses.empty() ? "" : ";" + misses);
  out.push_back(sign);
  return out;
}

// ---------------------------------------------------------------------------

/// Checks 1-4, 8 and 9. Prints one line per check; returns the results.
inline std::vector<CheckResult> run_verify(std::uint64_t seed, unsigned threads, std::ostream& out,
                                           const fs::path& workdir) {
  std::vector<std::function<CheckResult()>> checks = {
      [&] { return check_gradients(seed); },
      [&] { return check_sampler_vs_grid(seed, threads); },
      [&] { return check_psis_vs_exact(seed, threads); },
      [&] { return check_diagnostic_calibration(seed); },
      [&] { return check_prediction_contract(seed); },
      [&] { return check_determinism(seed, workdir); },
  };
  std::vector<CheckResult> results;
  for (auto& check : checks) {
    results.push_back(check());
    out << format_check(results.back()) << std::endl;
  }
  return results;
}

inline nlohmann::json check_json(const CheckResult& r) {
  return {{"id", r.id},
          {"name", r.name},
          {"passed", r.passed},
          {"measured", std::isfinite(r.measured) ? nlohmann::json(r.measured) : nlohmann::json(nullptr)},
          {"threshold", r.threshold},
          {"detail", r.detail}};
}

inline int cmd_verify(std::uint64_t seed, unsigned threads, std::ostream& out,
                      OutputFormat format = OutputFormat::Text) {
  const fs::path workdir = fs::temp_directory_path() / ("bayesbin-verify-" + std::to_string(seed));
  std::ostringstream quiet;
  std::ostream& lines = wants_text(format) ? out : quiet;
  const auto results = run_verify(seed, threads, lines, workdir);
  std::error_code ec;
  fs::remove_all(workdir, ec);
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
  if (wants_text(format)) out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
  if (wants_json(format)) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results) arr.push_back(check_json(r));
    out << nlohmann::json{{"seed", seed}, {"passed", failed == 0}, {"checks", arr}}.dump(2) << '\n';
  }
  return failed == 0 ? 0 : 4;
}

}  // namespace bayesbin
