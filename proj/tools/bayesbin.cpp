// bayesbin: fit, diagnose, compare, predict, verify.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bayesbin.hpp"

namespace {

using namespace bayesbin;

struct FitFlags {
  std::string config_path;
  std::string data, delimiter, balance, link, format, out, scale;
  std::size_t subsample = 0, holdout = 0, chains = 0, warmup = 0, draws = 0;
  std::uint64_t seed = 0;
  double target_accept = 0.0;
  std::vector<double> prior_intercept, prior_slope;
  bool no_standardize = false;
  unsigned threads = 0;
};

char one_char(const std::string& s, const char* what) {
  if (s == "\\t" || s == "tab") return '\t';
  if (s.size() != 1) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be a single character");
  return s[0];
}

// defaults < --config file < explicit flags
RunConfig resolve(const CLI::App& cmd, const FitFlags& f) {
  RunConfig c;
  if (!f.config_path.empty()) c = parse_config(read_file(f.config_path));
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--data")) c.data = f.data;
  if (given("--delimiter")) c.delimiter = one_char(f.delimiter, "delimiter");
  if (given("--subsample")) c.subsample = f.subsample;
  if (given("--balance")) c.balance = parse_balance_order(f.balance);
  if (given("--holdout")) c.holdout = f.holdout;
  if (given("--link")) c.link = parse_link(f.link);
  if (given("--chains")) c.sampler.n_chains = f.chains;
  if (given("--warmup")) c.sampler.n_warmup = f.warmup;
  if (given("--draws")) c.sampler.n_draws = f.draws;
  if (given("--seed")) c.sampler.seed = f.seed;
  if (given("--target-accept")) c.sampler.target_accept = f.target_accept;
  if (given("--no-standardize")) c.standardize = false;
  if (given("--format")) c.format = parse_format(f.format);
  if (given("--out")) c.out = f.out;
  if (given("--scale")) c.scale = parse_scale(f.scale);
  if (given("--prior-intercept") || given("--prior-slope")) {
    PriorSpec p = c.effective_prior();
    if (given("--prior-intercept")) {
      p.intercept_mean = f.prior_intercept[0];
      p.intercept_sd = f.prior_intercept[1];
    }
    if (given("--prior-slope")) {
      p.slope_mean = f.prior_slope[0];
      p.slope_sd = f.prior_slope[1];
    }
    c.prior = p;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian logit/probit regression with NUTS, PSIS-LOO and posterior prediction"};
  app.require_subcommand(1);

  FitFlags ff;
  auto* fit = app.add_subcommand("fit", "Fit a model and write a run directory");
  fit->add_option("--config", ff.config_path, "JSON run config; flags override it");
  fit->add_option("--data", ff.data, "Delimited data file with the 21 bank-marketing columns");
  fit->add_option("--delimiter", ff.delimiter, "Field delimiter (default ;)");
  fit->add_option("--subsample", ff.subsample, "Rows to subsample, 0 for all (default 10000)");
  fit->add_option("--balance", ff.balance, "Oversampling order: after, before, off (default after)")
      ->check(CLI::IsMember({"after", "before", "off"}));
  fit->add_option("--holdout", ff.holdout, "Rows held out for prediction (default 3)");
  fit->add_option("--link", ff.link, "logit or probit (default logit)")->check(CLI::IsMember({"logit", "probit"}));
  fit->add_option("--prior-intercept", ff.prior_intercept, "Intercept prior MEAN SD")->expected(2);
  fit->add_option("--prior-slope", ff.prior_slope, "Slope prior MEAN SD")->expected(2);
  fit->add_option("--chains", ff.chains, "Chains (default 4)");
  fit->add_option("--warmup", ff.warmup, "Warmup iterations per chain (default 1000)");
  fit->add_option("--draws", ff.draws, "Kept draws per chain (default 1000)");
  fit->add_option("--seed", ff.seed, "Seed for subsampling, balancing and sampling (default 1)");
  fit->add_option("--target-accept", ff.target_accept, "Target acceptance statistic (default 0.8)");
  fit->add_flag("--no-standardize", ff.no_standardize, "Keep raw codes and units");
  fit->add_option("--scale", ff.scale, "Default prediction scale recorded in the config")
      ->check(CLI::IsMember({"outcome", "probability"}));
  fit->add_option("--format", ff.format, "text, json or both (default both)")
      ->check(CLI::IsMember({"text", "json", "both"}));
  fit->add_option("--out", ff.out, "Run directory (default run)");
  fit->add_option("--threads", ff.threads, "Worker threads, 0 = one per core; never changes results");

  std::string diag_path, diag_format = "text";
  auto* diagnose = app.add_subcommand("diagnose", "Summary table from a stored chain file");
  diagnose->add_option("chains", diag_path, "Chain file")->required();
  diagnose->add_option("--format", diag_format, "text, json or both")->check(CLI::IsMember({"text", "json", "both"}));

  std::vector<std::string> cmp_paths;
  std::string cmp_data, cmp_format = "text";
  auto* comp = app.add_subcommand("compare", "PSIS-LOO comparison of fits on the same data");
  comp->add_option("chains", cmp_paths, "Two or more chain files")->required();
  comp->add_option("--data", cmp_data, "Data file, if it moved since the fits");
  comp->add_option("--format", cmp_format, "text, json or both")->check(CLI::IsMember({"text", "json", "both"}));

  std::string pred_chain, pred_data, pred_scale = "outcome", pred_delim, pred_format = "text";
  auto* predict = app.add_subcommand("predict", "Posterior predictive summaries for new rows");
  predict->add_option("chains", pred_chain, "Chain file")->required();
  predict->add_option("--data", pred_data, "New rows, same layout as the training file")->required();
  predict->add_option("--scale", pred_scale, "outcome or probability")
      ->check(CLI::IsMember({"outcome", "probability"}));
  predict->add_option("--delimiter", pred_delim, "Field delimiter (default: the fit's)");
  predict->add_option("--format", pred_format, "text, json or both")->check(CLI::IsMember({"text", "json", "both"}));

  std::uint64_t verify_seed = 1;
  unsigned verify_threads = 0;
  auto* verify = app.add_subcommand("verify", "Run the reference self-checks");
  verify->add_option("--seed", verify_seed, "Seed (default 1)");
  verify->add_option("--threads", verify_threads, "Worker threads, 0 = one per core");
  std::string verify_format = "text";
  verify->add_option("--format", verify_format, "text, json or both")->check(CLI::IsMember({"text", "json", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(resolve(*fit, ff), std::cout, ff.threads);
    if (diagnose->parsed()) return cmd_diagnose(diag_path, parse_format(diag_format), std::cout);
    if (comp->parsed()) return cmd_compare(cmp_paths, cmp_data, parse_format(cmp_format), std::cout);
    if (predict->parsed()) {
      std::optional<char> delim;
      if (!pred_delim.empty()) delim = one_char(pred_delim, "delimiter");
      return cmd_predict(pred_chain, pred_data, parse_scale(pred_scale), delim, parse_format(pred_format),
                         std::cout);
    }
    if (verify->parsed()) return cmd_verify(verify_seed, verify_threads, std::cout, parse_format(verify_format));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
