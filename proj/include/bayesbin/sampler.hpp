#pragma once

// No-U-Turn Hamiltonian Monte Carlo with multinomial trajectory sampling,
// dual-averaging step size adaptation and a windowed diagonal metric. Chains
// run independently, each on its own seeded stream, so results do not depend
// on how many threads run them.
//
// REFERENCE: Hoffman, M.D. and Gelman, A., 2014. The No-U-Turn sampler:
// adaptively setting path lengths in Hamiltonian Monte Carlo. JMLR 15.
// Betancourt, M., 2017. A conceptual introduction to Hamiltonian Monte Carlo.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "encoding.hpp"
#include "error.hpp"
#include "model.hpp"
#include "random.hpp"

namespace bayesbin {

/// Anything with a dimension and a log density that also fills its gradient.
template <typename T>
concept LogDensity = requires(const T& t, const Eigen::VectorXd& q, Eigen::VectorXd& g) {
  { t.dim() } -> std::convertible_to<Eigen::Index>;
  { t.log_density_gradient(q, g) } -> std::convertible_to<double>;
};

struct SamplerConfig {
  std::size_t n_chains = 4;
  std::size_t n_warmup = 1000;
  std::size_t n_draws = 1000;
  std::uint64_t seed = 1;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  double init_radius = 2.0;

  void validate() const {
    if (n_chains < 1) throw Error(ErrorCode::InvalidArgument, "n_chains must be >= 1");
    if (n_draws < 1) throw Error(ErrorCode::InvalidArgument, "n_draws must be >= 1");
    if (!(target_accept > 0.0 && target_accept < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "target_accept must lie in (0, 1)");
    }
    if (max_tree_depth < 1 || max_tree_depth > 15) {
      throw Error(ErrorCode::InvalidArgument, "max_tree_depth must lie in [1, 15]");
    }
    if (!(init_radius >= 0.0) || !std::isfinite(init_radius)) {
      throw Error(ErrorCode::InvalidArgument, "init_radius must be finite and >= 0");
    }
  }

  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SamplerConfig, n_chains, n_warmup, n_draws, seed, target_accept,
                                   max_tree_depth, init_radius)

/// Post-warmup draws, chain-major: values[(chain * n_draws + iter) * n_params + param].
struct PosteriorDraws {
  std::size_t n_chains = 0;
  std::size_t n_draws = 0;
  std::size_t n_params = 0;
  std::vector<double> values;
  std::vector<std::string> param_names;
  std::vector<std::size_t> divergence_count;
  std::vector<std::vector<std::size_t>> divergent_iterations;
  std::vector<double> step_size;
  std::vector<double> accept_rate;
  std::vector<std::vector<double>> inv_metric;
  std::uint64_t seed = 0;
  std::optional<EncodingMeta> encoding;  // set when draws come from an encoded dataset

  double operator()(std::size_t chain, std::size_t iter, std::size_t param) const {
    return values[(chain * n_draws + iter) * n_params + param];
  }

  std::size_t total_draws() const { return n_chains * n_draws; }

  /// One vector per chain for parameter `param`.
  std::vector<std::vector<double>> chains_of(std::size_t param) const {
    std::vector<std::vector<double>> out(n_chains, std::vector<double>(n_draws));
    for (std::size_t c = 0; c < n_chains; ++c) {
      for (std::size_t i = 0; i < n_draws; ++i) out[c][i] = (*this)(c, i, param);
    }
    return out;
  }

  /// Pooled draw `s` (chain-major order) as a coefficient vector.
  Eigen::VectorXd draw(std::size_t s) const {
    Eigen::VectorXd q(static_cast<Eigen::Index>(n_params));
    for (std::size_t p = 0; p < n_params; ++p) q(static_cast<Eigen::Index>(p)) = values[s * n_params + p];
    return q;
  }

  std::size_t total_divergences() const {
    std::size_t n = 0;
    for (auto d : divergence_count) n += d;
    return n;
  }

  /// More than 1% of post-warmup transitions diverged.
  bool divergence_flag() const {
    return total_draws() > 0 && 100 * total_divergences() > total_draws();
  }
};

namespace detail {

/// Nesterov dual averaging of log step size toward a target acceptance statistic.
class DualAverage {
 public:
  explicit DualAverage(double delta, double gamma = 0.05, double t0 = 10.0, double kappa = 0.75)
      : delta_(delta), gamma_(gamma), t0_(t0), kappa_(kappa) {}

  void restart(double step_size) {
    mu_ = std::log(10.0 * step_size);
    counter_ = 0.0;
    s_bar_ = 0.0;
    x_bar_ = 0.0;
  }

  /// Returns the next step size.
  double learn(double accept_stat) {
    counter_ += 1.0;
    accept_stat = std::min(accept_stat, 1.0);
    const double eta = 1.0 / (counter_ + t0_);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept_stat);
    const double x = mu_ - s_bar_ * std::sqrt(counter_) / gamma_;
    const double x_eta = std::pow(counter_, -kappa_);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    return std::exp(x);
  }

  double final_step_size() const { return std::exp(x_bar_); }

 private:
  double delta_, gamma_, t0_, kappa_;
  double mu_ = 0.0, counter_ = 0.0, s_bar_ = 0.0, x_bar_ = 0.0;
};

/// Warmup schedule: an initial buffer, doubling metric windows, a terminal buffer.
class WindowedAdaptation {
 public:
  explicit WindowedAdaptation(std::size_t n_warmup) : n_warmup_(n_warmup) {
    if (n_warmup < 20) {
      metric_ = false;
      return;
    }
    if (init_buffer_ + base_window_ + term_buffer_ > n_warmup) {
      init_buffer_ = static_cast<std::size_t>(0.15 * static_cast<double>(n_warmup));
      term_buffer_ = static_cast<std::size_t>(0.1 * static_cast<double>(n_warmup));
      base_window_ = n_warmup - (init_buffer_ + term_buffer_);
    }
    window_size_ = base_window_;
    next_window_ = init_buffer_ + window_size_ - 1;
  }

  bool adapts_metric() const { return metric_; }

  bool in_metric_window() const {
    return metric_ && counter_ >= init_buffer_ && counter_ < n_warmup_ - term_buffer_ && counter_ != n_warmup_;
  }

  bool end_of_window() const { return metric_ && counter_ == next_window_ && counter_ != n_warmup_; }

  void advance() {
    if (end_of_window()) compute_next_window();
    ++counter_;
  }

 private:
  void compute_next_window() {
    if (next_window_ == n_warmup_ - term_buffer_ - 1) return;
    window_size_ *= 2;
    next_window_ = counter_ + window_size_;
    if (next_window_ != n_warmup_ - term_buffer_ - 1) {
      const std::size_t boundary = next_window_ + 2 * window_size_;
      if (boundary >= n_warmup_ - term_buffer_) next_window_ = n_warmup_ - term_buffer_ - 1;
    }
  }

  std::size_t n_warmup_;
  std::size_t init_buffer_ = 75;
  std::size_t term_buffer_ = 50;
  std::size_t base_window_ = 25;
  std::size_t window_size_ = 25;
  std::size_t next_window_ = 0;
  std::size_t counter_ = 0;
  bool metric_ = true;
};

/// Welford running variance, regularized toward 1e-3 when windows are short.
class VarianceEstimator {
 public:
  explicit VarianceEstimator(Eigen::Index dim) : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

  void add(const Eigen::VectorXd& q) {
    n_ += 1.0;
    const Eigen::VectorXd delta = q - mean_;
    mean_ += delta / n_;
    m2_ += delta.cwiseProduct(q - mean_);
  }

  Eigen::VectorXd regularized() const {
    Eigen::VectorXd var = m2_ / (n_ - 1.0);
    return (n_ / (n_ + 5.0)) * var.array() + 1e-3 * (5.0 / (n_ + 5.0));
  }

  void reset() {
    n_ = 0.0;
    mean_.setZero();
    m2_.setZero();
  }

 private:
  double n_ = 0.0;
  Eigen::VectorXd mean_, m2_;
};

struct PhasePoint {
  Eigen::VectorXd q, p, grad;
  double logp = 0.0;
};

inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

template <LogDensity Target>
class NutsChain {
 public:
  NutsChain(const Target& target, const SamplerConfig& config, Engine& eng)
      : target_(target), config_(config), eng_(eng), inv_metric_(Eigen::VectorXd::Ones(target.dim())) {}

  void set_point(const Eigen::VectorXd& q) {
    z_.q = q;
    z_.logp = target_.log_density_gradient(z_.q, z_.grad);
    z_.p = Eigen::VectorXd::Zero(q.size());
  }

  const PhasePoint& point() const { return z_; }
  double step_size() const { return step_size_; }
  void set_step_size(double e) { step_size_ = e; }
  const Eigen::VectorXd& inv_metric() const { return inv_metric_; }
  void set_inv_metric(Eigen::VectorXd m) { inv_metric_ = std::move(m); }

  /// Doubles or halves the step size until one leapfrog step crosses an
  /// acceptance probability of 0.8.
  void init_step_size() {
    const PhasePoint start = z_;
    sample_momentum();
    double h0 = hamiltonian(z_);
    leapfrog(z_, step_size_);
    double delta_h = h0 - hamiltonian(z_);
    const int direction = delta_h > std::log(0.8) ? 1 : -1;
    while (true) {
      z_ = start;
      sample_momentum();
      h0 = hamiltonian(z_);
      leapfrog(z_, step_size_);
      delta_h = h0 - hamiltonian(z_);
      if (direction == 1 && !(delta_h > std::log(0.8))) break;
      if (direction == -1 && !(delta_h < std::log(0.8))) break;
      step_size_ = direction == 1 ? 2.0 * step_size_ : 0.5 * step_size_;
      if (step_size_ > 1e7) {
        throw Error(ErrorCode::AdaptationFailure, "step size diverged upward; posterior may be improper");
      }
      if (!(step_size_ > 1e-14)) {
        throw Error(ErrorCode::AdaptationFailure, "step size collapsed below 1e-14");
      }
    }
    z_ = start;
  }

  struct Transition {
    double accept_stat = 0.0;
    bool divergent = false;
    int depth = 0;
  };

  Transition transition() {
    sample_momentum();
    divergent_ = false;
    const double h0 = hamiltonian(z_);

    PhasePoint z_fwd = z_, z_bck = z_, z_sample = z_, z_propose = z_;
    Eigen::VectorXd p_fwd_fwd = z_.p, p_fwd_bck = z_.p, p_bck_fwd = z_.p, p_bck_bck = z_.p;
    Eigen::VectorXd p_sharp_fwd_fwd = sharp(z_.p), p_sharp_fwd_bck = p_sharp_fwd_fwd;
    Eigen::VectorXd p_sharp_bck_fwd = p_sharp_fwd_fwd, p_sharp_bck_bck = p_sharp_fwd_fwd;
    Eigen::VectorXd rho = z_.p;
    double log_sum_weight = 0.0;
    std::size_t n_leapfrog = 0;
    double sum_metro_prob = 0.0;
    int depth = 0;
    const auto dim = z_.q.size();

    while (depth < config_.max_tree_depth) {
      Eigen::VectorXd rho_fwd = Eigen::VectorXd::Zero(dim), rho_bck = Eigen::VectorXd::Zero(dim);
      bool valid = false;
      double log_sum_weight_subtree = -std::numeric_limits<double>::infinity();

      if (uniform01(eng_) > 0.5) {
        z_ = z_fwd;
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        p_sharp_bck_fwd = p_sharp_fwd_bck;
        valid = build_tree(depth, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck, p_fwd_fwd, h0,
                           1.0, n_leapfrog, log_sum_weight_subtree, sum_metro_prob);
        z_fwd = z_;
      } else {
        z_ = z_bck;
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        p_sharp_fwd_bck = p_sharp_bck_fwd;
        valid = build_tree(depth, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd, p_bck_bck, h0,
                           -1.0, n_leapfrog, log_sum_weight_subtree, sum_metro_prob);
        z_bck = z_;
      }
      if (!valid) break;
      ++depth;

      if (log_sum_weight_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (uniform01(eng_) < std::exp(log_sum_weight_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

      rho = rho_bck + rho_fwd;
      bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
      persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, Eigen::VectorXd(rho_bck + p_fwd_bck));
      persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, Eigen::VectorXd(rho_fwd + p_bck_fwd));
      if (!persist) break;
    }

    z_ = z_sample;
    Transition t;
    t.accept_stat = n_leapfrog > 0 ? sum_metro_prob / static_cast<double>(n_leapfrog) : 0.0;
    t.divergent = divergent_;
    t.depth = depth;
    return t;
  }

 private:
  static constexpr double kMaxDeltaH = 1000.0;

  Eigen::VectorXd sharp(const Eigen::VectorXd& p) const { return inv_metric_.cwiseProduct(p); }

  static bool no_u_turn(const Eigen::VectorXd& p_sharp_minus, const Eigen::VectorXd& p_sharp_plus,
                        const Eigen::VectorXd& rho) {
    return p_sharp_plus.dot(rho) > 0.0 && p_sharp_minus.dot(rho) > 0.0;
  }

  void sample_momentum() {
    for (Eigen::Index i = 0; i < z_.p.size(); ++i) z_.p(i) = standard_normal(eng_) / std::sqrt(inv_metric_(i));
  }

  /// Non-finite energies count as +infinity.
  double hamiltonian(const PhasePoint& z) const {
    const double h = -z.logp + 0.5 * z.p.dot(inv_metric_.cwiseProduct(z.p));
    return std::isfinite(h) ? h : std::numeric_limits<double>::infinity();
  }

  void leapfrog(PhasePoint& z, double eps) const {
    z.p += 0.5 * eps * z.grad;
    z.q += eps * inv_metric_.cwiseProduct(z.p);
    z.logp = target_.log_density_gradient(z.q, z.grad);
    z.p += 0.5 * eps * z.grad;
  }

  bool build_tree(int depth, PhasePoint& z_propose, Eigen::VectorXd& p_sharp_beg, Eigen::VectorXd& p_sharp_end,
                  Eigen::VectorXd& rho, Eigen::VectorXd& p_beg, Eigen::VectorXd& p_end, double h0, double sign,
                  std::size_t& n_leapfrog, double& log_sum_weight, double& sum_metro_prob) {
    if (depth == 0) {
      leapfrog(z_, sign * step_size_);
      ++n_leapfrog;
      const double h = hamiltonian(z_);
      if (h - h0 > kMaxDeltaH) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro_prob += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
      z_propose = z_;
      p_sharp_beg = sharp(z_.p);
      p_sharp_end = p_sharp_beg;
      rho += z_.p;
      p_beg = z_.p;
      p_end = p_beg;
      return !divergent_;
    }

    const auto dim = z_.q.size();
    double log_sum_weight_init = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd p_init_end(dim), p_sharp_init_end(dim), rho_init = Eigen::VectorXd::Zero(dim);
    if (!build_tree(depth - 1, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end, h0, sign,
                    n_leapfrog, log_sum_weight_init, sum_metro_prob)) {
      return false;
    }

    PhasePoint z_propose_final = z_;
    double log_sum_weight_final = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd p_final_beg(dim), p_sharp_final_beg(dim), rho_final = Eigen::VectorXd::Zero(dim);
    if (!build_tree(depth - 1, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg, p_end, h0,
                    sign, n_leapfrog, log_sum_weight_final, sum_metro_prob)) {
      return false;
    }

    const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
    if (log_sum_weight_final > log_sum_weight_subtree) {
      z_propose = z_propose_final;
    } else if (uniform01(eng_) < std::exp(log_sum_weight_final - log_sum_weight_subtree)) {
      z_propose = z_propose_final;
    }

    const Eigen::VectorXd rho_subtree = rho_init + rho_final;
    bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
    persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, Eigen::VectorXd(rho_init + p_final_beg));
    persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, Eigen::VectorXd(rho_final + p_init_end));
    rho += rho_subtree;
    return persist;
  }

  const Target& target_;
  const SamplerConfig& config_;
  Engine& eng_;
  PhasePoint z_;
  Eigen::VectorXd inv_metric_;
  double step_size_ = 1.0;
  bool divergent_ = false;
};

struct ChainResult {
  Eigen::MatrixXd draws;  // n_draws x dim
  std::vector<std::size_t> divergent_iterations;
  double step_size = 0.0;
  double accept_rate = 0.0;
  Eigen::VectorXd inv_metric;
};

inline bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

/// Uniform start in [-r, r]^dim, redrawn up to 100 times until the log
/// density and gradient are finite.
template <LogDensity Target>
Eigen::VectorXd initial_point(const Target& target, const SamplerConfig& config, Engine& eng) {
  const auto dim = static_cast<Eigen::Index>(target.dim());
  Eigen::VectorXd q(dim), grad(dim);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (Eigen::Index i = 0; i < dim; ++i) q(i) = uniform(eng, -config.init_radius, config.init_radius);
    const double lp = target.log_density_gradient(q, grad);
    if (std::isfinite(lp) && all_finite(grad)) return q;
    if (config.init_radius == 0.0) break;
  }
  throw Error(ErrorCode::NonFiniteGradient, "no finite log density/gradient at initialization after retries");
}

template <LogDensity Target>
ChainResult run_chain(const Target& target, const SamplerConfig& config, std::size_t chain_index) {
  Engine eng = make_engine(config.seed, StreamTag::Chain, chain_index);
  const Eigen::VectorXd q0 = initial_point(target, config, eng);
  const auto dim = static_cast<Eigen::Index>(target.dim());

  NutsChain<Target> chain(target, config, eng);
  chain.set_point(q0);
  chain.init_step_size();

  DualAverage averager(config.target_accept);
  averager.restart(chain.step_size());
  WindowedAdaptation schedule(config.n_warmup);
  VarianceEstimator variance(dim);

  for (std::size_t it = 0; it < config.n_warmup; ++it) {
    const auto t = chain.transition();
    chain.set_step_size(averager.learn(t.accept_stat));
    if (!(chain.step_size() > 1e-14) || !std::isfinite(chain.step_size())) {
      throw Error(ErrorCode::AdaptationFailure, "step size collapsed during warmup of chain " +
                                                    std::to_string(chain_index));
    }
    if (schedule.in_metric_window()) variance.add(chain.point().q);
    if (schedule.end_of_window()) {
      chain.set_inv_metric(variance.regularized());
      variance.reset();
      chain.init_step_size();
      averager.restart(chain.step_size());
    }
    schedule.advance();
  }
  if (config.n_warmup > 0) chain.set_step_size(averager.final_step_size());
  if (!(chain.step_size() > 1e-14) || !std::isfinite(chain.step_size())) {
    throw Error(ErrorCode::AdaptationFailure, "adapted step size of chain " + std::to_string(chain_index) +
                                                  " is not representable");
  }

  ChainResult res;
  res.draws.resize(static_cast<Eigen::Index>(config.n_draws), dim);
  double accept_sum = 0.0;
  for (std::size_t it = 0; it < config.n_draws; ++it) {
    const auto t = chain.transition();
    accept_sum += t.accept_stat;
    if (t.divergent) res.divergent_iterations.push_back(it);
    if (!all_finite(chain.point().q)) {
      throw Error(ErrorCode::NonFiniteGradient, "chain " + std::to_string(chain_index) + " produced a non-finite draw");
    }
    res.draws.row(static_cast<Eigen::Index>(it)) = chain.point().q.transpose();
  }
  res.step_size = chain.step_size();
  res.accept_rate = accept_sum / static_cast<double>(config.n_draws);
  res.inv_metric = chain.inv_metric();
  return res;
}

}  // namespace detail

/// Starting point of chain `chain_index` (its own seeded substream).
template <LogDensity Target>
Eigen::VectorXd initialize_chain(const Target& target, std::size_t chain_index, const SamplerConfig& config) {
  config.validate();
  Engine eng = make_engine(config.seed, StreamTag::Chain, chain_index);
  return detail::initial_point(target, config, eng);
}

inline Coefficients initialize_chain(const ModelSpec& model, std::size_t chain_index, const SamplerConfig& config) {
  return Coefficients::from_flat(initialize_chain<ModelSpec>(model, chain_index, config));
}

/// Runs every chain (concurrently when `threads` != 1; 0 picks the hardware
/// count) and assembles the draws in chain order.
template <LogDensity Target>
PosteriorDraws sample(const Target& target, const SamplerConfig& config, std::vector<std::string> param_names = {},
                      unsigned threads = 0) {
  config.validate();
  const auto dim = static_cast<std::size_t>(target.dim());
  if (param_names.empty()) {
    param_names.push_back("Intercept");
    for (std::size_t j = 1; j < dim; ++j) param_names.push_back("x" + std::to_string(j));
  }
  if (param_names.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(dim) + " parameter names");
  }

  std::vector<detail::ChainResult> results(config.n_chains);
  std::vector<std::exception_ptr> errors(config.n_chains);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t c = first; c < config.n_chains; c += stride) {
      try {
        results[c] = detail::run_chain(target, config, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(threads, config.n_chains);
  if (n_workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(work, w, n_workers);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  PosteriorDraws out;
  out.n_chains = config.n_chains;
  out.n_draws = config.n_draws;
  out.n_params = dim;
  out.param_names = std::move(param_names);
  out.seed = config.seed;
  out.values.reserve(out.n_chains * out.n_draws * dim);
  for (const auto& r : results) {
    for (Eigen::Index i = 0; i < r.draws.rows(); ++i) {
      for (Eigen::Index p = 0; p < r.draws.cols(); ++p) out.values.push_back(r.draws(i, p));
    }
    out.divergence_count.push_back(r.divergent_iterations.size());
    out.divergent_iterations.push_back(r.divergent_iterations);
    out.step_size.push_back(r.step_size);
    out.accept_rate.push_back(r.accept_rate);
    out.inv_metric.emplace_back(r.inv_metric.data(), r.inv_metric.data() + r.inv_metric.size());
  }
  return out;
}

}  // namespace bayesbin
