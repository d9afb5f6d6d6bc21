#pragma once

// Parameter space, compute-time distribution family, compute<->transmit
// coupling, and the power-feasibility predicate shared by every other module.

#include <cmath>
#include <concepts>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoi {

// All scalar design/environment parameters of the power-cycled source.
//   lambda  job arrival rate (>0)
//   T_o     OFF-state dwell time (>=0)
//   tau     packet deadline in the transmission buffer (>=0, <= T_o)
//   p_c     ON-Busy power draw (>1; ON-Idle costs 1, OFF costs 0)
//   C_avg   long-term average power budget (>0)
//   omega1, omega2  objective weights (>=0, not both zero)
struct SystemParams {
  double lambda = 1.0;
  double T_o = 0.0;
  double tau = 0.0;
  double p_c = 10.0;
  double C_avg = 1.0;
  double omega1 = 1.0;
  double omega2 = 0.0;

  SystemParams() = default;
  SystemParams(double lambda_, double T_o_, double tau_, double p_c_,
               double C_avg_, double omega1_ = 1.0, double omega2_ = 0.0);
};

// Invariant violations as human-readable messages; empty means valid.
inline std::vector<std::string> param_issues(const SystemParams& p) {
  std::vector<std::string> out;
  if (!(p.lambda > 0.0)) out.push_back("lambda must be > 0");
  if (!(p.T_o >= 0.0)) out.push_back("T_o must be >= 0");
  if (!(p.tau >= 0.0)) out.push_back("tau must be >= 0");
  if (p.tau > p.T_o) out.push_back("deadline exceeds OFF time (tau > T_o)");
  if (!(p.p_c > 1.0)) out.push_back("p_c must be > 1");
  if (!(p.C_avg > 0.0)) out.push_back("C_avg must be > 0");
  if (!(p.omega1 >= 0.0) || !(p.omega2 >= 0.0))
    out.push_back("objective weights must be >= 0");
  if (!(p.omega1 + p.omega2 > 0.0))
    out.push_back("degenerate objective (omega1 + omega2 == 0)");
  return out;
}

inline SystemParams::SystemParams(double lambda_, double T_o_, double tau_,
                                  double p_c_, double C_avg_, double omega1_,
                                  double omega2_)
    : lambda(lambda_), T_o(T_o_), tau(tau_), p_c(p_c_), C_avg(C_avg_),
      omega1(omega1_), omega2(omega2_) {
  auto issues = param_issues(*this);
  if (!issues.empty()) {
    std::string msg = "invalid SystemParams:";
    for (const auto& s : issues) msg += " " + s + ";";
    throw std::invalid_argument(msg);
  }
}

// Contract every compute-time distribution must satisfy.  The analysis
// module consumes exactly these capabilities: the first two moments, the
// MGF E[e^{-gamma P}] (plus its log for underflow-safe products), the
// tilted first moment E[P e^{-gamma P}]/mgf(gamma), and a sampler.
template <class D>
concept ComputeTimeModel = requires(const D d, double gamma,
                                    std::mt19937_64& rng) {
  { d.mean() } -> std::convertible_to<double>;
  { d.second_moment() } -> std::convertible_to<double>;
  { d.mgf(gamma) } -> std::convertible_to<double>;
  { d.log_mgf(gamma) } -> std::convertible_to<double>;
  { d.tilted_mean(gamma) } -> std::convertible_to<double>;
  { d.sample(rng) } -> std::convertible_to<double>;
};

// Gamma(shape k, rate k/E[P]) processing time; the shipped concrete family.
// Shape may be far below one (k = 0.005 is an operating point).
class GammaComputeTime {
 public:
  GammaComputeTime(double mean_P, double k) : mean_(mean_P), k_(k) {
    if (!(mean_P > 0.0) || !std::isfinite(mean_P))
      throw std::invalid_argument("GammaComputeTime: mean_P must be > 0");
    if (!(k > 0.0) || !std::isfinite(k))
      throw std::invalid_argument("GammaComputeTime: k must be > 0");
  }

  double mean() const { return mean_; }
  double shape() const { return k_; }
  double rate() const { return k_ / mean_; }
  double second_moment() const { return mean_ * mean_ * (1.0 + 1.0 / k_); }

  // log E[e^{-gamma P}] = -k log(1 + gamma E[P]/k)
  double log_mgf(double gamma) const {
    require_nonneg(gamma);
    return -k_ * std::log1p(gamma * mean_ / k_);
  }
  double mgf(double gamma) const { return std::exp(log_mgf(gamma)); }

  // E[P e^{-gamma P}] / mgf(gamma): mean under the exponentially tilted law,
  // again Gamma with the same shape and rate k/E[P] + gamma.
  double tilted_mean(double gamma) const {
    require_nonneg(gamma);
    return mean_ / (1.0 + gamma * mean_ / k_);
  }

  template <class URBG>
  double sample(URBG& rng) const {
    std::gamma_distribution<double> dist(k_, mean_ / k_);
    return dist(rng);
  }

 private:
  static void require_nonneg(double gamma) {
    if (!(gamma >= 0.0))
      throw std::domain_error("MGF argument must be >= 0");
  }
  double mean_;
  double k_;
};

static_assert(ComputeTimeModel<GammaComputeTime>);

// Gamma family with fixed shape; the optimizer re-instantiates the mean.
struct GammaFamily {
  double k = 0.1;
  GammaComputeTime with_mean(double mean_P) const {
    return GammaComputeTime(mean_P, k);
  }
};

// Mean transmission time as a monotone non-increasing function of the mean
// compute time: g(E[P]) = B0 e^{-alpha E[P]}.
struct CouplingModel {
  double B0 = 10.0;
  double alpha = 1.0;
  double mean_transmission(double mean_P) const {
    return B0 * std::exp(-alpha * mean_P);
  }
};

inline std::vector<std::string> coupling_issues(const CouplingModel& c) {
  std::vector<std::string> out;
  if (!(c.B0 > 0.0)) out.push_back("B0 must be > 0");
  if (!(c.alpha >= 0.0)) out.push_back("alpha must be >= 0");
  return out;
}

// Service rate mu = 1/g(E[P]) = e^{alpha E[P]} / B0.
inline double transmission_rate(const CouplingModel& c, double mean_P) {
  if (!(mean_P > 0.0))
    throw std::invalid_argument("transmission_rate: mean_P must be > 0");
  return std::exp(c.alpha * mean_P) / c.B0;
}

// Long-run average power of the compute server: a renewal cycle spends
// 1/lambda at cost 1 (ON-Idle), E[P] at cost p_c (ON-Busy), T_o at cost 0.
inline double average_power(const SystemParams& p, double mean_P) {
  return (1.0 / p.lambda + p.p_c * mean_P) / (p.T_o + 1.0 / p.lambda + mean_P);
}

// Power budget as a linear constraint on E[P]:
//   (p_c - C_avg) E[P] <= C_avg T_o + (C_avg - 1)/lambda.
struct Feasibility {
  enum class Kind { bounded, unbounded, infeasible };
  Kind kind = Kind::infeasible;
  // Supremum of feasible E[P]; meaningful only when kind == bounded.
  double max_mean_P = std::numeric_limits<double>::quiet_NaN();

  bool bounded() const { return kind == Kind::bounded; }
  bool unbounded() const { return kind == Kind::unbounded; }
  bool infeasible() const { return kind == Kind::infeasible; }
};

inline Feasibility max_feasible_mean_compute(const SystemParams& p) {
  const double rhs = p.C_avg * p.T_o + (p.C_avg - 1.0) / p.lambda;
  if (p.p_c <= p.C_avg) return {Feasibility::Kind::unbounded, std::numeric_limits<double>::infinity()};
  if (rhs < 0.0) return {Feasibility::Kind::infeasible, std::numeric_limits<double>::quiet_NaN()};
  return {Feasibility::Kind::bounded, rhs / (p.p_c - p.C_avg)};
}

// Aggregates every invariant check into a single report; never throws.
template <ComputeTimeModel D>
std::vector<std::string> validate(const SystemParams& p, const D& compute,
                                  const CouplingModel& coupling) {
  std::vector<std::string> out = param_issues(p);
  for (auto& s : coupling_issues(coupling)) out.push_back(s);
  if (!(compute.mean() > 0.0)) out.push_back("mean compute time must be > 0");
  const Feasibility f = max_feasible_mean_compute(p);
  if (f.infeasible()) {
    out.push_back("power budget infeasible for every mean compute time");
  } else if (f.bounded() && compute.mean() > f.max_mean_P * (1.0 + 1e-12)) {
    out.push_back("mean compute time exceeds power budget");
  }
  return out;
}

}  // namespace aoi
