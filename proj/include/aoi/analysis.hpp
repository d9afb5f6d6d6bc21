#pragma once

// Closed-form evaluation of the stationary transmission-queue state, the
// buffer wait time, the inter-admission/system-time cross moment, and the
// resulting average AoI and average peak AoI.
//
// Conventions used throughout (per admitted packet i):
//   X_i  inter-admission time  = P_{i-1} + T_o + I_i
//   T_i  system time from admission = P_i + W_i + S_i
//   K_i  transmission-server state found at packet i's emission (Idle/Busy)
// The exponential race between the arrival (rate lambda) and the residual
// service (rate mu) makes e^{-mu T_o} M_P(mu) the "service survives one OFF
// +idle+compute cycle" factor; it is always formed in the log domain so very
// large mu*T_o underflows cleanly to zero (the correct limit).

#include <cmath>
#include <stdexcept>

#include <aoi/model.hpp>

namespace aoi {

// Two-state chain over K_i with its stationary law.
struct StationaryState {
  double trans_Id_to_B = 0.0;  // Pr[K_i = B | K_{i-1} = Id]
  double trans_B_to_B = 0.0;   // Pr[K_i = B | K_{i-1} = B]
  double p_B = 0.0;            // stationary Pr[K = B]
  double p_I = 1.0;            // 1 - p_B
};

// Decomposition of the buffer wait W of a packet that found the server busy:
// it stops within the deadline window (residual <= tau) or rides some number
// ntilde of full OFF+idle+compute cycles, terminated by condition (a)
// (cycle overshoots the residual beyond tau) or condition (b) (leftover
// residual lands inside the deadline).
struct WaitTimeTerms {
  double prob_a = 1.0;             // stopping via condition (a)
  double prob_b = 0.0;             // 1 - prob_a
  double p_ntilde_zero = 0.0;      // Pr[ntilde = 0] = 1 - e^{-mu tau}
  double geo_success = 1.0;        // per-cycle stopping prob of ntilde | ntilde > 0
  double mean_M_restricted = 0.0;  // E[residual | residual <= tau]
  double expected_wait = 0.0;      // E[W]
};

// Combined and state-conditioned cross moments E[X T].
struct XtTerms {
  double combined = 0.0;
  double given_Id = 0.0;  // conditioned on K_{i-1} = Id
  double given_B = 0.0;   // conditioned on K_{i-1} = B
};

// Every closed-form output, with intermediate terms retained for auditing.
struct AoIReport {
  double mu = 0.0;            // transmission rate used
  double lambda_tilde = 0.0;  // effective admission rate
  double ex2 = 0.0;           // E[X^2]
  double exT = 0.0;           // E[X T]
  double exT_given_Id = 0.0;
  double exT_given_B = 0.0;
  double avg_aoi = 0.0;
  double peak_numerator = 0.0;   // E[(X+T) 1{i = i*}]
  double prob_min_index = 0.0;   // Pr[i = i*]
  double avg_peak_aoi = 0.0;
  WaitTimeTerms wait;
  StationaryState stationary;
};

namespace detail {

inline void require_deadline(const SystemParams& p) {
  if (p.tau > p.T_o)
    throw std::domain_error("analysis: deadline exceeds OFF time (tau > T_o)");
}

inline void require_rate(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("analysis: mu must be positive and finite");
}

// E[R | R <= tau] for R ~ Exp(mu): 1/mu - tau/(e^{mu tau} - 1).  expm1 keeps
// full precision for any mu*tau > 0; tau = 0 takes the exact limit 0.
inline double truncated_exp_mean(double mu, double tau) {
  if (tau == 0.0) return 0.0;
  return 1.0 / mu - tau / std::expm1(mu * tau);
}

// e^{-mu s} M_P(mu) in the log domain; underflow rounds to 0 (exact limit).
template <ComputeTimeModel D>
double survival_factor(const D& compute, double mu, double s) {
  return std::exp(compute.log_mgf(mu) - mu * s);
}

}  // namespace detail

// Effective admission rate: reciprocal of the mean cycle T_o + 1/lambda + E[P].
inline double effective_rate(const SystemParams& p, double mean_P) {
  return p.lambda / (p.lambda * mean_P + p.lambda * p.T_o + 1.0);
}

// E[X^2] for X = P + T_o + I with I ~ Exp(lambda), P independent.
template <ComputeTimeModel D>
double second_moment_interarrival(const SystemParams& p, const D& compute) {
  const double EP = compute.mean();
  const double L = p.lambda;
  return compute.second_moment() + 2.0 * EP * (1.0 / L + p.T_o) +
         2.0 / (L * L) + p.T_o * p.T_o + 2.0 * p.T_o / L;
}

template <ComputeTimeModel D>
StationaryState busy_probability(const SystemParams& p, const D& compute,
                                 double mu) {
  detail::require_deadline(p);
  detail::require_rate(mu);
  const double L = p.lambda;
  const double A = detail::survival_factor(compute, mu, p.T_o);
  StationaryState s;
  s.trans_Id_to_B = L * A / (L + mu);
  s.trans_B_to_B = (1.0 + p.tau * mu) * s.trans_Id_to_B;
  s.p_B = L * A / (L + mu - L * p.tau * mu * A);
  s.p_I = 1.0 - s.p_B;
  return s;
}

template <ComputeTimeModel D>
WaitTimeTerms expected_wait(const SystemParams& p, const D& compute,
                            double mu) {
  detail::require_deadline(p);
  detail::require_rate(mu);
  const double L = p.lambda;
  const double A = detail::survival_factor(compute, mu, p.T_o);
  const double A_shift = detail::survival_factor(compute, mu, p.T_o - p.tau);
  WaitTimeTerms w;
  w.p_ntilde_zero = -std::expm1(-mu * p.tau);
  w.geo_success = (L + mu - L * A) / (L + mu);
  w.prob_a = (L + mu - L * A_shift) / (L + mu - L * A);
  w.prob_b = 1.0 - w.prob_a;
  w.mean_M_restricted = detail::truncated_exp_mean(mu, p.tau);
  const double emt = 1.0 - w.p_ntilde_zero;  // e^{-mu tau}
  const double cycle = p.T_o + 1.0 / L + compute.mean();
  w.expected_wait = (w.p_ntilde_zero + emt * w.prob_b) * w.mean_M_restricted +
                    emt * cycle / w.geo_success;
  return w;
}

// Cross moment E[X T].  The busy/idle state found by the PREVIOUS packet
// tilts that packet's compute time by e^{-mu P}; the tilted mean
// m1 = E[P e^{-mu P}]/M_P(mu) therefore replaces E[P] inside every term that
// conditions on K_{i-1} = B, and the idle-conditioned mean is the
// complementary mixture component (E[P] - p_B m1)/p_I.
template <ComputeTimeModel D>
XtTerms expected_xt(const SystemParams& p, const D& compute, double mu) {
  const StationaryState st = busy_probability(p, compute, mu);
  const WaitTimeTerms w = expected_wait(p, compute, mu);
  const double L = p.lambda;
  const double EP = compute.mean();
  const double m1 = compute.tilted_mean(mu);
  const double q = st.trans_Id_to_B;  // (lambda/(lambda+mu)) e^{-mu T_o} M
  const double EW = w.expected_wait;
  const double mt = mu * p.tau;
  const double head = p.T_o + 1.0 / (L + mu);

  XtTerms xt;
  const double base =
      EP * EP + (1.0 / L + 1.0 / mu + p.T_o) * EP + (1.0 / L + p.T_o) / mu;
  xt.combined =
      base + q * EW * ((1.0 + mt * st.p_B) * head + EP + mt * st.p_B * m1);

  const double EP_id = (EP - st.p_B * m1) / st.p_I;
  xt.given_Id = (EP_id + p.T_o + 1.0 / L) * (EP + 1.0 / mu) +
                q * EW * (head + EP_id);
  xt.given_B = (m1 + p.T_o + 1.0 / L) * (EP + 1.0 / mu) +
               (1.0 + mt) * q * EW * (head + m1);
  return xt;
}

// Fills the complete report: stationary state, wait terms, moments, average
// AoI = lambda_tilde (E[XT] + E[X^2]/2), and average peak AoI as the ratio
// E[(X+T) 1{i=i*}] / Pr[i=i*], where i* marks the packet whose delivery
// resets the age (the freshest one in its service period).
template <ComputeTimeModel D>
AoIReport evaluate(const SystemParams& p, const D& compute,
                   const CouplingModel& coupling) {
  const double EP = compute.mean();
  const double mu = transmission_rate(coupling, EP);
  const double L = p.lambda;

  AoIReport r;
  r.mu = mu;
  r.stationary = busy_probability(p, compute, mu);
  r.wait = expected_wait(p, compute, mu);
  r.lambda_tilde = effective_rate(p, EP);
  r.ex2 = second_moment_interarrival(p, compute);

  const XtTerms xt = expected_xt(p, compute, mu);
  r.exT = xt.combined;
  r.exT_given_Id = xt.given_Id;
  r.exT_given_B = xt.given_B;
  r.avg_aoi = r.lambda_tilde * (r.exT + 0.5 * r.ex2);

  const double m1 = compute.tilted_mean(mu);
  const double emt = std::exp(-mu * p.tau);
  const double q = r.stationary.trans_Id_to_B;
  const double pB = r.stationary.p_B;
  r.prob_min_index = 1.0 - pB * emt;
  r.peak_numerator =
      (EP + p.T_o + 1.0 / L + 1.0 / mu) * r.prob_min_index +
      (EP - pB * m1 * emt) +
      r.wait.expected_wait * (1.0 - pB + pB * mu * p.tau) * q;
  r.avg_peak_aoi = r.peak_numerator / r.prob_min_index;
  return r;
}

template <ComputeTimeModel D>
AoIReport average_aoi(const SystemParams& p, const D& compute,
                      const CouplingModel& coupling) {
  return evaluate(p, compute, coupling);
}

template <ComputeTimeModel D>
AoIReport average_peak_aoi(const SystemParams& p, const D& compute,
                           const CouplingModel& coupling) {
  return evaluate(p, compute, coupling);
}

}  // namespace aoi
