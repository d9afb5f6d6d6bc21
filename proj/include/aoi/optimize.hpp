#pragma once

// Derivative-free minimization of  omega1 * avg_aoi + omega2 * avg_peak_aoi
// over the decision variables (tau, E[P], T_o):
//   * exhaustive grid pass over the feasible box — the E[P] axis is clipped
//     per T_o at max_feasible_mean_compute, the tau axis at T_o;
//   * then local refinement rounds, shrinking each free axis range 4x around
//     the incumbent (clamped to the original bounds);
//   * deterministic tie-break toward smaller (T_o, then E[P], then tau).
// Any subset of the three variables may be pinned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <aoi/analysis.hpp>
#include <aoi/model.hpp>

namespace aoi {

template <class F>
concept ComputeTimeFamily = requires(const F& f, double m) {
  { f.with_mean(m) };
  requires ComputeTimeModel<std::remove_cvref_t<decltype(f.with_mean(m))>>;
};

struct SearchSpec {
  int n_tau = 33;
  int n_meanP = 33;
  int n_To = 17;
  double To_min = 0.0;
  double To_max = 20.0;
  int refinement_rounds = 2;
  std::optional<double> pin_tau;
  std::optional<double> pin_meanP;
  std::optional<double> pin_To;
  double meanP_min = 1e-3;  // E[P] = 0 is degenerate for the Gamma model
  double meanP_cap = 50.0;  // upper bound when the power budget is non-binding
};

struct ParetoPoint {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double avg_aoi = 0.0;
  double avg_peak_aoi = 0.0;
};

struct OptResult {
  bool feasible = false;
  std::string infeasible_reason;
  double best_tau = std::numeric_limits<double>::quiet_NaN();
  double best_meanP = std::numeric_limits<double>::quiet_NaN();
  double best_To = std::numeric_limits<double>::quiet_NaN();
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  double avg_aoi = std::numeric_limits<double>::quiet_NaN();
  double avg_peak_aoi = std::numeric_limits<double>::quiet_NaN();
  double power_slack = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t n_evaluated = 0;
  std::uint64_t n_infeasible_pruned = 0;
  std::vector<ParetoPoint> pareto;  // filled by pareto_front
};

namespace detail {

// Evenly spaced grid with both endpoints exact.  Computed as lo + i*step so
// that doubling the density (n -> 2n-1) reproduces every coarse point bit
// for bit, which makes grid-consistency an exact superset property.
inline std::vector<double> linspace(double lo, double hi, int n) {
  if (n <= 1 || !(hi > lo)) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + step * i;
  v.back() = hi;
  return v;
}

inline void check_spec(const SearchSpec& s) {
  if (!s.pin_tau && s.n_tau < 2)
    throw std::invalid_argument("search: tau grid needs >= 2 points");
  if (!s.pin_meanP && s.n_meanP < 2)
    throw std::invalid_argument("search: E[P] grid needs >= 2 points");
  if (!s.pin_To && s.n_To < 2)
    throw std::invalid_argument("search: T_o grid needs >= 2 points");
  if (!s.pin_To && (!(s.To_min >= 0.0) || s.To_min > s.To_max))
    throw std::invalid_argument("search: T_o range invalid");
  if (!(s.meanP_min > 0.0) || s.meanP_cap <= s.meanP_min)
    throw std::invalid_argument("search: E[P] bounds invalid");
  if (s.refinement_rounds < 0)
    throw std::invalid_argument("search: refinement rounds must be >= 0");
  if (s.pin_To && !(*s.pin_To >= 0.0))
    throw std::invalid_argument("search: pinned T_o must be >= 0");
  if (s.pin_tau && !(*s.pin_tau >= 0.0))
    throw std::invalid_argument("search: pinned tau must be >= 0");
  if (s.pin_tau && s.pin_To && *s.pin_tau > *s.pin_To)
    throw std::invalid_argument("search: pinned tau exceeds pinned T_o");
  if (s.pin_meanP && !(*s.pin_meanP > 0.0))
    throw std::invalid_argument("search: pinned E[P] must be > 0");
}

struct Box {
  double tau_lo, tau_hi;
  double mp_lo, mp_hi;
  double to_lo, to_hi;
};

struct Incumbent {
  bool found = false;
  double objective = std::numeric_limits<double>::infinity();
  double tau = 0.0, meanP = 0.0, To = 0.0;
  AoIReport report;

  bool offer(double obj, double tau_, double mp_, double to_, const AoIReport& r) {
    const bool better =
        obj < objective ||
        (obj == objective &&
         std::tie(to_, mp_, tau_) < std::tie(To, meanP, tau));
    if (!better) return false;
    found = true;
    objective = obj;
    tau = tau_;
    meanP = mp_;
    To = to_;
    report = r;
    return true;
  }
};

}  // namespace detail

template <ComputeTimeFamily F>
OptResult minimize(const SystemParams& base, const F& family,
                   const CouplingModel& coupling, const SearchSpec& spec) {
  detail::check_spec(spec);
  if (base.omega1 + base.omega2 <= 0.0)
    throw std::invalid_argument("search: objective weights are both zero");

  const detail::Box full{
      0.0, spec.pin_To ? *spec.pin_To : spec.To_max,
      spec.meanP_min, spec.meanP_cap,
      spec.pin_To ? *spec.pin_To : spec.To_min,
      spec.pin_To ? *spec.pin_To : spec.To_max};
  detail::Box box = full;

  detail::Incumbent inc;
  OptResult out;

  SystemParams p = base;
  for (int round = 0; round <= spec.refinement_rounds; ++round) {
    const std::vector<double> tos =
        spec.pin_To ? std::vector<double>{*spec.pin_To}
                    : detail::linspace(box.to_lo, box.to_hi, spec.n_To);
    for (double To : tos) {
      const std::size_t slice_points =
          (spec.pin_tau ? 1u : static_cast<std::size_t>(spec.n_tau)) *
          (spec.pin_meanP ? 1u : static_cast<std::size_t>(spec.n_meanP));

      p.T_o = To;
      const Feasibility fz = max_feasible_mean_compute(p);
      if (fz.infeasible()) {
        out.n_infeasible_pruned += slice_points;
        continue;
      }

      std::vector<double> mps;
      if (spec.pin_meanP) {
        if (fz.bounded() && *spec.pin_meanP > fz.max_mean_P * (1.0 + 1e-12)) {
          out.n_infeasible_pruned += slice_points;
          continue;
        }
        mps = {*spec.pin_meanP};
      } else {
        double mp_hi = std::min(box.mp_hi, spec.meanP_cap);
        if (fz.bounded()) mp_hi = std::min(mp_hi, fz.max_mean_P);
        const double mp_lo = std::max(box.mp_lo, spec.meanP_min);
        if (mp_hi < mp_lo) {
          out.n_infeasible_pruned += slice_points;
          continue;
        }
        mps = detail::linspace(mp_lo, mp_hi, spec.n_meanP);
      }

      std::vector<double> taus;
      if (spec.pin_tau) {
        if (*spec.pin_tau > To) {
          out.n_infeasible_pruned += slice_points;
          continue;
        }
        taus = {*spec.pin_tau};
      } else {
        taus = detail::linspace(std::max(box.tau_lo, 0.0),
                                std::min(box.tau_hi, To), spec.n_tau);
      }

      for (double mp : mps) {
        const auto compute = family.with_mean(mp);
        p.T_o = To;
        for (double tau : taus) {
          p.tau = tau;
          const AoIReport r = evaluate(p, compute, coupling);
          ++out.n_evaluated;
          inc.offer(base.omega1 * r.avg_aoi + base.omega2 * r.avg_peak_aoi,
                    tau, mp, To, r);
        }
      }
    }

    if (!inc.found) break;  // nothing to refine around

    // shrink each free axis range 4x around the incumbent
    auto shrink = [](double lo, double hi, double center, double lo0, double hi0) {
      const double half = (hi - lo) / 8.0;
      return std::pair<double, double>{std::max(lo0, center - half),
                                       std::min(hi0, center + half)};
    };
    if (!spec.pin_tau)
      std::tie(box.tau_lo, box.tau_hi) =
          shrink(box.tau_lo, box.tau_hi, inc.tau, full.tau_lo, full.tau_hi);
    if (!spec.pin_meanP)
      std::tie(box.mp_lo, box.mp_hi) =
          shrink(box.mp_lo, box.mp_hi, inc.meanP, full.mp_lo, full.mp_hi);
    if (!spec.pin_To)
      std::tie(box.to_lo, box.to_hi) =
          shrink(box.to_lo, box.to_hi, inc.To, full.to_lo, full.to_hi);
  }

  if (!inc.found) {
    out.feasible = false;
    out.infeasible_reason =
        "power constraint leaves no feasible E[P] for any T_o in range";
    return out;
  }

  out.feasible = true;
  out.best_tau = inc.tau;
  out.best_meanP = inc.meanP;
  out.best_To = inc.To;
  out.objective_value = inc.objective;
  out.avg_aoi = inc.report.avg_aoi;
  out.avg_peak_aoi = inc.report.avg_peak_aoi;
  SystemParams pb = base;
  pb.T_o = inc.To;
  out.power_slack = base.C_avg - average_power(pb, inc.meanP);
  return out;
}

struct ThresholdComparison {
  OptResult strict;  // deadline pinned to zero
  OptResult best;    // deadline free
  double improvement = std::numeric_limits<double>::quiet_NaN();
};

// Optimum with the most strict deadline (tau = 0) versus the optimum with
// tau free; improvement is the relative objective reduction.
template <ComputeTimeFamily F>
ThresholdComparison strict_vs_best_threshold(const SystemParams& base,
                                             const F& family,
                                             const CouplingModel& coupling,
                                             const SearchSpec& spec) {
  ThresholdComparison cmp;
  SearchSpec strict_spec = spec;
  strict_spec.pin_tau = 0.0;
  cmp.strict = minimize(base, family, coupling, strict_spec);
  SearchSpec free_spec = spec;
  free_spec.pin_tau.reset();
  cmp.best = minimize(base, family, coupling, free_spec);
  if (cmp.strict.feasible && cmp.best.feasible && cmp.strict.objective_value > 0)
    cmp.improvement = (cmp.strict.objective_value - cmp.best.objective_value) /
                      cmp.strict.objective_value;
  return cmp;
}

// Non-dominated subset of (avg_aoi, avg_peak_aoi) points, duplicates
// removed, sorted by ascending avg_aoi.
inline std::vector<ParetoPoint> pareto_filter(std::vector<ParetoPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return std::tie(a.avg_aoi, a.avg_peak_aoi) < std::tie(b.avg_aoi, b.avg_peak_aoi);
  });
  std::vector<ParetoPoint> front;
  double best_peak = std::numeric_limits<double>::infinity();
  for (const ParetoPoint& q : pts) {
    if (!front.empty() && q.avg_aoi == front.back().avg_aoi &&
        q.avg_peak_aoi == front.back().avg_peak_aoi)
      continue;  // duplicate
    if (q.avg_peak_aoi < best_peak) {
      front.push_back(q);
      best_peak = q.avg_peak_aoi;
    }
  }
  return front;
}

// One optimization per weight pair; each result carries the filtered joint
// front so downstream consumers can emit it directly.
template <ComputeTimeFamily F>
std::vector<OptResult> pareto_front(const SystemParams& base, const F& family,
                                    const CouplingModel& coupling,
                                    const SearchSpec& spec,
                                    const std::vector<std::pair<double, double>>& weights) {
  if (weights.empty())
    throw std::invalid_argument("pareto: weight list is empty");
  std::vector<OptResult> results;
  results.reserve(weights.size());
  std::vector<ParetoPoint> raw;
  for (auto [w1, w2] : weights) {
    if (w1 < 0 || w2 < 0 || w1 + w2 <= 0)
      throw std::invalid_argument("pareto: invalid weight pair");
    SystemParams p = base;
    p.omega1 = w1;
    p.omega2 = w2;
    results.push_back(minimize(p, family, coupling, spec));
    if (results.back().feasible)
      raw.push_back({w1, w2, results.back().avg_aoi, results.back().avg_peak_aoi});
  }
  const std::vector<ParetoPoint> front = pareto_filter(raw);
  for (OptResult& r : results) r.pareto = front;
  return results;
}

}  // namespace aoi
