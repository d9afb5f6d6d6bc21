#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <aoi/optimize.hpp>
#include "oracle_util.hpp"

using namespace aoi;

namespace {

SystemParams base_params(double lambda = 1.0, double w1 = 1.0, double w2 = 0.0) {
  SystemParams p;
  p.lambda = lambda;
  p.p_c = 10.0;
  p.C_avg = 1.0;
  p.omega1 = w1;
  p.omega2 = w2;
  return p;
}

SystemParams draw_instance(std::mt19937_64& rng) {
  SystemParams p;
  p.lambda = testutil::uniform(rng, 0.3, 2.0);
  p.p_c = testutil::uniform(rng, 2.0, 12.0);
  p.C_avg = testutil::uniform(rng, 0.8, 1.5);
  p.omega1 = testutil::uniform(rng, 0.0, 1.0);
  p.omega2 = 1.0 - p.omega1;
  return p;
}

}  // namespace

TEST_CASE("fully pinned search evaluates a single point", "[optimize]") {
  const SystemParams p = base_params();
  GammaFamily fam{0.1};
  CouplingModel c{10.0, 1.0};

  SearchSpec s;
  s.pin_tau = 0.5;
  s.pin_meanP = 0.2;
  s.pin_To = 2.0;
  s.refinement_rounds = 0;
  OptResult r = minimize(p, fam, c, s);

  REQUIRE(r.feasible);
  REQUIRE(r.n_evaluated == 1);
  REQUIRE(r.best_tau == 0.5);
  REQUIRE(r.best_meanP == 0.2);
  REQUIRE(r.best_To == 2.0);

  SystemParams q = p;
  q.tau = 0.5;
  q.T_o = 2.0;
  const AoIReport ref = evaluate(q, fam.with_mean(0.2), c);
  REQUIRE(r.objective_value == ref.avg_aoi);  // omega = (1, 0)
  REQUIRE(r.avg_aoi == ref.avg_aoi);
  REQUIRE(r.avg_peak_aoi == ref.avg_peak_aoi);
  REQUIRE(r.power_slack == Catch::Approx(p.C_avg - average_power(q, 0.2)));
}

TEST_CASE("pure-AoI objective returns the grid minimum of avg_aoi", "[optimize]") {
  const SystemParams p = base_params();
  GammaFamily fam{0.1};
  CouplingModel c{10.0, 1.0};

  SearchSpec s;
  s.n_tau = 7;
  s.n_meanP = 7;
  s.n_To = 7;
  s.To_min = 0.0;
  s.To_max = 6.0;
  s.refinement_rounds = 0;
  OptResult r = minimize(p, fam, c, s);
  REQUIRE(r.feasible);
  REQUIRE(r.objective_value == r.avg_aoi);

  // replay the same grid and confirm nothing beats the reported optimum
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t evals = 0;
  for (double To : detail::linspace(s.To_min, s.To_max, s.n_To)) {
    SystemParams q = p;
    q.T_o = To;
    const Feasibility fz = max_feasible_mean_compute(q);
    if (fz.infeasible()) continue;
    double hi = s.meanP_cap;
    if (fz.bounded()) hi = std::min(hi, fz.max_mean_P);
    if (hi < s.meanP_min) continue;
    for (double mp : detail::linspace(s.meanP_min, hi, s.n_meanP)) {
      const GammaComputeTime g = fam.with_mean(mp);
      for (double tau : detail::linspace(0.0, To, s.n_tau)) {
        q.tau = tau;
        best = std::min(best, evaluate(q, g, c).avg_aoi);
        ++evals;
      }
    }
  }
  REQUIRE(r.avg_aoi == best);
  REQUIRE(r.n_evaluated == evals);
}

TEST_CASE("operating-point search favors a nonzero OFF dwell", "[optimize]") {
  const SystemParams p = base_params();  // lambda 1, p_c 10, budget 1
  GammaFamily fam{0.1};
  CouplingModel c{10.0, 1.0};

  SearchSpec s;
  s.n_To = 21;
  s.To_max = 20.0;
  s.refinement_rounds = 1;
  OptResult r = minimize(p, fam, c, s);

  REQUIRE(r.feasible);
  REQUIRE(r.best_To > 0.0);
  // T_o = 0 with budget == idle cost leaves no room for any compute time
  REQUIRE(r.n_infeasible_pruned > 0);
  REQUIRE(r.power_slack >= -1e-12);
  REQUIRE(r.best_tau <= r.best_To);
}

TEST_CASE("halving the grid step never worsens the objective", "[optimize][property]") {
  std::mt19937_64 rng = testutil::seeded(0x60D5ULL);
  int checked = 0;
  for (int it = 0; it < 12; ++it) {
    const SystemParams p = draw_instance(rng);
    GammaFamily fam{testutil::log_uniform(rng, 0.01, 1.0)};
    CouplingModel c{testutil::uniform(rng, 2.0, 10.0),
                    testutil::uniform(rng, 0.0, 2.0)};

    SearchSpec coarse;
    coarse.n_tau = 5;
    coarse.n_meanP = 5;
    coarse.n_To = 5;
    coarse.To_max = testutil::uniform(rng, 2.0, 8.0);
    coarse.refinement_rounds = 0;
    SearchSpec fine = coarse;
    fine.n_tau = 9;   // same range, half the step: a strict superset
    fine.n_meanP = 9;
    fine.n_To = 9;

    const OptResult rc = minimize(p, fam, c, coarse);
    const OptResult rf = minimize(p, fam, c, fine);
    REQUIRE(rc.feasible == rf.feasible);
    if (!rc.feasible) continue;
    REQUIRE(rf.objective_value <= rc.objective_value);
    ++checked;
  }
  REQUIRE(checked >= 8);
}

TEST_CASE("refinement rounds are monotone improvements", "[optimize][property]") {
  std::mt19937_64 rng = testutil::seeded(0xF13EULL);
  for (int it = 0; it < 6; ++it) {
    const SystemParams p = draw_instance(rng);
    GammaFamily fam{testutil::log_uniform(rng, 0.02, 0.8)};
    CouplingModel c{testutil::uniform(rng, 3.0, 10.0), 1.0};

    SearchSpec s;
    s.n_tau = 9;
    s.n_meanP = 9;
    s.n_To = 9;
    s.To_max = 8.0;

    double prev = std::numeric_limits<double>::infinity();
    std::uint64_t prev_evals = 0;
    for (int rounds = 0; rounds <= 3; ++rounds) {
      s.refinement_rounds = rounds;
      const OptResult r = minimize(p, fam, c, s);
      if (!r.feasible) break;
      REQUIRE(r.objective_value <= prev);
      REQUIRE(r.n_evaluated > prev_evals);
      REQUIRE(r.power_slack >= -1e-12);
      REQUIRE(r.best_tau <= r.best_To);
      prev = r.objective_value;
      prev_evals = r.n_evaluated;
    }
  }
}

TEST_CASE("returned optimum is self-consistent and within bounds",
          "[optimize][property]") {
  std::mt19937_64 rng = testutil::seeded(0xB0B5ULL);
  for (int it = 0; it < 8; ++it) {
    const SystemParams p = draw_instance(rng);
    GammaFamily fam{testutil::log_uniform(rng, 0.01, 1.0)};
    CouplingModel c{testutil::uniform(rng, 2.0, 10.0),
                    testutil::uniform(rng, 0.0, 1.5)};
    SearchSpec s;
    s.n_tau = 7;
    s.n_meanP = 7;
    s.n_To = 7;
    s.To_max = 6.0;
    s.refinement_rounds = 1;
    const OptResult r = minimize(p, fam, c, s);
    if (!r.feasible) {
      REQUIRE_FALSE(r.infeasible_reason.empty());
      continue;
    }
    SystemParams q = p;
    q.T_o = r.best_To;
    q.tau = r.best_tau;
    const AoIReport ref = evaluate(q, fam.with_mean(r.best_meanP), c);
    REQUIRE(r.objective_value ==
            p.omega1 * ref.avg_aoi + p.omega2 * ref.avg_peak_aoi);
    REQUIRE(r.best_meanP >= s.meanP_min);
    REQUIRE(r.best_meanP <= s.meanP_cap);
    REQUIRE(r.best_To >= s.To_min);
    REQUIRE(r.best_To <= s.To_max);
    REQUIRE(r.best_tau >= 0.0);
    REQUIRE(r.best_tau <= r.best_To);
    REQUIRE(r.power_slack >= -1e-12);
  }
}

TEST_CASE("empty feasible region yields a typed infeasibility", "[optimize]") {
  SystemParams p = base_params();
  p.C_avg = 0.5;  // below idle cost: short OFF dwells cannot pay for idling
  GammaFamily fam{0.1};
  CouplingModel c{10.0, 1.0};

  SearchSpec s;
  s.n_To = 5;
  s.To_min = 0.0;
  s.To_max = 0.4;  // budget * T_o never covers the idle deficit (1/lambda)
  s.refinement_rounds = 2;
  const OptResult r = minimize(p, fam, c, s);
  REQUIRE_FALSE(r.feasible);
  REQUIRE(r.n_evaluated == 0);
  REQUIRE(r.n_infeasible_pruned > 0);
  REQUIRE(r.infeasible_reason.find("power") != std::string::npos);
  REQUIRE(std::isnan(r.best_tau));
}

TEST_CASE("spec validation", "[optimize]") {
  const SystemParams p = base_params();
  GammaFamily fam{0.1};
  CouplingModel c{10.0, 1.0};

  SearchSpec s;
  s.n_tau = 1;
  REQUIRE_THROWS_AS(minimize(p, fam, c, s), std::invalid_argument);
  s = SearchSpec{};
  s.To_min = 5.0;
  s.To_max = 1.0;
  REQUIRE_THROWS_AS(minimize(p, fam, c, s), std::invalid_argument);
  s = SearchSpec{};
  s.meanP_cap = 1e-4;  // below the lower bound
  REQUIRE_THROWS_AS(minimize(p, fam, c, s), std::invalid_argument);
  s = SearchSpec{};
  s.refinement_rounds = -1;
  REQUIRE_THROWS_AS(minimize(p, fam, c, s), std::invalid_argument);
  s = SearchSpec{};
  s.pin_tau = 3.0;
  s.pin_To = 2.0;
  REQUIRE_THROWS_AS(minimize(p, fam, c, s), std::invalid_argument);

  SystemParams w = p;
  w.omega1 = 0.0;
  w.omega2 = 0.0;
  REQUIRE_THROWS_AS(minimize(w, fam, c, SearchSpec{}), std::invalid_argument);
}

// With an essentially instantaneous transmission stage the deadline cannot
// matter: every tau value yields the same objective, and the tie-break must
// settle on the smallest one.
TEST_CASE("flat deadline axis resolves toward tau = 0", "[optimize][tiebreak]") {
  SystemParams p = base_params();
  GammaFamily fam{0.2};
  CouplingModel c{1e-9, 0.0};  // transmission rate 1e9

  SearchSpec s;
  s.n_tau = 9;
  s.n_meanP = 5;
  s.n_To = 5;
  s.To_min = 0.5;
  s.To_max = 4.0;
  s.refinement_rounds = 1;
  const OptResult r = minimize(p, fam, c, s);
  REQUIRE(r.feasible);
  REQUIRE(r.best_tau == 0.0);

  // strict and best coincide: thresholding brings nothing without queueing
  const ThresholdComparison cmp = strict_vs_best_threshold(p, fam, c, s);
  REQUIRE(cmp.improvement == 0.0);
}

TEST_CASE("free deadline never loses to the strict one", "[optimize][property]") {
  std::mt19937_64 rng = testutil::seeded(0x57121C7ULL);
  for (int it = 0; it < 6; ++it) {
    const SystemParams p = draw_instance(rng);
    GammaFamily fam{testutil::log_uniform(rng, 0.01, 0.5)};
    CouplingModel c{testutil::uniform(rng, 3.0, 10.0), 1.0};
    SearchSpec s;
    s.n_tau = 9;
    s.n_meanP = 9;
    s.n_To = 7;
    s.To_max = 8.0;
    s.refinement_rounds = 1;
    const ThresholdComparison cmp = strict_vs_best_threshold(p, fam, c, s);
    if (!cmp.best.feasible) continue;
    REQUIRE(cmp.strict.feasible);
    REQUIRE(cmp.best.objective_value <= cmp.strict.objective_value);
    REQUIRE(cmp.improvement >= 0.0);
    REQUIRE(cmp.strict.best_tau == 0.0);
  }
}

TEST_CASE("threshold benefit at the reference operating point", "[optimize]") {
  const SystemParams p = base_params();
  GammaFamily fam{0.1};
  CouplingModel c{10.0, 1.0};
  SearchSpec s;
  s.n_tau = 17;
  s.n_meanP = 17;
  s.n_To = 17;
  s.To_max = 20.0;
  s.refinement_rounds = 2;
  const ThresholdComparison cmp = strict_vs_best_threshold(p, fam, c, s);
  REQUIRE(cmp.best.feasible);
  INFO("improvement " << cmp.improvement);
  REQUIRE(cmp.improvement > 0.01);
  REQUIRE(cmp.improvement < 0.12);
}

TEST_CASE("pareto front: corners, ordering, non-domination", "[optimize][pareto]") {
  const SystemParams p = base_params();
  GammaFamily fam{0.05};
  CouplingModel c{10.0, 1.0};
  SearchSpec s;
  s.n_tau = 9;
  s.n_meanP = 9;
  s.n_To = 9;
  s.To_max = 12.0;
  s.refinement_rounds = 1;

  const std::vector<std::pair<double, double>> weights = {
      {1.0, 0.0}, {3.0, 1.0}, {1.0, 1.0}, {1.0, 3.0}, {0.0, 1.0}};
  const std::vector<OptResult> rs = pareto_front(p, fam, c, s, weights);
  REQUIRE(rs.size() == weights.size());
  for (const OptResult& r : rs) REQUIRE(r.feasible);

  // corner optimality
  for (const OptResult& r : rs) {
    REQUIRE(rs.front().avg_aoi <= r.avg_aoi);       // (1,0) minimizes AoI
    REQUIRE(rs.back().avg_peak_aoi <= r.avg_peak_aoi);  // (0,1) minimizes peak
  }

  const std::vector<ParetoPoint>& front = rs.front().pareto;
  REQUIRE_FALSE(front.empty());
  for (const OptResult& r : rs) REQUIRE(r.pareto.size() == front.size());
  for (std::size_t i = 0; i + 1 < front.size(); ++i) {
    REQUIRE(front[i].avg_aoi < front[i + 1].avg_aoi);       // sorted, deduped
    REQUIRE(front[i].avg_peak_aoi > front[i + 1].avg_peak_aoi);  // non-dominated
  }

  // single weight: degenerate front equals the plain optimum
  const auto single = pareto_front(p, fam, c, s, {{1.0, 0.0}});
  REQUIRE(single.size() == 1);
  REQUIRE(single[0].avg_aoi == rs.front().avg_aoi);
  REQUIRE(single[0].pareto.size() == 1);

  REQUIRE_THROWS_AS(pareto_front(p, fam, c, s, {}), std::invalid_argument);
  REQUIRE_THROWS_AS(pareto_front(p, fam, c, s, {{0.0, 0.0}}),
                    std::invalid_argument);
}

TEST_CASE("pareto filter drops dominated and duplicate points", "[optimize][pareto]") {
  std::vector<ParetoPoint> pts = {
      {1, 0, 3.0, 9.0}, {0, 1, 5.0, 5.0}, {1, 1, 4.0, 7.0},
      {2, 1, 4.0, 7.0},  // duplicate coordinates
      {1, 2, 4.5, 8.0},  // dominated by (4.0, 7.0)
      {1, 3, 3.0, 9.5},  // dominated by (3.0, 9.0)
  };
  const std::vector<ParetoPoint> front = pareto_filter(pts);
  REQUIRE(front.size() == 3);
  REQUIRE(front[0].avg_aoi == 3.0);
  REQUIRE(front[1].avg_aoi == 4.0);
  REQUIRE(front[2].avg_aoi == 5.0);
  REQUIRE(front[0].avg_peak_aoi == 9.0);
  REQUIRE(front[2].avg_peak_aoi == 5.0);
}
