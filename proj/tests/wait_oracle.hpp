#pragma once

// Monte-Carlo oracle for the buffer-wait stopping process, independent of
// the closed form under test.  A packet that finds the server busy waits for
// the residual service R ~ Exp(mu): if R <= tau it is picked up after R;
// otherwise whole OFF+idle+compute cycles accrue until one overshoots the
// remaining residual (condition (a), the full cycle counts) or the leftover
// residual falls within the deadline (condition (b), the wait ends exactly
// at the residual).

#include <cmath>
#include <cstdint>
#include <random>

#include <aoi/model.hpp>

#include "oracle_util.hpp"

namespace testutil {

struct OracleEstimate {
  double mean = 0.0;
  double se = 0.0;
};

template <aoi::ComputeTimeModel D>
OracleEstimate mc_expected_wait(const aoi::SystemParams& p, const D& compute,
                                double mu, long n, std::uint64_t seed) {
  std::mt19937_64 rng(mix64(seed));
  std::exponential_distribution<double> residual(mu);
  std::exponential_distribution<double> idle(p.lambda);
  Welford acc;
  for (long i = 0; i < n; ++i) {
    const double R = residual(rng);
    double W;
    if (R <= p.tau) {
      W = R;
    } else {
      W = 0.0;
      double rem = R;
      for (;;) {
        const double cyc = p.T_o + idle(rng) + compute.sample(rng);
        if (cyc > rem) {  // condition (a)
          W += cyc;
          break;
        }
        if (rem - cyc <= p.tau) {  // condition (b)
          W += rem;
          break;
        }
        W += cyc;
        rem -= cyc;
      }
    }
    acc.add(W);
  }
  return {acc.mean, acc.se()};
}

}  // namespace testutil
