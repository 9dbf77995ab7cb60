#pragma once

// Joints over (S, T) factorizing as P(t) P(s|t) P(x|t) P(y|x,s): both
// conditional independences that order the variances hold exactly.

#include <random>

#include "stratcause/model.hpp"

namespace testing {

inline stratcause::StratifiedJoint fig2_joint(std::mt19937_64& rng, int s_levels, int t_levels,
                                              std::int64_t n = 1000) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::vector<double> p_t(t_levels);
  double total = 0.0;
  for (double& v : p_t) total += (v = w(rng));
  for (double& v : p_t) v /= total;
  std::vector<std::vector<double>> p_s_given_t(t_levels, std::vector<double>(s_levels));
  for (auto& row : p_s_given_t) {
    double sum = 0.0;
    for (double& v : row) sum += (v = w(rng));
    for (double& v : row) v /= sum;
  }
  std::vector<double> p_x_given_t(t_levels);
  for (double& v : p_x_given_t) v = u(rng);
  std::vector<double> y_x(s_levels), y_xp(s_levels);
  for (int s = 0; s < s_levels; ++s) {
    y_x[s] = u(rng);
    y_xp[s] = u(rng);
  }
  stratcause::StratifiedJoint::Strata strata;
  for (int t = 0; t < t_levels; ++t) {
    for (int s = 0; s < s_levels; ++s) {
      const double px = p_x_given_t[t];
      strata.emplace(stratcause::StratumKey({{"S", "s" + std::to_string(s)}, {"T", "t" + std::to_string(t)}}),
                     stratcause::StratumTable{px * y_x[s], px * (1 - y_x[s]), (1 - px) * y_xp[s],
                                              (1 - px) * (1 - y_xp[s]), p_t[t] * p_s_given_t[t][s]});
    }
  }
  return stratcause::StratifiedJoint({"S", "T"}, std::move(strata), n);
}

}  // namespace testing
