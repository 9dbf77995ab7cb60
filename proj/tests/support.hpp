#pragma once

// Random instance generators shared by the property tests.

#include <random>
#include <string>

#include "stratcause/model.hpp"

namespace testing {

inline stratcause::StratumTable random_table(std::mt19937_64& rng, double weight = 1.0, double floor = 0.02) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double c[4];
  double total = 0.0;
  for (double& v : c) {
    v = floor + u(rng);
    total += v;
  }
  return {c[0] / total, c[1] / total, c[2] / total, c[3] / total, weight};
}

/// Experimental pair drawn uniformly from the range consistency allows.
inline stratcause::ExperimentalPair random_compatible(std::mt19937_64& rng, const stratcause::StratumTable& t) {
  const auto r = stratcause::compatible_range(t);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {r.do_x_lo + u(rng) * (r.do_x_hi - r.do_x_lo), r.do_xp_lo + u(rng) * (r.do_xp_hi - r.do_xp_lo)};
}

inline stratcause::StratifiedJoint random_joint(std::mt19937_64& rng, int strata, const std::string& covariate = "S") {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(strata);
  double total = 0.0;
  for (double& v : w) total += (v = u(rng));
  stratcause::StratifiedJoint::Strata map;
  for (int i = 0; i < strata; ++i) {
    map.emplace(stratcause::StratumKey({{covariate, "s" + std::to_string(i)}}), random_table(rng, w[i] / total));
  }
  return stratcause::StratifiedJoint({covariate}, std::move(map));
}

inline stratcause::ExperimentalQuantities random_experimental(std::mt19937_64& rng,
                                                              const stratcause::StratifiedJoint& joint) {
  std::map<stratcause::StratumKey, stratcause::ExperimentalPair> per;
  for (const auto& [key, t] : joint.strata()) per.emplace(key, random_compatible(rng, t));
  return {joint, std::move(per), stratcause::Provenance::kMeasuredExperimental};
}

}  // namespace testing
