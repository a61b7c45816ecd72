/* Copyright 2026 The Gicx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "gicx/diffusion/schedule.h"

#include <cmath>
#include <string>

#include "gicx/numerics/errors.h"

namespace gicx {

NoiseSchedule NoiseSchedule::Make(const ScheduleParams& params) {
  if (params.kind != ScheduleKind::kLinear) throw ParameterError("unknown schedule kind");
  if (params.steps < 1 || params.steps > kMaxScheduleSteps) {
    throw ParameterError("schedule steps must be in [1, " + std::to_string(kMaxScheduleSteps) + "]");
  }
  if (!(params.beta_start > 0.0 && params.beta_start <= params.beta_end &&
        params.beta_end < 1.0)) {
    throw ParameterError("schedule requires 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.params_ = params;
  const int n = static_cast<int>(params.steps);
  s.beta_.resize(n);
  s.alpha_bar_.resize(n);
  s.posterior_variance_.resize(n);
  s.sigma_.resize(n);
  double prod = 1.0;
  for (int i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    s.beta_[i] = params.beta_start + (params.beta_end - params.beta_start) * frac;
    const double prev = prod;
    prod *= 1.0 - s.beta_[i];
    s.alpha_bar_[i] = prod;
    s.posterior_variance_[i] = (1.0 - prev) / (1.0 - prod) * s.beta_[i];
    s.sigma_[i] = std::sqrt(s.posterior_variance_[i]);
  }
  return s;
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t == 0) return 1.0;
  return alpha_bar_.at(Index(t));
}

void NoiseSchedule::CheckTimestep(int t) const {
  if (t < 1 || t > steps()) {
    throw ParameterError("timestep " + std::to_string(t) + " outside [1, " +
                         std::to_string(steps()) + "]");
  }
}

std::size_t NoiseSchedule::Index(int t) const {
  CheckTimestep(t);
  return static_cast<std::size_t>(t - 1);
}

}  // namespace gicx
