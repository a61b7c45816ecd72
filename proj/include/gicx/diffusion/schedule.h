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

#ifndef GICX_DIFFUSION_SCHEDULE_H_
#define GICX_DIFFUSION_SCHEDULE_H_

#include <cstdint>
#include <vector>

namespace gicx {

enum class ScheduleKind : uint8_t { kLinear = 0 };

inline constexpr uint32_t kMaxScheduleSteps = 100000;

// The four values that fully determine a schedule. Serialized in the
// bitstream header; rebuilding from them is bit-exact.
struct ScheduleParams {
  ScheduleKind kind = ScheduleKind::kLinear;
  uint32_t steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  bool operator==(const ScheduleParams&) const = default;
};

// Variance schedule of the forward noising chain. Timesteps are 1-based:
// t in [1, T]. alpha_bar(0) == 1 denotes the clean sample.
class NoiseSchedule {
 public:
  // Throws ParameterError unless T >= 1 and 0 < beta_start <= beta_end < 1.
  static NoiseSchedule Make(const ScheduleParams& params);
  static NoiseSchedule Linear(int steps, double beta_start, double beta_end) {
    return Make({ScheduleKind::kLinear, static_cast<uint32_t>(steps), beta_start, beta_end});
  }

  int steps() const { return static_cast<int>(beta_.size()); }
  const ScheduleParams& params() const { return params_; }

  double beta(int t) const { return beta_.at(Index(t)); }
  double alpha(int t) const { return 1.0 - beta(t); }
  double alpha_bar(int t) const;
  // Posterior variance (1 - abar_{t-1}) / (1 - abar_t) * beta_t, which is 0
  // at t = 1 because abar_0 = 1.
  double posterior_variance(int t) const { return posterior_variance_.at(Index(t)); }
  double sigma(int t) const { return sigma_.at(Index(t)); }

  // Throws ParameterError when t is outside [1, T].
  void CheckTimestep(int t) const;

 private:
  std::size_t Index(int t) const;

  ScheduleParams params_;
  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
  std::vector<double> posterior_variance_;
  std::vector<double> sigma_;
};

}  // namespace gicx

#endif  // GICX_DIFFUSION_SCHEDULE_H_
