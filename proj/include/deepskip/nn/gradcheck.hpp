// Copyright 2026 The deepskip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "deepskip/nn/tensor.hpp"

namespace deepskip::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  long worst_index = -1;
  long checked = 0;
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

/// Compares p->grad (already filled by the caller's backward pass) with
/// central differences of `loss` for up to `per_param` random entries of
/// every parameter. `loss` must be a pure function of the parameter values.
inline GradCheckReport grad_check(const ParamList<double>& params, const std::function<double()>& loss,
                                  Rng& rng, int per_param = 20, double h = 1e-5) {
  GradCheckReport rep;
  for (auto* p : params) {
    const long n = static_cast<long>(p->value.size());
    const long m = std::min<long>(n, per_param);
    for (long j = 0; j < m; ++j) {
      const long idx = n <= per_param ? j : static_cast<long>(uniform_index(rng, n));
      double& x = p->value.data()[idx];
      const double saved = x;
      x = saved + h;
      const double lp = loss();
      x = saved - h;
      const double lm = loss();
      x = saved;
      const double num = (lp - lm) / (2.0 * h);
      const double err = relative_error(p->grad.data()[idx], num);
      ++rep.checked;
      if (err > rep.max_rel_error || rep.worst_index < 0) {
        rep.max_rel_error = std::max(rep.max_rel_error, err);
        if (err >= rep.max_rel_error) {
          rep.worst_param = p->name;
          rep.worst_index = idx;
        }
      }
    }
  }
  return rep;
}

}  // namespace deepskip::nn
