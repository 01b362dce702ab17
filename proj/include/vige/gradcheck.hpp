#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vige/rng.hpp"
#include "vige/tensor.hpp"

namespace vige {

// Compares the gradient already recorded in x->grad against central finite
// differences of `eval`, which must recompute the scalar objective from the
// current contents of x->data (x is perturbed in place and restored).
//
// Returns the max relative error over the checked coordinates, with
// denominator max(|analytic|, |numeric|, 1e-8). An empty `coords` checks
// every coordinate.
double finite_diff_check(const std::function<double()>& eval, const TensorPtr& x,
                         double eps = 1e-5, std::span<const std::int64_t> coords = {});

// `count` distinct coordinates of a tensor with `numel` elements (all of them
// when count >= numel), in ascending order.
std::vector<std::int64_t> sample_coords(std::int64_t numel, int count, Rng& rng);

}  // namespace vige
