#include "vige/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vige {

double finite_diff_check(const std::function<double()>& eval, const TensorPtr& x, double eps,
                         std::span<const std::int64_t> coords) {
    if (eps <= 0.0) throw ValueError("finite_diff_check: eps must be positive");
    if (!x->requires_grad) throw ValueError("finite_diff_check: tensor has no recorded gradient");

    std::vector<std::int64_t> all;
    if (coords.empty()) {
        all.resize(static_cast<std::size_t>(x->numel()));
        std::iota(all.begin(), all.end(), 0);
        coords = all;
    }

    double max_rel = 0.0;
    for (const std::int64_t c : coords) {
        const auto i = static_cast<std::size_t>(c);
        const double saved = x->data[i];
        x->data[i] = saved + eps;
        const double f_plus = eval();
        x->data[i] = saved - eps;
        const double f_minus = eval();
        x->data[i] = saved;

        const double numeric = (f_plus - f_minus) / (2.0 * eps);
        const double analytic = x->grad[i];
        const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
    }
    return max_rel;
}

std::vector<std::int64_t> sample_coords(std::int64_t numel, int count, Rng& rng) {
    std::vector<std::int64_t> coords;
    if (count >= numel) {
        coords.resize(static_cast<std::size_t>(numel));
        std::iota(coords.begin(), coords.end(), 0);
        return coords;
    }
    // Rejection sampling over a set; fine at these sizes.
    while (static_cast<int>(coords.size()) < count) {
        const std::int64_t c = rng.uniform_int(0, numel - 1);
        if (std::find(coords.begin(), coords.end(), c) == coords.end()) coords.push_back(c);
    }
    std::sort(coords.begin(), coords.end());
    return coords;
}

}  // namespace vige
