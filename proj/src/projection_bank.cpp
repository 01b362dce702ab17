#include "vige/projection_bank.hpp"

#include <cmath>

#include "vige/ops.hpp"

namespace vige {

Placement placement_from_string(const std::string& s) {
    if (s == "replace-separate-fc") return Placement::replace_separate_fc;
    if (s == "after-separate-fc") return Placement::after_separate_fc;
    throw ValueError("unknown placement '" + s +
                     "' (expected replace-separate-fc or after-separate-fc)");
}

std::string to_string(Placement p) {
    return p == Placement::replace_separate_fc ? "replace-separate-fc" : "after-separate-fc";
}

InitScheme init_scheme_from_string(const std::string& s) {
    if (s == "identity-perturbed") return InitScheme::identity_perturbed;
    if (s == "xavier") return InitScheme::xavier;
    throw ValueError("unknown init scheme '" + s + "' (expected identity-perturbed or xavier)");
}

std::string to_string(InitScheme s) {
    return s == InitScheme::identity_perturbed ? "identity-perturbed" : "xavier";
}

ProjectionBank::ProjectionBank(int num_views, int num_strips, int dim, bool shared,
                               InitScheme scheme, double identity_eps, Rng& rng)
    : num_views_(num_views), num_strips_(num_strips), dim_(dim), shared_(shared) {
    if (num_views_ < 1 || num_strips_ < 1 || dim_ < 1) {
        throw ValueError("projection bank: views, strips and dim must all be >= 1");
    }
    const int groups = shared_ ? 1 : num_strips_;
    const double xavier_bound = std::sqrt(6.0 / static_cast<double>(2 * dim_));
    for (int v = 0; v < num_views_ * groups; ++v) {
        auto m = zeros({dim_, dim_}, true);
        if (scheme == InitScheme::identity_perturbed) {
            for (auto& x : m->data) x = identity_eps == 0.0 ? 0.0 : identity_eps * rng.normal();
            for (int i = 0; i < dim_; ++i)
                m->data[static_cast<std::size_t>(i * dim_ + i)] += 1.0;
        } else {
            for (auto& x : m->data) x = rng.uniform(-xavier_bound, xavier_bound);
        }
        mats_.push_back(std::move(m));
    }
}

std::vector<TensorPtr> ProjectionBank::select(int view) const {
    if (view < 0 || view >= num_views_) {
        throw ValueError("projection bank: view index " + std::to_string(view) +
                         " out of range [0," + std::to_string(num_views_) + ")");
    }
    std::vector<TensorPtr> group;
    group.reserve(static_cast<std::size_t>(num_strips_));
    for (int i = 0; i < num_strips_; ++i) group.push_back(matrix(view, i));
    return group;
}

const TensorPtr& ProjectionBank::matrix(int view, int strip) const {
    if (view < 0 || view >= num_views_ || strip < 0 || strip >= num_strips_) {
        throw ValueError("projection bank: matrix index (" + std::to_string(view) + "," +
                         std::to_string(strip) + ") out of range");
    }
    const int groups = shared_ ? 1 : num_strips_;
    const int idx = view * groups + (shared_ ? 0 : strip);
    return mats_[static_cast<std::size_t>(idx)];
}

std::vector<TensorPtr> ProjectionBank::project(Tape& tape, std::span<const TensorPtr> hpm,
                                               std::span<const TensorPtr> group) {
    if (hpm.size() != group.size()) {
        throw ValueError("projection bank: " + std::to_string(hpm.size()) + " strips vs " +
                         std::to_string(group.size()) + " matrices");
    }
    std::vector<TensorPtr> rows;
    rows.reserve(hpm.size());
    for (std::size_t i = 0; i < hpm.size(); ++i) {
        rows.push_back(ops::matmul(tape, group[i], hpm[i]));
    }
    return rows;
}

void ProjectionBank::collect_params(const std::string& prefix, ParamList& out) const {
    const int groups = shared_ ? 1 : num_strips_;
    for (int v = 0; v < num_views_; ++v) {
        for (int g = 0; g < groups; ++g) {
            out.emplace_back(prefix + ".view" + std::to_string(v) + ".w" + std::to_string(g),
                             mats_[static_cast<std::size_t>(v * groups + g)]);
        }
    }
}

}  // namespace vige
