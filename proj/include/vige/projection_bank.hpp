#pragma once

#include <string>
#include <vector>

#include "vige/backbone.hpp"
#include "vige/rng.hpp"
#include "vige/tensor.hpp"

namespace vige {

// Where the view projection sits relative to the pyramid's separate FC stage.
enum class Placement {
    replace_separate_fc,  // projection consumes the pooled strips directly
    after_separate_fc,    // projection follows the separate FC outputs
};

Placement placement_from_string(const std::string& s);
std::string to_string(Placement p);

enum class InitScheme { identity_perturbed, xavier };

InitScheme init_scheme_from_string(const std::string& s);
std::string to_string(InitScheme s);

// Per-view groups of square projection matrices, one D x D matrix per strip
// (or a single matrix per view reused across strips when `shared`). The
// selected group maps each strip feature to the view-conditioned final
// feature.
class ProjectionBank {
  public:
    // identity_perturbed: I + eps * N(0,1). eps = 0 gives the exact identity
    // bank, whose projection is a bitwise pass-through.
    ProjectionBank(int num_views, int num_strips, int dim, bool shared, InitScheme scheme,
                   double identity_eps, Rng& rng);

    // The n matrices for one view (the shared matrix repeated logically n
    // times). References to the live parameters, not copies.
    std::vector<TensorPtr> select(int view) const;

    // Row-wise projection: out[i] = group[i] * hpm[i].
    static std::vector<TensorPtr> project(Tape& tape, std::span<const TensorPtr> hpm,
                                          std::span<const TensorPtr> group);

    void collect_params(const std::string& prefix, ParamList& out) const;

    int num_views() const { return num_views_; }
    int num_strips() const { return num_strips_; }
    int dim() const { return dim_; }
    bool shared() const { return shared_; }

    // Direct access for inspection tooling (view-major, strip-minor; one
    // matrix per view when shared).
    const TensorPtr& matrix(int view, int strip) const;

  private:
    int num_views_;
    int num_strips_;
    int dim_;
    bool shared_;
    std::vector<TensorPtr> mats_;  // num_views * groups_per_view, each [D x D]
};

}  // namespace vige
