#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vige/errors.hpp"

namespace vige {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major 64-bit float tensor. `grad` is allocated (same size as
// `data`, zero-filled) exactly when `requires_grad` is set.
struct Tensor {
    Shape shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    bool is_scalar() const { return data.size() == 1; }

    // Scalar payload; throws on non-scalar tensors.
    double value() const;

    void set_requires_grad(bool on);
    void zero_grad();
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr tensor(Shape shape, std::vector<double> values, bool requires_grad = false);
TensorPtr zeros(Shape shape, bool requires_grad = false);
TensorPtr full(Shape shape, double value, bool requires_grad = false);
TensorPtr scalar(double value, bool requires_grad = false);

// Records the backward rules of one forward pass, in execution order.
// Replaying them in reverse accumulates gradients into every requires_grad
// tensor reachable from the loss. A tape drives exactly one backward pass.
//
// A non-recording tape runs the same forward arithmetic but skips the rules
// and produces grad-free outputs; evaluation threads use one tape each.
class Tape {
  public:
    explicit Tape(bool recording = true) : recording_(recording) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return recording_; }
    bool consumed() const { return consumed_; }
    std::size_t size() const { return entries_.size(); }

    // Queues `rule` and marks `output` as the tape head. Callers only record
    // nodes whose output participates in gradients.
    void record(const TensorPtr& output, std::function<void()> rule);

    // Seeds d(loss)/d(loss)=1 and replays all rules in reverse. `loss` must be
    // the scalar head of this tape. Consumes the tape.
    void backward(const TensorPtr& loss);

  private:
    std::vector<std::function<void()>> entries_;
    const Tensor* head_ = nullptr;
    bool recording_ = true;
    bool consumed_ = false;
};

}  // namespace vige
