#include "vige/tensor.hpp"

#include <sstream>
#include <utility>

namespace vige {

std::int64_t shape_numel(const Shape& shape) {
    std::int64_t n = 1;
    for (const auto d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

double Tensor::value() const {
    if (!is_scalar()) throw ShapeError("value() on non-scalar tensor " + shape_str(shape));
    return data[0];
}

void Tensor::set_requires_grad(bool on) {
    requires_grad = on;
    grad.assign(on ? data.size() : 0, 0.0);
}

void Tensor::zero_grad() {
    if (requires_grad) grad.assign(data.size(), 0.0);
}

TensorPtr tensor(Shape shape, std::vector<double> values, bool requires_grad) {
    for (const auto d : shape) {
        if (d <= 0) throw ShapeError("nonpositive dimension in shape " + shape_str(shape));
    }
    if (shape_numel(shape) != static_cast<std::int64_t>(values.size())) {
        throw ShapeError("shape " + shape_str(shape) + " does not match data length " +
                         std::to_string(values.size()));
    }
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->data = std::move(values);
    t->set_requires_grad(requires_grad);
    return t;
}

TensorPtr zeros(Shape shape, bool requires_grad) {
    const auto n = shape_numel(shape);
    return tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0),
                  requires_grad);
}

TensorPtr full(Shape shape, double value, bool requires_grad) {
    const auto n = shape_numel(shape);
    return tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value),
                  requires_grad);
}

TensorPtr scalar(double value, bool requires_grad) {
    return tensor({1}, {value}, requires_grad);
}

void Tape::record(const TensorPtr& output, std::function<void()> rule) {
    if (!recording_) return;
    if (consumed_) throw ValueError("recording onto a consumed tape");
    head_ = output.get();
    entries_.push_back(std::move(rule));
}

void Tape::backward(const TensorPtr& loss) {
    if (consumed_) throw ValueError("backward on a consumed tape");
    if (!loss || !loss->is_scalar()) {
        throw ShapeError("backward requires a scalar loss" +
                         (loss ? std::string(", got ") + shape_str(loss->shape) : std::string()));
    }
    if (entries_.empty() || head_ != loss.get()) {
        throw ValueError("loss is not the final output of this tape");
    }
    consumed_ = true;
    loss->grad.assign(1, 1.0);
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
}

}  // namespace vige
