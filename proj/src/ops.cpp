#include "vige/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

namespace vige::ops {

namespace {

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
             std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            if (av == 0.0) continue;
            const double* brow = b + p * n;
            double* crow = c + i * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[m x n] += A[m x k] * B[n x k]^T
void gemm_nt(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
             std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        for (std::int64_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            c[i * n + j] += acc;
        }
    }
}

// C[m x n] += A[k x m]^T * B[k x n]
void gemm_tn(const double* a, const double* b, double* c, std::int64_t m, std::int64_t k,
             std::int64_t n) {
    for (std::int64_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::int64_t i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* crow = c + i * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

TensorPtr make_output(Tape& tape, Shape shape, std::span<const TensorPtr> inputs) {
    bool needs_grad = false;
    if (tape.recording()) {
        for (const auto& in : inputs) needs_grad = needs_grad || in->requires_grad;
    }
    return zeros(std::move(shape), needs_grad);
}

TensorPtr make_output(Tape& tape, Shape shape, const TensorPtr& a) {
    const TensorPtr ins[] = {a};
    return make_output(tape, std::move(shape), std::span<const TensorPtr>(ins));
}

TensorPtr make_output(Tape& tape, Shape shape, const TensorPtr& a, const TensorPtr& b) {
    const TensorPtr ins[] = {a, b};
    return make_output(tape, std::move(shape), std::span<const TensorPtr>(ins));
}

void check_finite(const Tensor& t, const char* op) {
    for (const double v : t.data) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(op) + " produced a non-finite value");
        }
    }
}

void require_same_shape(const char* op, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape != b->shape) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a->shape) + " vs " +
                         shape_str(b->shape));
    }
}

void require_rank(const char* op, const TensorPtr& t, std::size_t rank) {
    if (t->shape.size() != rank) {
        throw ShapeError(std::string(op) + ": expected rank-" + std::to_string(rank) +
                         " tensor, got " + shape_str(t->shape));
    }
}

void accumulate(const TensorPtr& t, const std::vector<double>& g) {
    for (std::size_t i = 0; i < g.size(); ++i) t->grad[i] += g[i];
}

}  // namespace

std::int64_t conv_out_dim(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                          std::int64_t padding) {
    return (in + 2 * padding - kernel) / stride + 1;
}

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("add", a, b);
    auto out = make_output(tape, a->shape, a, b);
    for (std::size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] + b->data[i];
    check_finite(*out, "add");
    if (out->requires_grad) {
        tape.record(out, [a = a, b = b, out]() {
            if (a->requires_grad) accumulate(a, out->grad);
            if (b->requires_grad) accumulate(b, out->grad);
        });
    }
    return out;
}

TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("sub", a, b);
    auto out = make_output(tape, a->shape, a, b);
    for (std::size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] - b->data[i];
    check_finite(*out, "sub");
    if (out->requires_grad) {
        tape.record(out, [a = a, b = b, out]() {
            if (a->requires_grad) {
                for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                for (std::size_t i = 0; i < out->grad.size(); ++i) b->grad[i] -= out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape("mul", a, b);
    auto out = make_output(tape, a->shape, a, b);
    for (std::size_t i = 0; i < out->data.size(); ++i) out->data[i] = a->data[i] * b->data[i];
    check_finite(*out, "mul");
    if (out->requires_grad) {
        tape.record(out, [a = a, b = b, out]() {
            if (a->requires_grad) {
                for (std::size_t i = 0; i < out->grad.size(); ++i)
                    a->grad[i] += out->grad[i] * b->data[i];
            }
            if (b->requires_grad) {
                for (std::size_t i = 0; i < out->grad.size(); ++i)
                    b->grad[i] += out->grad[i] * a->data[i];
            }
        });
    }
    return out;
}

TensorPtr scale(Tape& tape, const TensorPtr& x, double factor) {
    auto out = make_output(tape, x->shape, x);
    for (std::size_t i = 0; i < out->data.size(); ++i) out->data[i] = factor * x->data[i];
    check_finite(*out, "scale");
    if (out->requires_grad) {
        tape.record(out, [x = x, out, factor]() {
            for (std::size_t i = 0; i < out->grad.size(); ++i)
                x->grad[i] += factor * out->grad[i];
        });
    }
    return out;
}

TensorPtr sum(Tape& tape, const TensorPtr& x) {
    auto out = make_output(tape, Shape{1}, x);
    double acc = 0.0;
    for (const double v : x->data) acc += v;
    out->data[0] = acc;
    check_finite(*out, "sum");
    if (out->requires_grad) {
        tape.record(out, [x = x, out]() {
            const double g = out->grad[0];
            for (auto& gi : x->grad) gi += g;
        });
    }
    return out;
}

TensorPtr dot(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_rank("dot", a, 1);
    require_same_shape("dot", a, b);
    auto out = make_output(tape, Shape{1}, a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a->data.size(); ++i) acc += a->data[i] * b->data[i];
    out->data[0] = acc;
    check_finite(*out, "dot");
    if (out->requires_grad) {
        tape.record(out, [a = a, b = b, out]() {
            const double g = out->grad[0];
            if (a->requires_grad) {
                for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += g * b->data[i];
            }
            if (b->requires_grad) {
                for (std::size_t i = 0; i < b->grad.size(); ++i) b->grad[i] += g * a->data[i];
            }
        });
    }
    return out;
}

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_rank("matmul", a, 2);
    const bool vec = b->shape.size() == 1;
    if (!vec) require_rank("matmul", b, 2);
    const std::int64_t p = a->shape[0];
    const std::int64_t q = a->shape[1];
    const std::int64_t r = vec ? 1 : b->shape[1];
    if (b->shape[0] != q) {
        throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a->shape) + " vs " +
                         shape_str(b->shape));
    }
    auto out = make_output(tape, vec ? Shape{p} : Shape{p, r}, a, b);
    gemm_nn(a->data.data(), b->data.data(), out->data.data(), p, q, r);
    check_finite(*out, "matmul");
    if (out->requires_grad) {
        tape.record(out, [a = a, b = b, out, p, q, r]() {
            if (a->requires_grad)
                gemm_nt(out->grad.data(), b->data.data(), a->grad.data(), p, r, q);
            if (b->requires_grad)
                gemm_tn(a->data.data(), out->grad.data(), b->grad.data(), q, p, r);
        });
    }
    return out;
}

TensorPtr bias_add(Tape& tape, const TensorPtr& x, const TensorPtr& bias) {
    require_rank("bias_add", bias, 1);
    if (x->shape.size() == 1) return add(tape, x, bias);
    require_rank("bias_add", x, 3);
    if (x->shape[0] != bias->shape[0]) {
        throw ShapeError("bias_add: channel count " + shape_str(x->shape) +
                         " does not match bias " + shape_str(bias->shape));
    }
    const std::int64_t channels = x->shape[0];
    const std::int64_t plane = x->shape[1] * x->shape[2];
    auto out = make_output(tape, x->shape, x, bias);
    for (std::int64_t c = 0; c < channels; ++c) {
        const double bv = bias->data[static_cast<std::size_t>(c)];
        for (std::int64_t i = 0; i < plane; ++i)
            out->data[static_cast<std::size_t>(c * plane + i)] =
                x->data[static_cast<std::size_t>(c * plane + i)] + bv;
    }
    check_finite(*out, "bias_add");
    if (out->requires_grad) {
        tape.record(out, [x = x, bias = bias, out, channels, plane]() {
            if (x->requires_grad) accumulate(x, out->grad);
            if (bias->requires_grad) {
                for (std::int64_t c = 0; c < channels; ++c) {
                    double acc = 0.0;
                    for (std::int64_t i = 0; i < plane; ++i)
                        acc += out->grad[static_cast<std::size_t>(c * plane + i)];
                    bias->grad[static_cast<std::size_t>(c)] += acc;
                }
            }
        });
    }
    return out;
}

TensorPtr leaky_relu(Tape& tape, const TensorPtr& x, double slope) {
    if (slope < 0.0 || slope >= 1.0) {
        throw ValueError("leaky_relu: slope must lie in [0,1), got " + std::to_string(slope));
    }
    auto out = make_output(tape, x->shape, x);
    for (std::size_t i = 0; i < out->data.size(); ++i) {
        const double v = x->data[i];
        out->data[i] = v > 0.0 ? v : slope * v;
    }
    check_finite(*out, "leaky_relu");
    if (out->requires_grad) {
        tape.record(out, [x = x, out, slope]() {
            for (std::size_t i = 0; i < out->grad.size(); ++i)
                x->grad[i] += out->grad[i] * (x->data[i] > 0.0 ? 1.0 : slope);
        });
    }
    return out;
}

TensorPtr conv2d(Tape& tape, const TensorPtr& x, const TensorPtr& kernels, int stride,
                 int padding) {
    require_rank("conv2d", x, 3);
    require_rank("conv2d", kernels, 4);
    if (stride < 1) throw ValueError("conv2d: stride must be >= 1");
    if (padding < 0) throw ValueError("conv2d: padding must be >= 0");
    const std::int64_t c_in = x->shape[0], h = x->shape[1], w = x->shape[2];
    const std::int64_t c_out = kernels->shape[0], kh = kernels->shape[2], kw = kernels->shape[3];
    if (kernels->shape[1] != c_in) {
        throw ShapeError("conv2d: input channels " + shape_str(x->shape) +
                         " do not match kernels " + shape_str(kernels->shape));
    }
    const std::int64_t oh = conv_out_dim(h, kh, stride, padding);
    const std::int64_t ow = conv_out_dim(w, kw, stride, padding);
    if (oh < 1 || ow < 1) {
        throw ShapeError("conv2d: nonpositive output size for input " + shape_str(x->shape) +
                         ", kernel " + shape_str(kernels->shape) + ", stride " +
                         std::to_string(stride) + ", padding " + std::to_string(padding));
    }

    // im2col: patches [c_in*kh*kw x oh*ow], out = kernels * patches.
    const std::int64_t patch = c_in * kh * kw;
    const std::int64_t cols = oh * ow;
    std::vector<double> patches(static_cast<std::size_t>(patch * cols), 0.0);
    for (std::int64_t ci = 0; ci < c_in; ++ci) {
        for (std::int64_t ki = 0; ki < kh; ++ki) {
            for (std::int64_t kj = 0; kj < kw; ++kj) {
                const std::int64_t prow = (ci * kh + ki) * kw + kj;
                for (std::int64_t oi = 0; oi < oh; ++oi) {
                    const std::int64_t ii = oi * stride - padding + ki;
                    if (ii < 0 || ii >= h) continue;
                    const double* src = x->data.data() + (ci * h + ii) * w;
                    double* dst = patches.data() + prow * cols + oi * ow;
                    for (std::int64_t oj = 0; oj < ow; ++oj) {
                        const std::int64_t jj = oj * stride - padding + kj;
                        if (jj >= 0 && jj < w) dst[oj] = src[jj];
                    }
                }
            }
        }
    }

    auto out = make_output(tape, Shape{c_out, oh, ow}, x, kernels);
    gemm_nn(kernels->data.data(), patches.data(), out->data.data(), c_out, patch, cols);
    check_finite(*out, "conv2d");

    if (out->requires_grad) {
        tape.record(out, [x = x, kernels = kernels, out, patches = std::move(patches), c_in, h, w,
                          c_out, kh, kw, oh, ow, stride, padding]() {
            const std::int64_t patch = c_in * kh * kw;
            const std::int64_t cols = oh * ow;
            if (kernels->requires_grad) {
                gemm_nt(out->grad.data(), patches.data(), kernels->grad.data(), c_out, cols,
                        patch);
            }
            if (x->requires_grad) {
                std::vector<double> gpatches(static_cast<std::size_t>(patch * cols), 0.0);
                gemm_tn(kernels->data.data(), out->grad.data(), gpatches.data(), patch, c_out,
                        cols);
                for (std::int64_t ci = 0; ci < c_in; ++ci) {
                    for (std::int64_t ki = 0; ki < kh; ++ki) {
                        for (std::int64_t kj = 0; kj < kw; ++kj) {
                            const std::int64_t prow = (ci * kh + ki) * kw + kj;
                            for (std::int64_t oi = 0; oi < oh; ++oi) {
                                const std::int64_t ii = oi * stride - padding + ki;
                                if (ii < 0 || ii >= h) continue;
                                double* dst = x->grad.data() + (ci * h + ii) * w;
                                const double* src = gpatches.data() + prow * cols + oi * ow;
                                for (std::int64_t oj = 0; oj < ow; ++oj) {
                                    const std::int64_t jj = oj * stride - padding + kj;
                                    if (jj >= 0 && jj < w) dst[jj] += src[oj];
                                }
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr max_pool2d(Tape& tape, const TensorPtr& x, int window, int stride) {
    require_rank("max_pool2d", x, 3);
    if (window < 1 || stride < 1) throw ValueError("max_pool2d: window and stride must be >= 1");
    const std::int64_t c = x->shape[0], h = x->shape[1], w = x->shape[2];
    const std::int64_t oh = conv_out_dim(h, window, stride, 0);
    const std::int64_t ow = conv_out_dim(w, window, stride, 0);
    if (oh < 1 || ow < 1) {
        throw ShapeError("max_pool2d: window " + std::to_string(window) +
                         " exceeds input " + shape_str(x->shape));
    }
    auto out = make_output(tape, Shape{c, oh, ow}, x);
    std::vector<std::int64_t> argmax(static_cast<std::size_t>(c * oh * ow));
    for (std::int64_t ci = 0; ci < c; ++ci) {
        for (std::int64_t oi = 0; oi < oh; ++oi) {
            for (std::int64_t oj = 0; oj < ow; ++oj) {
                double best = -std::numeric_limits<double>::infinity();
                std::int64_t best_idx = -1;
                for (std::int64_t ki = 0; ki < window; ++ki) {
                    for (std::int64_t kj = 0; kj < window; ++kj) {
                        const std::int64_t ii = oi * stride + ki;
                        const std::int64_t jj = oj * stride + kj;
                        if (ii >= h || jj >= w) continue;
                        const std::int64_t idx = (ci * h + ii) * w + jj;
                        const double v = x->data[static_cast<std::size_t>(idx)];
                        if (v > best) {
                            best = v;
                            best_idx = idx;
                        }
                    }
                }
                const std::int64_t oidx = (ci * oh + oi) * ow + oj;
                out->data[static_cast<std::size_t>(oidx)] = best;
                argmax[static_cast<std::size_t>(oidx)] = best_idx;
            }
        }
    }
    check_finite(*out, "max_pool2d");
    if (out->requires_grad) {
        tape.record(out, [x = x, out, argmax = std::move(argmax)]() {
            for (std::size_t i = 0; i < out->grad.size(); ++i)
                x->grad[static_cast<std::size_t>(argmax[i])] += out->grad[i];
        });
    }
    return out;
}

TensorPtr set_max_pool(Tape& tape, std::span<const TensorPtr> frames) {
    if (frames.empty()) throw ValueError("set_max_pool: empty sequence");
    const Shape& shape = frames[0]->shape;
    for (const auto& f : frames) {
        if (f->shape != shape) {
            throw ShapeError("set_max_pool: frame shape " + shape_str(f->shape) +
                             " differs from " + shape_str(shape));
        }
    }
    std::vector<TensorPtr> kept(frames.begin(), frames.end());
    auto out = make_output(tape, shape, frames);
    const std::size_t n = out->data.size();
    std::vector<std::int32_t> argmax(n, 0);
    out->data = kept[0]->data;
    for (std::size_t t = 1; t < kept.size(); ++t) {
        const auto& fd = kept[t]->data;
        for (std::size_t i = 0; i < n; ++i) {
            if (fd[i] > out->data[i]) {
                out->data[i] = fd[i];
                argmax[i] = static_cast<std::int32_t>(t);
            }
        }
    }
    check_finite(*out, "set_max_pool");
    if (out->requires_grad) {
        tape.record(out, [kept = std::move(kept), out, argmax = std::move(argmax)]() {
            for (std::size_t i = 0; i < out->grad.size(); ++i) {
                const auto& src = kept[static_cast<std::size_t>(argmax[i])];
                if (src->requires_grad) src->grad[i] += out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr global_avg_pool(Tape& tape, const TensorPtr& x) {
    require_rank("global_avg_pool", x, 3);
    const std::int64_t c = x->shape[0];
    const std::int64_t plane = x->shape[1] * x->shape[2];
    auto out = make_output(tape, Shape{c}, x);
    for (std::int64_t ci = 0; ci < c; ++ci) {
        double acc = 0.0;
        const double* src = x->data.data() + ci * plane;
        for (std::int64_t i = 0; i < plane; ++i) acc += src[i];
        out->data[static_cast<std::size_t>(ci)] = acc / static_cast<double>(plane);
    }
    check_finite(*out, "global_avg_pool");
    if (out->requires_grad) {
        tape.record(out, [x = x, out, c, plane]() {
            const double inv = 1.0 / static_cast<double>(plane);
            for (std::int64_t ci = 0; ci < c; ++ci) {
                const double g = out->grad[static_cast<std::size_t>(ci)] * inv;
                double* dst = x->grad.data() + ci * plane;
                for (std::int64_t i = 0; i < plane; ++i) dst[i] += g;
            }
        });
    }
    return out;
}

TensorPtr band_maxmean_pool(Tape& tape, const TensorPtr& x, std::int64_t row_begin,
                            std::int64_t row_end) {
    require_rank("band_maxmean_pool", x, 3);
    const std::int64_t c = x->shape[0], h = x->shape[1], w = x->shape[2];
    if (row_begin < 0 || row_end > h || row_begin >= row_end) {
        throw ValueError("band_maxmean_pool: band [" + std::to_string(row_begin) + "," +
                         std::to_string(row_end) + ") out of range for " + shape_str(x->shape));
    }
    const std::int64_t band = (row_end - row_begin) * w;
    auto out = make_output(tape, Shape{c}, x);
    std::vector<std::int64_t> argmax(static_cast<std::size_t>(c));
    for (std::int64_t ci = 0; ci < c; ++ci) {
        double best = -std::numeric_limits<double>::infinity();
        std::int64_t best_idx = -1;
        double acc = 0.0;
        for (std::int64_t r = row_begin; r < row_end; ++r) {
            const double* src = x->data.data() + (ci * h + r) * w;
            for (std::int64_t j = 0; j < w; ++j) {
                acc += src[j];
                if (src[j] > best) {
                    best = src[j];
                    best_idx = (ci * h + r) * w + j;
                }
            }
        }
        out->data[static_cast<std::size_t>(ci)] = best + acc / static_cast<double>(band);
        argmax[static_cast<std::size_t>(ci)] = best_idx;
    }
    check_finite(*out, "band_maxmean_pool");
    if (out->requires_grad) {
        tape.record(out, [x = x, out, argmax = std::move(argmax), row_begin, row_end, c, h, w,
                          band]() {
            const double inv = 1.0 / static_cast<double>(band);
            for (std::int64_t ci = 0; ci < c; ++ci) {
                const double g = out->grad[static_cast<std::size_t>(ci)];
                x->grad[static_cast<std::size_t>(argmax[static_cast<std::size_t>(ci)])] += g;
                for (std::int64_t r = row_begin; r < row_end; ++r) {
                    double* dst = x->grad.data() + (ci * h + r) * w;
                    for (std::int64_t j = 0; j < w; ++j) dst[j] += g * inv;
                }
            }
        });
    }
    return out;
}

TensorPtr concat(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_rank("concat", a, 1);
    require_rank("concat", b, 1);
    const std::int64_t p = a->shape[0], q = b->shape[0];
    auto out = make_output(tape, Shape{p + q}, a, b);
    std::copy(a->data.begin(), a->data.end(), out->data.begin());
    std::copy(b->data.begin(), b->data.end(), out->data.begin() + p);
    check_finite(*out, "concat");
    if (out->requires_grad) {
        tape.record(out, [a = a, b = b, out, p]() {
            if (a->requires_grad) {
                for (std::int64_t i = 0; i < p; ++i)
                    a->grad[static_cast<std::size_t>(i)] += out->grad[static_cast<std::size_t>(i)];
            }
            if (b->requires_grad) {
                for (std::size_t i = static_cast<std::size_t>(p); i < out->grad.size(); ++i)
                    b->grad[i - static_cast<std::size_t>(p)] += out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr concat_channels(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    require_rank("concat_channels", a, 3);
    require_rank("concat_channels", b, 3);
    if (a->shape[1] != b->shape[1] || a->shape[2] != b->shape[2]) {
        throw ShapeError("concat_channels: spatial sizes differ, " + shape_str(a->shape) +
                         " vs " + shape_str(b->shape));
    }
    auto out = make_output(tape, Shape{a->shape[0] + b->shape[0], a->shape[1], a->shape[2]}, a, b);
    std::copy(a->data.begin(), a->data.end(), out->data.begin());
    std::copy(b->data.begin(), b->data.end(),
              out->data.begin() + static_cast<std::ptrdiff_t>(a->data.size()));
    check_finite(*out, "concat_channels");
    if (out->requires_grad) {
        const std::size_t split = a->data.size();
        tape.record(out, [a = a, b = b, out, split]() {
            if (a->requires_grad) {
                for (std::size_t i = 0; i < split; ++i) a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                for (std::size_t i = split; i < out->grad.size(); ++i)
                    b->grad[i - split] += out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr stack_rows(Tape& tape, std::span<const TensorPtr> rows) {
    if (rows.empty()) throw ValueError("stack_rows: empty row list");
    const std::int64_t d = rows[0]->numel();
    for (const auto& r : rows) {
        require_rank("stack_rows", r, 1);
        if (r->numel() != d) {
            throw ShapeError("stack_rows: row length " + shape_str(r->shape) +
                             " differs from " + shape_str(rows[0]->shape));
        }
    }
    std::vector<TensorPtr> kept(rows.begin(), rows.end());
    auto out = make_output(tape, Shape{static_cast<std::int64_t>(kept.size()), d}, rows);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        std::copy(kept[i]->data.begin(), kept[i]->data.end(),
                  out->data.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(d)));
    }
    check_finite(*out, "stack_rows");
    if (out->requires_grad) {
        tape.record(out, [kept = std::move(kept), out, d]() {
            for (std::size_t i = 0; i < kept.size(); ++i) {
                if (!kept[i]->requires_grad) continue;
                const double* g = out->grad.data() + i * static_cast<std::size_t>(d);
                for (std::int64_t j = 0; j < d; ++j)
                    kept[i]->grad[static_cast<std::size_t>(j)] += g[j];
            }
        });
    }
    return out;
}

}  // namespace vige::ops
