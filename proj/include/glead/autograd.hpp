#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "glead/kernels.hpp"
#include "glead/tensor.hpp"

// Reverse-mode tape. Every backward rule is itself written in terms of the
// primitives below, so differentiating a gradient (create_graph) works for
// any composition; the R1 penalty relies on that.

namespace glead {

template <typename T>
class Var;

namespace autograd_detail {
inline thread_local bool grad_enabled = true;
}

struct NoGradGuard {
    bool prev;
    NoGradGuard() : prev(autograd_detail::grad_enabled) { autograd_detail::grad_enabled = false; }
    ~NoGradGuard() { autograd_detail::grad_enabled = prev; }
};

struct GradModeGuard {
    bool prev;
    explicit GradModeGuard(bool on) : prev(autograd_detail::grad_enabled) {
        autograd_detail::grad_enabled = on;
    }
    ~GradModeGuard() { autograd_detail::grad_enabled = prev; }
};

inline bool grad_mode() { return autograd_detail::grad_enabled; }

template <typename T>
struct Node {
    const char* name;
    std::vector<Var<T>> inputs;
    // Returns one grad per input; an undefined Var means "no gradient".
    std::function<std::vector<Var<T>>(const Var<T>&)> backward;
};

template <typename T>
struct VarImpl {
    Tensor<T> value;
    std::shared_ptr<Node<T>> node;  // null for leaves and constants
    bool requires_grad = false;
    Tensor<T> grad;  // leaf accumulator, used for parameters
};

template <typename T>
class Var {
public:
    Var() = default;
    explicit Var(Tensor<T> value, bool requires_grad = false) {
        impl_ = std::make_shared<VarImpl<T>>();
        impl_->value = std::move(value);
        impl_->requires_grad = requires_grad;
    }

    bool defined() const { return impl_ != nullptr; }
    const Tensor<T>& value() const { return impl_->value; }
    Tensor<T>& mutable_value() { return impl_->value; }
    const Shape& shape() const { return impl_->value.shape(); }
    int64_t dim(size_t i) const { return impl_->value.dim(i); }
    int64_t numel() const { return impl_->value.numel(); }
    bool requires_grad() const { return impl_ && impl_->requires_grad; }
    VarImpl<T>* impl() const { return impl_.get(); }
    const std::shared_ptr<Node<T>>& node() const { return impl_->node; }

    T item() const {
        check_contract(numel() == 1, "item() on tensor with ", numel(), " elements");
        return impl_->value.at(0);
    }

    // Leaf gradient accumulator (parameters).
    Tensor<T>& grad() { return impl_->grad; }
    const Tensor<T>& grad() const { return impl_->grad; }
    void zero_grad() {
        if (impl_->grad.defined())
            std::fill(impl_->grad.mutable_data(), impl_->grad.mutable_data() + impl_->grad.numel(), T(0));
    }
    void accumulate_grad(const Tensor<T>& g) {
        if (!impl_->grad.defined()) impl_->grad = Tensor<T>(impl_->value.shape());
        T* dst = impl_->grad.mutable_data();
        const T* src = g.data();
        for (int64_t i = 0; i < g.numel(); ++i) dst[i] += src[i];
    }

    // Same storage, outside the graph.
    Var detach() const { return Var(impl_->value, false); }

    static Var make_op(const char* name, Tensor<T> value, std::vector<Var> inputs,
                       std::function<std::vector<Var<T>>(const Var<T>&)> backward) {
        bool track = grad_mode();
        bool any = false;
        if (track)
            for (const auto& in : inputs)
                if (in.requires_grad()) any = true;
        Var out(std::move(value), track && any);
        if (track && any) {
            out.impl_->node = std::make_shared<Node<T>>();
            out.impl_->node->name = name;
            out.impl_->node->inputs = std::move(inputs);
            out.impl_->node->backward = std::move(backward);
        }
        return out;
    }

private:
    std::shared_ptr<VarImpl<T>> impl_;
};

template <typename T>
Var<T> constant(Tensor<T> t) {
    return Var<T>(std::move(t), false);
}

// ---------------------------------------------------------------------------
// Elementwise primitives
// ---------------------------------------------------------------------------

namespace ew {
template <typename T, typename F>
Tensor<T> map(const Tensor<T>& a, F f) {
    Tensor<T> y(a.shape());
    const T* ap = a.data();
    T* yp = y.mutable_data();
    for (int64_t i = 0; i < a.numel(); ++i) yp[i] = f(ap[i]);
    return y;
}
template <typename T, typename F>
Tensor<T> zip(const Tensor<T>& a, const Tensor<T>& b, F f) {
    check_contract(a.shape() == b.shape(), "elementwise op on shapes ", shape_str(a.shape()), " vs ",
                   shape_str(b.shape()));
    Tensor<T> y(a.shape());
    const T* ap = a.data();
    const T* bp = b.data();
    T* yp = y.mutable_data();
    for (int64_t i = 0; i < a.numel(); ++i) yp[i] = f(ap[i], bp[i]);
    return y;
}
}  // namespace ew

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    return Var<T>::make_op("add", ew::zip(a.value(), b.value(), [](T x, T y) { return x + y; }),
                           {a, b}, [](const Var<T>& g) { return std::vector<Var<T>>{g, g}; });
}

template <typename T>
Var<T> neg(const Var<T>& a) {
    return Var<T>::make_op("neg", ew::map(a.value(), [](T x) { return -x; }), {a},
                           [](const Var<T>& g) { return std::vector<Var<T>>{neg(g)}; });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
    return Var<T>::make_op("sub", ew::zip(a.value(), b.value(), [](T x, T y) { return x - y; }),
                           {a, b}, [](const Var<T>& g) { return std::vector<Var<T>>{g, neg(g)}; });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    return Var<T>::make_op("mul", ew::zip(a.value(), b.value(), [](T x, T y) { return x * y; }),
                           {a, b}, [a, b](const Var<T>& g) {
                               return std::vector<Var<T>>{mul(g, b), mul(g, a)};
                           });
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
    return Var<T>::make_op("div", ew::zip(a.value(), b.value(), [](T x, T y) { return x / y; }),
                           {a, b}, [a, b](const Var<T>& g) {
                               Var<T> ga = div(g, b);
                               Var<T> gb = neg(mul(ga, div(a, b)));
                               return std::vector<Var<T>>{ga, gb};
                           });
}

template <typename T>
Var<T> scale(const Var<T>& a, T c) {
    return Var<T>::make_op("scale", ew::map(a.value(), [c](T x) { return c * x; }), {a},
                           [c](const Var<T>& g) { return std::vector<Var<T>>{scale(g, c)}; });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T c) {
    return Var<T>::make_op("add_scalar", ew::map(a.value(), [c](T x) { return x + c; }), {a},
                           [](const Var<T>& g) { return std::vector<Var<T>>{g}; });
}

template <typename T>
Var<T> square(const Var<T>& a) {
    return Var<T>::make_op("square", ew::map(a.value(), [](T x) { return x * x; }), {a},
                           [a](const Var<T>& g) {
                               return std::vector<Var<T>>{scale(mul(g, a), T(2))};
                           });
}

template <typename T>
Var<T> vsqrt(const Var<T>& a) {
    return Var<T>::make_op("sqrt", ew::map(a.value(), [](T x) { return std::sqrt(x); }), {a},
                           [a](const Var<T>& g) {
                               return std::vector<Var<T>>{div(scale(g, T(0.5)), vsqrt(a))};
                           });
}

template <typename T>
Var<T> reciprocal(const Var<T>& a) {
    return Var<T>::make_op("reciprocal", ew::map(a.value(), [](T x) { return T(1) / x; }), {a},
                           [a](const Var<T>& g) {
                               return std::vector<Var<T>>{neg(div(g, square(a)))};
                           });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
    auto fn = [](T x) {
        return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
    };
    return Var<T>::make_op("sigmoid", ew::map(a.value(), fn), {a}, [a](const Var<T>& g) {
        Var<T> s = sigmoid(a);
        return std::vector<Var<T>>{mul(g, mul(s, add_scalar(neg(s), T(1))))};
    });
}

template <typename T>
Var<T> softplus(const Var<T>& a) {
    auto fn = [](T x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, T(0)); };
    return Var<T>::make_op("softplus", ew::map(a.value(), fn), {a}, [a](const Var<T>& g) {
        return std::vector<Var<T>>{mul(g, sigmoid(a))};
    });
}

// Fused slope/gain; the mask enters the backward as a constant.
template <typename T>
Var<T> leaky_relu(const Var<T>& a, T slope, T gain = T(1)) {
    auto fwd = ew::map(a.value(), [slope, gain](T x) { return gain * (x >= T(0) ? x : slope * x); });
    return Var<T>::make_op("leaky_relu", std::move(fwd), {a}, [a, slope, gain](const Var<T>& g) {
        Tensor<T> mask =
            ew::map(a.value(), [slope, gain](T x) { return x >= T(0) ? gain : slope * gain; });
        return std::vector<Var<T>>{mul(g, constant(std::move(mask)))};
    });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
    return leaky_relu(a, T(0), T(1));
}

// ---------------------------------------------------------------------------
// Shape primitives
// ---------------------------------------------------------------------------

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
    Shape prev = a.shape();
    return Var<T>::make_op("reshape", a.value().reshaped(std::move(shape)), {a},
                           [prev](const Var<T>& g) {
                               return std::vector<Var<T>>{reshape(g, prev)};
                           });
}

template <typename T>
Var<T> reduce_sum_mid(const Var<T>& a, int64_t outer, int64_t n, int64_t inner) {
    return Var<T>::make_op("reduce_sum_mid", kernels::reduce_sum_mid(a.value(), outer, n, inner),
                           {a}, [outer, n, inner, shape = a.shape()](const Var<T>& g) {
                               return std::vector<Var<T>>{
                                   reshape(broadcast_mid(g, outer, n, inner), shape)};
                           });
}

template <typename T>
Var<T> broadcast_mid(const Var<T>& a, int64_t outer, int64_t n, int64_t inner) {
    return Var<T>::make_op("broadcast_mid", kernels::broadcast_mid(a.value(), outer, n, inner),
                           {a}, [outer, n, inner, shape = a.shape()](const Var<T>& g) {
                               return std::vector<Var<T>>{
                                   reshape(reduce_sum_mid(g, outer, n, inner), shape)};
                           });
}

// Reductions along one axis of an ND tensor, axis removed from the result.
template <typename T>
Var<T> sum_axis(const Var<T>& a, size_t axis) {
    const Shape& s = a.shape();
    int64_t outer = 1, inner = 1;
    for (size_t i = 0; i < axis; ++i) outer *= s[i];
    for (size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    Shape out;
    for (size_t i = 0; i < s.size(); ++i)
        if (i != axis) out.push_back(s[i]);
    if (out.empty()) out = {1};
    return reshape(reduce_sum_mid(a, outer, s[axis], inner), out);
}

template <typename T>
Var<T> mean_axis(const Var<T>& a, size_t axis) {
    return scale(sum_axis(a, axis), T(1) / T(a.shape()[axis]));
}

template <typename T>
Var<T> sum_all(const Var<T>& a) {
    return reshape(reduce_sum_mid(a, 1, a.numel(), 1), {1});
}

template <typename T>
Var<T> mean_all(const Var<T>& a) {
    return scale(sum_all(a), T(1) / T(a.numel()));
}

// Insert an axis of size n at position `axis`, replicating.
template <typename T>
Var<T> broadcast_axis(const Var<T>& a, size_t axis, int64_t n) {
    const Shape& s = a.shape();
    int64_t outer = 1, inner = 1;
    for (size_t i = 0; i < axis; ++i) outer *= s[i];
    for (size_t i = axis; i < s.size(); ++i) inner *= s[i];
    Shape out;
    for (size_t i = 0; i < axis; ++i) out.push_back(s[i]);
    out.push_back(n);
    for (size_t i = axis; i < s.size(); ++i) out.push_back(s[i]);
    return reshape(broadcast_mid(reshape(a, {outer, inner}), outer, n, inner), out);
}

// ---------------------------------------------------------------------------
// Linear algebra / convolution primitives
// ---------------------------------------------------------------------------

template <typename T>
Var<T> transpose(const Var<T>& a) {
    return Var<T>::make_op("transpose", kernels::transpose2d(a.value()), {a},
                           [](const Var<T>& g) { return std::vector<Var<T>>{transpose(g)}; });
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
    return Var<T>::make_op("matmul", kernels::matmul(a.value(), b.value()), {a, b},
                           [a, b](const Var<T>& g) {
                               return std::vector<Var<T>>{matmul(g, transpose(b)),
                                                          matmul(transpose(a), g)};
                           });
}

template <typename T>
Var<T> flip_io(const Var<T>& w) {
    return Var<T>::make_op("flip_io", kernels::flip_io(w.value()), {w},
                           [](const Var<T>& g) { return std::vector<Var<T>>{flip_io(g)}; });
}

template <typename T>
Var<T> conv2d_grad_weight(const Var<T>& x, const Var<T>& g, int64_t k, int pad);

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, int pad) {
    return Var<T>::make_op("conv2d", kernels::conv2d(x.value(), w.value(), pad), {x, w},
                           [x, w, pad](const Var<T>& g) {
                               int64_t k = w.dim(2);
                               return std::vector<Var<T>>{conv2d(g, flip_io(w), pad),
                                                          conv2d_grad_weight(x, g, k, pad)};
                           });
}

template <typename T>
Var<T> conv2d_grad_weight(const Var<T>& x, const Var<T>& g, int64_t k, int pad) {
    return Var<T>::make_op("conv2d_grad_weight",
                           kernels::conv2d_grad_weight(x.value(), g.value(), k, pad), {x, g},
                           [x, g, k, pad](const Var<T>& gw) {
                               return std::vector<Var<T>>{conv2d(g, flip_io(gw), pad),
                                                          conv2d(x, gw, pad)};
                           });
}

template <typename T>
Var<T> upsample2x(const Var<T>& x);

template <typename T>
Var<T> upsample2x_adjoint(const Var<T>& g) {
    return Var<T>::make_op("upsample2x_adjoint", kernels::upsample2x_adjoint(g.value()), {g},
                           [](const Var<T>& gg) { return std::vector<Var<T>>{upsample2x(gg)}; });
}

template <typename T>
Var<T> upsample2x(const Var<T>& x) {
    return Var<T>::make_op("upsample2x", kernels::upsample2x(x.value()), {x}, [](const Var<T>& g) {
        return std::vector<Var<T>>{upsample2x_adjoint(g)};
    });
}

template <typename T>
Var<T> downsample2x(const Var<T>& x);

template <typename T>
Var<T> downsample2x_adjoint(const Var<T>& g) {
    return Var<T>::make_op("downsample2x_adjoint", kernels::downsample2x_adjoint(g.value()), {g},
                           [](const Var<T>& gg) { return std::vector<Var<T>>{downsample2x(gg)}; });
}

template <typename T>
Var<T> downsample2x(const Var<T>& x) {
    return Var<T>::make_op("downsample2x", kernels::downsample2x(x.value()), {x},
                           [](const Var<T>& g) {
                               return std::vector<Var<T>>{downsample2x_adjoint(g)};
                           });
}

// ---------------------------------------------------------------------------
// Channel concat/slice (NCHW, axis 1)
// ---------------------------------------------------------------------------

template <typename T>
Var<T> slice_channels(const Var<T>& x, int64_t c0, int64_t c1);

template <typename T>
Var<T> pad_channels(const Var<T>& x, int64_t c0, int64_t c_total) {
    const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    Tensor<T> out({N, c_total, H, W});
    const T* xp = x.value().data();
    T* op = out.mutable_data();
    for (int64_t n = 0; n < N; ++n)
        std::copy(xp + n * C * H * W, xp + (n + 1) * C * H * W, op + (n * c_total + c0) * H * W);
    return Var<T>::make_op("pad_channels", std::move(out), {x}, [c0, C](const Var<T>& g) {
        return std::vector<Var<T>>{slice_channels(g, c0, c0 + C)};
    });
}

template <typename T>
Var<T> slice_channels(const Var<T>& x, int64_t c0, int64_t c1) {
    const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    check_contract(0 <= c0 && c0 < c1 && c1 <= C, "slice_channels: bad range");
    Tensor<T> out({N, c1 - c0, H, W});
    const T* xp = x.value().data();
    T* op = out.mutable_data();
    for (int64_t n = 0; n < N; ++n)
        std::copy(xp + (n * C + c0) * H * W, xp + (n * C + c1) * H * W,
                  op + n * (c1 - c0) * H * W);
    return Var<T>::make_op("slice_channels", std::move(out), {x}, [c0, C](const Var<T>& g) {
        return std::vector<Var<T>>{pad_channels(g, c0, C)};
    });
}

template <typename T>
Var<T> concat_channels(const Var<T>& a, const Var<T>& b) {
    const int64_t N = a.dim(0), Ca = a.dim(1), Cb = b.dim(1), H = a.dim(2), W = a.dim(3);
    check_contract(b.dim(0) == N && b.dim(2) == H && b.dim(3) == W,
                   "concat_channels: mismatched shapes");
    Tensor<T> out({N, Ca + Cb, H, W});
    const T* ap = a.value().data();
    const T* bp = b.value().data();
    T* op = out.mutable_data();
    for (int64_t n = 0; n < N; ++n) {
        std::copy(ap + n * Ca * H * W, ap + (n + 1) * Ca * H * W, op + n * (Ca + Cb) * H * W);
        std::copy(bp + n * Cb * H * W, bp + (n + 1) * Cb * H * W,
                  op + (n * (Ca + Cb) + Ca) * H * W);
    }
    return Var<T>::make_op("concat_channels", std::move(out), {a, b}, [Ca, Cb](const Var<T>& g) {
        return std::vector<Var<T>>{slice_channels(g, 0, Ca), slice_channels(g, Ca, Ca + Cb)};
    });
}

// Per-channel bias on NCHW.
template <typename T>
Var<T> add_bias_nchw(const Var<T>& x, const Var<T>& b) {
    const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    check_contract(b.numel() == C, "add_bias_nchw: bias size ", b.numel(), " vs channels ", C);
    Tensor<T> out(x.shape());
    const T* xp = x.value().data();
    const T* bp = b.value().data();
    T* op = out.mutable_data();
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            const T bv = bp[c];
            const T* src = xp + (n * C + c) * H * W;
            T* dst = op + (n * C + c) * H * W;
            for (int64_t i = 0; i < H * W; ++i) dst[i] = src[i] + bv;
        }
    return Var<T>::make_op("add_bias_nchw", std::move(out), {x, b},
                           [N, C, H, W, bshape = b.shape()](const Var<T>& g) {
                               Var<T> gb = reshape(
                                   sum_axis(reshape(reduce_sum_mid(g, N * C, H * W, 1), {N, C}), 0),
                                   bshape);
                               return std::vector<Var<T>>{g, gb};
                           });
}

// Per-column bias on [N, M].
template <typename T>
Var<T> add_bias_rows(const Var<T>& x, const Var<T>& b) {
    const int64_t N = x.dim(0), M = x.dim(1);
    check_contract(b.numel() == M, "add_bias_rows: bias size ", b.numel(), " vs columns ", M);
    Tensor<T> out(x.shape());
    const T* xp = x.value().data();
    const T* bp = b.value().data();
    T* op = out.mutable_data();
    for (int64_t n = 0; n < N; ++n)
        for (int64_t m = 0; m < M; ++m) op[n * M + m] = xp[n * M + m] + bp[m];
    return Var<T>::make_op("add_bias_rows", std::move(out), {x, b},
                           [bshape = b.shape()](const Var<T>& g) {
                               return std::vector<Var<T>>{g, reshape(sum_axis(g, 0), bshape)};
                           });
}

// ---------------------------------------------------------------------------
// Backward engine
// ---------------------------------------------------------------------------

template <typename T>
using GradMap = std::unordered_map<const VarImpl<T>*, Var<T>>;

// Reverse-mode sweep from a scalar (or explicitly seeded) root. With
// create_graph the returned grads are themselves differentiable.
template <typename T>
GradMap<T> backward(const Var<T>& root, Var<T> seed = {}, bool create_graph = false) {
    GradMap<T> grads;
    if (!root.requires_grad()) return grads;
    if (!seed.defined()) {
        check_contract(root.numel() == 1, "backward from non-scalar requires an explicit seed");
        seed = constant(Tensor<T>::ones(root.shape()));
    }

    // Postorder DFS over nodes reachable through grad-requiring inputs.
    std::vector<VarImpl<T>*> order;
    std::unordered_set<VarImpl<T>*> seen;
    struct Frame {
        VarImpl<T>* impl;
        size_t next_input;
    };
    std::vector<Frame> stack;
    if (root.impl()->node) {
        stack.push_back({root.impl(), 0});
        seen.insert(root.impl());
    }
    while (!stack.empty()) {
        Frame& f = stack.back();
        Node<T>* node = f.impl->node.get();
        if (f.next_input < node->inputs.size()) {
            const Var<T>& in = node->inputs[f.next_input++];
            VarImpl<T>* ii = in.impl();
            if (in.requires_grad() && ii->node && !seen.count(ii)) {
                seen.insert(ii);
                stack.push_back({ii, 0});
            }
        } else {
            order.push_back(f.impl);
            stack.pop_back();
        }
    }

    grads[root.impl()] = seed;
    GradModeGuard guard(create_graph);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        VarImpl<T>* impl = *it;
        auto git = grads.find(impl);
        if (git == grads.end()) continue;
        Var<T> g = git->second;
        std::vector<Var<T>> input_grads = impl->node->backward(g);
        check_contract(input_grads.size() == impl->node->inputs.size(),
                       "backward of ", impl->node->name, " returned wrong grad count");
        for (size_t i = 0; i < input_grads.size(); ++i) {
            const Var<T>& in = impl->node->inputs[i];
            if (!in.requires_grad() || !input_grads[i].defined()) continue;
            check_contract(input_grads[i].shape() == in.shape(), "backward of ", impl->node->name,
                           " produced grad shape ", shape_str(input_grads[i].shape()), " for input ",
                           shape_str(in.shape()));
            auto ait = grads.find(in.impl());
            if (ait == grads.end())
                grads.emplace(in.impl(), input_grads[i]);
            else
                ait->second = add(ait->second, input_grads[i]);
        }
    }
    return grads;
}

// Gradient of a scalar w.r.t. an explicit list of variables (undefined -> zeros).
template <typename T>
std::vector<Tensor<T>> grad(const Var<T>& root, const std::vector<Var<T>>& wrt,
                            bool create_graph = false) {
    GradMap<T> grads = backward(root, {}, create_graph);
    std::vector<Tensor<T>> out;
    out.reserve(wrt.size());
    for (const auto& v : wrt) {
        auto it = grads.find(v.impl());
        out.push_back(it == grads.end() ? Tensor<T>::zeros(v.shape()) : it->second.value());
    }
    return out;
}

// As grad(), but keeps the result in the graph (for create_graph chains).
template <typename T>
Var<T> grad_var(const Var<T>& root, const Var<T>& wrt, bool create_graph) {
    GradMap<T> grads = backward(root, {}, create_graph);
    auto it = grads.find(wrt.impl());
    if (it == grads.end()) return constant(Tensor<T>::zeros(wrt.shape()));
    return it->second;
}

// Accumulate leaf .grad fields for training steps.
template <typename T>
void backward_into_leaves(const Var<T>& root, const std::vector<Var<T>>& leaves) {
    GradMap<T> grads = backward(root, {}, false);
    for (auto v : leaves) {
        auto it = grads.find(v.impl());
        if (it != grads.end()) v.accumulate_grad(it->second.value());
    }
}

}  // namespace glead
