#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glead/autograd.hpp"
#include "glead/rng.hpp"

namespace glead {

// Named parameter store. Initialization draws an independent RNG stream per
// parameter path, so two networks that share a submodule (and the seed) get
// identical weights for it regardless of what else either network contains.
template <typename T>
class ParamRegistry {
public:
    explicit ParamRegistry(uint64_t seed = 0) : seed_(seed) {}

    uint64_t seed() const { return seed_; }

    Var<T> create(const std::string& path, Tensor<T> init, bool trainable = true) {
        check_config(!index_.count(path), "duplicate parameter path: ", path);
        Var<T> v(std::move(init), trainable);
        index_[path] = entries_.size();
        entries_.push_back({path, v, trainable});
        return v;
    }

    Var<T> create_randn(const std::string& path, Shape shape, T stddev = T(1),
                        bool trainable = true) {
        Rng rng = Rng::from_label(seed_, path);
        return create(path, Tensor<T>::randn(std::move(shape), rng, stddev), trainable);
    }

    Var<T> create_full(const std::string& path, Shape shape, T value, bool trainable = true) {
        return create(path, Tensor<T>::full(std::move(shape), value), trainable);
    }

    struct Entry {
        std::string path;
        Var<T> var;
        bool trainable;
    };

    const std::vector<Entry>& entries() const { return entries_; }

    bool has(const std::string& path) const { return index_.count(path) != 0; }

    Var<T> at(const std::string& path) const {
        auto it = index_.find(path);
        check_config(it != index_.end(), "unknown parameter path: ", path);
        return entries_[it->second].var;
    }

    std::vector<Var<T>> trainable_params() const {
        std::vector<Var<T>> out;
        for (const auto& e : entries_)
            if (e.trainable) out.push_back(e.var);
        return out;
    }

    int64_t count_params(const std::string& prefix = {}) const {
        int64_t n = 0;
        for (const auto& e : entries_)
            if (e.path.rfind(prefix, 0) == 0) n += e.var.numel();
        return n;
    }

    // Per-submodule parameter counts, one level below `prefix`.
    std::map<std::string, int64_t> describe(const std::string& prefix = {}) const {
        std::map<std::string, int64_t> out;
        for (const auto& e : entries_) {
            if (e.path.rfind(prefix, 0) != 0) continue;
            std::string rest = e.path.substr(prefix.size());
            if (!rest.empty() && rest[0] == '.') rest = rest.substr(1);
            std::string head = rest.substr(0, rest.find('.'));
            out[head] += e.var.numel();
        }
        return out;
    }

    uint64_t checksum(const std::string& prefix = {}) const {
        uint64_t h = 1469598103934665603ull;
        for (const auto& e : entries_) {
            if (e.path.rfind(prefix, 0) != 0) continue;
            uint64_t c = tensor_checksum(e.var.value());
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }

    void set_requires_grad(bool on) {
        for (auto& e : entries_)
            if (e.trainable) e.var.impl()->requires_grad = on;
    }

    void zero_grads() {
        for (auto& e : entries_) e.var.zero_grad();
    }

private:
    uint64_t seed_;
    std::vector<Entry> entries_;
    std::map<std::string, size_t> index_;
};

// Fully connected layer with runtime weight scaling (equalized learning
// rate). Raw weights are N(0,1)/lr_mult; the effective weight is
// raw * lr_mult / sqrt(fan_in).
template <typename T>
struct EqLinear {
    Var<T> weight;  // [out, in]
    Var<T> bias;    // [out]
    T weight_coef = T(1);
    T bias_coef = T(1);

    EqLinear() = default;
    EqLinear(ParamRegistry<T>& reg, const std::string& path, int64_t in, int64_t out,
             T lr_mult = T(1), T bias_init = T(0)) {
        weight = reg.create_randn(path + ".weight", {out, in}, T(1) / lr_mult);
        bias = reg.create_full(path + ".bias", {out}, bias_init);
        weight_coef = lr_mult / T(std::sqrt(double(in)));
        bias_coef = lr_mult;
    }

    Var<T> forward(const Var<T>& x) const {
        Var<T> y = matmul(x, transpose(scale(weight, weight_coef)));
        return add_bias_rows(y, bias_coef == T(1) ? bias : scale(bias, bias_coef));
    }
};

// Plain (unmodulated) convolution with equalized scaling, stride 1, same-size.
template <typename T>
struct EqConv2d {
    Var<T> weight;  // [out, in, k, k]
    Var<T> bias;    // [out]; undefined when bias is disabled
    int pad = 0;
    T weight_coef = T(1);

    EqConv2d() = default;
    EqConv2d(ParamRegistry<T>& reg, const std::string& path, int64_t in, int64_t out, int64_t k,
             bool with_bias = true) {
        weight = reg.create_randn(path + ".weight", {out, in, k, k});
        if (with_bias) bias = reg.create_full(path + ".bias", {out}, T(0));
        pad = int(k - 1) / 2;
        weight_coef = T(1) / T(std::sqrt(double(in * k * k)));
    }

    Var<T> forward(const Var<T>& x) const {
        Var<T> y = conv2d(x, scale(weight, weight_coef), pad);
        if (bias.defined()) y = add_bias_nchw(y, bias);
        return y;
    }

    int64_t kernel() const { return weight.dim(2); }
};

// Style-modulated convolution: per-sample input scaling by the affine-mapped
// style, followed by weight demodulation (both folded out of the weight so a
// single shared-weight convolution suffices).
template <typename T>
struct ModulatedConv2d {
    EqLinear<T> affine;  // w -> per-input-channel style, bias init 1
    Var<T> weight;       // [out, in, k, k]
    Var<T> bias;         // [out]
    bool demodulate = true;
    int pad = 0;
    T weight_coef = T(1);

    ModulatedConv2d() = default;
    ModulatedConv2d(ParamRegistry<T>& reg, const std::string& path, int64_t in, int64_t out,
                    int64_t k, int64_t w_dim, bool demod) {
        affine = EqLinear<T>(reg, path + ".affine", w_dim, in, T(1), T(1));
        weight = reg.create_randn(path + ".weight", {out, in, k, k});
        bias = reg.create_full(path + ".bias", {out}, T(0));
        demodulate = demod;
        pad = int(k - 1) / 2;
        weight_coef = T(1) / T(std::sqrt(double(in * k * k)));
    }

    Var<T> forward(const Var<T>& x, const Var<T>& w_style) const {
        const int64_t N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
        const int64_t Co = weight.dim(0);
        Var<T> s = affine.forward(w_style);  // [N, Ci]
        check_contract(s.dim(0) == N && s.dim(1) == Ci, "modulated conv: style shape ",
                       shape_str(s.shape()), " does not match input channels ", Ci);
        Var<T> w_eff = scale(weight, weight_coef);

        Var<T> xs = mul(x, reshape(broadcast_mid(reshape(s, {N * Ci, 1}), N * Ci, H * W, 1),
                                   {N, Ci, H, W}));
        Var<T> y = conv2d(xs, w_eff, pad);
        if (demodulate) {
            // ||w*s||^2 per (sample, out) channel via s^2 . sum_k(w^2)
            Var<T> k2 = sum_axis(reshape(square(w_eff), {Co, Ci, weight.dim(2) * weight.dim(3)}), 2);
            Var<T> norms = matmul(square(s), transpose(reshape(k2, {Co, Ci})));  // [N, Co]
            Var<T> d = reciprocal(vsqrt(add_scalar(norms, T(1e-8))));
            y = mul(y, reshape(broadcast_mid(reshape(d, {N * Co, 1}), N * Co, H * W, 1),
                               {N, Co, H, W}));
        }
        return add_bias_nchw(y, bias);
    }
};

// Adam with bias correction; beta1=0 by default per the training defaults.
template <typename T>
class Adam {
public:
    Adam() = default;
    Adam(std::vector<Var<T>> params, T lr, T beta1 = T(0), T beta2 = T(0.99), T eps = T(1e-8))
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (auto& p : params_) slots_.push_back({Tensor<T>(p.shape()), Tensor<T>(p.shape())});
    }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    void step() {
        ++t_;
        const T c1 = T(1) - std::pow(beta1_, T(t_));
        const T c2 = T(1) - std::pow(beta2_, T(t_));
        for (size_t i = 0; i < params_.size(); ++i) {
            Var<T>& p = params_[i];
            if (!p.grad().defined()) continue;
            T* m = slots_[i].m.mutable_data();
            T* v = slots_[i].v.mutable_data();
            const T* g = p.grad().data();
            T* w = p.mutable_value().mutable_data();
            for (int64_t j = 0; j < p.numel(); ++j) {
                m[j] = beta1_ * m[j] + (T(1) - beta1_) * g[j];
                v[j] = beta2_ * v[j] + (T(1) - beta2_) * g[j] * g[j];
                w[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
            }
        }
    }

    int64_t steps() const { return t_; }
    const std::vector<Var<T>>& params() const { return params_; }

    // Checkpoint access: slots are serialized as named blobs next to params.
    struct Slot {
        Tensor<T> m, v;
    };
    std::vector<Slot>& slots() { return slots_; }
    void set_steps(int64_t t) { t_ = t; }

private:
    std::vector<Var<T>> params_;
    std::vector<Slot> slots_;
    int64_t t_ = 0;
    T lr_ = T(1e-3), beta1_ = T(0), beta2_ = T(0.99), eps_ = T(1e-8);
};

}  // namespace glead
