#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "glead/common.hpp"
#include "glead/rng.hpp"

namespace glead {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// Dense contiguous tensor. Storage is shared between copies; nothing mutates
// a buffer after it is published except parameter updates, which go through
// mutable_data() on buffers the optimizer owns exclusively.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape)
        : shape_(std::move(shape)),
          data_(std::make_shared<std::vector<T>>(size_t(shape_numel(shape_)), T(0))) {}
    Tensor(Shape shape, std::shared_ptr<std::vector<T>> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        check_contract(int64_t(data_->size()) == shape_numel(shape_), "tensor storage size ",
                       data_->size(), " does not match shape ", shape_str(shape_));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, T v) {
        Tensor t(std::move(shape));
        std::fill(t.mutable_data(), t.mutable_data() + t.numel(), v);
        return t;
    }

    static Tensor ones(Shape shape) { return full(std::move(shape), T(1)); }

    static Tensor scalar(T v) { return full({1}, v); }

    static Tensor randn(Shape shape, Rng& rng, T stddev = T(1)) {
        Tensor t(std::move(shape));
        T* p = t.mutable_data();
        for (int64_t i = 0; i < t.numel(); ++i) p[i] = T(rng.normal()) * stddev;
        return t;
    }

    static Tensor from_vector(Shape shape, std::vector<T> v) {
        return Tensor(std::move(shape), std::make_shared<std::vector<T>>(std::move(v)));
    }

    bool defined() const { return data_ != nullptr; }
    const Shape& shape() const { return shape_; }
    int64_t dim(size_t i) const { return shape_.at(i); }
    size_t ndim() const { return shape_.size(); }
    int64_t numel() const { return data_ ? int64_t(data_->size()) : 0; }

    const T* data() const { return data_->data(); }
    T* mutable_data() { return data_->data(); }
    T at(int64_t i) const { return (*data_)[size_t(i)]; }

    // Same storage, new shape.
    Tensor reshaped(Shape shape) const {
        check_contract(shape_numel(shape) == numel(), "reshape ", shape_str(shape_), " -> ",
                       shape_str(shape), " changes element count");
        return Tensor(std::move(shape), data_);
    }

    Tensor clone() const {
        return Tensor(shape_, std::make_shared<std::vector<T>>(*data_));
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape_);
        U* dst = out.mutable_data();
        const T* src = data();
        for (int64_t i = 0; i < numel(); ++i) dst[i] = U(src[i]);
        return out;
    }

    bool all_finite() const {
        const T* p = data();
        for (int64_t i = 0; i < numel(); ++i)
            if (!std::isfinite(double(p[i]))) return false;
        return true;
    }

    T max_abs() const {
        T m = T(0);
        const T* p = data();
        for (int64_t i = 0; i < numel(); ++i) m = std::max(m, std::abs(p[i]));
        return m;
    }

    double sum() const {
        double acc = 0;
        const T* p = data();
        for (int64_t i = 0; i < numel(); ++i) acc += double(p[i]);
        return acc;
    }

    bool same_values(const Tensor& other) const {
        if (shape_ != other.shape_) return false;
        const T* a = data();
        const T* b = other.data();
        for (int64_t i = 0; i < numel(); ++i)
            if (a[i] != b[i]) return false;
        return true;
    }

private:
    Shape shape_;
    std::shared_ptr<std::vector<T>> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

// FNV over the raw bit pattern; used for the frozen-parameter checks.
template <typename T>
uint64_t tensor_checksum(const Tensor<T>& t) {
    uint64_t h = 1469598103934665603ull;
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(t.data());
    size_t n = size_t(t.numel()) * sizeof(T);
    for (size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace glead
