#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "glead/autograd.hpp"
#include "glead/rng.hpp"
#include "gradcheck.hpp"

using namespace glead;
using VarD = Var<double>;
using TD = Tensor<double>;

namespace {

TD randn(Shape s, uint64_t seed, double stddev = 1.0) {
    Rng rng(seed);
    return TD::randn(std::move(s), rng, stddev);
}

// Independent reference convolution with a different loop nest than the kernel.
TD ref_conv2d(const TD& x, const TD& w, int pad) {
    int64_t N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    int64_t Co = w.dim(0), k = w.dim(2);
    TD y({N, Co, H, W});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t o = 0; o < Co; ++o)
            for (int64_t h = 0; h < H; ++h)
                for (int64_t ww = 0; ww < W; ++ww) {
                    double acc = 0;
                    for (int64_t c = 0; c < Ci; ++c)
                        for (int64_t a = 0; a < k; ++a)
                            for (int64_t b = 0; b < k; ++b) {
                                int64_t yy = h + a - pad, xx = ww + b - pad;
                                if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
                                acc += x.at(((n * Ci + c) * H + yy) * W + xx) *
                                       w.at(((o * Ci + c) * k + a) * k + b);
                            }
                    y.mutable_data()[((n * Co + o) * H + h) * W + ww] = acc;
                }
    return y;
}

}  // namespace

TEST_CASE("elementwise forward values") {
    VarD a(TD::from_vector({3}, {1.0, -2.0, 0.5}));
    VarD b(TD::from_vector({3}, {4.0, 3.0, -1.0}));
    auto s = add(a, b).value();
    CHECK(s.at(0) == 5.0);
    CHECK(s.at(1) == 1.0);
    auto m = mul(a, b).value();
    CHECK(m.at(2) == -0.5);
    CHECK(softplus(VarD(TD::scalar(0.0))).item() == Catch::Approx(std::log(2.0)));
    CHECK(softplus(VarD(TD::scalar(800.0))).item() == Catch::Approx(800.0));
    CHECK(std::isfinite(softplus(VarD(TD::scalar(-800.0))).item()));
}

TEST_CASE("gradcheck elementwise ops") {
    auto x = randn({2, 3}, 1);
    auto y = randn({2, 3}, 2);
    // keep div/sqrt/reciprocal arguments away from zero
    for (int64_t i = 0; i < y.numel(); ++i) y.mutable_data()[i] = 1.5 + 0.3 * y.data()[i] * y.data()[i];
    for (int64_t i = 0; i < x.numel(); ++i) x.mutable_data()[i] += (x.data()[i] >= 0 ? 0.4 : -0.4);

    auto rep = gradcheck::check(
        [](std::vector<VarD>& v) {
            VarD t = add(mul(v[0], v[1]), sub(v[0], scale(v[1], 0.7)));
            t = add(t, div(v[0], v[1]));
            t = add(t, square(v[0]));
            t = add(t, vsqrt(v[1]));
            t = add(t, reciprocal(v[1]));
            t = add(t, sigmoid(v[0]));
            t = add(t, softplus(v[0]));
            t = add(t, leaky_relu(v[0], 0.2, std::sqrt(2.0)));
            t = add(t, neg(add_scalar(v[0], 1.25)));
            return sum_all(mul(t, t));
        },
        {x, y});
    INFO("max rel err " << rep.max_rel_err);
    CHECK(rep.ok(1e-6));
}

TEST_CASE("gradcheck reductions and broadcasts") {
    auto x = randn({2, 3, 4}, 3);
    auto rep = gradcheck::check(
        [](std::vector<VarD>& v) {
            VarD s1 = sum_axis(v[0], 1);                    // [2,4]
            VarD s2 = mean_axis(v[0], 2);                   // [2,3]
            VarD b = broadcast_axis(reshape(s1, {2, 4}), 1, 3);  // [2,3,4]
            VarD t = add(mul(v[0], b), broadcast_axis(s2, 2, 4));
            return mean_all(square(t));
        },
        {x});
    CHECK(rep.ok(1e-6));
}

TEST_CASE("matmul forward and gradcheck") {
    auto a = randn({3, 4}, 4);
    auto b = randn({4, 2}, 5);
    TD y = kernels::matmul(a, b);
    for (int64_t i = 0; i < 3; ++i)
        for (int64_t j = 0; j < 2; ++j) {
            double acc = 0;
            for (int64_t k = 0; k < 4; ++k) acc += a.at(i * 4 + k) * b.at(k * 2 + j);
            CHECK(y.at(i * 2 + j) == Catch::Approx(acc));
        }
    auto rep = gradcheck::check(
        [](std::vector<VarD>& v) {
            return sum_all(square(matmul(v[0], v[1])));
        },
        {a, b});
    CHECK(rep.ok(1e-6));
}

TEST_CASE("conv2d matches reference and gradchecks") {
    for (int64_t k : {1, 3}) {
        int pad = int(k - 1) / 2;
        auto x = randn({2, 3, 5, 5}, 10 + k);
        auto w = randn({4, 3, k, k}, 20 + k);
        TD got = kernels::conv2d(x, w, pad);
        TD want = ref_conv2d(x, w, pad);
        double diff = 0;
        for (int64_t i = 0; i < got.numel(); ++i)
            diff = std::max(diff, std::abs(got.at(i) - want.at(i)));
        CHECK(diff < 1e-12);

        auto rep = gradcheck::check(
            [pad](std::vector<VarD>& v) { return sum_all(square(conv2d(v[0], v[1], pad))); },
            {x, w});
        INFO("k=" << k << " max rel err " << rep.max_rel_err);
        CHECK(rep.ok(1e-6));
    }
}

TEST_CASE("conv2d_grad_weight is itself differentiable") {
    auto x = randn({2, 2, 4, 4}, 31);
    auto g = randn({2, 3, 4, 4}, 32);
    auto rep = gradcheck::check(
        [](std::vector<VarD>& v) {
            return sum_all(square(conv2d_grad_weight(v[0], v[1], 3, 1)));
        },
        {x, g});
    CHECK(rep.ok(1e-6));
}

TEST_CASE("resampling adjoint pairs") {
    // <U x, y> == <x, U^T y> for random probes, both directions.
    auto x = randn({1, 2, 4, 4}, 40);
    auto y = randn({1, 2, 8, 8}, 41);
    TD ux = kernels::upsample2x(x);
    TD uty = kernels::upsample2x_adjoint(y);
    double lhs = 0, rhs = 0;
    for (int64_t i = 0; i < ux.numel(); ++i) lhs += ux.at(i) * y.at(i);
    for (int64_t i = 0; i < x.numel(); ++i) rhs += x.at(i) * uty.at(i);
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));

    TD dx = kernels::downsample2x(y);
    TD dtx = kernels::downsample2x_adjoint(x);
    double lhs2 = 0, rhs2 = 0;
    for (int64_t i = 0; i < dx.numel(); ++i) lhs2 += dx.at(i) * x.at(i);
    for (int64_t i = 0; i < y.numel(); ++i) rhs2 += y.at(i) * dtx.at(i);
    CHECK(lhs2 == Catch::Approx(rhs2).epsilon(1e-12));

    auto rep = gradcheck::check(
        [](std::vector<VarD>& v) {
            return sum_all(square(add(upsample2x(downsample2x(v[0])), v[0])));
        },
        {y});
    CHECK(rep.ok(1e-6));
}

TEST_CASE("downsample2x of constant is identity on values") {
    TD c = TD::full({1, 1, 4, 4}, 3.25);
    TD d = kernels::downsample2x(c);
    for (int64_t i = 0; i < d.numel(); ++i) CHECK(d.at(i) == 3.25);
    TD u = kernels::upsample2x(c);
    for (int64_t i = 0; i < u.numel(); ++i) CHECK(u.at(i) == Catch::Approx(3.25));
}

TEST_CASE("gradcheck channel concat/slice/pad and biases") {
    auto a = randn({2, 2, 3, 3}, 50);
    auto b = randn({2, 1, 3, 3}, 51);
    auto bias = randn({2}, 52);
    auto rep = gradcheck::check(
        [](std::vector<VarD>& v) {
            VarD cat = concat_channels(v[0], v[1]);
            VarD sl = slice_channels(cat, 1, 3);
            VarD withb = add_bias_nchw(v[0], v[2]);
            VarD flat = reshape(withb, {2 * 2, 9});
            VarD rows = add_bias_rows(flat, constant(TD::full({9}, 0.5)));
            return add(sum_all(square(sl)), mean_all(square(rows)));
        },
        {a, b, bias});
    CHECK(rep.ok(1e-6));
}

TEST_CASE("double backward: gradient-of-gradient matches finite differences") {
    // p(x, w) = sum_i (d f / d x_i)^2 with f = sum(square(conv(x, w))).
    // The analytic gradient of p w.r.t. x and w exercises create_graph.
    auto x0 = randn({1, 2, 4, 4}, 60);
    auto w0 = randn({2, 2, 3, 3}, 61);

    auto penalty = [](std::vector<VarD>& v) {
        VarD f = sum_all(square(conv2d(v[0], v[1], 1)));
        VarD gx = grad_var(f, v[0], /*create_graph=*/true);
        return sum_all(square(gx));
    };
    auto rep = gradcheck::check(penalty, {x0, w0});
    INFO("max rel err " << rep.max_rel_err);
    CHECK(rep.ok(1e-5));
}

TEST_CASE("double backward through nonlinearities") {
    auto x0 = randn({1, 1, 4, 4}, 70);
    auto w0 = randn({2, 1, 3, 3}, 71);
    auto penalty = [](std::vector<VarD>& v) {
        VarD h = leaky_relu(conv2d(v[0], v[1], 1), 0.2, 1.0);
        VarD f = mean_all(mul(h, h));
        VarD gx = grad_var(f, v[0], true);
        return sum_all(square(gx));
    };
    auto rep = gradcheck::check(penalty, {x0, w0});
    CHECK(rep.ok(1e-5));
}

TEST_CASE("no-grad mode and detach") {
    VarD p(randn({3}, 80), true);
    {
        NoGradGuard ng;
        VarD y = square(p);
        CHECK_FALSE(y.requires_grad());
    }
    VarD d = p.detach();
    VarD y = square(d);
    CHECK_FALSE(y.requires_grad());
    CHECK(d.value().data() == p.value().data());  // shared storage
}

TEST_CASE("grad accumulation over reused inputs") {
    VarD p(TD::from_vector({2}, {3.0, -1.0}), true);
    VarD loss = sum_all(add(mul(p, p), scale(p, 2.0)));  // d/dp = 2p + 2
    auto g = grad(loss, {p});
    CHECK(g[0].at(0) == Catch::Approx(8.0));
    CHECK(g[0].at(1) == Catch::Approx(0.0));
}

TEST_CASE("determinism: identical op replays bit for bit") {
    auto x = randn({2, 3, 8, 8}, 90);
    auto w = randn({5, 3, 3, 3}, 91);
    TD a = kernels::conv2d(x, w, 1);
    TD b = kernels::conv2d(x, w, 1);
    CHECK(a.same_values(b));
}

TEST_CASE("contract violations throw") {
    VarD a(randn({2, 3}, 95));
    VarD b(randn({3, 2}, 96));
    CHECK_THROWS_AS(add(a, b), ContractError);
    CHECK_THROWS_AS(kernels::matmul(a.value(), a.value()), ContractError);
    CHECK_THROWS_AS(kernels::conv2d(randn({1, 1, 4, 4}, 97), randn({1, 1, 3, 3}, 98), 0),
                    ContractError);
}
