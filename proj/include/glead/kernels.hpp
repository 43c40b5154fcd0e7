#pragma once

#include <cmath>
#include <cstdint>

#include "glead/tensor.hpp"

// Raw dense kernels. Single-threaded with fixed loop order: every output
// element is produced by exactly one serial reduction, so results are
// bit-reproducible run to run.

namespace glead::kernels {

// y[n,co,h,w] = sum_{ci,a,b} x[n,ci,h+a-p,w+b-p] * w[co,ci,a,b]
// Stride 1, zero padding, same-size output (2p == k-1).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, int pad) {
    const int64_t N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t Co = w.dim(0), k = w.dim(2);
    check_contract(w.dim(1) == Ci, "conv2d: weight expects ", w.dim(1), " input channels, got ", Ci);
    check_contract(w.dim(3) == k && 2 * pad == k - 1, "conv2d: kernel ", k, " pad ", pad,
                   " is not a same-size configuration");
    Tensor<T> y({N, Co, H, W});
    const T* xp = x.data();
    const T* wp = w.data();
    T* yp = y.mutable_data();
    const int64_t xs_n = Ci * H * W, xs_c = H * W;
    const int64_t ws_o = Ci * k * k, ws_i = k * k;
    for (int64_t n = 0; n < N; ++n) {
        for (int64_t co = 0; co < Co; ++co) {
            T* out = yp + (n * Co + co) * xs_c;
            for (int64_t ci = 0; ci < Ci; ++ci) {
                const T* xc = xp + n * xs_n + ci * xs_c;
                const T* wc = wp + co * ws_o + ci * ws_i;
                for (int64_t a = 0; a < k; ++a) {
                    const int64_t dy = a - pad;
                    for (int64_t b = 0; b < k; ++b) {
                        const int64_t dx = b - pad;
                        const T coef = wc[a * k + b];
                        if (coef == T(0)) continue;
                        const int64_t h0 = std::max<int64_t>(0, -dy), h1 = std::min(H, H - dy);
                        const int64_t w0 = std::max<int64_t>(0, -dx), w1 = std::min(W, W - dx);
                        for (int64_t h = h0; h < h1; ++h) {
                            const T* src = xc + (h + dy) * W + dx;
                            T* dst = out + h * W;
                            for (int64_t wi = w0; wi < w1; ++wi) dst[wi] += coef * src[wi];
                        }
                    }
                }
            }
        }
    }
    return y;
}

// gw[co,ci,a,b] = sum_{n,h,w} g[n,co,h,w] * x[n,ci,h+a-p,w+b-p]
template <typename T>
Tensor<T> conv2d_grad_weight(const Tensor<T>& x, const Tensor<T>& g, int64_t k, int pad) {
    const int64_t N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t Co = g.dim(1);
    check_contract(g.dim(0) == N && g.dim(2) == H && g.dim(3) == W,
                   "conv2d_grad_weight: mismatched activation/gradient shapes");
    Tensor<T> gw({Co, Ci, k, k});
    const T* xp = x.data();
    const T* gp = g.data();
    T* wp = gw.mutable_data();
    const int64_t plane = H * W;
    for (int64_t co = 0; co < Co; ++co) {
        for (int64_t ci = 0; ci < Ci; ++ci) {
            for (int64_t a = 0; a < k; ++a) {
                const int64_t dy = a - pad;
                for (int64_t b = 0; b < k; ++b) {
                    const int64_t dx = b - pad;
                    const int64_t h0 = std::max<int64_t>(0, -dy), h1 = std::min(H, H - dy);
                    const int64_t w0 = std::max<int64_t>(0, -dx), w1 = std::min(W, W - dx);
                    T acc = T(0);
                    for (int64_t n = 0; n < N; ++n) {
                        const T* gc = gp + (n * Co + co) * plane;
                        const T* xc = xp + (n * Ci + ci) * plane;
                        for (int64_t h = h0; h < h1; ++h) {
                            const T* grow = gc + h * W;
                            const T* xrow = xc + (h + dy) * W + dx;
                            T rowacc = T(0);
                            for (int64_t wi = w0; wi < w1; ++wi) rowacc += grow[wi] * xrow[wi];
                            acc += rowacc;
                        }
                    }
                    wp[((co * Ci + ci) * k + a) * k + b] = acc;
                }
            }
        }
    }
    return gw;
}

// [co,ci,a,b] -> [ci,co,k-1-a,k-1-b]
template <typename T>
Tensor<T> flip_io(const Tensor<T>& w) {
    const int64_t Co = w.dim(0), Ci = w.dim(1), k = w.dim(2);
    Tensor<T> out({Ci, Co, k, k});
    const T* src = w.data();
    T* dst = out.mutable_data();
    for (int64_t co = 0; co < Co; ++co)
        for (int64_t ci = 0; ci < Ci; ++ci)
            for (int64_t a = 0; a < k; ++a)
                for (int64_t b = 0; b < k; ++b)
                    dst[((ci * Co + co) * k + (k - 1 - a)) * k + (k - 1 - b)] =
                        src[((co * Ci + ci) * k + a) * k + b];
    return out;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    const int64_t M = a.dim(0), K = a.dim(1), N = b.dim(1);
    check_contract(b.dim(0) == K, "matmul: inner dims ", K, " vs ", b.dim(0));
    Tensor<T> y({M, N});
    const T* ap = a.data();
    const T* bp = b.data();
    T* yp = y.mutable_data();
    for (int64_t i = 0; i < M; ++i) {
        T* yrow = yp + i * N;
        for (int64_t kk = 0; kk < K; ++kk) {
            const T av = ap[i * K + kk];
            if (av == T(0)) continue;
            const T* brow = bp + kk * N;
            for (int64_t j = 0; j < N; ++j) yrow[j] += av * brow[j];
        }
    }
    return y;
}

template <typename T>
Tensor<T> transpose2d(const Tensor<T>& a) {
    const int64_t M = a.dim(0), N = a.dim(1);
    Tensor<T> y({N, M});
    const T* ap = a.data();
    T* yp = y.mutable_data();
    for (int64_t i = 0; i < M; ++i)
        for (int64_t j = 0; j < N; ++j) yp[j * M + i] = ap[i * N + j];
    return y;
}

namespace detail {
// Bilinear 2x taps for output index o (align_corners = false, clamped).
inline void up2_taps(int64_t o, int64_t n, int64_t& i0, int64_t& i1, double& w0, double& w1) {
    if (o % 2 == 0) {
        i0 = o / 2 - 1;
        i1 = o / 2;
        w0 = 0.25;
        w1 = 0.75;
    } else {
        i0 = o / 2;
        i1 = o / 2 + 1;
        w0 = 0.75;
        w1 = 0.25;
    }
    if (i0 < 0) i0 = 0;
    if (i1 > n - 1) i1 = n - 1;
}
}  // namespace detail

template <typename T>
Tensor<T> upsample2x(const Tensor<T>& x) {
    const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    Tensor<T> y({N, C, 2 * H, 2 * W});
    const T* xp = x.data();
    T* yp = y.mutable_data();
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const T* in = xp + nc * H * W;
        T* out = yp + nc * 4 * H * W;
        for (int64_t oy = 0; oy < 2 * H; ++oy) {
            int64_t y0, y1;
            double wy0, wy1;
            detail::up2_taps(oy, H, y0, y1, wy0, wy1);
            for (int64_t ox = 0; ox < 2 * W; ++ox) {
                int64_t x0, x1;
                double wx0, wx1;
                detail::up2_taps(ox, W, x0, x1, wx0, wx1);
                out[oy * 2 * W + ox] =
                    T(wy0 * (wx0 * in[y0 * W + x0] + wx1 * in[y0 * W + x1]) +
                      wy1 * (wx0 * in[y1 * W + x0] + wx1 * in[y1 * W + x1]));
            }
        }
    }
    return y;
}

// Exact adjoint of upsample2x: scatter with the same taps.
template <typename T>
Tensor<T> upsample2x_adjoint(const Tensor<T>& g) {
    const int64_t N = g.dim(0), C = g.dim(1), H2 = g.dim(2), W2 = g.dim(3);
    const int64_t H = H2 / 2, W = W2 / 2;
    Tensor<T> y({N, C, H, W});
    const T* gp = g.data();
    T* yp = y.mutable_data();
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const T* in = gp + nc * H2 * W2;
        T* out = yp + nc * H * W;
        for (int64_t oy = 0; oy < H2; ++oy) {
            int64_t y0, y1;
            double wy0, wy1;
            detail::up2_taps(oy, H, y0, y1, wy0, wy1);
            for (int64_t ox = 0; ox < W2; ++ox) {
                int64_t x0, x1;
                double wx0, wx1;
                detail::up2_taps(ox, W, x0, x1, wx0, wx1);
                const T gv = in[oy * W2 + ox];
                out[y0 * W + x0] += T(wy0 * wx0) * gv;
                out[y0 * W + x1] += T(wy0 * wx1) * gv;
                out[y1 * W + x0] += T(wy1 * wx0) * gv;
                out[y1 * W + x1] += T(wy1 * wx1) * gv;
            }
        }
    }
    return y;
}

// Factor-2 bilinear reduction == 2x2 box average.
template <typename T>
Tensor<T> downsample2x(const Tensor<T>& x) {
    const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    check_contract(H % 2 == 0 && W % 2 == 0, "downsample2x: odd spatial size ", H, "x", W);
    Tensor<T> y({N, C, H / 2, W / 2});
    const T* xp = x.data();
    T* yp = y.mutable_data();
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const T* in = xp + nc * H * W;
        T* out = yp + nc * (H / 2) * (W / 2);
        for (int64_t oy = 0; oy < H / 2; ++oy)
            for (int64_t ox = 0; ox < W / 2; ++ox)
                out[oy * (W / 2) + ox] = T(0.25) * (in[2 * oy * W + 2 * ox] + in[2 * oy * W + 2 * ox + 1] +
                                                    in[(2 * oy + 1) * W + 2 * ox] +
                                                    in[(2 * oy + 1) * W + 2 * ox + 1]);
    }
    return y;
}

template <typename T>
Tensor<T> downsample2x_adjoint(const Tensor<T>& g) {
    const int64_t N = g.dim(0), C = g.dim(1), Hh = g.dim(2), Wh = g.dim(3);
    Tensor<T> y({N, C, 2 * Hh, 2 * Wh});
    const T* gp = g.data();
    T* yp = y.mutable_data();
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const T* in = gp + nc * Hh * Wh;
        T* out = yp + nc * 4 * Hh * Wh;
        for (int64_t oy = 0; oy < Hh; ++oy)
            for (int64_t ox = 0; ox < Wh; ++ox) {
                const T v = T(0.25) * in[oy * Wh + ox];
                out[2 * oy * 2 * Wh + 2 * ox] = v;
                out[2 * oy * 2 * Wh + 2 * ox + 1] = v;
                out[(2 * oy + 1) * 2 * Wh + 2 * ox] = v;
                out[(2 * oy + 1) * 2 * Wh + 2 * ox + 1] = v;
            }
    }
    return y;
}

// x viewed as [outer, n, inner] summed over the middle axis -> [outer, inner].
template <typename T>
Tensor<T> reduce_sum_mid(const Tensor<T>& x, int64_t outer, int64_t n, int64_t inner) {
    check_contract(outer * n * inner == x.numel(), "reduce_sum_mid: bad factorization");
    Tensor<T> y({outer, inner});
    const T* xp = x.data();
    T* yp = y.mutable_data();
    for (int64_t o = 0; o < outer; ++o)
        for (int64_t m = 0; m < n; ++m) {
            const T* src = xp + (o * n + m) * inner;
            T* dst = yp + o * inner;
            for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
        }
    return y;
}

// [outer, inner] replicated n times along a new middle axis.
template <typename T>
Tensor<T> broadcast_mid(const Tensor<T>& x, int64_t outer, int64_t n, int64_t inner) {
    check_contract(outer * inner == x.numel(), "broadcast_mid: bad factorization");
    Tensor<T> y({outer, n, inner});
    const T* xp = x.data();
    T* yp = y.mutable_data();
    for (int64_t o = 0; o < outer; ++o)
        for (int64_t m = 0; m < n; ++m) {
            const T* src = xp + o * inner;
            T* dst = yp + (o * n + m) * inner;
            for (int64_t i = 0; i < inner; ++i) dst[i] = src[i];
        }
    return y;
}

}  // namespace glead::kernels
