#pragma once

/**
 * @file nnops.hpp
 * @brief Differentiable layer kernels on [C,H,W] feature maps.
 */

#include "planeqc/tensor.hpp"

namespace planeqc {

// 3x3 convolution, padding 1, stride 1 or 2.
// input [Cin,H,W], weight [Cout,Cin,3,3], bias optional [Cout].
template <typename T>
Tensor<T> conv3x3(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>* bias,
                  int stride) {
    if (input.ndim() != 3 || weight.ndim() != 4)
        throw DimensionError("conv3x3: expects input [C,H,W], weight [Cout,Cin,3,3]");
    if (weight.dim(2) != 3 || weight.dim(3) != 3)
        throw DimensionError("conv3x3: kernel must be 3x3");
    if (stride != 1 && stride != 2) throw DimensionError("conv3x3: stride must be 1 or 2");
    const size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    if (weight.dim(1) != cin)
        throw DimensionError("conv3x3: channel mismatch, input " + shape_str(input.shape()) +
                             " weight " + shape_str(weight.shape()));
    const size_t cout = weight.dim(0);
    const size_t oh = (h + 2 - 3) / static_cast<size_t>(stride) + 1;
    const size_t ow = (w + 2 - 3) / static_cast<size_t>(stride) + 1;

    bool rg = input.requires_grad() || weight.requires_grad() || (bias && bias->requires_grad());
    Tensor<T> out = Tensor<T>::zeros({cout, oh, ow}, rg);
    auto id = input.data();
    auto wd = weight.data();
    auto od = out.mutable_data();
    const long hs = static_cast<long>(h), ws = static_cast<long>(w);

    for (size_t co = 0; co < cout; ++co) {
        const T b = bias ? bias->data()[co] : T(0);
        for (size_t oy = 0; oy < oh; ++oy) {
            for (size_t ox = 0; ox < ow; ++ox) {
                T acc = b;
                const long iy0 = static_cast<long>(oy) * stride - 1;
                const long ix0 = static_cast<long>(ox) * stride - 1;
                for (size_t ci = 0; ci < cin; ++ci) {
                    const T* ip = id.data() + ci * h * w;
                    const T* wp = wd.data() + (co * cin + ci) * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        const long iy = iy0 + ky;
                        if (iy < 0 || iy >= hs) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const long ix = ix0 + kx;
                            if (ix < 0 || ix >= ws) continue;
                            acc += ip[iy * ws + ix] * wp[ky * 3 + kx];
                        }
                    }
                }
                od[(co * oh + oy) * ow + ox] = acc;
            }
        }
    }

    if (detail::tape_wants(out)) {
        Tensor<T> ci_t = input, cw = weight, co_t = out;
        Tensor<T> cb = bias ? *bias : Tensor<T>();
        detail::record_op<T>(out, [ci_t, cw, cb, co_t, stride, cin, cout, h, w, oh, ow]() mutable {
            auto g = co_t.grad();
            auto id2 = ci_t.data();
            auto wd2 = cw.data();
            const long hs2 = static_cast<long>(h), ws2 = static_cast<long>(w);
            const bool gi = ci_t.requires_grad();
            const bool gw = cw.requires_grad();
            std::span<T> gin, gwt;
            if (gi) gin = ci_t.grad_buffer();
            if (gw) gwt = cw.grad_buffer();
            for (size_t co = 0; co < cout; ++co) {
                for (size_t oy = 0; oy < oh; ++oy) {
                    for (size_t ox = 0; ox < ow; ++ox) {
                        const T go = g[(co * oh + oy) * ow + ox];
                        if (go == T(0)) continue;
                        const long iy0 = static_cast<long>(oy) * stride - 1;
                        const long ix0 = static_cast<long>(ox) * stride - 1;
                        for (size_t ci = 0; ci < cin; ++ci) {
                            const T* ip = id2.data() + ci * h * w;
                            const T* wp = wd2.data() + (co * cin + ci) * 9;
                            for (int ky = 0; ky < 3; ++ky) {
                                const long iy = iy0 + ky;
                                if (iy < 0 || iy >= hs2) continue;
                                for (int kx = 0; kx < 3; ++kx) {
                                    const long ix = ix0 + kx;
                                    if (ix < 0 || ix >= ws2) continue;
                                    if (gw) gwt[(co * cin + ci) * 9 + ky * 3 + kx] +=
                                        go * ip[iy * ws2 + ix];
                                    if (gi) gin[ci * h * w + iy * ws2 + ix] +=
                                        go * wp[ky * 3 + kx];
                                }
                            }
                        }
                    }
                }
            }
            if (cb.defined() && cb.requires_grad()) {
                auto gb = cb.grad_buffer();
                for (size_t co = 0; co < cout; ++co)
                    for (size_t p = 0; p < oh * ow; ++p) gb[co] += g[co * oh * ow + p];
            }
        });
    }
    return out;
}

// Non-overlapping 2x2 average pooling; spatial dims must be even.
template <typename T>
Tensor<T> avg_pool2(const Tensor<T>& input) {
    if (input.ndim() != 3) throw DimensionError("avg_pool2: expects [C,H,W]");
    const size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
    if (h % 2 != 0 || w % 2 != 0)
        throw DimensionError("avg_pool2: odd spatial dims " + shape_str(input.shape()));
    const size_t oh = h / 2, ow = w / 2;
    Tensor<T> out = Tensor<T>::zeros({c, oh, ow}, input.requires_grad());
    auto id = input.data();
    auto od = out.mutable_data();
    for (size_t ch = 0; ch < c; ++ch)
        for (size_t oy = 0; oy < oh; ++oy)
            for (size_t ox = 0; ox < ow; ++ox) {
                const T* p = id.data() + ch * h * w + 2 * oy * w + 2 * ox;
                od[(ch * oh + oy) * ow + ox] = (p[0] + p[1] + p[w] + p[w + 1]) * T(0.25);
            }
    if (detail::tape_wants(out)) {
        Tensor<T> ci = input, co = out;
        detail::record_op<T>(out, [ci, co, c, h, w, oh, ow]() mutable {
            auto g = co.grad();
            auto gi = ci.grad_buffer();
            for (size_t ch = 0; ch < c; ++ch)
                for (size_t oy = 0; oy < oh; ++oy)
                    for (size_t ox = 0; ox < ow; ++ox) {
                        const T q = g[(ch * oh + oy) * ow + ox] * T(0.25);
                        T* p = gi.data() + ch * h * w + 2 * oy * w + 2 * ox;
                        p[0] += q;
                        p[1] += q;
                        p[w] += q;
                        p[w + 1] += q;
                    }
        });
    }
    return out;
}

// Mean over the spatial domain: [C,H,W] -> [C].
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input) {
    if (input.ndim() != 3) throw DimensionError("global_avg_pool: expects [C,H,W]");
    const size_t c = input.dim(0), n = input.dim(1) * input.dim(2);
    Tensor<T> out = Tensor<T>::zeros({c}, input.requires_grad());
    auto id = input.data();
    auto od = out.mutable_data();
    for (size_t ch = 0; ch < c; ++ch) {
        T acc = T(0);
        for (size_t p = 0; p < n; ++p) acc += id[ch * n + p];
        od[ch] = acc / static_cast<T>(n);
    }
    if (detail::tape_wants(out)) {
        Tensor<T> ci = input, co = out;
        detail::record_op<T>(out, [ci, co, c, n]() mutable {
            auto g = co.grad();
            auto gi = ci.grad_buffer();
            for (size_t ch = 0; ch < c; ++ch) {
                const T q = g[ch] / static_cast<T>(n);
                for (size_t p = 0; p < n; ++p) gi[ch * n + p] += q;
            }
        });
    }
    return out;
}

// Channel concatenation of two maps with equal spatial dims.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.ndim() != 3 || b.ndim() != 3 || a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
        throw DimensionError("concat_channels: spatial dims disagree " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    const size_t ca = a.dim(0), cb = b.dim(0), hw = a.dim(1) * a.dim(2);
    Tensor<T> out =
        Tensor<T>::zeros({ca + cb, a.dim(1), a.dim(2)}, a.requires_grad() || b.requires_grad());
    auto od = out.mutable_data();
    std::copy(a.data().begin(), a.data().end(), od.begin());
    std::copy(b.data().begin(), b.data().end(), od.begin() + static_cast<long>(ca * hw));
    if (detail::tape_wants(out)) {
        Tensor<T> cta = a, ctb = b, co = out;
        detail::record_op<T>(out, [cta, ctb, co, ca, cb, hw]() mutable {
            auto g = co.grad();
            if (cta.requires_grad()) {
                auto ga = cta.grad_buffer();
                for (size_t i = 0; i < ca * hw; ++i) ga[i] += g[i];
            }
            if (ctb.requires_grad()) {
                auto gb = ctb.grad_buffer();
                for (size_t i = 0; i < cb * hw; ++i) gb[i] += g[ca * hw + i];
            }
        });
    }
    return out;
}

// Per-position linear map over channels: out[j,p] = sum_i M[j,i] feat[i,p].
// Equivalent to a 1x1 convolution with weight M [Cout,Cin].
template <typename T>
Tensor<T> channel_map(const Tensor<T>& m, const Tensor<T>& feat) {
    if (m.ndim() != 2 || feat.ndim() != 3 || m.dim(1) != feat.dim(0))
        throw DimensionError("channel_map: M " + shape_str(m.shape()) + " incompatible with " +
                             shape_str(feat.shape()));
    const size_t co_n = m.dim(0), ci_n = m.dim(1), hw = feat.dim(1) * feat.dim(2);
    Tensor<T> out = Tensor<T>::zeros({co_n, feat.dim(1), feat.dim(2)},
                                     m.requires_grad() || feat.requires_grad());
    auto md = m.data();
    auto fd = feat.data();
    auto od = out.mutable_data();
    for (size_t j = 0; j < co_n; ++j)
        for (size_t i = 0; i < ci_n; ++i) {
            const T mv = md[j * ci_n + i];
            if (mv == T(0)) continue;
            const T* fp = fd.data() + i * hw;
            T* op = od.data() + j * hw;
            for (size_t p = 0; p < hw; ++p) op[p] += mv * fp[p];
        }
    if (detail::tape_wants(out)) {
        Tensor<T> cm = m, cf = feat, co = out;
        detail::record_op<T>(out, [cm, cf, co, co_n, ci_n, hw]() mutable {
            auto g = co.grad();
            if (cm.requires_grad()) {
                auto gm = cm.grad_buffer();
                auto fd2 = cf.data();
                for (size_t j = 0; j < co_n; ++j)
                    for (size_t i = 0; i < ci_n; ++i) {
                        T acc = T(0);
                        const T* gp = g.data() + j * hw;
                        const T* fp = fd2.data() + i * hw;
                        for (size_t p = 0; p < hw; ++p) acc += gp[p] * fp[p];
                        gm[j * ci_n + i] += acc;
                    }
            }
            if (cf.requires_grad()) {
                auto gf = cf.grad_buffer();
                auto md2 = cm.data();
                for (size_t j = 0; j < co_n; ++j)
                    for (size_t i = 0; i < ci_n; ++i) {
                        const T mv = md2[j * ci_n + i];
                        if (mv == T(0)) continue;
                        const T* gp = g.data() + j * hw;
                        T* fp = gf.data() + i * hw;
                        for (size_t p = 0; p < hw; ++p) fp[p] += mv * gp[p];
                    }
            }
        });
    }
    return out;
}

}  // namespace planeqc
