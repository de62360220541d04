#pragma once

/**
 * @file losses.hpp
 * @brief Training objectives: semantic similarity, feature-space NCC,
 *        displacement smoothness, and subspace orthogonality.
 */

#include <array>
#include <vector>

#include "planeqc/aligner.hpp"
#include "planeqc/tensor.hpp"

namespace planeqc {

// Mean over positions of the cosine between per-position channel vectors.
// Norm guard: |f| is replaced by sqrt(|f|^2 + eps^2) so degenerate vectors
// stay finite while self-pairs still score within 1e-5 of 1.
template <typename T>
Tensor<T> cosine_level(const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape(a, b, "cosine_level");
    if (a.ndim() != 3) throw DimensionError("cosine_level: expects [C,H,W]");
    const size_t c = a.dim(0), n = a.dim(1) * a.dim(2);
    auto ad = a.data();
    auto bd = b.data();
    const T e2 = T(kEps) * T(kEps);

    T total = T(0);
    for (size_t p = 0; p < n; ++p) {
        T dot = 0, na2 = 0, nb2 = 0;
        for (size_t ch = 0; ch < c; ++ch) {
            const T av = ad[ch * n + p];
            const T bv = bd[ch * n + p];
            dot += av * bv;
            na2 += av * av;
            nb2 += bv * bv;
        }
        total += dot / (std::sqrt(na2 + e2) * std::sqrt(nb2 + e2));
    }
    Tensor<T> out = Tensor<T>::scalar(total / static_cast<T>(n),
                                      a.requires_grad() || b.requires_grad());
    if (detail::tape_wants(out)) {
        Tensor<T> ca = a, cb = b, co = out;
        detail::record_op<T>(out, [ca, cb, co, c, n, e2]() mutable {
            const T g = co.grad()[0] / static_cast<T>(n);
            auto ad2 = ca.data();
            auto bd2 = cb.data();
            const bool wa = ca.requires_grad();
            const bool wb = cb.requires_grad();
            std::span<T> ga, gb;
            if (wa) ga = ca.grad_buffer();
            if (wb) gb = cb.grad_buffer();
            for (size_t p = 0; p < n; ++p) {
                T dot = 0, na2 = 0, nb2 = 0;
                for (size_t ch = 0; ch < c; ++ch) {
                    const T av = ad2[ch * n + p];
                    const T bv = bd2[ch * n + p];
                    dot += av * bv;
                    na2 += av * av;
                    nb2 += bv * bv;
                }
                const T na = std::sqrt(na2 + e2);
                const T nb = std::sqrt(nb2 + e2);
                const T inv = T(1) / (na * nb);
                for (size_t ch = 0; ch < c; ++ch) {
                    const T av = ad2[ch * n + p];
                    const T bv = bd2[ch * n + p];
                    if (wa) ga[ch * n + p] += g * (bv * inv - dot * av * inv / (na * na));
                    if (wb) gb[ch * n + p] += g * (av * inv - dot * bv * inv / (nb * nb));
                }
            }
        });
    }
    return out;
}

// Global per-channel normalized cross-correlation over the spatial domain,
// averaged across channels. sigma uses sqrt(var + eps^2).
template <typename T>
Tensor<T> ncc_level(const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape(a, b, "ncc_level");
    if (a.ndim() != 3) throw DimensionError("ncc_level: expects [C,H,W]");
    const size_t c = a.dim(0), n = a.dim(1) * a.dim(2);
    auto ad = a.data();
    auto bd = b.data();
    const T e2 = T(kEps) * T(kEps);

    T total = T(0);
    for (size_t ch = 0; ch < c; ++ch) {
        const T* ap = ad.data() + ch * n;
        const T* bp = bd.data() + ch * n;
        T mu_a = 0, mu_b = 0;
        for (size_t p = 0; p < n; ++p) {
            mu_a += ap[p];
            mu_b += bp[p];
        }
        mu_a /= static_cast<T>(n);
        mu_b /= static_cast<T>(n);
        T cov = 0, va = 0, vb = 0;
        for (size_t p = 0; p < n; ++p) {
            const T da = ap[p] - mu_a;
            const T db = bp[p] - mu_b;
            cov += da * db;
            va += da * da;
            vb += db * db;
        }
        cov /= static_cast<T>(n);
        va /= static_cast<T>(n);
        vb /= static_cast<T>(n);
        total += cov / (std::sqrt(va + e2) * std::sqrt(vb + e2));
    }
    Tensor<T> out = Tensor<T>::scalar(total / static_cast<T>(c),
                                      a.requires_grad() || b.requires_grad());
    if (detail::tape_wants(out)) {
        Tensor<T> ca = a, cb = b, co = out;
        detail::record_op<T>(out, [ca, cb, co, c, n, e2]() mutable {
            const T g = co.grad()[0] / static_cast<T>(c);
            auto ad2 = ca.data();
            auto bd2 = cb.data();
            const bool wa = ca.requires_grad();
            const bool wb = cb.requires_grad();
            std::span<T> ga, gb;
            if (wa) ga = ca.grad_buffer();
            if (wb) gb = cb.grad_buffer();
            for (size_t ch = 0; ch < c; ++ch) {
                const T* ap = ad2.data() + ch * n;
                const T* bp = bd2.data() + ch * n;
                T mu_a = 0, mu_b = 0;
                for (size_t p = 0; p < n; ++p) {
                    mu_a += ap[p];
                    mu_b += bp[p];
                }
                mu_a /= static_cast<T>(n);
                mu_b /= static_cast<T>(n);
                T cov = 0, va = 0, vb = 0;
                for (size_t p = 0; p < n; ++p) {
                    const T da = ap[p] - mu_a;
                    const T db = bp[p] - mu_b;
                    cov += da * db;
                    va += da * da;
                    vb += db * db;
                }
                cov /= static_cast<T>(n);
                va /= static_cast<T>(n);
                vb /= static_cast<T>(n);
                const T sa = std::sqrt(va + e2);
                const T sb = std::sqrt(vb + e2);
                const T ncc = cov / (sa * sb);
                const T inv_n = T(1) / static_cast<T>(n);
                for (size_t p = 0; p < n; ++p) {
                    const T da = ap[p] - mu_a;
                    const T db = bp[p] - mu_b;
                    if (wa)
                        ga[ch * n + p] += g * inv_n * (db / (sa * sb) - ncc * da / (sa * sa));
                    if (wb)
                        gb[ch * n + p] += g * inv_n * (da / (sa * sb) - ncc * db / (sb * sb));
                }
            }
        });
    }
    return out;
}

// L_sim = -sum_l mean-cosine(level l).
template <typename T>
Tensor<T> loss_sim(const std::array<Tensor<T>, 3>& aligned_a,
                   const std::array<Tensor<T>, 3>& aligned_b) {
    Tensor<T> acc = cosine_level(aligned_a[0], aligned_b[0]);
    acc = add(acc, cosine_level(aligned_a[1], aligned_b[1]));
    acc = add(acc, cosine_level(aligned_a[2], aligned_b[2]));
    return neg(acc);
}

// L_NCC = -sum_l channel-mean NCC(level l).
template <typename T>
Tensor<T> loss_ncc(const std::array<Tensor<T>, 3>& aligned_a,
                   const std::array<Tensor<T>, 3>& aligned_b) {
    Tensor<T> acc = ncc_level(aligned_a[0], aligned_b[0]);
    acc = add(acc, ncc_level(aligned_a[1], aligned_b[1]));
    acc = add(acc, ncc_level(aligned_a[2], aligned_b[2]));
    return neg(acc);
}

// L_smooth = sum_l |A_l - I|_F^2. The affine displacement Jacobian is
// constant over the domain, so the spatial mean equals the per-point value.
template <typename T>
Tensor<T> loss_smooth(const std::array<AffineTransform<T>, 3>& thetas) {
    Tensor<T> acc = jacobian_sq_norm(thetas[0].theta);
    acc = add(acc, jacobian_sq_norm(thetas[1].theta));
    acc = add(acc, jacobian_sq_norm(thetas[2].theta));
    return acc;
}

enum class OrthVariant { L1A, FroA, L1AB, FroAB };

inline const char* orth_variant_name(OrthVariant v) {
    switch (v) {
        case OrthVariant::L1A: return "l1_a";
        case OrthVariant::FroA: return "fro_a";
        case OrthVariant::L1AB: return "l1_ab";
        case OrthVariant::FroAB: return "fro_ab";
    }
    return "?";
}

inline OrthVariant orth_variant_from_name(const std::string& name) {
    for (OrthVariant v : {OrthVariant::L1A, OrthVariant::FroA, OrthVariant::L1AB,
                          OrthVariant::FroAB})
        if (name == orth_variant_name(v)) return v;
    throw ConfigError("unknown orth variant '" + name + "'");
}

// L_orth: normalized sum over ordered plane pairs of a norm on cross-Gram
// matrices. Default penalizes A_c A_c'^T in l1; variants add the Frobenius
// norm and/or the B_c^T B_c' term.
template <typename T>
Tensor<T> loss_orth(const std::vector<Tensor<T>>& a_mats, const std::vector<Tensor<T>>& b_mats,
                    OrthVariant variant) {
    const size_t num = a_mats.size();
    if (num == 0) throw DomainError("loss_orth: no experts");
    const bool use_b = variant == OrthVariant::L1AB || variant == OrthVariant::FroAB;
    if (use_b && b_mats.size() != num)
        throw ConfigError("loss_orth: A/B expert count mismatch");
    for (size_t i = 1; i < num; ++i) {
        if (a_mats[i].shape() != a_mats[0].shape())
            throw ConfigError("loss_orth: expert shape mismatch at plane " + std::to_string(i));
        if (use_b && b_mats[i].shape() != b_mats[0].shape())
            throw ConfigError("loss_orth: expert shape mismatch at plane " + std::to_string(i));
    }
    if (num == 1) return Tensor<T>::scalar(T(0));

    const bool fro = variant == OrthVariant::FroA || variant == OrthVariant::FroAB;
    Tensor<T> acc;
    auto pair_norm = [&](const Tensor<T>& m) {
        return fro ? l2_norm(m) : l1_norm(m);
    };
    for (size_t i = 0; i < num; ++i) {
        for (size_t j = 0; j < num; ++j) {
            if (i == j) continue;
            Tensor<T> term = pair_norm(matmul(a_mats[i], transpose(a_mats[j])));
            if (use_b) term = add(term, pair_norm(matmul(transpose(b_mats[i]), b_mats[j])));
            acc = acc.defined() ? add(acc, term) : term;
        }
    }
    return mul(acc, T(1) / static_cast<T>(num * (num - 1)));
}

// All loss components of one forward pass plus their weighted total.
template <typename T>
struct LossBundle {
    Tensor<T> sim, ncc, smooth, orth, reg, total;
    T lambda = T(0.5);
};

template <typename T>
LossBundle<T> total_loss(Tensor<T> sim, Tensor<T> ncc, Tensor<T> smooth, Tensor<T> orth,
                         T lambda) {
    LossBundle<T> b;
    b.sim = std::move(sim);
    b.ncc = std::move(ncc);
    b.smooth = std::move(smooth);
    b.orth = std::move(orth);
    b.lambda = lambda;
    b.reg = add(add(b.sim, b.ncc), b.smooth);
    b.total = add(b.reg, mul(b.orth, lambda));
    assert_all_finite(b.total, "total_loss");
    return b;
}

}  // namespace planeqc
