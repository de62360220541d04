#pragma once

/**
 * @file experts.hpp
 * @brief Plane-specific low-rank experts with orthogonal knowledge sharing.
 *
 * Each plane owns a pair (A in r x d, B in d x r) whose rows/columns form its
 * knowledge bases. After a plane's training block, the parameter shift is
 * recorded as a task vector; a quantile mask marks its most critical entries
 * and the normalized shift joins the knowledge space used to project the
 * general expert's gradients away from previously seen planes.
 */

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "planeqc/rng.hpp"
#include "planeqc/tensor.hpp"

namespace planeqc {

template <typename T>
struct LowRankExpert {
    Tensor<T> a;  // [r, d]
    Tensor<T> b;  // [d, r]
    std::vector<T> a_pre, b_pre;  // snapshot taken before the plane's block
    bool has_snapshot = false;

    size_t rank() const { return a.dim(0); }
    size_t dim() const { return a.dim(1); }

    void snapshot() {
        a_pre.assign(a.data().begin(), a.data().end());
        b_pre.assign(b.data().begin(), b.data().end());
        has_snapshot = true;
    }
};

template <typename T>
LowRankExpert<T> make_expert(size_t rank, size_t dim, Rng& rng) {
    if (rank > dim / 2)
        throw ConfigError("expert: rank " + std::to_string(rank) + " exceeds dim/2 for dim " +
                          std::to_string(dim));
    LowRankExpert<T> e;
    e.a = Tensor<T>::zeros({rank, dim}, true);
    const T stddev = T(1) / std::sqrt(static_cast<T>(dim));
    for (auto& v : e.a.mutable_data()) v = static_cast<T>(rng.normal()) * stddev;
    e.b = Tensor<T>::zeros({dim, rank}, true);
    return e;
}

template <typename T>
struct TaskVector {
    Tensor<T> d_a;  // [r, d]
    Tensor<T> d_b;  // [d, r]
};

// T = finetuned - snapshot.
template <typename T>
TaskVector<T> task_vector(const LowRankExpert<T>& e) {
    if (!e.has_snapshot) throw StateError("task_vector: expert has no pre-training snapshot");
    std::vector<T> da(e.a.size()), db(e.b.size());
    auto ad = e.a.data();
    auto bd = e.b.data();
    for (size_t i = 0; i < da.size(); ++i) da[i] = ad[i] - e.a_pre[i];
    for (size_t i = 0; i < db.size(); ++i) db[i] = bd[i] - e.b_pre[i];
    return {Tensor<T>::from(e.a.shape(), std::move(da)),
            Tensor<T>::from(e.b.shape(), std::move(db))};
}

// Activation of an expert's bases on a pooled input: z = A x.
template <typename T>
std::vector<T> basis_activation(const Tensor<T>& a, const Tensor<T>& x) {
    if (a.ndim() != 2 || x.ndim() != 1 || a.dim(1) != x.dim(0))
        throw DimensionError("basis_activation: A " + shape_str(a.shape()) + " vs x " +
                             shape_str(x.shape()));
    const size_t r = a.dim(0), d = a.dim(1);
    auto ad = a.data();
    auto xd = x.data();
    std::vector<T> z(r, T(0));
    for (size_t k = 0; k < r; ++k)
        for (size_t j = 0; j < d; ++j) z[k] += ad[k * d + j] * xd[j];
    return z;
}

// Indices whose activation exceeds the threshold. Signed comparison by
// default; absolute-value mode behind the flag.
template <typename T>
std::vector<size_t> select_active_bases(const std::vector<T>& z, T threshold, bool abs_mode) {
    std::vector<size_t> active;
    for (size_t k = 0; k < z.size(); ++k) {
        const T v = abs_mode ? std::abs(z[k]) : z[k];
        if (v > threshold) active.push_back(k);
    }
    return active;
}

// Keeps the kappa = min(|U|, floor(r / planes)) most activated indices of U,
// ties broken by lowest index. Result sorted ascending.
template <typename T>
std::vector<size_t> top_kappa(const std::vector<size_t>& active, const std::vector<T>& z,
                              size_t rank, size_t num_planes) {
    if (num_planes == 0) throw DomainError("top_kappa: no planes");
    const size_t cap = rank / num_planes;
    const size_t kappa = std::min(active.size(), cap);
    std::vector<size_t> order = active;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t i, size_t j) { return z[i] > z[j] || (z[i] == z[j] && i < j); });
    order.resize(kappa);
    std::sort(order.begin(), order.end());
    return order;
}

// Linear-interpolation quantile at level q over a copy of the values.
template <typename T>
T quantile_linear(std::vector<T> values, double q) {
    if (values.empty()) throw DomainError("quantile: empty input");
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return static_cast<T>(static_cast<double>(values[lo]) +
                          frac * (static_cast<double>(values[lo + 1]) -
                                  static_cast<double>(values[lo])));
}

template <typename T>
struct ConflictMask {
    Tensor<T> m_a;  // [r, d], entries in {0, 1}
    Tensor<T> m_b;  // [d, r]
};

// 1 where the signed entry strictly exceeds the (|C|-1)/|C| quantile.
template <typename T>
ConflictMask<T> build_conflict_mask(const TaskVector<T>& tv, size_t num_planes) {
    if (num_planes < 2) throw ConfigError("conflict mask: needs at least 2 planes");
    const double q = static_cast<double>(num_planes - 1) / static_cast<double>(num_planes);
    auto mask_of = [&](const Tensor<T>& t) {
        std::vector<T> vals(t.data().begin(), t.data().end());
        const T thr = quantile_linear(vals, q);
        Tensor<T> m = Tensor<T>::zeros(t.shape());
        auto md = m.mutable_data();
        auto td = t.data();
        for (size_t i = 0; i < md.size(); ++i) md[i] = td[i] > thr ? T(1) : T(0);
        return m;
    };
    return {mask_of(tv.d_a), mask_of(tv.d_b)};
}

// Element-wise OR over same-shape masks.
template <typename T>
ConflictMask<T> union_mask(const std::vector<ConflictMask<T>>& masks) {
    if (masks.empty()) throw DomainError("union_mask: empty input");
    ConflictMask<T> u{Tensor<T>::zeros(masks[0].m_a.shape()),
                      Tensor<T>::zeros(masks[0].m_b.shape())};
    for (const auto& m : masks) {
        if (m.m_a.shape() != u.m_a.shape() || m.m_b.shape() != u.m_b.shape())
            throw DimensionError("union_mask: shape mismatch");
        auto ua = u.m_a.mutable_data();
        auto ub = u.m_b.mutable_data();
        auto ma = m.m_a.data();
        auto mb = m.m_b.data();
        for (size_t i = 0; i < ua.size(); ++i) ua[i] = std::max(ua[i], ma[i]);
        for (size_t i = 0; i < ub.size(); ++i) ub[i] = std::max(ub[i], mb[i]);
    }
    return u;
}

/**
 * Stack of flattened, row-normalized task vectors. The working copy is
 * Gram-Schmidt orthonormalized so g - K^T K g is an exact complement
 * projector; the literal row-normalized projection is kept behind a flag.
 */
template <typename T>
class KnowledgeSpace {
public:
    KnowledgeSpace() = default;
    explicit KnowledgeSpace(bool literal) : literal_(literal) {}

    void add(std::vector<T> row) {
        if (dim_ == 0) dim_ = row.size();
        if (row.size() != dim_) throw DimensionError("knowledge space: row length mismatch");
        double norm = 0;
        for (T v : row) norm += static_cast<double>(v) * static_cast<double>(v);
        norm = std::sqrt(norm);
        if (norm > 1e-12)
            for (T& v : row) v = static_cast<T>(static_cast<double>(v) / norm);
        raw_.push_back(std::move(row));
        rebuild_ortho();
    }

    size_t rows() const { return raw_.size(); }
    size_t dim() const { return dim_; }
    const std::vector<std::vector<T>>& raw_rows() const { return raw_; }
    const std::vector<std::vector<T>>& ortho_rows() const { return ortho_; }

    // g_orth = g - K^T K g.
    std::vector<T> project(const std::vector<T>& g) const {
        if (raw_.empty()) return g;
        if (g.size() != dim_) throw DimensionError("knowledge space: gradient length mismatch");
        const auto& rows = literal_ ? raw_ : ortho_;
        std::vector<T> out = g;
        for (const auto& k : rows) {
            double dot = 0;
            for (size_t i = 0; i < dim_; ++i)
                dot += static_cast<double>(k[i]) * static_cast<double>(g[i]);
            for (size_t i = 0; i < dim_; ++i)
                out[i] -= static_cast<T>(dot * static_cast<double>(k[i]));
        }
        return out;
    }

private:
    void rebuild_ortho() {
        ortho_.clear();
        for (const auto& row : raw_) {
            std::vector<double> v(row.begin(), row.end());
            // two passes of modified Gram-Schmidt
            for (int pass = 0; pass < 2; ++pass) {
                for (const auto& o : ortho_) {
                    double dot = 0;
                    for (size_t i = 0; i < dim_; ++i)
                        dot += static_cast<double>(o[i]) * v[i];
                    for (size_t i = 0; i < dim_; ++i) v[i] -= dot * static_cast<double>(o[i]);
                }
            }
            double norm = 0;
            for (double x : v) norm += x * x;
            norm = std::sqrt(norm);
            if (norm < 1e-10) continue;  // dependent or zero row carries no new direction
            std::vector<T> o(dim_);
            for (size_t i = 0; i < dim_; ++i) o[i] = static_cast<T>(v[i] / norm);
            ortho_.push_back(std::move(o));
        }
    }

    std::vector<std::vector<T>> raw_, ortho_;
    size_t dim_ = 0;
    bool literal_ = false;
};

// In-place update E <- E - eta (M . g_orth + (1 - M) . g).
template <typename T>
void masked_update(Tensor<T>& param, const std::vector<T>& g_orth, const std::vector<T>& g_raw,
                   const Tensor<T>& mask, T eta) {
    auto pd = param.mutable_data();
    auto md = mask.data();
    if (g_orth.size() != pd.size() || g_raw.size() != pd.size() || md.size() != pd.size())
        throw DimensionError("masked_update: shape mismatch");
    for (size_t i = 0; i < pd.size(); ++i)
        pd[i] -= eta * (md[i] * g_orth[i] + (T(1) - md[i]) * g_raw[i]);
}

template <typename T>
struct SynergyExpert {
    Tensor<T> a;  // [m, d]
    Tensor<T> b;  // [d, m]
    size_t count = 0;
};

// Stacks the selected A rows (plane order, then general) and the matching B
// columns. Empty selection yields the zero map (count 0).
template <typename T>
SynergyExpert<T> assemble_synergy(
    const std::vector<std::pair<const LowRankExpert<T>*, std::vector<size_t>>>& plane_selections,
    const LowRankExpert<T>* general, const std::vector<size_t>& general_selection) {
    size_t total = 0;
    size_t d = 0;
    auto account = [&](const LowRankExpert<T>* e, const std::vector<size_t>& sel) {
        if (sel.empty()) return;
        if (d == 0) d = e->dim();
        if (e->dim() != d) throw DimensionError("synergy: expert dims disagree");
        total += sel.size();
    };
    for (const auto& [e, sel] : plane_selections) account(e, sel);
    if (general) account(general, general_selection);

    SynergyExpert<T> out;
    out.count = total;
    if (total == 0) return out;

    out.a = Tensor<T>::zeros({total, d});
    out.b = Tensor<T>::zeros({d, total});
    auto adest = out.a.mutable_data();
    auto bdest = out.b.mutable_data();
    size_t row = 0;
    auto append = [&](const LowRankExpert<T>* e, const std::vector<size_t>& sel) {
        const size_t r = e->rank();
        auto asrc = e->a.data();
        auto bsrc = e->b.data();
        for (size_t k : sel) {
            if (k >= r) throw DimensionError("synergy: basis index out of range");
            for (size_t j = 0; j < d; ++j) adest[row * d + j] = asrc[k * d + j];
            for (size_t j = 0; j < d; ++j) bdest[j * total + row] = bsrc[j * r + k];
            ++row;
        }
    };
    for (const auto& [e, sel] : plane_selections) append(e, sel);
    if (general) append(general, general_selection);
    return out;
}

// Per-level subspace state: one expert per plane plus the shared general
// expert, the committed masks, and the knowledge spaces per matrix kind.
template <typename T>
struct OksLevel {
    size_t rank = 0, dim = 0;
    std::vector<LowRankExpert<T>> planes;
    LowRankExpert<T> general;
    KnowledgeSpace<T> know_a, know_b;
    std::vector<TaskVector<T>> task_vectors;  // per completed plane block
    std::vector<ConflictMask<T>> committed;
    ConflictMask<T> mask_union;

    OksLevel() = default;

    OksLevel(size_t num_planes, size_t rank_, size_t dim_, bool literal_projection, Rng& rng)
        : rank(rank_), dim(dim_), know_a(literal_projection), know_b(literal_projection) {
        for (size_t c = 0; c < num_planes; ++c) planes.push_back(make_expert<T>(rank, dim, rng));
        general = make_expert<T>(rank, dim, rng);
        mask_union = {Tensor<T>::zeros({rank, dim}), Tensor<T>::zeros({dim, rank})};
    }

    // Commits a finished plane block: task vector, conflict mask, K rows.
    void commit_plane(size_t plane, size_t num_planes) {
        TaskVector<T> tv = task_vector(planes.at(plane));
        if (num_planes >= 2) {
            committed.push_back(build_conflict_mask(tv, num_planes));
            std::vector<ConflictMask<T>> all = committed;
            mask_union = union_mask(all);
        }
        know_a.add(std::vector<T>(tv.d_a.data().begin(), tv.d_a.data().end()));
        know_b.add(std::vector<T>(tv.d_b.data().begin(), tv.d_b.data().end()));
        task_vectors.push_back(std::move(tv));
    }
};

}  // namespace planeqc
