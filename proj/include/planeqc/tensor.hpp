#pragma once

/**
 * @file tensor.hpp
 * @brief Dense row-major tensors with reverse-mode differentiation.
 *
 * Tensors are value-semantic handles onto shared nodes. A node owns its data
 * buffer, an optional gradient buffer of the same shape, and a requires_grad
 * flag. Differentiable operations record a backprop closure onto the active
 * GradientTape; backward() replays the records in strict reverse execution
 * order and then clears the tape.
 *
 * Tensors are immutable after construction except for gradient buffers and
 * explicit leaf mutation through mutable_data() (optimizer steps, loading).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "planeqc/errors.hpp"

namespace planeqc {

// Guard added inside every std/normalization denominator.
inline constexpr double kEps = 1e-6;

using Shape = std::vector<size_t>;

inline size_t shape_numel(const Shape& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
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

template <typename T>
struct TensorNode {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until a backward pass touches this node
    bool requires_grad = false;
};

template <typename T>
class GradientTape;

template <typename T>
class Tensor {
public:
    using Node = TensorNode<T>;

    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        return Tensor(std::move(shape), {}, requires_grad, /*fill*/ T(0), /*use_fill*/ true);
    }

    static Tensor full(Shape shape, T value, bool requires_grad = false) {
        return Tensor(std::move(shape), {}, requires_grad, value, true);
    }

    static Tensor ones(Shape shape, bool requires_grad = false) {
        return full(std::move(shape), T(1), requires_grad);
    }

    static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false) {
        if (shape_numel(shape) != values.size())
            throw DimensionError("tensor: data length " + std::to_string(values.size()) +
                                 " does not match shape " + shape_str(shape));
        return Tensor(std::move(shape), std::move(values), requires_grad, T(0), false);
    }

    static Tensor scalar(T value, bool requires_grad = false) {
        return from({}, {value}, requires_grad);
    }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    size_t ndim() const { return node_->shape.size(); }
    size_t size() const { return node_->data.size(); }
    size_t dim(size_t i) const { return node_->shape.at(i); }

    std::span<const T> data() const { return {node_->data.data(), node_->data.size()}; }
    // Leaf mutation only: optimizer updates and deserialization.
    std::span<T> mutable_data() { return {node_->data.data(), node_->data.size()}; }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool rg) { node_->requires_grad = rg; }

    bool has_grad() const { return !node_->grad.empty(); }
    std::span<const T> grad() const {
        if (!has_grad()) throw StateError("tensor: gradient not populated");
        return {node_->grad.data(), node_->grad.size()};
    }
    std::span<T> grad_buffer() {
        ensure_grad();
        return {node_->grad.data(), node_->grad.size()};
    }
    void ensure_grad() {
        if (node_->grad.empty()) node_->grad.assign(node_->data.size(), T(0));
    }
    void zero_grad() {
        if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
    }
    void clear_grad() { node_->grad.clear(); }

    T item() const {
        if (size() != 1) throw ContractError("tensor: item() on non-scalar " + shape_str(shape()));
        return node_->data[0];
    }

    T at(std::initializer_list<size_t> idx) const {
        return node_->data[flat_index(idx)];
    }
    T& at_mut(std::initializer_list<size_t> idx) { return node_->data[flat_index(idx)]; }

    Tensor clone() const {
        Tensor c = from(node_->shape, node_->data, node_->requires_grad);
        return c;
    }

    std::shared_ptr<Node> node() const { return node_; }

    bool same_node(const Tensor& other) const { return node_ == other.node_; }

private:
    Tensor(Shape shape, std::vector<T> values, bool rg, T fill, bool use_fill) {
        node_ = std::make_shared<Node>();
        node_->shape = std::move(shape);
        if (use_fill)
            node_->data.assign(shape_numel(node_->shape), fill);
        else
            node_->data = std::move(values);
        node_->requires_grad = rg;
    }

    size_t flat_index(std::initializer_list<size_t> idx) const {
        if (idx.size() != node_->shape.size())
            throw DimensionError("tensor: index rank mismatch");
        size_t flat = 0;
        size_t i = 0;
        for (size_t v : idx) {
            if (v >= node_->shape[i]) throw DimensionError("tensor: index out of range");
            flat = flat * node_->shape[i] + v;
            ++i;
        }
        return flat;
    }

    std::shared_ptr<Node> node_;
};

/**
 * Ordered record of differentiable operations. One tape is active per thread
 * at a time; independent tapes on separate threads share no state.
 */
template <typename T>
class GradientTape {
public:
    GradientTape() = default;
    GradientTape(const GradientTape&) = delete;
    GradientTape& operator=(const GradientTape&) = delete;

    class Scope {
    public:
        explicit Scope(GradientTape& tape) : prev_(current_slot()) { current_slot() = &tape; }
        ~Scope() { current_slot() = prev_; }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        GradientTape* prev_;
    };

    static GradientTape* current() { return current_slot(); }

    void record(std::shared_ptr<TensorNode<T>> out, std::function<void()> backprop) {
        records_.push_back({std::move(out), std::move(backprop)});
    }

    size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    void clear() { records_.clear(); }

    // Seeds loss.grad = 1 and replays records newest-first. Clears the tape.
    void backward(Tensor<T> loss) {
        if (loss.size() != 1)
            throw ContractError("backward: loss must be scalar, got " + shape_str(loss.shape()));
        loss.ensure_grad();
        loss.grad_buffer()[0] = T(1);
        for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
            if (!it->out->grad.empty()) it->backprop();
        }
        clear();
    }

private:
    struct Record {
        std::shared_ptr<TensorNode<T>> out;
        std::function<void()> backprop;
    };

    static GradientTape*& current_slot() {
        thread_local GradientTape* slot = nullptr;
        return slot;
    }

    std::vector<Record> records_;
};

// Backward through the active tape.
template <typename T>
void backward(const Tensor<T>& loss) {
    auto* tape = GradientTape<T>::current();
    if (!tape) throw ContractError("backward: no active gradient tape");
    tape->backward(loss);
}

namespace detail {

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
}

template <typename T>
bool tape_wants(const Tensor<T>& out) {
    return GradientTape<T>::current() != nullptr && out.requires_grad();
}

template <typename T>
void record_op(Tensor<T> out, std::function<void()> fn) {
    GradientTape<T>::current()->record(out.node(), std::move(fn));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise operations
// ---------------------------------------------------------------------------

template <typename T, class Fwd, class BwdA, class BwdB>
Tensor<T> binary_elementwise(const Tensor<T>& a, const Tensor<T>& b, const char* name, Fwd fwd,
                             BwdA dfa, BwdB dfb) {
    detail::check_same_shape(a, b, name);
    Tensor<T> out = Tensor<T>::zeros(a.shape(), a.requires_grad() || b.requires_grad());
    auto oa = a.data();
    auto ob = b.data();
    auto od = out.mutable_data();
    for (size_t i = 0; i < od.size(); ++i) od[i] = fwd(oa[i], ob[i]);
    if (detail::tape_wants(out)) {
        Tensor<T> ca = a, cb = b, co = out;
        detail::record_op<T>(out, [ca, cb, co, dfa, dfb]() mutable {
            auto g = co.grad();
            if (ca.requires_grad()) {
                auto ga = ca.grad_buffer();
                auto da = ca.data();
                auto db = cb.data();
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfa(da[i], db[i]);
            }
            if (cb.requires_grad()) {
                auto gb = cb.grad_buffer();
                auto da = ca.data();
                auto db = cb.data();
                for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * dfb(da[i], db[i]);
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_elementwise(
        a, b, "add", [](T x, T y) { return x + y; }, [](T, T) { return T(1); },
        [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_elementwise(
        a, b, "sub", [](T x, T y) { return x - y; }, [](T, T) { return T(1); },
        [](T, T) { return T(-1); });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_elementwise(
        a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y) { return y; },
        [](T x, T) { return x; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
    auto bd = b.data();
    for (size_t i = 0; i < bd.size(); ++i)
        if (bd[i] == T(0)) throw DomainError("div: zero denominator");
    return binary_elementwise(
        a, b, "div", [](T x, T y) { return x / y; }, [](T, T y) { return T(1) / y; },
        [](T x, T y) { return -x / (y * y); });
}

template <typename T, class Fwd, class Bwd>
Tensor<T> unary_elementwise(const Tensor<T>& a, Fwd fwd, Bwd dfa) {
    Tensor<T> out = Tensor<T>::zeros(a.shape(), a.requires_grad());
    auto ad = a.data();
    auto od = out.mutable_data();
    for (size_t i = 0; i < od.size(); ++i) od[i] = fwd(ad[i]);
    if (detail::tape_wants(out)) {
        Tensor<T> ca = a, co = out;
        detail::record_op<T>(out, [ca, co, dfa]() mutable {
            auto g = co.grad();
            auto ga = ca.grad_buffer();
            auto da = ca.data();
            auto od2 = co.data();
            for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfa(da[i], od2[i]);
        });
    }
    return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, T s) {
    return unary_elementwise(a, [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, T s) {
    return add(a, -s);
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, T s) {
    return unary_elementwise(a, [s](T x) { return x * s; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, T s) {
    if (s == T(0)) throw DomainError("div: zero scalar denominator");
    return mul(a, T(1) / s);
}

template <typename T>
Tensor<T> neg(const Tensor<T>& a) {
    return mul(a, T(-1));
}

template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
    return unary_elementwise(
        a, [](T x) { return std::abs(x); },
        [](T x, T) { return x >= T(0) ? T(1) : T(-1); });
}

template <typename T>
Tensor<T> sqrt(const Tensor<T>& a) {
    auto ad = a.data();
    for (size_t i = 0; i < ad.size(); ++i)
        if (ad[i] < T(0)) throw DomainError("sqrt: negative input");
    return unary_elementwise(
        a, [](T x) { return std::sqrt(x); },
        [](T, T y) { return T(1) / (T(2) * std::max(y, T(kEps))); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
    return unary_elementwise(
        a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
    return unary_elementwise(
        a, [](T x) { return x > T(0) ? x : T(0); },
        [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

// ---------------------------------------------------------------------------
// Matrix operations
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.ndim() != 2 || b.ndim() != 2)
        throw DimensionError("matmul: expects 2-d operands");
    const size_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
    if (k != k2)
        throw DimensionError("matmul: inner dims disagree " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    Tensor<T> out = Tensor<T>::zeros({m, n}, a.requires_grad() || b.requires_grad());
    auto ad = a.data();
    auto bd = b.data();
    auto od = out.mutable_data();
    for (size_t i = 0; i < m; ++i)
        for (size_t p = 0; p < k; ++p) {
            T av = ad[i * k + p];
            if (av == T(0)) continue;
            for (size_t j = 0; j < n; ++j) od[i * n + j] += av * bd[p * n + j];
        }
    if (detail::tape_wants(out)) {
        Tensor<T> ca = a, cb = b, co = out;
        detail::record_op<T>(out, [ca, cb, co, m, k, n]() mutable {
            auto g = co.grad();
            if (ca.requires_grad()) {
                auto ga = ca.grad_buffer();
                auto bd2 = cb.data();
                // dA = G * B^T
                for (size_t i = 0; i < m; ++i)
                    for (size_t p = 0; p < k; ++p) {
                        T acc = T(0);
                        for (size_t j = 0; j < n; ++j) acc += g[i * n + j] * bd2[p * n + j];
                        ga[i * k + p] += acc;
                    }
            }
            if (cb.requires_grad()) {
                auto gb = cb.grad_buffer();
                auto ad2 = ca.data();
                // dB = A^T * G
                for (size_t p = 0; p < k; ++p)
                    for (size_t j = 0; j < n; ++j) {
                        T acc = T(0);
                        for (size_t i = 0; i < m; ++i) acc += ad2[i * k + p] * g[i * n + j];
                        gb[p * n + j] += acc;
                    }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
    if (a.ndim() != 2) throw DimensionError("transpose: expects 2-d operand");
    const size_t m = a.dim(0), n = a.dim(1);
    Tensor<T> out = Tensor<T>::zeros({n, m}, a.requires_grad());
    auto ad = a.data();
    auto od = out.mutable_data();
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) od[j * m + i] = ad[i * n + j];
    if (detail::tape_wants(out)) {
        Tensor<T> ca = a, co = out;
        detail::record_op<T>(out, [ca, co, m, n]() mutable {
            auto g = co.grad();
            auto ga = ca.grad_buffer();
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
        });
    }
    return out;
}

// y = W x (+ bias), W: [m,n], x: [n] -> [m]
template <typename T>
Tensor<T> linear(const Tensor<T>& w, const Tensor<T>& x, const Tensor<T>* bias = nullptr) {
    if (w.ndim() != 2 || x.ndim() != 1 || w.dim(1) != x.dim(0))
        throw DimensionError("linear: W " + shape_str(w.shape()) + " incompatible with x " +
                             shape_str(x.shape()));
    const size_t m = w.dim(0), n = w.dim(1);
    bool rg = w.requires_grad() || x.requires_grad() || (bias && bias->requires_grad());
    Tensor<T> out = Tensor<T>::zeros({m}, rg);
    auto wd = w.data();
    auto xd = x.data();
    auto od = out.mutable_data();
    for (size_t i = 0; i < m; ++i) {
        T acc = bias ? bias->data()[i] : T(0);
        for (size_t j = 0; j < n; ++j) acc += wd[i * n + j] * xd[j];
        od[i] = acc;
    }
    if (detail::tape_wants(out)) {
        Tensor<T> cw = w, cx = x, co = out;
        Tensor<T> cbias = bias ? *bias : Tensor<T>();
        detail::record_op<T>(out, [cw, cx, co, cbias, m, n]() mutable {
            auto g = co.grad();
            if (cw.requires_grad()) {
                auto gw = cw.grad_buffer();
                auto xd2 = cx.data();
                for (size_t i = 0; i < m; ++i)
                    for (size_t j = 0; j < n; ++j) gw[i * n + j] += g[i] * xd2[j];
            }
            if (cx.requires_grad()) {
                auto gx = cx.grad_buffer();
                auto wd2 = cw.data();
                for (size_t j = 0; j < n; ++j) {
                    T acc = T(0);
                    for (size_t i = 0; i < m; ++i) acc += wd2[i * n + j] * g[i];
                    gx[j] += acc;
                }
            }
            if (cbias.defined() && cbias.requires_grad()) {
                auto gb = cbias.grad_buffer();
                for (size_t i = 0; i < m; ++i) gb[i] += g[i];
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

enum class ReduceKind { Sum, Mean, Min, Max, L1, L2, Std };

namespace detail {

template <typename T>
struct AxisView {
    size_t outer, count, inner;
};

template <typename T>
AxisView<T> axis_view(const Shape& shape, int axis) {
    AxisView<T> v{1, shape[static_cast<size_t>(axis)], 1};
    for (int i = 0; i < axis; ++i) v.outer *= shape[static_cast<size_t>(i)];
    for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i) v.inner *= shape[i];
    return v;
}

template <typename T, class Fn>
void for_each_slice(const AxisView<T>& v, Fn fn) {
    for (size_t o = 0; o < v.outer; ++o)
        for (size_t i = 0; i < v.inner; ++i) fn(o * v.inner + i, o * v.count * v.inner + i, v.inner);
}

// Single-slice reduction forward + element gradient.
template <typename T>
struct SliceReduce {
    static T forward(ReduceKind kind, const T* x, size_t n, size_t stride) {
        switch (kind) {
            case ReduceKind::Sum: {
                T s = 0;
                for (size_t k = 0; k < n; ++k) s += x[k * stride];
                return s;
            }
            case ReduceKind::Mean: {
                T s = 0;
                for (size_t k = 0; k < n; ++k) s += x[k * stride];
                return s / static_cast<T>(n);
            }
            case ReduceKind::Min: {
                T m = x[0];
                for (size_t k = 1; k < n; ++k) m = std::min(m, x[k * stride]);
                return m;
            }
            case ReduceKind::Max: {
                T m = x[0];
                for (size_t k = 1; k < n; ++k) m = std::max(m, x[k * stride]);
                return m;
            }
            case ReduceKind::L1: {
                T s = 0;
                for (size_t k = 0; k < n; ++k) s += std::abs(x[k * stride]);
                return s;
            }
            case ReduceKind::L2: {
                T s = 0;
                for (size_t k = 0; k < n; ++k) s += x[k * stride] * x[k * stride];
                return std::sqrt(s);
            }
            case ReduceKind::Std: {
                T mu = 0;
                for (size_t k = 0; k < n; ++k) mu += x[k * stride];
                mu /= static_cast<T>(n);
                T var = 0;
                for (size_t k = 0; k < n; ++k) {
                    T d = x[k * stride] - mu;
                    var += d * d;
                }
                var /= static_cast<T>(n);
                return std::sqrt(var + T(kEps) * T(kEps));
            }
        }
        return T(0);
    }

    static void backward(ReduceKind kind, const T* x, size_t n, size_t stride, T value, T gout,
                         T* gx) {
        switch (kind) {
            case ReduceKind::Sum:
                for (size_t k = 0; k < n; ++k) gx[k * stride] += gout;
                break;
            case ReduceKind::Mean:
                for (size_t k = 0; k < n; ++k) gx[k * stride] += gout / static_cast<T>(n);
                break;
            case ReduceKind::Min:
            case ReduceKind::Max:
                // subgradient routed to the first extremum
                for (size_t k = 0; k < n; ++k)
                    if (x[k * stride] == value) {
                        gx[k * stride] += gout;
                        break;
                    }
                break;
            case ReduceKind::L1:
                for (size_t k = 0; k < n; ++k)
                    gx[k * stride] += gout * (x[k * stride] >= T(0) ? T(1) : T(-1));
                break;
            case ReduceKind::L2: {
                T denom = std::max(value, T(kEps));
                for (size_t k = 0; k < n; ++k) gx[k * stride] += gout * x[k * stride] / denom;
                break;
            }
            case ReduceKind::Std: {
                T mu = 0;
                for (size_t k = 0; k < n; ++k) mu += x[k * stride];
                mu /= static_cast<T>(n);
                for (size_t k = 0; k < n; ++k)
                    gx[k * stride] +=
                        gout * (x[k * stride] - mu) / (static_cast<T>(n) * value);
                break;
            }
        }
    }
};

}  // namespace detail

// Full reduction to scalar, or reduction along one axis.
template <typename T>
Tensor<T> reduce(ReduceKind kind, const Tensor<T>& t, int axis = -1) {
    if (t.size() == 0) throw DomainError("reduce: empty tensor");
    if (axis >= 0 && static_cast<size_t>(axis) >= t.ndim())
        throw DimensionError("reduce: axis out of range");

    if (axis < 0) {
        Tensor<T> out = Tensor<T>::zeros(Shape{}, t.requires_grad());
        out.mutable_data()[0] =
            detail::SliceReduce<T>::forward(kind, t.data().data(), t.size(), 1);
        if (detail::tape_wants(out)) {
            Tensor<T> ct = t, co = out;
            detail::record_op<T>(out, [ct, co, kind]() mutable {
                auto gx = ct.grad_buffer();
                detail::SliceReduce<T>::backward(kind, ct.data().data(), ct.size(), 1,
                                                 co.data()[0], co.grad()[0], gx.data());
            });
        }
        return out;
    }

    auto view = detail::axis_view<T>(t.shape(), axis);
    Shape out_shape;
    for (size_t i = 0; i < t.ndim(); ++i)
        if (i != static_cast<size_t>(axis)) out_shape.push_back(t.dim(i));
    Tensor<T> out = Tensor<T>::zeros(out_shape, t.requires_grad());
    auto td = t.data();
    auto od = out.mutable_data();
    detail::for_each_slice<T>(view, [&](size_t oi, size_t base, size_t stride) {
        od[oi] = detail::SliceReduce<T>::forward(kind, td.data() + base, view.count, stride);
    });
    if (detail::tape_wants(out)) {
        Tensor<T> ct = t, co = out;
        detail::record_op<T>(out, [ct, co, kind, view]() mutable {
            auto gx = ct.grad_buffer();
            auto g = co.grad();
            auto xd = ct.data();
            auto ov = co.data();
            detail::for_each_slice<T>(view, [&](size_t oi, size_t base, size_t stride) {
                detail::SliceReduce<T>::backward(kind, xd.data() + base, view.count, stride,
                                                 ov[oi], g[oi], gx.data() + base);
            });
        });
    }
    return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& t, int axis = -1) {
    return reduce(ReduceKind::Sum, t, axis);
}
template <typename T>
Tensor<T> mean(const Tensor<T>& t, int axis = -1) {
    return reduce(ReduceKind::Mean, t, axis);
}
template <typename T>
Tensor<T> l1_norm(const Tensor<T>& t, int axis = -1) {
    return reduce(ReduceKind::L1, t, axis);
}
template <typename T>
Tensor<T> l2_norm(const Tensor<T>& t, int axis = -1) {
    return reduce(ReduceKind::L2, t, axis);
}
template <typename T>
Tensor<T> stddev(const Tensor<T>& t, int axis = -1) {
    return reduce(ReduceKind::Std, t, axis);
}
template <typename T>
Tensor<T> reduce_min(const Tensor<T>& t, int axis = -1) {
    return reduce(ReduceKind::Min, t, axis);
}
template <typename T>
Tensor<T> reduce_max(const Tensor<T>& t, int axis = -1) {
    return reduce(ReduceKind::Max, t, axis);
}

template <typename T>
void assert_all_finite(const Tensor<T>& t, const char* what) {
    for (T v : t.data())
        if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite value");
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace planeqc
