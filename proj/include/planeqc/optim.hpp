#pragma once

/**
 * @file optim.hpp
 * @brief Adam optimizer with bias correction.
 */

#include <cmath>
#include <unordered_map>
#include <vector>

#include "planeqc/tensor.hpp"

namespace planeqc {

template <typename T>
class Adam {
public:
    explicit Adam(T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<Tensor<T>>& params) {
        for (auto& p : params) step_one(p);
    }

    void step_one(Tensor<T>& p) {
        State& s = states_[p.node().get()];
        if (s.m.empty()) {
            s.m.assign(p.size(), T(0));
            s.v.assign(p.size(), T(0));
        }
        if (s.m.size() != p.size()) throw DimensionError("adam: state/param shape mismatch");
        s.t += 1;
        const T bc1 = T(1) - std::pow(beta1_, static_cast<T>(s.t));
        const T bc2 = T(1) - std::pow(beta2_, static_cast<T>(s.t));
        auto data = p.mutable_data();
        const bool has_grad = p.has_grad();
        for (size_t i = 0; i < data.size(); ++i) {
            const T g = has_grad ? p.grad()[i] : T(0);
            s.m[i] = beta1_ * s.m[i] + (T(1) - beta1_) * g;
            s.v[i] = beta2_ * s.v[i] + (T(1) - beta2_) * g * g;
            const T mhat = s.m[i] / bc1;
            const T vhat = s.v[i] / bc2;
            data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }

    T learning_rate() const { return lr_; }
    void set_learning_rate(T lr) { lr_ = lr; }

private:
    struct State {
        std::vector<T> m, v;
        long t = 0;
    };

    T lr_, beta1_, beta2_, eps_;
    std::unordered_map<TensorNode<T>*, State> states_;
};

}  // namespace planeqc
