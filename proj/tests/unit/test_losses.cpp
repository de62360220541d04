#include "doctest.h"

#include <cmath>

#include "gradcheck.hpp"
#include "planeqc/losses.hpp"

using namespace planeqc;
using planeqc::testing::gradcheck;
using planeqc::testing::random_tensor;
using planeqc::testing::random_tensor_away_from_zero;

namespace {

template <typename T>
std::array<Tensor<T>, 3> levels_of(const Tensor<T>& a, const Tensor<T>& b,
                                   const Tensor<T>& c) {
    return {a, b, c};
}

template <typename T>
std::array<Tensor<T>, 3> random_levels(Rng& rng, double lo = 0.1, double hi = 1.0) {
    std::array<Tensor<T>, 3> f;
    Shape shapes[3] = {{3, 8, 8}, {4, 4, 4}, {6, 2, 2}};
    for (size_t l = 0; l < 3; ++l) {
        f[l] = Tensor<T>::zeros(shapes[l]);
        for (auto& v : f[l].mutable_data()) v = static_cast<T>(rng.uniform(lo, hi));
    }
    return f;
}

template <typename T>
std::array<Tensor<T>, 3> map_levels(const std::array<Tensor<T>, 3>& in,
                                    const std::function<T(T)>& fn) {
    std::array<Tensor<T>, 3> out;
    for (size_t l = 0; l < 3; ++l) {
        out[l] = in[l].clone();
        for (auto& v : out[l].mutable_data()) v = fn(v);
    }
    return out;
}

}  // namespace

TEST_CASE("similarity loss at self-pairs and sign flips") {
    Rng rng(21);
    auto f = random_levels<double>(rng, 0.05, 1.0);
    CHECK(loss_sim(f, f).item() == doctest::Approx(-3.0).epsilon(1e-6));
    auto neg_f = map_levels<double>(f, [](double v) { return -v; });
    CHECK(loss_sim(f, neg_f).item() == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("similarity of per-position orthogonal channel vectors is zero") {
    std::array<Tensor<double>, 3> a, b;
    for (size_t l = 0; l < 3; ++l) {
        const size_t n = 4 >> 0;
        a[l] = Tensor<double>::zeros({2, n, n});
        b[l] = Tensor<double>::zeros({2, n, n});
        for (size_t p = 0; p < n * n; ++p) {
            a[l].mutable_data()[p] = 1.0;              // channel 0
            b[l].mutable_data()[n * n + p] = 1.0;      // channel 1
        }
    }
    CHECK(loss_sim(a, b).item() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("similarity is symmetric and scale invariant per position") {
    Rng rng(22);
    auto a = random_levels<double>(rng, 0.05, 1.0);
    auto b = random_levels<double>(rng, 0.05, 1.0);
    CHECK(loss_sim(a, b).item() == doctest::Approx(loss_sim(b, a).item()).epsilon(1e-12));

    // positive per-position scaling of channel vectors
    std::array<Tensor<double>, 3> scaled;
    for (size_t l = 0; l < 3; ++l) {
        scaled[l] = a[l].clone();
        const size_t c = a[l].dim(0), hw = a[l].dim(1) * a[l].dim(2);
        for (size_t p = 0; p < hw; ++p) {
            const double s = 0.2 + 2.0 * rng.uniform();
            for (size_t ch = 0; ch < c; ++ch) scaled[l].mutable_data()[ch * hw + p] *= s;
        }
    }
    CHECK(loss_sim(scaled, b).item() == doctest::Approx(loss_sim(a, b).item()).epsilon(1e-5));
}

TEST_CASE("ncc loss at self-pairs, affine intensity maps, and sign flips") {
    Rng rng(23);
    auto f = random_levels<double>(rng, 0.0, 1.0);
    CHECK(loss_ncc(f, f).item() == doctest::Approx(-3.0).epsilon(1e-5));

    auto scaled = map_levels<double>(f, [](double v) { return 2.0 * v + 5.0; });
    CHECK(loss_ncc(f, scaled).item() == doctest::Approx(-3.0).epsilon(1e-5));

    auto neg_f = map_levels<double>(f, [](double v) { return -v; });
    CHECK(loss_ncc(f, neg_f).item() == doctest::Approx(3.0).epsilon(1e-5));

    CHECK(loss_ncc(f, scaled).item() == doctest::Approx(loss_ncc(scaled, f).item()).epsilon(1e-12));
}

TEST_CASE("ncc invariance under per-channel positive affine maps") {
    Rng rng(24);
    auto a = random_levels<double>(rng, 0.0, 1.0);
    auto b = random_levels<double>(rng, 0.0, 1.0);
    const double base = loss_ncc(a, b).item();
    std::array<Tensor<double>, 3> mapped;
    for (size_t l = 0; l < 3; ++l) {
        mapped[l] = b[l].clone();
        const size_t c = b[l].dim(0), hw = b[l].dim(1) * b[l].dim(2);
        for (size_t ch = 0; ch < c; ++ch) {
            const double gain = 0.3 + 3.0 * rng.uniform();
            const double bias = rng.uniform(-2.0, 2.0);
            for (size_t p = 0; p < hw; ++p) {
                auto& v = mapped[l].mutable_data()[ch * hw + p];
                v = gain * v + bias;
            }
        }
    }
    CHECK(loss_ncc(a, mapped).item() == doctest::Approx(base).epsilon(1e-5));
}

TEST_CASE("smoothness closed forms") {
    auto id = build_affine<double>(TransformMode::Affine, identity_params<double>(TransformMode::Affine));
    std::array<AffineTransform<double>, 3> ids{id, id, id};
    CHECK(loss_smooth(ids).item() == 0.0);

    auto scale2 = build_affine<double>(TransformMode::Scale, {2.0, 2.0});
    CHECK(jacobian_sq_norm(scale2.theta).item() == doctest::Approx(2.0));
}

TEST_CASE("orthogonality loss values") {
    // single plane: no pairs
    auto a0 = Tensor<double>::from({2, 4}, {1, 0, 0, 0, 0, 1, 0, 0});
    CHECK(loss_orth<double>({a0}, {}, OrthVariant::L1A).item() == 0.0);

    // mutually orthogonal row spaces
    auto a1 = Tensor<double>::from({2, 4}, {1, 0, 0, 0, 0, 1, 0, 0});
    auto a2 = Tensor<double>::from({2, 4}, {0, 0, 1, 0, 0, 0, 0, 1});
    CHECK(loss_orth<double>({a1, a2}, {}, OrthVariant::L1A).item() == doctest::Approx(0.0));

    // identical experts with orthonormal rows of rank 16
    const size_t r = 16, d = 32;
    Tensor<double> eye_rows = Tensor<double>::zeros({r, d});
    for (size_t i = 0; i < r; ++i) eye_rows.mutable_data()[i * d + i] = 1.0;
    CHECK(loss_orth<double>({eye_rows, eye_rows}, {}, OrthVariant::L1A).item() ==
          doctest::Approx(16.0));

    // shape mismatch across experts
    auto small = Tensor<double>::zeros({2, 3});
    CHECK_THROWS_AS(loss_orth<double>({a1, small}, {}, OrthVariant::L1A), ConfigError);
}

TEST_CASE("orthogonality variants and relabeling invariance") {
    Rng rng(25);
    auto a1 = random_tensor({3, 6}, rng, -1, 1, false);
    auto a2 = random_tensor({3, 6}, rng, -1, 1, false);
    auto a3 = random_tensor({3, 6}, rng, -1, 1, false);
    auto b1 = random_tensor({6, 3}, rng, -1, 1, false);
    auto b2 = random_tensor({6, 3}, rng, -1, 1, false);
    auto b3 = random_tensor({6, 3}, rng, -1, 1, false);

    for (OrthVariant v : {OrthVariant::L1A, OrthVariant::FroA, OrthVariant::L1AB,
                          OrthVariant::FroAB}) {
        const double forward = loss_orth<double>({a1, a2, a3}, {b1, b2, b3}, v).item();
        const double permuted = loss_orth<double>({a3, a1, a2}, {b3, b1, b2}, v).item();
        CHECK(forward == doctest::Approx(permuted).epsilon(1e-12));
        CHECK(forward >= 0.0);
    }
    // l1 >= fro entrywise relation on the same cross-Gram
    CHECK(loss_orth<double>({a1, a2}, {}, OrthVariant::L1A).item() >=
          loss_orth<double>({a1, a2}, {}, OrthVariant::FroA).item());
}

TEST_CASE("total loss bundle arithmetic") {
    auto z = Tensor<double>::scalar(0.0);
    auto bundle0 = total_loss(z, z, z, z, 0.5);
    CHECK(bundle0.total.item() == 0.0);
    CHECK(bundle0.reg.item() == 0.0);

    auto bundle = total_loss(Tensor<double>::scalar(-3.0), Tensor<double>::scalar(-3.0),
                             Tensor<double>::scalar(0.0), Tensor<double>::scalar(16.0), 0.5);
    CHECK(bundle.reg.item() == doctest::Approx(-6.0));
    CHECK(bundle.total.item() == doctest::Approx(2.0));

    auto lam0 = total_loss(Tensor<double>::scalar(-1.0), Tensor<double>::scalar(-0.5),
                           Tensor<double>::scalar(0.25), Tensor<double>::scalar(7.0), 0.0);
    CHECK(lam0.total.item() == lam0.reg.item());
}

TEST_CASE("loss bounds on random inputs") {
    Rng rng(26);
    for (int trial = 0; trial < 10; ++trial) {
        auto a = random_levels<double>(rng, -1.0, 1.0);
        auto b = random_levels<double>(rng, -1.0, 1.0);
        const double sim = loss_sim(a, b).item();
        const double ncc = loss_ncc(a, b).item();
        CHECK(sim >= -3.0 - 1e-9);
        CHECK(sim <= 3.0 + 1e-9);
        CHECK(ncc >= -3.0 - 1e-4);
        CHECK(ncc <= 3.0 + 1e-4);
    }
}

TEST_CASE("all four losses pass finite-difference checks") {
    Rng rng(27);
    std::array<Tensor<double>, 3> a, b;
    Shape shapes[3] = {{2, 4, 4}, {3, 2, 2}, {2, 2, 2}};
    for (size_t l = 0; l < 3; ++l) {
        a[l] = random_tensor(shapes[l], rng, 0.1, 1.0);
        b[l] = random_tensor(shapes[l], rng, 0.1, 1.0);
    }
    std::vector<Tensor<double>> leaves;
    for (size_t l = 0; l < 3; ++l) {
        leaves.push_back(a[l]);
        leaves.push_back(b[l]);
    }
    auto res_sim = gradcheck([&] { return loss_sim(a, b); }, leaves);
    CHECK(res_sim.max_rel_err <= 1e-4);
    auto res_ncc = gradcheck([&] { return loss_ncc(a, b); }, leaves);
    CHECK(res_ncc.max_rel_err <= 1e-4);

    auto p1 = random_tensor({2}, rng, -0.3, 0.3);
    auto p2 = random_tensor({2}, rng, -0.3, 0.3);
    auto p3 = random_tensor({6}, rng, -0.3, 0.3);
    auto res_smooth = gradcheck(
        [&] {
            std::array<AffineTransform<double>, 3> thetas{
                build_affine(TransformMode::Scale, p1),
                build_affine(TransformMode::Shear, p2),
                build_affine(TransformMode::Affine, p3)};
            return loss_smooth(thetas);
        },
        {p1, p2, p3});
    CHECK(res_smooth.max_rel_err <= 1e-4);

    auto oa = random_tensor_away_from_zero({3, 6}, rng);
    auto ob = random_tensor_away_from_zero({3, 6}, rng);
    auto res_orth = gradcheck(
        [&] { return loss_orth<double>({oa, ob}, {}, OrthVariant::L1A); }, {oa, ob});
    CHECK(res_orth.max_rel_err <= 1e-4);
}
