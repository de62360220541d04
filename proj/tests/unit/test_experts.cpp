#include "doctest.h"

#include <algorithm>

#include "gradcheck.hpp"
#include "planeqc/experts.hpp"

using namespace planeqc;
using planeqc::testing::random_tensor;

TEST_CASE("activation thresholding, signed and absolute") {
    std::vector<double> z{0.5, 0.05, 0.2};
    auto active = select_active_bases(z, 0.1, false);
    CHECK(active == std::vector<size_t>{0, 2});

    std::vector<double> low{0.05, 0.1, 0.0};
    CHECK(select_active_bases(low, 0.1, false).empty());

    std::vector<double> mixed{-0.9, 0.2};
    CHECK(select_active_bases(mixed, 0.1, false) == std::vector<size_t>{1});
    CHECK(select_active_bases(mixed, 0.1, true) == std::vector<size_t>{0, 1});
}

TEST_CASE("top-kappa keeps the most activated bases") {
    std::vector<double> z{0.9, 0.1, 0.8, 0.7, 0.2, 0.6, 0.5, 0.4};

    // r=16, |C|=4 -> cap 4 of the 6 active
    std::vector<size_t> active{0, 2, 3, 5, 6, 7};
    auto kept = top_kappa(active, z, 16, 4);
    CHECK(kept == std::vector<size_t>{0, 2, 3, 5});

    std::vector<size_t> two{4, 6};
    CHECK(top_kappa(two, z, 16, 4) == two);

    // equal activations tie-break to the lowest index
    std::vector<double> tie{0, 0, 0, 0.5, 0, 0, 0, 0.5};
    std::vector<size_t> both{3, 7};
    CHECK(top_kappa(both, tie, 8, 8) == std::vector<size_t>{3});
}

TEST_CASE("kappa never exceeds floor(r / planes)") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t r = 4 + rng.next_u64() % 13;
        const size_t planes = 2 + rng.next_u64() % 4;
        std::vector<double> z(r);
        for (auto& v : z) v = rng.uniform(-1.0, 1.0);
        auto active = select_active_bases(z, 0.0, true);
        auto kept = top_kappa(active, z, r, planes);
        CHECK(kept.size() <= r / planes);
    }
    // more planes than rank: the cap collapses to zero
    std::vector<double> z{0.9, 0.8, 0.7};
    CHECK(top_kappa({0, 1, 2}, z, 3, 4).empty());
}

TEST_CASE("task vectors require a snapshot and capture the shift") {
    Rng rng(32);
    auto e = make_expert<double>(2, 6, rng);
    CHECK_THROWS_AS(task_vector(e), StateError);

    e.snapshot();
    auto zero = task_vector(e);
    for (double v : zero.d_a.data()) CHECK(v == 0.0);
    for (double v : zero.d_b.data()) CHECK(v == 0.0);

    // single explicit step: T = -eta * g
    const double eta = 0.01;
    std::vector<double> g(e.a.size());
    for (auto& v : g) v = rng.normal();
    auto data = e.a.mutable_data();
    for (size_t i = 0; i < data.size(); ++i) data[i] -= eta * g[i];
    auto tv = task_vector(e);
    for (size_t i = 0; i < g.size(); ++i)
        CHECK(tv.d_a.data()[i] == doctest::Approx(-eta * g[i]).epsilon(1e-12));

    auto tv2 = task_vector(e);
    for (size_t i = 0; i < g.size(); ++i) CHECK(tv.d_a.data()[i] == tv2.d_a.data()[i]);
}

TEST_CASE("linear-interpolation quantile matches the sort oracle") {
    // |C|=2 on 1..10: threshold 5.5
    std::vector<double> vals;
    for (int i = 1; i <= 10; ++i) vals.push_back(i);
    CHECK(quantile_linear(vals, 0.5) == doctest::Approx(5.5));
}

TEST_CASE("conflict masks mark the top 1/|C| fraction") {
    Rng rng(33);

    SUBCASE("100 distinct entries at |C|=4 give exactly 25 ones") {
        std::vector<double> vals(100);
        for (auto& v : vals) v = rng.uniform(-5.0, 5.0);
        TaskVector<double> tv{Tensor<double>::from({10, 10}, std::vector<double>(vals)),
                              Tensor<double>::from({10, 10}, std::vector<double>(vals))};
        auto mask = build_conflict_mask(tv, 4);
        double ones = 0;
        for (double v : mask.m_a.data()) ones += v;
        CHECK(ones == 25.0);

        // sort-based oracle: strictly above the interpolated 0.75 quantile
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        const double h = 0.75 * 99.0;
        const size_t lo = static_cast<size_t>(h);
        const double thr = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
        for (size_t i = 0; i < vals.size(); ++i)
            CHECK(mask.m_a.data()[i] == (vals[i] > thr ? 1.0 : 0.0));
    }

    SUBCASE("equal entries give an all-zero mask") {
        TaskVector<double> tv{Tensor<double>::full({4, 4}, 0.7),
                              Tensor<double>::full({4, 4}, 0.7)};
        auto mask = build_conflict_mask(tv, 3);
        for (double v : mask.m_a.data()) CHECK(v == 0.0);
    }

    SUBCASE("fewer than two planes is a config error") {
        TaskVector<double> tv{Tensor<double>::zeros({2, 2}), Tensor<double>::zeros({2, 2})};
        CHECK_THROWS_AS(build_conflict_mask(tv, 1), ConfigError);
    }

    SUBCASE("ones fraction is 1/|C| within one entry for random vectors") {
        for (size_t planes : {2, 3, 4}) {
            std::vector<double> vals(8 * 16);
            for (auto& v : vals) v = rng.normal();
            TaskVector<double> tv{Tensor<double>::from({8, 16}, std::vector<double>(vals)),
                                  Tensor<double>::from({8, 16}, std::vector<double>(vals))};
            auto mask = build_conflict_mask(tv, planes);
            double ones = 0;
            for (double v : mask.m_a.data()) ones += v;
            const double expect = static_cast<double>(vals.size()) / static_cast<double>(planes);
            CHECK(std::abs(ones - expect) <= 1.0);
        }
    }
}

TEST_CASE("union mask is an element-wise OR") {
    ConflictMask<double> a{Tensor<double>::from({2, 2}, {1, 0, 0, 0}),
                           Tensor<double>::from({2, 2}, {0, 0, 0, 0})};
    ConflictMask<double> b{Tensor<double>::from({2, 2}, {0, 0, 1, 0}),
                           Tensor<double>::from({2, 2}, {0, 1, 0, 0})};

    auto single = union_mask<double>({a});
    for (size_t i = 0; i < 4; ++i) CHECK(single.m_a.data()[i] == a.m_a.data()[i]);

    auto both = union_mask<double>({a, b});
    CHECK(both.m_a.data()[0] == 1.0);
    CHECK(both.m_a.data()[2] == 1.0);
    CHECK(both.m_b.data()[1] == 1.0);

    ConflictMask<double> zeros{Tensor<double>::zeros({2, 2}), Tensor<double>::zeros({2, 2})};
    auto with_zero = union_mask<double>({a, zeros});
    for (size_t i = 0; i < 4; ++i) CHECK(with_zero.m_a.data()[i] == a.m_a.data()[i]);

    // complementary halves cover everything
    ConflictMask<double> left{Tensor<double>::from({2, 2}, {1, 1, 0, 0}),
                              Tensor<double>::from({2, 2}, {1, 1, 0, 0})};
    ConflictMask<double> right{Tensor<double>::from({2, 2}, {0, 0, 1, 1}),
                               Tensor<double>::from({2, 2}, {0, 0, 1, 1})};
    auto full = union_mask<double>({left, right});
    for (double v : full.m_a.data()) CHECK(v == 1.0);

    ConflictMask<double> wrong{Tensor<double>::zeros({3, 2}), Tensor<double>::zeros({2, 3})};
    CHECK_THROWS_AS(union_mask<double>({a, wrong}), DimensionError);
}

TEST_CASE("orthogonal projection against the knowledge space") {
    Rng rng(34);
    KnowledgeSpace<double> empty;
    std::vector<double> g(12);
    for (auto& v : g) v = rng.normal();
    CHECK(empty.project(g) == g);

    KnowledgeSpace<double> know;
    std::vector<double> row1(12), row2(12);
    for (auto& v : row1) v = rng.normal();
    for (auto& v : row2) v = rng.normal();
    know.add(row1);
    know.add(row2);
    CHECK(know.rows() == 2);

    // a vector inside the span is annihilated
    auto normalized_row = know.raw_rows()[0];
    auto res = know.project(normalized_row);
    double norm = 0;
    for (double v : res) norm += v * v;
    CHECK(std::sqrt(norm) <= 1e-8);

    // the projected residual is orthogonal to every row
    auto g_orth = know.project(g);
    for (const auto& row : know.raw_rows()) {
        double dot = 0;
        for (size_t i = 0; i < row.size(); ++i) dot += row[i] * g_orth[i];
        CHECK(std::abs(dot) <= 1e-8);
    }

    // idempotence
    auto twice = know.project(g_orth);
    for (size_t i = 0; i < g.size(); ++i) CHECK(std::abs(twice[i] - g_orth[i]) <= 1e-10);

    // a vector already orthogonal to the rows passes through
    std::vector<double> ortho = g_orth;
    auto out = know.project(ortho);
    for (size_t i = 0; i < ortho.size(); ++i) CHECK(std::abs(out[i] - ortho[i]) <= 1e-10);
}

TEST_CASE("literal projection uses raw normalized rows") {
    Rng rng(35);
    KnowledgeSpace<double> literal(true);
    std::vector<double> r1(8), r2(8);
    for (auto& v : r1) v = rng.normal();
    // correlated second row: exact projector breaks, literal formula differs
    for (size_t i = 0; i < 8; ++i) r2[i] = r1[i] + 0.1 * rng.normal();
    literal.add(r1);
    literal.add(r2);
    KnowledgeSpace<double> exact(false);
    exact.add(r1);
    exact.add(r2);
    std::vector<double> g(8);
    for (auto& v : g) v = rng.normal();
    auto lit = literal.project(g);
    auto ex = exact.project(g);
    double diff = 0;
    for (size_t i = 0; i < 8; ++i) diff += std::abs(lit[i] - ex[i]);
    CHECK(diff > 1e-6);
}

TEST_CASE("masked update selects the branch per entry") {
    auto make_param = [] { return Tensor<double>::from({2, 2}, {1, 1, 1, 1}); };
    std::vector<double> g_orth{0.1, 0.2, 0.3, 0.4};
    std::vector<double> g_raw{1, 1, 1, 1};
    const double eta = 0.5;

    auto ones = make_param();
    masked_update(ones, g_orth, g_raw, Tensor<double>::full({2, 2}, 1.0), eta);
    for (size_t i = 0; i < 4; ++i)
        CHECK(ones.data()[i] == doctest::Approx(1.0 - eta * g_orth[i]));

    auto zeros = make_param();
    masked_update(zeros, g_orth, g_raw, Tensor<double>::zeros({2, 2}), eta);
    for (size_t i = 0; i < 4; ++i)
        CHECK(zeros.data()[i] == doctest::Approx(1.0 - eta * g_raw[i]));

    auto mixed = make_param();
    auto mask = Tensor<double>::from({2, 2}, {1, 0, 1, 0});
    masked_update(mixed, g_orth, g_raw, mask, eta);
    for (size_t i = 0; i < 4; ++i) {
        const double expect = mask.data()[i] == 1.0 ? 1.0 - eta * g_orth[i] : 1.0 - eta * g_raw[i];
        CHECK(mixed.data()[i] == doctest::Approx(expect));
    }
}

TEST_CASE("synergy assembly equals the sum of selected rank-1 maps") {
    Rng rng(36);
    const size_t r = 16, d = 64;
    auto p1 = make_expert<double>(r, d, rng);
    auto p2 = make_expert<double>(r, d, rng);
    auto gen = make_expert<double>(r, d, rng);
    for (auto& v : p1.b.mutable_data()) v = rng.normal();
    for (auto& v : p2.b.mutable_data()) v = rng.normal();
    for (auto& v : gen.b.mutable_data()) v = rng.normal();

    SUBCASE("no selections yield the zero map") {
        auto syn = assemble_synergy<double>({{&p1, {}}, {&p2, {}}}, &gen, {});
        CHECK(syn.count == 0);
    }

    SUBCASE("selected bases stack in plane order then general") {
        std::vector<size_t> sel1{2, 7};
        std::vector<size_t> selg{5};
        auto syn = assemble_synergy<double>({{&p1, sel1}, {&p2, {}}}, &gen, selg);
        REQUIRE(syn.count == 3);
        CHECK(syn.a.shape() == Shape{3, d});
        CHECK(syn.b.shape() == Shape{d, 3});

        // oracle: sum of rank-1 products B[:,k] A[k,:]
        Rng xr(37);
        std::vector<double> x(d);
        for (auto& v : x) v = xr.normal();
        std::vector<double> expect(d, 0.0);
        auto accumulate = [&](const LowRankExpert<double>& e, size_t k) {
            double zk = 0;
            for (size_t j = 0; j < d; ++j) zk += e.a.data()[k * d + j] * x[j];
            for (size_t j = 0; j < d; ++j) expect[j] += e.b.data()[j * r + k] * zk;
        };
        accumulate(p1, 2);
        accumulate(p1, 7);
        accumulate(gen, 5);

        std::vector<double> got(d, 0.0);
        for (size_t m = 0; m < 3; ++m) {
            double zm = 0;
            for (size_t j = 0; j < d; ++j) zm += syn.a.data()[m * d + j] * x[j];
            for (size_t j = 0; j < d; ++j) got[j] += syn.b.data()[j * 3 + m] * zm;
        }
        for (size_t j = 0; j < d; ++j) CHECK(got[j] == doctest::Approx(expect[j]).epsilon(1e-6));
    }

    SUBCASE("composed map is invariant under consistent permutation") {
        std::vector<size_t> sel{1, 4, 9};
        auto syn = assemble_synergy<double>({{&p1, sel}}, nullptr, {});
        std::vector<size_t> perm_sel{9, 1, 4};
        // assemble manually in permuted order
        auto manual = assemble_synergy<double>({{&p1, perm_sel}}, nullptr, {});
        // same composed product B A (order of stacked bases is irrelevant)
        auto prod = [&](const SynergyExpert<double>& s) {
            std::vector<double> m(d * d, 0.0);
            for (size_t i = 0; i < d; ++i)
                for (size_t k = 0; k < s.count; ++k)
                    for (size_t j = 0; j < d; ++j)
                        m[i * d + j] += s.b.data()[i * s.count + k] * s.a.data()[k * d + j];
            return m;
        };
        auto ma = prod(syn);
        auto mb = prod(manual);
        for (size_t i = 0; i < d * d; ++i) CHECK(ma[i] == doctest::Approx(mb[i]).epsilon(1e-9));
    }
}

TEST_CASE("rank above half the dimension is rejected") {
    Rng rng(38);
    CHECK_THROWS_AS(make_expert<double>(9, 16, rng), ConfigError);
}
