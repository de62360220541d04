#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "planeqc/rng.hpp"
#include "planeqc/stats.hpp"

using namespace planeqc;

namespace {

// direct-formula oracle: Pearson on precomputed values
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double cov = 0, vx = 0, vy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    return cov / std::sqrt(vx * vy);
}

std::vector<double> rank_oracle(const std::vector<double>& x) {
    std::vector<double> ranks(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double less = 0, equal = 0;
        for (size_t j = 0; j < x.size(); ++j) {
            less += x[j] < x[i];
            equal += x[j] == x[i];
        }
        ranks[i] = less + (equal + 1.0) / 2.0;
    }
    return ranks;
}

}  // namespace

TEST_CASE("srcc on monotone and hand-computed sequences") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> inc{2, 5, 9, 11};
    CHECK(srcc(x, inc) == doctest::Approx(1.0));
    std::vector<double> dec{11, 9, 5, 2};
    CHECK(srcc(x, dec) == doctest::Approx(-1.0));
    std::vector<double> y{10, 30, 20, 40};
    CHECK(srcc(x, y) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("plcc closed-form cases") {
    std::vector<double> x{-2, -1, 0, 1, 2};
    std::vector<double> affine;
    for (double v : x) affine.push_back(2.0 * v + 1.0);
    CHECK(plcc(x, affine) == doctest::Approx(1.0));
    std::vector<double> negated;
    for (double v : x) negated.push_back(-v);
    CHECK(plcc(x, negated) == doctest::Approx(-1.0));
    std::vector<double> squared;
    for (double v : x) squared.push_back(v * v);
    CHECK(plcc(x, squared) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("correlation guards") {
    std::vector<double> x{1, 2, 3};
    std::vector<double> bad{1, 2};
    CHECK_THROWS_AS(plcc(x, bad), DomainError);
    std::vector<double> two{1, 2};
    CHECK_THROWS_AS(plcc(two, two), DomainError);
    std::vector<double> constant{5, 5, 5};
    CHECK_THROWS_AS(plcc(x, constant), DomainError);
    CHECK_THROWS_AS(srcc(constant, x), DomainError);
}

TEST_CASE("paired t-test values and degenerate cases") {
    std::vector<double> d{1, -1, 2, -2, 3};
    std::vector<double> zeros(5, 0.0);
    TTestResult r = paired_ttest(d, zeros);
    CHECK(r.t == doctest::Approx(0.6469966392206304).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.5528894339334172).epsilon(1e-9));
    CHECK(r.n == 5);

    // constant nonzero difference: zero variance
    std::vector<double> a{1, 2, 3};
    std::vector<double> shifted{2, 3, 4};
    CHECK_THROWS_AS(paired_ttest(a, shifted), DomainError);
    CHECK_THROWS_AS(paired_ttest(a, a), DomainError);
}

TEST_CASE("correlations match direct-formula oracles on random vectors") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const size_t n = 5 + rng.next_u64() % 46;
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = rng.normal();
        for (auto& v : y) v = rng.normal();
        // inject ties occasionally
        if (trial % 3 == 0 && n > 4) {
            x[1] = x[0];
            y[3] = y[2];
        }
        CHECK(std::abs(plcc(x, y) - pearson_oracle(x, y)) <= 1e-10);
        CHECK(std::abs(srcc(x, y) - pearson_oracle(rank_oracle(x), rank_oracle(y))) <= 1e-10);
    }
}

TEST_CASE("srcc invariant under strictly monotone transforms") {
    Rng rng(42);
    std::vector<double> x(20), y(20);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    const double base = srcc(x, y);
    std::vector<double> ex;
    for (double v : x) ex.push_back(std::exp(v));
    CHECK(srcc(ex, y) == doctest::Approx(base).epsilon(1e-12));

    const double pl = plcc(x, y);
    std::vector<double> scaled;
    for (double v : x) scaled.push_back(3.5 * v + 2.0);
    CHECK(plcc(scaled, y) == doctest::Approx(pl).epsilon(1e-10));
}

TEST_CASE("average ranks handle ties") {
    std::vector<double> x{3, 1, 3, 2};
    auto r = average_ranks(x);
    CHECK(r[0] == doctest::Approx(3.5));
    CHECK(r[1] == doctest::Approx(1.0));
    CHECK(r[2] == doctest::Approx(3.5));
    CHECK(r[3] == doctest::Approx(2.0));
}
