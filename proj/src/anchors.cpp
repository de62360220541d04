#include "planeqc/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "planeqc/rng.hpp"

namespace planeqc {

const char* anchor_strategy_name(AnchorStrategy s) {
    switch (s) {
        case AnchorStrategy::Variance: return "variance";
        case AnchorStrategy::Random: return "random";
        case AnchorStrategy::KMedoids: return "kmedoids";
        case AnchorStrategy::KCenter: return "kcenter";
    }
    return "?";
}

AnchorStrategy anchor_strategy_from_name(const std::string& name) {
    for (AnchorStrategy s : {AnchorStrategy::Variance, AnchorStrategy::Random,
                             AnchorStrategy::KMedoids, AnchorStrategy::KCenter})
        if (name == anchor_strategy_name(s)) return s;
    throw ConfigError("unknown anchor strategy '" + name + "'");
}

namespace {

double sq_dist(const std::vector<float>& a, const std::vector<float>& b) {
    double acc = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

}  // namespace

std::vector<AnchorScore> anchor_scores(const std::vector<std::vector<float>>& embeddings) {
    if (embeddings.empty()) throw DomainError("anchor scores: empty plane");
    const size_t d = embeddings[0].size();
    std::vector<double> mu(d, 0.0);
    for (const auto& e : embeddings) {
        if (e.size() != d) throw DimensionError("anchor scores: embedding size mismatch");
        for (size_t i = 0; i < d; ++i) mu[i] += e[i];
    }
    for (double& v : mu) v /= static_cast<double>(embeddings.size());
    std::vector<AnchorScore> out(embeddings.size());
    for (size_t k = 0; k < embeddings.size(); ++k) {
        out[k].id = k;
        out[k].embedding = embeddings[k];
        double acc = 0;
        for (size_t i = 0; i < d; ++i) {
            const double dv = static_cast<double>(embeddings[k][i]) - mu[i];
            acc += dv * dv;
        }
        out[k].sigma2 = acc / static_cast<double>(d);
    }
    return out;
}

std::vector<size_t> select_variance_spectrum(const std::vector<AnchorScore>& scores,
                                             size_t k1) {
    if (k1 == 0) throw DomainError("anchor selection: k1 must be positive");
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a].sigma2 != scores[b].sigma2) return scores[a].sigma2 < scores[b].sigma2;
        return scores[a].id < scores[b].id;
    });
    if (k1 < order.size()) order.resize(k1);
    std::vector<size_t> ids;
    for (size_t i : order) ids.push_back(scores[i].id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<size_t> select_random(size_t n, size_t k1, uint64_t seed) {
    std::vector<size_t> ids(n);
    std::iota(ids.begin(), ids.end(), size_t{0});
    Rng rng(mix_seed(seed, 0x726e64));
    rng.shuffle(ids.begin(), ids.end());
    if (k1 < ids.size()) ids.resize(k1);
    std::sort(ids.begin(), ids.end());
    return ids;
}

double kmedoids_objective(const std::vector<std::vector<float>>& embeddings,
                          const std::vector<size_t>& medoids) {
    double total = 0;
    for (const auto& e : embeddings) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t m : medoids) best = std::min(best, std::sqrt(sq_dist(e, embeddings[m])));
        total += best;
    }
    return total;
}

std::vector<size_t> select_kmedoids(const std::vector<std::vector<float>>& embeddings,
                                    size_t k1, uint64_t seed) {
    const size_t n = embeddings.size();
    if (k1 >= n) {
        std::vector<size_t> all(n);
        std::iota(all.begin(), all.end(), size_t{0});
        return all;
    }
    std::vector<size_t> medoids = select_random(n, k1, mix_seed(seed, 0x6d6564));
    std::vector<char> is_medoid(n, 0);
    for (size_t m : medoids) is_medoid[m] = 1;

    double cost = kmedoids_objective(embeddings, medoids);
    for (int iter = 0; iter < 50; ++iter) {
        double best_cost = cost;
        size_t best_mi = 0, best_o = 0;
        bool found = false;
        for (size_t mi = 0; mi < medoids.size(); ++mi) {
            for (size_t o = 0; o < n; ++o) {
                if (is_medoid[o]) continue;
                std::vector<size_t> trial = medoids;
                trial[mi] = o;
                const double c = kmedoids_objective(embeddings, trial);
                if (c < best_cost - 1e-12) {
                    best_cost = c;
                    best_mi = mi;
                    best_o = o;
                    found = true;
                }
            }
        }
        if (!found) break;
        is_medoid[medoids[best_mi]] = 0;
        medoids[best_mi] = best_o;
        is_medoid[best_o] = 1;
        cost = best_cost;
    }
    std::sort(medoids.begin(), medoids.end());
    return medoids;
}

std::vector<size_t> select_kcenter_greedy(const std::vector<std::vector<float>>& embeddings,
                                          size_t k1, uint64_t) {
    const size_t n = embeddings.size();
    if (n == 0) throw DomainError("anchor selection: empty plane");
    if (k1 >= n) {
        std::vector<size_t> all(n);
        std::iota(all.begin(), all.end(), size_t{0});
        return all;
    }
    const size_t d = embeddings[0].size();
    std::vector<float> centroid(d, 0.0f);
    for (const auto& e : embeddings)
        for (size_t i = 0; i < d; ++i) centroid[i] += e[i];
    for (float& v : centroid) v /= static_cast<float>(n);

    size_t first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
        const double dist = sq_dist(embeddings[i], centroid);
        if (dist < best) {
            best = dist;
            first = i;
        }
    }

    std::vector<size_t> chosen{first};
    std::vector<double> min_dist(n);
    for (size_t i = 0; i < n; ++i) min_dist[i] = sq_dist(embeddings[i], embeddings[first]);
    while (chosen.size() < k1) {
        size_t far = 0;
        double far_dist = -1;
        for (size_t i = 0; i < n; ++i)
            if (min_dist[i] > far_dist) {
                far_dist = min_dist[i];
                far = i;
            }
        chosen.push_back(far);
        for (size_t i = 0; i < n; ++i)
            min_dist[i] = std::min(min_dist[i], sq_dist(embeddings[i], embeddings[far]));
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<size_t> select_anchors(AnchorStrategy strategy,
                                   const std::vector<std::vector<float>>& embeddings,
                                   size_t k1, uint64_t seed) {
    switch (strategy) {
        case AnchorStrategy::Variance:
            return select_variance_spectrum(anchor_scores(embeddings), k1);
        case AnchorStrategy::Random:
            return select_random(embeddings.size(), k1, seed);
        case AnchorStrategy::KMedoids:
            return select_kmedoids(embeddings, k1, seed);
        case AnchorStrategy::KCenter:
            return select_kcenter_greedy(embeddings, k1, seed);
    }
    throw ConfigError("anchor selection: bad strategy");
}

}  // namespace planeqc
