#include "planeqc/sweep.hpp"

#include <cstdio>
#include <fstream>

#include "planeqc/parallel.hpp"
#include "planeqc/stats.hpp"

namespace planeqc {

SweepResult severity_sweep(Model<float>& model, const AnchorCache& cache,
                           const CalibrationStats& stats,
                           const std::vector<Image>& bases,
                           const std::vector<std::string>& base_names,
                           const std::vector<DeformKind>& kinds,
                           const std::vector<float>& levels, const ScoreWeights& weights,
                           double tau, uint64_t seed, int threads) {
    if (bases.size() != base_names.size())
        throw DimensionError("sweep: base/name count mismatch");
    if (bases.empty() || kinds.empty() || levels.empty())
        throw ConfigError("sweep: needs bases, kinds, and severity levels");

    SweepResult result;
    const size_t cells = bases.size() * kinds.size() * levels.size();
    result.rows.resize(cells);
    parallel_for(cells, threads, [&](size_t cell) {
        const size_t b = cell / (kinds.size() * levels.size());
        const size_t rem = cell % (kinds.size() * levels.size());
        const size_t k = rem / levels.size();
        const size_t s = rem % levels.size();
        const Image& base = bases[b];
        const Image query = deform(base, kinds[k], levels[s], mix_seed(seed, cell));
        QualityReport rep =
            quality_score_image(model, query, static_cast<size_t>(base.plane), cache, stats,
                                weights, tau);
        result.rows[cell] = {base_names[b], kinds[k], levels[s], rep.q};
    });

    // per-kind SRCC over all (severity, Q) points
    bool computed = false;
    for (DeformKind kind : {DeformKind::Rigid, DeformKind::NonRigid}) {
        std::vector<double> sev, q;
        for (const auto& row : result.rows)
            if (row.kind == kind) {
                sev.push_back(row.severity);
                q.push_back(row.q);
            }
        if (sev.size() < 3) continue;
        bool constant = true;
        for (double v : sev)
            if (v != sev[0]) constant = false;
        if (constant) continue;
        const double r = srcc(sev, q);
        if (kind == DeformKind::Rigid)
            result.srcc_rigid = r;
        else
            result.srcc_nonrigid = r;
        computed = true;
    }
    result.has_correlations = computed;
    return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("sweep: cannot open '" + path + "'");
    out << "image,kind,severity,Q\n";
    char buf[256];
    for (const auto& row : result.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%.9g\n", row.image.c_str(),
                      deform_kind_name(row.kind), static_cast<double>(row.severity), row.q);
        out << buf;
    }
}

}  // namespace planeqc
