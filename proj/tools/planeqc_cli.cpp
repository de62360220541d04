/**
 * @file planeqc_cli.cpp
 * @brief Command-line entry point: data generation, anchor selection,
 *        training, calibration, scoring, evaluation, and sweeps.
 *
 * Exit codes: 0 success, 1 validation failure, 2 runtime failure.
 */

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "planeqc/anchors.hpp"
#include "planeqc/config.hpp"
#include "planeqc/model.hpp"
#include "planeqc/parallel.hpp"
#include "planeqc/scoring.hpp"
#include "planeqc/stats.hpp"
#include "planeqc/sweep.hpp"
#include "planeqc/synth.hpp"
#include "planeqc/trainer.hpp"

namespace fs = std::filesystem;
using namespace planeqc;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
};

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg.load_file(args.config_path);
    for (const auto& o : args.overrides) cfg.set_override(o);
    return cfg;
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " path is required");
    if (!fs::exists(path))
        throw ConfigError(what + " not found at '" + path + "' (run the producing command first)");
}

Model<float> build_model(const RunConfig& cfg, size_t num_planes) {
    return Model<float>(cfg.model_config(num_planes));
}

Model<float> load_model(const RunConfig& cfg, const std::string& checkpoint,
                        size_t num_planes) {
    require_file(checkpoint, "checkpoint");
    Model<float> model = build_model(cfg, num_planes);
    model.load(TensorContainer::load(checkpoint));
    return model;
}

// anchors.csv: path,plane,sigma2
struct AnchorManifest {
    // ids into the corpus anchor split, per plane
    std::vector<std::vector<size_t>> ids;
};

void write_anchor_manifest(const std::string& path, const DatasetSplit& data,
                           const std::vector<std::vector<size_t>>& ids,
                           const std::vector<std::vector<AnchorScore>>& scores) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write anchors file '" + path + "'");
    out << "path,plane,sigma2\n";
    char buf[64];
    for (size_t p = 0; p < ids.size(); ++p)
        for (size_t id : ids[p]) {
            std::snprintf(buf, sizeof(buf), "%.9g", scores[p][id].sigma2);
            out << data.anchor_paths[p][id] << "," << data.plane_names[p] << "," << buf << "\n";
        }
}

AnchorManifest load_anchor_manifest(const std::string& path, const DatasetSplit& data) {
    require_file(path, "anchors manifest");
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("path,plane", 0) != 0)
        throw FormatError("anchors manifest: malformed header in '" + path + "'");
    AnchorManifest m;
    m.ids.resize(data.plane_names.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string p, plane, sigma;
        std::getline(ss, p, ',');
        std::getline(ss, plane, ',');
        std::getline(ss, sigma, ',');
        size_t plane_id = data.plane_names.size();
        for (size_t i = 0; i < data.plane_names.size(); ++i)
            if (data.plane_names[i] == plane) plane_id = i;
        if (plane_id == data.plane_names.size())
            throw ConfigError("anchors manifest: unknown plane '" + plane + "'");
        size_t idx = data.anchor_paths[plane_id].size();
        for (size_t i = 0; i < data.anchor_paths[plane_id].size(); ++i)
            if (data.anchor_paths[plane_id][i] == p) idx = i;
        if (idx == data.anchor_paths[plane_id].size())
            throw ConfigError("anchors manifest: path '" + p + "' not in corpus anchor split");
        m.ids[plane_id].push_back(idx);
    }
    return m;
}

std::vector<std::vector<Image>> selected_anchor_images(const DatasetSplit& data,
                                                       const AnchorManifest& m) {
    std::vector<std::vector<Image>> out(data.plane_names.size());
    for (size_t p = 0; p < out.size(); ++p)
        for (size_t id : m.ids[p]) out[p].push_back(data.anchors[p][id]);
    return out;
}

std::vector<std::vector<std::vector<float>>> embed_anchor_pool(Model<float>& model,
                                                               const DatasetSplit& data,
                                                               int threads) {
    std::vector<std::vector<std::vector<float>>> embeddings(data.plane_names.size());
    for (size_t p = 0; p < data.plane_names.size(); ++p) {
        if (data.anchors[p].empty())
            throw ConfigError("plane '" + data.plane_names[p] + "' has an empty anchor split");
        embeddings[p].resize(data.anchors[p].size());
        parallel_for(data.anchors[p].size(), threads, [&](size_t i) {
            const Image& img = data.anchors[p][i];
            Tensor<float> t = image_tensor<float>(img.pixels, img.height, img.width);
            Tensor<float> e = model.embed(t);
            embeddings[p][i].assign(e.data().begin(), e.data().end());
        });
    }
    return embeddings;
}

int cmd_gen_data(const CommonArgs& common, const std::string& out_dir) {
    RunConfig cfg = resolve_config(common);
    DatasetSplit data = gen_synthetic_corpus(cfg.corpus_spec(),
                                             static_cast<uint64_t>(cfg.get_int("seed")));
    write_corpus(data, out_dir);
    cfg.write_echo(out_dir + "/run.json", "gen-data");
    size_t total = 0;
    for (size_t p = 0; p < data.num_planes(); ++p)
        total += data.anchors[p].size() + data.train[p].size() + data.query[p].size();
    std::cout << "wrote " << total << " images across " << data.num_planes()
              << " planes to " << out_dir << "\n";
    return 0;
}

int cmd_select_anchors(const CommonArgs& common, const std::string& corpus,
                       const std::string& out_file) {
    RunConfig cfg = resolve_config(common);
    require_file(corpus + "/manifest.csv", "corpus manifest");
    DatasetSplit data = load_corpus(corpus);
    Model<float> model = build_model(cfg, data.num_planes());
    auto embeddings =
        embed_anchor_pool(model, data, static_cast<int>(cfg.get_int("threads")));

    const AnchorStrategy strategy =
        anchor_strategy_from_name(cfg.get_string("anchors.strategy"));
    const size_t k1 = static_cast<size_t>(cfg.get_int("anchors.k1"));
    const uint64_t seed = static_cast<uint64_t>(cfg.get_int("seed"));

    std::vector<std::vector<size_t>> ids(data.num_planes());
    std::vector<std::vector<AnchorScore>> scores(data.num_planes());
    for (size_t p = 0; p < data.num_planes(); ++p) {
        scores[p] = anchor_scores(embeddings[p]);
        ids[p] = select_anchors(strategy, embeddings[p], k1, mix_seed(seed, p));
    }
    write_anchor_manifest(out_file, data, ids, scores);
    const fs::path echo = fs::path(out_file).parent_path() / "run.json";
    cfg.write_echo(echo.string(), "select-anchors");
    std::cout << "selected " << anchor_strategy_name(strategy) << " anchors for "
              << data.num_planes() << " planes -> " << out_file << "\n";
    return 0;
}

int cmd_train(const CommonArgs& common, const std::string& corpus, const std::string& anchors,
              const std::string& out_dir) {
    RunConfig cfg = resolve_config(common);
    require_file(corpus + "/manifest.csv", "corpus manifest");
    DatasetSplit data = load_corpus(corpus);
    AnchorManifest manifest = load_anchor_manifest(anchors, data);

    fs::create_directories(out_dir);
    Model<float> model = build_model(cfg, data.num_planes());
    TrainConfig tc = cfg.train_config();
    tc.checkpoint_path = out_dir + "/checkpoint.strq";
    TrainResult result = train(model, data, manifest.ids, tc);
    write_train_log(result.log, out_dir + "/train_log.csv");
    cfg.write_echo(out_dir + "/run.json", "train");
    std::cout << "trained " << data.num_planes() << " plane blocks, "
              << result.log.size() << " epochs -> " << out_dir << "/checkpoint.strq\n";
    return 0;
}

int cmd_calibrate(const CommonArgs& common, const std::string& corpus,
                  const std::string& anchors, const std::string& checkpoint,
                  const std::string& out_dir) {
    RunConfig cfg = resolve_config(common);
    require_file(corpus + "/manifest.csv", "corpus manifest");
    DatasetSplit data = load_corpus(corpus);
    AnchorManifest manifest = load_anchor_manifest(anchors, data);
    Model<float> model = load_model(cfg, checkpoint, data.num_planes());

    fs::create_directories(out_dir);
    AnchorCache cache = build_anchor_cache(model, selected_anchor_images(data, manifest));
    CalibrationStats stats =
        calibrate(model, data, cache, static_cast<int>(cfg.get_int("threads")));

    TensorContainer c;
    stats.save(c, data.plane_names);
    c.save(out_dir + "/calibration.strq");
    cache.save(out_dir + "/anchor_cache.strq", data.plane_names);
    cfg.write_echo(out_dir + "/run.json", "calibrate");
    std::cout << "calibrated " << data.num_planes() << " planes -> " << out_dir
              << "/calibration.strq\n";
    return 0;
}

ScoreWeights score_weights(const RunConfig& cfg) {
    ScoreWeights w;
    w.sim = cfg.get_double("score.w_sim");
    w.ncc = cfg.get_double("score.w_ncc");
    w.smooth = cfg.get_double("score.w_smooth");
    w.literal_formula = cfg.get_bool("score.literal_formula");
    return w;
}

AnchorCache obtain_cache(Model<float>& model, const DatasetSplit& data,
                         const AnchorManifest& manifest, const std::string& cache_path,
                         bool no_cache) {
    if (no_cache || cache_path.empty())
        return build_anchor_cache(model, selected_anchor_images(data, manifest));
    require_file(cache_path, "anchor cache");
    return AnchorCache::load(cache_path, data.plane_names, model.checkpoint_hash());
}

int cmd_score(const CommonArgs& common, const std::string& corpus, const std::string& anchors,
              const std::string& checkpoint, const std::string& calib,
              const std::string& cache_path, bool no_cache, const std::string& out_dir) {
    RunConfig cfg = resolve_config(common);
    require_file(corpus + "/manifest.csv", "corpus manifest");
    require_file(calib, "calibration stats (run `calibrate` first)");
    DatasetSplit data = load_corpus(corpus);
    AnchorManifest manifest = load_anchor_manifest(anchors, data);
    Model<float> model = load_model(cfg, checkpoint, data.num_planes());
    CalibrationStats stats =
        CalibrationStats::load(TensorContainer::load(calib), data.plane_names);
    AnchorCache cache = obtain_cache(model, data, manifest, cache_path, no_cache);

    const ScoreWeights weights = score_weights(cfg);
    const double tau = cfg.get_double("score.tau");
    const int threads = static_cast<int>(cfg.get_int("threads"));

    struct Row {
        std::string path, plane;
        QualityReport rep;
    };
    std::vector<Row> rows;
    for (size_t p = 0; p < data.num_planes(); ++p)
        for (size_t i = 0; i < data.query[p].size(); ++i)
            rows.push_back({data.query_paths[p][i], data.plane_names[p], {}});

    const auto t0 = std::chrono::steady_clock::now();
    size_t cursor = 0;
    std::vector<std::pair<size_t, size_t>> coords;
    for (size_t p = 0; p < data.num_planes(); ++p)
        for (size_t i = 0; i < data.query[p].size(); ++i) coords.push_back({p, i});
    parallel_for(coords.size(), threads, [&](size_t r) {
        const auto [p, i] = coords[r];
        rows[r].rep = quality_score_image(model, data.query[p][i], p, cache, stats, weights,
                                          tau);
    });
    cursor = coords.size();
    const auto t1 = std::chrono::steady_clock::now();

    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/scores.csv");
    out << "path,plane,Q,accepted,sim_raw,ncc_raw,smooth_raw,sim_norm,ncc_norm,smooth_norm\n";
    char buf[512];
    for (const auto& row : rows) {
        const auto& m = row.rep.mean;
        std::snprintf(buf, sizeof(buf), "%s,%s,%.9g,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      row.path.c_str(), row.plane.c_str(), row.rep.q,
                      row.rep.accepted ? 1 : 0, m.sim_raw, m.ncc_raw, m.smooth_raw, m.sim_norm,
                      m.ncc_norm, m.smooth_norm);
        out << buf;
    }
    cfg.write_echo(out_dir + "/run.json", "score");

    const double ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count() /
        std::max<size_t>(cursor, 1);
    std::cout << "scored " << cursor << " queries (" << ms << " ms/frame) -> " << out_dir
              << "/scores.csv\n";
    return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& corpus,
             const std::string& scores_path, const std::string& out_dir) {
    RunConfig cfg = resolve_config(common);
    require_file(scores_path, "scores csv (run `score` first)");
    require_file(corpus + "/manifest.csv", "corpus manifest");
    DatasetSplit data = load_corpus(corpus);

    std::unordered_map<std::string, double> reference;
    for (size_t p = 0; p < data.num_planes(); ++p)
        for (size_t i = 0; i < data.query[p].size(); ++i)
            if (data.query[p][i].score)
                reference[data.query_paths[p][i]] = *data.query[p][i].score;

    std::ifstream in(scores_path);
    std::string line;
    std::getline(in, line);
    std::vector<double> predicted, truth;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string path, plane, q;
        std::getline(ss, path, ',');
        std::getline(ss, plane, ',');
        std::getline(ss, q, ',');
        auto it = reference.find(path);
        if (it == reference.end()) continue;
        predicted.push_back(std::stod(q));
        truth.push_back(it->second);
    }
    if (predicted.size() < 3)
        throw ConfigError("eval: fewer than 3 scored queries with reference scores");

    nlohmann::json metrics;
    metrics["n"] = predicted.size();
    metrics["srcc"] = srcc(predicted, truth);
    metrics["plcc"] = plcc(predicted, truth);
    TTestResult tt = paired_ttest(predicted, truth);
    metrics["t"] = tt.t;
    metrics["p"] = tt.p;

    fs::create_directories(out_dir);
    std::ofstream out(out_dir + "/metrics.json");
    out << metrics.dump(2) << "\n";
    cfg.write_echo(out_dir + "/run.json", "eval");
    std::cout << "eval n=" << predicted.size() << " srcc=" << metrics["srcc"]
              << " plcc=" << metrics["plcc"] << " -> " << out_dir << "/metrics.json\n";
    return 0;
}

int cmd_sweep(const CommonArgs& common, const std::string& corpus, const std::string& anchors,
              const std::string& checkpoint, const std::string& calib,
              const std::string& out_dir) {
    RunConfig cfg = resolve_config(common);
    require_file(corpus + "/manifest.csv", "corpus manifest");
    require_file(calib, "calibration stats (run `calibrate` first)");
    DatasetSplit data = load_corpus(corpus);
    AnchorManifest manifest = load_anchor_manifest(anchors, data);
    Model<float> model = load_model(cfg, checkpoint, data.num_planes());
    CalibrationStats stats =
        CalibrationStats::load(TensorContainer::load(calib), data.plane_names);
    AnchorCache cache = build_anchor_cache(model, selected_anchor_images(data, manifest));

    // pristine query images serve as sweep bases
    std::vector<Image> bases;
    std::vector<std::string> names;
    const size_t want = static_cast<size_t>(cfg.get_int("sweep.images"));
    for (size_t p = 0; p < data.num_planes() && bases.size() < want; ++p)
        for (size_t i = 0; i < data.query[p].size() && bases.size() < want; ++i) {
            const Image& img = data.query[p][i];
            if (!img.severity || *img.severity == 0.0f) {
                bases.push_back(img);
                names.push_back(data.query_paths[p][i]);
            }
        }
    if (bases.empty()) throw ConfigError("sweep: no pristine query images available");

    std::vector<float> levels;
    for (double v : cfg.get_double_list("sweep.levels")) levels.push_back(static_cast<float>(v));

    SweepResult result = severity_sweep(
        model, cache, stats, bases, names, {DeformKind::Rigid, DeformKind::NonRigid}, levels,
        score_weights(cfg), cfg.get_double("score.tau"),
        static_cast<uint64_t>(cfg.get_int("seed")), static_cast<int>(cfg.get_int("threads")));

    fs::create_directories(out_dir);
    write_sweep_csv(result, out_dir + "/sweep.csv");
    nlohmann::json metrics;
    metrics["n"] = result.rows.size();
    metrics["srcc_rigid"] = result.srcc_rigid;
    metrics["srcc_nonrigid"] = result.srcc_nonrigid;
    std::ofstream mout(out_dir + "/metrics.json");
    mout << metrics.dump(2) << "\n";
    cfg.write_echo(out_dir + "/run.json", "sweep");
    std::cout << "sweep " << result.rows.size() << " cells, srcc rigid=" << result.srcc_rigid
              << " nonrigid=" << result.srcc_nonrigid << " -> " << out_dir << "\n";
    return 0;
}

int cmd_export_embeddings(const CommonArgs& common, const std::string& corpus,
                          const std::string& checkpoint, const std::string& out_file) {
    RunConfig cfg = resolve_config(common);
    require_file(corpus + "/manifest.csv", "corpus manifest");
    DatasetSplit data = load_corpus(corpus);
    Model<float> model = checkpoint.empty() ? build_model(cfg, data.num_planes())
                                            : load_model(cfg, checkpoint, data.num_planes());

    std::ofstream out(out_file);
    if (!out) throw ConfigError("cannot write embeddings file '" + out_file + "'");
    bool header = false;
    char buf[64];
    for (size_t p = 0; p < data.num_planes(); ++p) {
        const struct {
            const std::vector<Image>* imgs;
            const std::vector<std::string>* paths;
        } groups[3] = {{&data.anchors[p], &data.anchor_paths[p]},
                       {&data.train[p], &data.train_paths[p]},
                       {&data.query[p], &data.query_paths[p]}};
        for (const auto& g : groups)
            for (size_t i = 0; i < g.imgs->size(); ++i) {
                const Image& img = (*g.imgs)[i];
                Tensor<float> t = image_tensor<float>(img.pixels, img.height, img.width);
                Tensor<float> e = model.embed(t);
                if (!header) {
                    out << "path,plane";
                    for (size_t k = 0; k < e.size(); ++k) out << ",e" << k;
                    out << "\n";
                    header = true;
                }
                out << (*g.paths)[i] << "," << data.plane_names[p];
                for (float v : e.data()) {
                    std::snprintf(buf, sizeof(buf), ",%.9g", static_cast<double>(v));
                    out << buf;
                }
                out << "\n";
            }
    }
    const fs::path echo = fs::path(out_file).parent_path() / "run.json";
    cfg.write_echo(echo.string(), "export-embeddings");
    std::cout << "exported embeddings -> " << out_file << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ultrasound-plane quality control via feature-space registration"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_option("--config", common.config_path, "JSON config file or run.json echo");
    app.add_option("--set", common.overrides, "key=value config overrides")->take_all();

    std::string out_dir, corpus, anchors, checkpoint, calib, cache_path, scores_path, out_file;
    bool no_cache = false;

    auto* gen = app.add_subcommand("gen-data", "Generate the synthetic corpus");
    gen->add_option("--out", out_dir, "output corpus directory")->required();

    auto* sel = app.add_subcommand("select-anchors", "Select reference anchors per plane");
    sel->add_option("--corpus", corpus, "corpus directory")->required();
    sel->add_option("--out", out_file, "anchor manifest csv")->required();
    std::string strategy_flag, k1_flag;
    sel->add_option("--strategy", strategy_flag, "variance|random|kmedoids|kcenter");
    sel->add_option("--k1", k1_flag, "anchors per plane");

    auto* tr = app.add_subcommand("train", "Train aligner and subspace experts");
    tr->add_option("--corpus", corpus, "corpus directory")->required();
    tr->add_option("--anchors", anchors, "anchor manifest csv")->required();
    tr->add_option("--out", out_dir, "output directory")->required();

    auto* cal = app.add_subcommand("calibrate", "Freeze per-plane loss normalizers");
    cal->add_option("--corpus", corpus, "corpus directory")->required();
    cal->add_option("--anchors", anchors, "anchor manifest csv")->required();
    cal->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
    cal->add_option("--out", out_dir, "output directory")->required();

    auto* sc = app.add_subcommand("score", "Score the query split");
    sc->add_option("--corpus", corpus, "corpus directory")->required();
    sc->add_option("--anchors", anchors, "anchor manifest csv")->required();
    sc->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
    sc->add_option("--calib", calib, "calibration stats")->required();
    sc->add_option("--cache", cache_path, "anchor cache (from calibrate)");
    sc->add_flag("--no-cache", no_cache, "recompute anchor features");
    sc->add_option("--out", out_dir, "output directory")->required();

    auto* ev = app.add_subcommand("eval", "Correlate scores against reference quality");
    ev->add_option("--corpus", corpus, "corpus directory")->required();
    ev->add_option("--scores", scores_path, "scores csv")->required();
    ev->add_option("--out", out_dir, "output directory")->required();

    auto* sw = app.add_subcommand("sweep", "Deformation-severity score sweep");
    sw->add_option("--corpus", corpus, "corpus directory")->required();
    sw->add_option("--anchors", anchors, "anchor manifest csv")->required();
    sw->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
    sw->add_option("--calib", calib, "calibration stats")->required();
    sw->add_option("--out", out_dir, "output directory")->required();

    auto* ex = app.add_subcommand("export-embeddings", "Write per-image embeddings csv");
    ex->add_option("--corpus", corpus, "corpus directory")->required();
    ex->add_option("--checkpoint", checkpoint, "optional checkpoint");
    ex->add_option("--out", out_file, "output csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!strategy_flag.empty()) common.overrides.push_back("anchors.strategy=" + strategy_flag);
        if (!k1_flag.empty()) common.overrides.push_back("anchors.k1=" + k1_flag);
        if (gen->parsed()) return cmd_gen_data(common, out_dir);
        if (sel->parsed()) return cmd_select_anchors(common, corpus, out_file);
        if (tr->parsed()) return cmd_train(common, corpus, anchors, out_dir);
        if (cal->parsed()) return cmd_calibrate(common, corpus, anchors, checkpoint, out_dir);
        if (sc->parsed())
            return cmd_score(common, corpus, anchors, checkpoint, calib, cache_path, no_cache,
                             out_dir);
        if (ev->parsed()) return cmd_eval(common, corpus, scores_path, out_dir);
        if (sw->parsed()) return cmd_sweep(common, corpus, anchors, checkpoint, calib, out_dir);
        if (ex->parsed()) return cmd_export_embeddings(common, corpus, checkpoint, out_file);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const StateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
