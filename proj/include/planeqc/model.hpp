#pragma once

/**
 * @file model.hpp
 * @brief Full registration model: frozen encoder, per-level adapters, and
 *        the cascaded aligner, with checkpoint serialization.
 */

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "planeqc/aligner.hpp"
#include "planeqc/encoder.hpp"
#include "planeqc/experts.hpp"
#include "planeqc/losses.hpp"
#include "planeqc/strq.hpp"

namespace planeqc {

struct ModelConfig {
    size_t image_size = 128;
    std::array<size_t, 3> channels{16, 32, 64};
    size_t rank = 16;           // requested rank; levels clamp to channels/2
    double alpha = 16.0;        // adapter contribution is (alpha/rank) * B A x
    double epsilon = 0.1;       // plane-expert activation threshold
    double gamma = 0.1;         // general-expert activation threshold
    bool abs_activation = false;
    bool literal_projection = false;
    TransformMode mode = TransformMode::Affine;
    size_t loc_hidden = 16;
    size_t num_planes = 2;
    OrthVariant orth_variant = OrthVariant::L1A;
    uint64_t seed = 1;
};

template <typename T>
class Model {
public:
    Model() = default;

    explicit Model(const ModelConfig& cfg)
        : cfg_(cfg), encoder_(EncoderConfig{cfg.channels, cfg.seed}) {
        Rng rng(mix_seed(cfg.seed, 0x6d6f64));
        for (size_t l = 0; l < 3; ++l) {
            locnets_[l] = LocNet<T>(2 * source_channels(l), cfg.loc_hidden, cfg.mode, rng);
            oks_[l] = OksLevel<T>(cfg.num_planes, level_rank(l), cfg.channels[l],
                                  cfg.literal_projection, rng);
        }
    }

    const ModelConfig& config() const { return cfg_; }
    Encoder<T>& encoder() { return encoder_; }
    const Encoder<T>& encoder() const { return encoder_; }
    std::array<LocNet<T>, 3>& locnets() { return locnets_; }
    OksLevel<T>& oks(size_t level) { return oks_[level]; }
    const OksLevel<T>& oks(size_t level) const { return oks_[level]; }

    size_t level_rank(size_t l) const { return std::min(cfg_.rank, cfg_.channels[l] / 2); }
    T adapter_scale() const {
        return static_cast<T>(cfg_.alpha) / static_cast<T>(cfg_.rank);
    }

    // Channel count of the level-l sources seen by the localisation net:
    // level 1 uses raw level-1 maps, deeper levels use pooled warped maps of
    // the previous level.
    size_t source_channels(size_t l) const {
        return l == 0 ? cfg_.channels[0] : cfg_.channels[l - 1];
    }

    // Adapters active while training plane c: the plane's own expert plus the
    // general expert.
    std::array<LevelAdapter<T>, 3> train_adapters(size_t plane) {
        std::array<LevelAdapter<T>, 3> ads;
        for (size_t l = 0; l < 3; ++l) {
            auto& lvl = oks_[l];
            ads[l].scale = adapter_scale();
            ads[l].terms.push_back({lvl.planes.at(plane).a, lvl.planes.at(plane).b});
            ads[l].terms.push_back({lvl.general.a, lvl.general.b});
        }
        return ads;
    }

    // Inference-time adapters: per level, the synergy expert assembled from
    // the most activated bases of every plane expert plus the general expert.
    std::array<LevelAdapter<T>, 3> inference_adapters(
        const std::array<Tensor<T>, 3>& pooled_raw) const {
        std::array<LevelAdapter<T>, 3> ads;
        for (size_t l = 0; l < 3; ++l) {
            const auto& lvl = oks_[l];
            std::vector<std::pair<const LowRankExpert<T>*, std::vector<size_t>>> selections;
            for (const auto& expert : lvl.planes) {
                std::vector<T> z = basis_activation(expert.a, pooled_raw[l]);
                auto active = select_active_bases(z, static_cast<T>(cfg_.epsilon),
                                                  cfg_.abs_activation);
                selections.push_back(
                    {&expert, top_kappa(active, z, lvl.rank, lvl.planes.size())});
            }
            std::vector<T> zg = basis_activation(lvl.general.a, pooled_raw[l]);
            auto general_sel =
                select_active_bases(zg, static_cast<T>(cfg_.gamma), cfg_.abs_activation);
            SynergyExpert<T> syn = assemble_synergy(selections, &lvl.general, general_sel);
            ads[l].scale = adapter_scale();
            if (syn.count > 0) ads[l].terms.push_back({syn.a, syn.b});
        }
        return ads;
    }

    EncoderFeatures<T> extract_train(const Tensor<T>& img, size_t plane) {
        return encoder_.extract(img, train_adapters(plane));
    }

    EncoderFeatures<T> extract_infer(const Tensor<T>& img) const {
        std::array<Tensor<T>, 3> raw = encoder_.forward_raw(img);
        std::array<Tensor<T>, 3> pooled;
        for (size_t l = 0; l < 3; ++l) pooled[l] = global_avg_pool(raw[l]);
        EncoderFeatures<T> out;
        out.raw = raw;
        out.pooled_raw = pooled;
        out.adapted = encoder_.adapt(raw, inference_adapters(pooled));
        return out;
    }

    // Orthogonality loss averaged over levels.
    Tensor<T> orth_loss() {
        Tensor<T> acc;
        for (size_t l = 0; l < 3; ++l) {
            std::vector<Tensor<T>> a_mats, b_mats;
            for (auto& e : oks_[l].planes) {
                a_mats.push_back(e.a);
                b_mats.push_back(e.b);
            }
            Tensor<T> term = loss_orth(a_mats, b_mats, cfg_.orth_variant);
            acc = acc.defined() ? add(acc, term) : term;
        }
        return mul(acc, T(1) / T(3));
    }

    struct PairForward {
        EncoderFeatures<T> feats_a, feats_b;
        CascadeResult<T> cascade;
        LossBundle<T> bundle;
    };

    // Training forward over one pair while learning plane c.
    PairForward forward_train(const Tensor<T>& img_a, const Tensor<T>& img_b, size_t plane,
                              T lambda) {
        PairForward out;
        auto adapters = train_adapters(plane);
        out.feats_a = encoder_.extract(img_a, adapters);
        out.feats_b = encoder_.extract(img_b, adapters);
        out.cascade = cascade_align(out.feats_a.adapted, out.feats_b.adapted, locnets_);
        out.bundle = total_loss(loss_sim(out.cascade.aligned_a, out.cascade.aligned_b),
                                loss_ncc(out.cascade.aligned_a, out.cascade.aligned_b),
                                loss_smooth(out.cascade.thetas), orth_loss(), lambda);
        return out;
    }

    struct PairTerms {
        double sim = 0, ncc = 0, smooth = 0;
        std::array<Tensor<T>, 3> thetas;
    };

    // Inference-time registration terms for a (reference, query) pair of
    // already adapted feature stacks. Runs without a tape.
    PairTerms pair_terms(const std::array<Tensor<T>, 3>& adapted_a,
                         const std::array<Tensor<T>, 3>& adapted_b) {
        CascadeResult<T> cas = cascade_align(adapted_a, adapted_b, locnets_);
        PairTerms t;
        t.sim = static_cast<double>(loss_sim(cas.aligned_a, cas.aligned_b).item());
        t.ncc = static_cast<double>(loss_ncc(cas.aligned_a, cas.aligned_b).item());
        t.smooth = static_cast<double>(loss_smooth(cas.thetas).item());
        for (size_t l = 0; l < 3; ++l) t.thetas[l] = cas.thetas[l].theta;
        return t;
    }

    // Anchor-selection embedding (frozen path, no adapters).
    Tensor<T> embed(const Tensor<T>& img) const { return encoder_.embed(img); }

    std::vector<Tensor<T>> locnet_parameters() {
        std::vector<Tensor<T>> all;
        for (auto& net : locnets_)
            for (auto& p : net.parameters()) all.push_back(p);
        return all;
    }

    std::vector<Tensor<T>> plane_parameters(size_t plane) {
        std::vector<Tensor<T>> all;
        for (size_t l = 0; l < 3; ++l) {
            all.push_back(oks_[l].planes.at(plane).a);
            all.push_back(oks_[l].planes.at(plane).b);
        }
        return all;
    }

    std::vector<Tensor<T>> general_parameters() {
        std::vector<Tensor<T>> all;
        for (size_t l = 0; l < 3; ++l) {
            all.push_back(oks_[l].general.a);
            all.push_back(oks_[l].general.b);
        }
        return all;
    }

    // Every tensor whose gradient buffer must be reset between steps.
    std::vector<Tensor<T>> tracked_parameters() {
        std::vector<Tensor<T>> all = locnet_parameters();
        for (size_t l = 0; l < 3; ++l)
            for (auto& e : oks_[l].planes) {
                all.push_back(e.a);
                all.push_back(e.b);
            }
        for (auto& p : general_parameters()) all.push_back(p);
        return all;
    }

    void save(TensorContainer& c) const {
        c.put_scalar("meta.version", 1.0f);
        c.put_scalar("meta.num_planes", static_cast<float>(cfg_.num_planes));
        c.put_scalar("meta.rank", static_cast<float>(cfg_.rank));
        c.put_scalar("meta.image_size", static_cast<float>(cfg_.image_size));
        c.put_scalar("meta.mode", static_cast<float>(static_cast<int>(cfg_.mode)));
        for (size_t l = 0; l < 3; ++l) {
            const std::string el = "enc.l" + std::to_string(l + 1) + ".";
            const auto& st = encoder_.stage(l);
            c.put(el + "conv.w", st.conv_w);
            c.put(el + "conv.b", st.conv_b);
            c.put(el + "res1.w", st.res1_w);
            c.put(el + "res1.b", st.res1_b);
            c.put(el + "res2.w", st.res2_w);
            c.put(el + "res2.b", st.res2_b);
            c.put("proj.l" + std::to_string(l + 1) + ".w0", encoder_.projection(l));
        }
        for (size_t l = 0; l < 3; ++l) {
            const std::string ll = "lra.l" + std::to_string(l + 1) + ".";
            auto params = locnets_[l].parameters();
            const char* names[6] = {"conv1.w", "conv1.b", "conv2.w", "conv2.b", "head.w",
                                    "head.b"};
            for (size_t i = 0; i < params.size(); ++i) c.put(ll + names[i], params[i]);
        }
        for (size_t l = 0; l < 3; ++l) {
            const auto& lvl = oks_[l];
            const std::string ol = "oks.l" + std::to_string(l + 1) + ".";
            for (size_t p = 0; p < lvl.planes.size(); ++p) {
                const std::string pp = ol + "plane" + std::to_string(p) + ".";
                c.put(pp + "A", lvl.planes[p].a);
                c.put(pp + "B", lvl.planes[p].b);
                if (lvl.planes[p].has_snapshot) {
                    c.put(pp + "pre.A", lvl.planes[p].a.shape(),
                          cast_to_float(lvl.planes[p].a_pre));
                    c.put(pp + "pre.B", lvl.planes[p].b.shape(),
                          cast_to_float(lvl.planes[p].b_pre));
                }
            }
            c.put(ol + "general.A", lvl.general.a);
            c.put(ol + "general.B", lvl.general.b);
            for (size_t m = 0; m < lvl.task_vectors.size(); ++m) {
                const std::string tp = ol + "plane" + std::to_string(m) + ".task.";
                c.put(tp + "A", lvl.task_vectors[m].d_a);
                c.put(tp + "B", lvl.task_vectors[m].d_b);
            }
            for (size_t m = 0; m < lvl.committed.size(); ++m) {
                const std::string mp = ol + "plane" + std::to_string(m) + ".mask.";
                c.put(mp + "A", lvl.committed[m].m_a);
                c.put(mp + "B", lvl.committed[m].m_b);
            }
            if (lvl.know_a.rows() > 0) {
                c.put(ol + "know.A", flatten_rows(lvl.know_a.raw_rows()));
                c.put(ol + "know.B", flatten_rows(lvl.know_b.raw_rows()));
            }
        }
    }

    void load(const TensorContainer& c) {
        if (c.get_scalar("meta.num_planes") != static_cast<float>(cfg_.num_planes))
            throw ConfigError("checkpoint: plane count mismatch");
        for (size_t l = 0; l < 3; ++l) {
            const std::string el = "enc.l" + std::to_string(l + 1) + ".";
            auto& st = encoder_.stage(l);
            load_into(c, el + "conv.w", st.conv_w);
            load_into(c, el + "conv.b", st.conv_b);
            load_into(c, el + "res1.w", st.res1_w);
            load_into(c, el + "res1.b", st.res1_b);
            load_into(c, el + "res2.w", st.res2_w);
            load_into(c, el + "res2.b", st.res2_b);
            load_into(c, "proj.l" + std::to_string(l + 1) + ".w0", encoder_.projection(l));
        }
        for (size_t l = 0; l < 3; ++l) {
            const std::string ll = "lra.l" + std::to_string(l + 1) + ".";
            auto params = locnets_[l].parameters();
            const char* names[6] = {"conv1.w", "conv1.b", "conv2.w", "conv2.b", "head.w",
                                    "head.b"};
            for (size_t i = 0; i < params.size(); ++i) load_into(c, ll + names[i], params[i]);
        }
        for (size_t l = 0; l < 3; ++l) {
            auto& lvl = oks_[l];
            const std::string ol = "oks.l" + std::to_string(l + 1) + ".";
            for (size_t p = 0; p < lvl.planes.size(); ++p) {
                const std::string pp = ol + "plane" + std::to_string(p) + ".";
                load_into(c, pp + "A", lvl.planes[p].a);
                load_into(c, pp + "B", lvl.planes[p].b);
                if (c.contains(pp + "pre.A")) {
                    lvl.planes[p].a_pre = cast_from_float(c.get(pp + "pre.A").data);
                    lvl.planes[p].b_pre = cast_from_float(c.get(pp + "pre.B").data);
                    lvl.planes[p].has_snapshot = true;
                }
            }
            load_into(c, ol + "general.A", lvl.general.a);
            load_into(c, ol + "general.B", lvl.general.b);
            lvl.task_vectors.clear();
            for (size_t p = 0; p < lvl.planes.size(); ++p) {
                const std::string tp = ol + "plane" + std::to_string(p) + ".task.";
                if (!c.contains(tp + "A")) break;
                lvl.task_vectors.push_back({c.template get_tensor<T>(tp + "A"),
                                            c.template get_tensor<T>(tp + "B")});
            }
            lvl.committed.clear();
            for (size_t p = 0; p < lvl.planes.size(); ++p) {
                const std::string mp = ol + "plane" + std::to_string(p) + ".mask.";
                if (!c.contains(mp + "A")) break;
                ConflictMask<T> m{c.template get_tensor<T>(mp + "A"),
                                  c.template get_tensor<T>(mp + "B")};
                lvl.committed.push_back(std::move(m));
            }
            if (!lvl.committed.empty())
                lvl.mask_union = union_mask(lvl.committed);
            else
                lvl.mask_union = {Tensor<T>::zeros({lvl.rank, lvl.dim}),
                                  Tensor<T>::zeros({lvl.dim, lvl.rank})};
            lvl.know_a = KnowledgeSpace<T>(cfg_.literal_projection);
            lvl.know_b = KnowledgeSpace<T>(cfg_.literal_projection);
            if (c.contains(ol + "know.A")) {
                add_rows(c.get(ol + "know.A"), lvl.know_a);
                add_rows(c.get(ol + "know.B"), lvl.know_b);
            }
        }
    }

    uint64_t checkpoint_hash() const {
        TensorContainer c;
        save(c);
        return c.content_hash();
    }

private:
    static std::vector<float> cast_to_float(const std::vector<T>& v) {
        std::vector<float> out(v.size());
        for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
        return out;
    }

    static std::vector<T> cast_from_float(const std::vector<float>& v) {
        std::vector<T> out(v.size());
        for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<T>(v[i]);
        return out;
    }

    static Tensor<float> flatten_rows(const std::vector<std::vector<T>>& rows) {
        const size_t n = rows.size();
        const size_t d = n > 0 ? rows[0].size() : 0;
        std::vector<float> data;
        data.reserve(n * d);
        for (const auto& r : rows)
            for (T v : r) data.push_back(static_cast<float>(v));
        return Tensor<float>::from({n, d}, std::move(data));
    }

    static void add_rows(const TensorRecord& rec, KnowledgeSpace<T>& ks) {
        const size_t n = rec.shape.at(0), d = rec.shape.at(1);
        for (size_t i = 0; i < n; ++i) {
            std::vector<T> row(d);
            for (size_t j = 0; j < d; ++j) row[j] = static_cast<T>(rec.data[i * d + j]);
            ks.add(std::move(row));
        }
    }

    static void load_into(const TensorContainer& c, const std::string& name, Tensor<T>& dst) {
        const TensorRecord& r = c.get(name);
        if (r.shape != dst.shape())
            throw ConfigError("checkpoint: shape mismatch for '" + name + "'");
        auto d = dst.mutable_data();
        for (size_t i = 0; i < d.size(); ++i) d[i] = static_cast<T>(r.data[i]);
    }

    ModelConfig cfg_;
    Encoder<T> encoder_;
    std::array<LocNet<T>, 3> locnets_;
    std::array<OksLevel<T>, 3> oks_;
};

}  // namespace planeqc
