#include "planeqc/trainer.hpp"

#include <cstdio>
#include <fstream>

#include "planeqc/optim.hpp"

namespace planeqc {

void write_train_log(const std::vector<EpochLog>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("train log: cannot open '" + path + "'");
    out << "epoch,plane,sim,ncc,smooth,orth,total\n";
    char buf[256];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof(buf), "%zu,%zu,%.9g,%.9g,%.9g,%.9g,%.9g\n", e.epoch, e.plane,
                      e.sim, e.ncc, e.smooth, e.orth, e.total);
        out << buf;
    }
}

namespace {

void apply_general_update(Model<float>& model, double lr) {
    for (size_t l = 0; l < 3; ++l) {
        auto& lvl = model.oks(l);
        auto step = [&](Tensor<float>& param, const KnowledgeSpace<float>& know,
                        const Tensor<float>& mask) {
            std::vector<float> g(param.size(), 0.0f);
            if (param.has_grad()) {
                auto gs = param.grad();
                g.assign(gs.begin(), gs.end());
            }
            std::vector<float> g_orth = know.project(g);
            masked_update(param, g_orth, g, mask, static_cast<float>(lr));
        };
        step(lvl.general.a, lvl.know_a, lvl.mask_union.m_a);
        step(lvl.general.b, lvl.know_b, lvl.mask_union.m_b);
    }
}

}  // namespace

TrainResult train(Model<float>& model, const DatasetSplit& data,
                  const std::vector<std::vector<size_t>>& anchor_ids, const TrainConfig& cfg) {
    const size_t planes = data.plane_names.size();
    if (anchor_ids.size() != planes)
        throw ConfigError("train: anchor selection does not cover every plane");
    for (size_t p = 0; p < planes; ++p) {
        if (anchor_ids[p].empty())
            throw ConfigError("train: plane '" + data.plane_names[p] + "' has no anchors");
        if (data.train[p].empty())
            throw ConfigError("train: plane '" + data.plane_names[p] +
                              "' has no training images");
        for (size_t id : anchor_ids[p])
            if (id >= data.anchors[p].size())
                throw ConfigError("train: anchor id out of range for plane '" +
                                  data.plane_names[p] + "'");
    }
    if (cfg.lr <= 0) throw ConfigError("train: learning rate must be positive");

    TrainResult result;
    Adam<float> opt(static_cast<float>(cfg.lr));
    Rng rng(mix_seed(cfg.seed, 0x7472616e));
    auto tracked = model.tracked_parameters();

    // image tensors are reused across steps
    auto tensor_of = [](const Image& img) {
        return image_tensor<float>(img.pixels, img.height, img.width);
    };

    size_t global_epoch = 0;
    for (size_t plane = 0; plane < planes; ++plane) {
        for (size_t l = 0; l < 3; ++l) model.oks(l).planes[plane].snapshot();

        std::vector<Tensor<float>> step_params = model.locnet_parameters();
        for (auto& p : model.plane_parameters(plane)) step_params.push_back(p);
        if (cfg.orth_all_planes)
            for (size_t other = 0; other < planes; ++other)
                if (other != plane)
                    for (auto& p : model.plane_parameters(other)) step_params.push_back(p);

        for (size_t epoch = 0; epoch < cfg.epochs_per_plane; ++epoch) {
            EpochLog log;
            log.epoch = global_epoch;
            log.plane = plane;
            for (size_t step = 0; step < cfg.steps_per_epoch; ++step) {
                GradientTape<float> tape;
                GradientTape<float>::Scope scope(tape);

                Tensor<float> batch_total;
                double sim = 0, ncc = 0, smooth = 0, orth = 0, total = 0;
                for (size_t b = 0; b < cfg.batch_size; ++b) {
                    const size_t ai = anchor_ids[plane][static_cast<size_t>(
                        rng.uniform_int(0, static_cast<int>(anchor_ids[plane].size()) - 1))];
                    const size_t ti = static_cast<size_t>(
                        rng.uniform_int(0, static_cast<int>(data.train[plane].size()) - 1));
                    const Image& ia = data.anchors[plane][ai];
                    const Image ib = augment(data.train[plane][ti], cfg.augment, rng.next_u64());
                    auto fwd = model.forward_train(tensor_of(ia), tensor_of(ib), plane,
                                                   static_cast<float>(cfg.lambda));
                    sim += fwd.bundle.sim.item();
                    ncc += fwd.bundle.ncc.item();
                    smooth += fwd.bundle.smooth.item();
                    orth += fwd.bundle.orth.item();
                    total += fwd.bundle.total.item();
                    batch_total = batch_total.defined() ? add(batch_total, fwd.bundle.total)
                                                        : fwd.bundle.total;
                }
                Tensor<float> loss = mul(batch_total, 1.0f / static_cast<float>(cfg.batch_size));

                for (auto& p : tracked) p.clear_grad();
                tape.backward(loss);

                opt.step(step_params);
                apply_general_update(model, cfg.lr);

                const double inv = 1.0 / static_cast<double>(cfg.batch_size);
                log.sim += sim * inv;
                log.ncc += ncc * inv;
                log.smooth += smooth * inv;
                log.orth += orth * inv;
                log.total += total * inv;
            }
            if (cfg.steps_per_epoch > 0) {
                const double inv = 1.0 / static_cast<double>(cfg.steps_per_epoch);
                log.sim *= inv;
                log.ncc *= inv;
                log.smooth *= inv;
                log.orth *= inv;
                log.total *= inv;
            }
            result.log.push_back(log);
            if (cfg.epoch_hook) cfg.epoch_hook(global_epoch, plane);
            ++global_epoch;
            if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
                (epoch + 1) % cfg.checkpoint_every == 0) {
                TensorContainer c;
                model.save(c);
                c.save(cfg.checkpoint_path);
            }
        }

        for (size_t l = 0; l < 3; ++l) model.oks(l).commit_plane(plane, planes);
    }

    if (!cfg.checkpoint_path.empty()) {
        TensorContainer c;
        model.save(c);
        c.save(cfg.checkpoint_path);
    }
    return result;
}

}  // namespace planeqc
