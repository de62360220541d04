#include "planeqc/config.hpp"

#include <fstream>

namespace planeqc {

namespace {

nlohmann::json default_values() {
    return nlohmann::json{
        {"seed", 7},
        {"threads", 1},
        {"data.planes", 2},
        {"data.size", 128},
        {"data.anchor_pool", 10},
        {"data.anchor_max_severity", 0.5},
        {"data.anchor_deformed_fraction", 0.3},
        {"data.train_count", 50},
        {"data.train_max_severity", 0.9},
        {"data.train_deformed_fraction", 0.6},
        {"data.query_count", 20},
        {"data.query_max_severity", 0.9},
        {"data.query_deformed_fraction", 0.5},
        {"enc.channels", {16, 32, 64}},
        {"enc.loc_hidden", 16},
        {"lra.mode", "affine"},
        {"loss.lambda", 0.5},
        {"loss.orth_variant", "l1_a"},
        {"oks.r", 16},
        {"oks.alpha", -1.0},  // negative resolves to oks.r (alpha/r = 1)
        {"oks.epsilon", 0.1},
        {"oks.gamma", 0.1},
        {"oks.abs_activation", false},
        {"oks.literal_projection", false},
        {"anchors.strategy", "variance"},
        {"anchors.k1", 20},
        {"score.tau", 0.5},
        {"score.w_sim", 1.0},
        {"score.w_ncc", 1.0},
        {"score.w_smooth", 1.0},
        {"score.literal_formula", false},
        {"train.lr", 1e-4},
        {"train.epochs", 30},
        {"train.batch", 4},
        {"train.steps", 8},
        {"train.checkpoint_every", 0},
        {"train.orth_all_planes", false},
        {"aug.contrast_min", 0.8},
        {"aug.contrast_max", 1.2},
        {"aug.rotation_deg", 20.0},
        {"aug.translation_frac", 0.2},
        {"aug.scale_min", 0.8},
        {"aug.scale_max", 1.2},
        {"aug.noise_sigma", 0.02},
        {"sweep.levels", {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}},
        {"sweep.images", 20},
    };
}

}  // namespace

RunConfig::RunConfig() : values_(default_values()) {}

void RunConfig::set_value(const std::string& key, const nlohmann::json& value) {
    if (!values_.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
}

const nlohmann::json& RunConfig::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return *it;
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: malformed JSON in '" + path + "': " + e.what());
    }
    if (doc.contains("config") && doc["config"].is_object()) doc = doc["config"];
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) set_value(it.key(), it.value());
}

void RunConfig::set_override(const std::string& assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // plain string
    set_value(key, value);
}

long RunConfig::get_int(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_integer())
        throw ConfigError("config key '" + key + "' must be an integer");
    return v.get<long>();
}

double RunConfig::get_double(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
    return v.get<double>();
}

bool RunConfig::get_bool(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) throw ConfigError("config key '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::string RunConfig::get_string(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("config key '" + key + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<long> RunConfig::get_int_list(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array");
    std::vector<long> out;
    for (const auto& e : v) {
        if (!e.is_number_integer())
            throw ConfigError("config key '" + key + "' must hold integers");
        out.push_back(e.get<long>());
    }
    return out;
}

void RunConfig::write_echo(const std::string& path, const std::string& command) const {
    nlohmann::json echo{{"command", command}, {"config", values_}};
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot write echo '" + path + "'");
    out << echo.dump(2) << "\n";
}

CorpusSpec RunConfig::corpus_spec() const {
    CorpusSpec spec;
    const long planes = get_int("data.planes");
    if (planes < 1) throw ConfigError("data.planes must be positive");
    spec.plane_names.clear();
    for (long p = 0; p < planes; ++p) spec.plane_names.push_back("plane" + std::to_string(p));
    spec.image_size = static_cast<size_t>(get_int("data.size"));
    spec.anchors = {static_cast<size_t>(get_int("data.anchor_pool")),
                    static_cast<float>(get_double("data.anchor_max_severity")),
                    static_cast<float>(get_double("data.anchor_deformed_fraction"))};
    spec.train = {static_cast<size_t>(get_int("data.train_count")),
                  static_cast<float>(get_double("data.train_max_severity")),
                  static_cast<float>(get_double("data.train_deformed_fraction"))};
    spec.query = {static_cast<size_t>(get_int("data.query_count")),
                  static_cast<float>(get_double("data.query_max_severity")),
                  static_cast<float>(get_double("data.query_deformed_fraction"))};
    return spec;
}

double RunConfig::resolved_alpha() const {
    const double alpha = get_double("oks.alpha");
    return alpha < 0 ? static_cast<double>(get_int("oks.r")) : alpha;
}

ModelConfig RunConfig::model_config(size_t num_planes) const {
    ModelConfig mc;
    mc.image_size = static_cast<size_t>(get_int("data.size"));
    const auto channels = get_int_list("enc.channels");
    if (channels.size() != 3) throw ConfigError("enc.channels must have exactly 3 entries");
    for (size_t i = 0; i < 3; ++i) mc.channels[i] = static_cast<size_t>(channels[i]);
    mc.rank = static_cast<size_t>(get_int("oks.r"));
    mc.alpha = resolved_alpha();
    mc.epsilon = get_double("oks.epsilon");
    mc.gamma = get_double("oks.gamma");
    mc.abs_activation = get_bool("oks.abs_activation");
    mc.literal_projection = get_bool("oks.literal_projection");
    mc.mode = mode_from_name(get_string("lra.mode"));
    mc.loc_hidden = static_cast<size_t>(get_int("enc.loc_hidden"));
    mc.num_planes = num_planes;
    mc.orth_variant = orth_variant_from_name(get_string("loss.orth_variant"));
    mc.seed = static_cast<uint64_t>(get_int("seed"));
    return mc;
}

AugmentConfig RunConfig::augment_config() const {
    AugmentConfig a;
    a.contrast_min = static_cast<float>(get_double("aug.contrast_min"));
    a.contrast_max = static_cast<float>(get_double("aug.contrast_max"));
    const float rot = static_cast<float>(get_double("aug.rotation_deg"));
    a.rotation_min_deg = -rot;
    a.rotation_max_deg = rot;
    const float tr = static_cast<float>(get_double("aug.translation_frac"));
    a.translation_min_frac = -tr;
    a.translation_max_frac = tr;
    a.scale_min = static_cast<float>(get_double("aug.scale_min"));
    a.scale_max = static_cast<float>(get_double("aug.scale_max"));
    a.noise_sigma = static_cast<float>(get_double("aug.noise_sigma"));
    return a;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.lr = get_double("train.lr");
    t.epochs_per_plane = static_cast<size_t>(get_int("train.epochs"));
    t.batch_size = static_cast<size_t>(get_int("train.batch"));
    t.steps_per_epoch = static_cast<size_t>(get_int("train.steps"));
    t.seed = static_cast<uint64_t>(get_int("seed"));
    t.lambda = get_double("loss.lambda");
    t.orth_all_planes = get_bool("train.orth_all_planes");
    t.augment = augment_config();
    t.checkpoint_every = static_cast<size_t>(get_int("train.checkpoint_every"));
    return t;
}

}  // namespace planeqc
