#pragma once

/**
 * @file config.hpp
 * @brief Flat key-value run configuration with fixed defaults.
 *
 * Keys live in a flat dotted namespace. A config file may be either a plain
 * object of keys or a run.json echo ({"command": ..., "config": {...}});
 * unknown keys are rejected. Command-line overrides use key=value pairs.
 */

#include <string>
#include <vector>

#include "json.hpp"
#include "planeqc/errors.hpp"
#include "planeqc/image.hpp"
#include "planeqc/model.hpp"
#include "planeqc/synth.hpp"
#include "planeqc/trainer.hpp"

namespace planeqc {

class RunConfig {
public:
    RunConfig();  // defaults

    void load_file(const std::string& path);
    // "key=value"; value parsed as JSON when possible, else as a string.
    void set_override(const std::string& assignment);

    long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<long> get_int_list(const std::string& key) const;

    const nlohmann::json& values() const { return values_; }

    // {"command": ..., "config": {...}} written next to each command's
    // outputs.
    void write_echo(const std::string& path, const std::string& command) const;

    // Derived module configs.
    CorpusSpec corpus_spec() const;
    ModelConfig model_config(size_t num_planes) const;
    TrainConfig train_config() const;
    AugmentConfig augment_config() const;
    double resolved_alpha() const;  // oks.alpha < 0 resolves to oks.r

private:
    void set_value(const std::string& key, const nlohmann::json& value);
    const nlohmann::json& at(const std::string& key) const;

    nlohmann::json values_;
};

}  // namespace planeqc
