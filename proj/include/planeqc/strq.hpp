#pragma once

/**
 * @file strq.hpp
 * @brief Binary tensor container for checkpoints and caches.
 *
 * Layout: magic "STRQ", u32 version=1, u32 tensor-count, then per tensor
 * {u16 name-length, name bytes, u8 ndim, u32 dims..., f32 little-endian
 * data}. Insertion order is preserved on disk.
 */

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "planeqc/errors.hpp"
#include "planeqc/tensor.hpp"

namespace planeqc {

struct TensorRecord {
    std::string name;
    Shape shape;
    std::vector<float> data;
};

class TensorContainer {
public:
    void put(const std::string& name, Shape shape, std::vector<float> data);
    void put(const std::string& name, const Tensor<float>& t);
    void put(const std::string& name, const Tensor<double>& t);
    void put_scalar(const std::string& name, float value);

    bool contains(const std::string& name) const;
    const TensorRecord& get(const std::string& name) const;
    float get_scalar(const std::string& name) const;

    template <typename T>
    Tensor<T> get_tensor(const std::string& name) const {
        const TensorRecord& r = get(name);
        std::vector<T> data(r.data.size());
        for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<T>(r.data[i]);
        return Tensor<T>::from(r.shape, std::move(data));
    }

    size_t size() const { return records_.size(); }
    const std::vector<TensorRecord>& records() const { return records_; }

    std::vector<uint8_t> serialize() const;
    static TensorContainer deserialize(const std::vector<uint8_t>& bytes);

    void save(const std::string& path) const;
    static TensorContainer load(const std::string& path);

    // FNV-1a over the serialized bytes; used as a cache staleness key.
    uint64_t content_hash() const;

private:
    std::vector<TensorRecord> records_;
    std::unordered_map<std::string, size_t> index_;
};

}  // namespace planeqc
