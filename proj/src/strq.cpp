#include "planeqc/strq.hpp"

#include <cstring>
#include <fstream>

namespace planeqc {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'R', 'Q'};
constexpr uint32_t kVersion = 1;

template <typename V>
void append_le(std::vector<uint8_t>& out, V value) {
    uint8_t buf[sizeof(V)];
    std::memcpy(buf, &value, sizeof(V));
    out.insert(out.end(), buf, buf + sizeof(V));
}

template <typename V>
V read_le(const std::vector<uint8_t>& in, size_t& pos) {
    if (pos + sizeof(V) > in.size()) throw FormatError("tensor container: truncated payload");
    V value;
    std::memcpy(&value, in.data() + pos, sizeof(V));
    pos += sizeof(V);
    return value;
}

}  // namespace

void TensorContainer::put(const std::string& name, Shape shape, std::vector<float> data) {
    if (shape_numel(shape) != data.size())
        throw DimensionError("tensor container: shape/data mismatch for '" + name + "'");
    auto it = index_.find(name);
    if (it != index_.end()) {
        records_[it->second] = {name, std::move(shape), std::move(data)};
        return;
    }
    index_[name] = records_.size();
    records_.push_back({name, std::move(shape), std::move(data)});
}

void TensorContainer::put(const std::string& name, const Tensor<float>& t) {
    put(name, t.shape(), std::vector<float>(t.data().begin(), t.data().end()));
}

void TensorContainer::put(const std::string& name, const Tensor<double>& t) {
    std::vector<float> data(t.size());
    auto src = t.data();
    for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(src[i]);
    put(name, t.shape(), std::move(data));
}

void TensorContainer::put_scalar(const std::string& name, float value) {
    put(name, Shape{}, std::vector<float>{value});
}

bool TensorContainer::contains(const std::string& name) const {
    return index_.count(name) != 0;
}

const TensorRecord& TensorContainer::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw StateError("tensor container: missing tensor '" + name + "'");
    return records_[it->second];
}

float TensorContainer::get_scalar(const std::string& name) const {
    const TensorRecord& r = get(name);
    if (r.data.size() != 1)
        throw DimensionError("tensor container: '" + name + "' is not a scalar");
    return r.data[0];
}

std::vector<uint8_t> TensorContainer::serialize() const {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    append_le<uint32_t>(out, kVersion);
    append_le<uint32_t>(out, static_cast<uint32_t>(records_.size()));
    for (const auto& r : records_) {
        if (r.name.size() > 0xffff)
            throw FormatError("tensor container: name too long '" + r.name + "'");
        append_le<uint16_t>(out, static_cast<uint16_t>(r.name.size()));
        out.insert(out.end(), r.name.begin(), r.name.end());
        out.push_back(static_cast<uint8_t>(r.shape.size()));
        for (size_t d : r.shape) append_le<uint32_t>(out, static_cast<uint32_t>(d));
        for (float v : r.data) append_le<float>(out, v);
    }
    return out;
}

TensorContainer TensorContainer::deserialize(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("tensor container: bad magic");
    pos = 4;
    const uint32_t version = read_le<uint32_t>(bytes, pos);
    if (version != kVersion)
        throw FormatError("tensor container: unsupported version " + std::to_string(version));
    const uint32_t count = read_le<uint32_t>(bytes, pos);
    TensorContainer c;
    for (uint32_t t = 0; t < count; ++t) {
        const uint16_t name_len = read_le<uint16_t>(bytes, pos);
        if (pos + name_len > bytes.size())
            throw FormatError("tensor container: truncated name");
        std::string name(bytes.begin() + static_cast<long>(pos),
                         bytes.begin() + static_cast<long>(pos + name_len));
        pos += name_len;
        const uint8_t ndim = read_le<uint8_t>(bytes, pos);
        Shape shape;
        for (uint8_t i = 0; i < ndim; ++i) shape.push_back(read_le<uint32_t>(bytes, pos));
        const size_t numel = shape_numel(shape);
        std::vector<float> data(numel);
        for (size_t i = 0; i < numel; ++i) data[i] = read_le<float>(bytes, pos);
        c.put(name, std::move(shape), std::move(data));
    }
    return c;
}

void TensorContainer::save(const std::string& path) const {
    std::vector<uint8_t> bytes = serialize();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("tensor container: cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<long>(bytes.size()));
}

TensorContainer TensorContainer::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("tensor container: cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

uint64_t TensorContainer::content_hash() const {
    std::vector<uint8_t> bytes = serialize();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace planeqc
