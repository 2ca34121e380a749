#include "fedcast/param_vector.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fedcast/errors.hpp"

namespace fedcast::models {

namespace {

constexpr char kMagic[4] = {'F', 'C', 'P', 'V'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[pos + i]} << (8 * i);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[pos + i]} << (8 * i);
    return v;
}

}  // namespace

ParamVector::ParamVector(std::string layout_tag, std::vector<double> values)
    : layout_tag_(std::move(layout_tag)), values_(std::move(values)) {
    if (layout_tag_.empty()) {
        throw InvalidSpec("ParamVector: layout tag must not be empty");
    }
}

ParamVector ParamVector::zeros(std::string layout_tag, std::size_t n) {
    return ParamVector(std::move(layout_tag), std::vector<double>(n, 0.0));
}

bool ParamVector::allFinite() const noexcept {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void ParamVector::requireSameLayout(const ParamVector& o) const {
    if (layout_tag_ != o.layout_tag_ || values_.size() != o.values_.size()) {
        throw ShapeError("ParamVector: layout mismatch ('" + layout_tag_ +
                         "' [" + std::to_string(values_.size()) + "] vs '" +
                         o.layout_tag_ + "' [" +
                         std::to_string(o.values_.size()) + "])");
    }
}

ParamVector& ParamVector::operator+=(const ParamVector& o) {
    requireSameLayout(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

ParamVector& ParamVector::operator-=(const ParamVector& o) {
    requireSameLayout(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

ParamVector& ParamVector::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

bool ParamVector::operator==(const ParamVector& o) const noexcept {
    return layout_tag_ == o.layout_tag_ && values_ == o.values_;
}

std::vector<std::uint8_t> ParamVector::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(16 + layout_tag_.size() + 8 * values_.size());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, static_cast<std::uint32_t>(layout_tag_.size()));
    for (char c : layout_tag_) out.push_back(static_cast<std::uint8_t>(c));
    put_u64(out, values_.size());
    for (double v : values_) put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

ParamVector ParamVector::deserialize(std::span<const std::uint8_t> bytes) {
    const auto fail = [](const char* why) -> ParamVector {
        throw Error(std::string("ParamVector::deserialize: ") + why);
    };
    if (bytes.size() < 16) return fail("truncated header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) return fail("bad magic");
    const std::uint32_t tag_len = get_u32(bytes, 4);
    if (bytes.size() < 16 + tag_len) return fail("truncated layout tag");
    std::string tag(reinterpret_cast<const char*>(bytes.data() + 8), tag_len);
    const std::uint64_t count = get_u64(bytes, 8 + tag_len);
    if (bytes.size() != 16 + tag_len + 8 * count) return fail("length mismatch");
    std::vector<double> values(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        values[i] = std::bit_cast<double>(get_u64(bytes, 16 + tag_len + 8 * i));
    }
    return ParamVector(std::move(tag), std::move(values));
}

void ParamVector::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    const auto bytes = serialize();
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing '" + path + "'");
}

ParamVector ParamVector::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace fedcast::models
