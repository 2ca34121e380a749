#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fedcast::models {

/**
 * @brief A model's trainable parameters as one flat double vector.
 *
 * The layout tag names the architecture that produced the vector
 * (e.g. "linear/in174/out6"); any binary operation between vectors with
 * different tags throws ShapeError, which is what keeps a federated
 * server from ever averaging incompatible updates.  Byte serialization
 * is explicit little-endian IEEE-754, so checkpoints travel between
 * machines unchanged.
 */
class ParamVector {
public:
    ParamVector() = default;
    ParamVector(std::string layout_tag, std::vector<double> values);

    static ParamVector zeros(std::string layout_tag, std::size_t n);

    const std::string& layoutTag() const noexcept { return layout_tag_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool allFinite() const noexcept;

    ParamVector& operator+=(const ParamVector& o);
    ParamVector& operator-=(const ParamVector& o);
    ParamVector& operator*=(double s);

    friend ParamVector operator+(ParamVector a, const ParamVector& b) {
        a += b;
        return a;
    }
    friend ParamVector operator-(ParamVector a, const ParamVector& b) {
        a -= b;
        return a;
    }
    friend ParamVector operator*(double s, ParamVector a) {
        a *= s;
        return a;
    }

    /// Exact equality of tag and every entry.
    bool operator==(const ParamVector& o) const noexcept;

    std::vector<std::uint8_t> serialize() const;
    static ParamVector deserialize(std::span<const std::uint8_t> bytes);

    void save(const std::string& path) const;
    static ParamVector load(const std::string& path);

private:
    void requireSameLayout(const ParamVector& o) const;

    std::string layout_tag_;
    std::vector<double> values_;
};

}  // namespace fedcast::models
