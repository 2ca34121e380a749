#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fedcast::core {

/**
 * @brief A uniformly sampled sensor channel with explicit gaps.
 *
 * Timestamps are epoch seconds (UTC); the i-th slot describes the instant
 * startTime() + i * stepSeconds().  Missing readings are kept as
 * std::nullopt rather than being dropped, so gap structure survives
 * alignment, cleaning and windowing unchanged.  Instances are immutable;
 * every transformation returns a new series.
 */
class TimeSeries {
public:
    TimeSeries(std::string channel_id, std::int64_t start_time,
               std::int64_t step_seconds,
               std::vector<std::optional<double>> values);

    const std::string& channelId() const noexcept { return channel_id_; }
    std::int64_t startTime() const noexcept { return start_time_; }
    std::int64_t stepSeconds() const noexcept { return step_seconds_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    const std::vector<std::optional<double>>& values() const noexcept {
        return values_;
    }

    /// Value slot at index i (bounds-checked).
    const std::optional<double>& at(std::size_t i) const { return values_.at(i); }

    bool present(std::size_t i) const { return values_[i].has_value(); }

    /// Timestamp of slot i.
    std::int64_t timeAt(std::size_t i) const noexcept {
        return start_time_ + static_cast<std::int64_t>(i) * step_seconds_;
    }

    /// Timestamp one past the final slot.
    std::int64_t endTime() const noexcept {
        return start_time_ + static_cast<std::int64_t>(values_.size()) * step_seconds_;
    }

    /// Number of non-missing slots.
    std::size_t presentCount() const noexcept;

    /// Copy with a different channel id (used when deriving channels).
    TimeSeries withChannelId(std::string channel_id) const;

    /// Copy with different values on the same grid.
    TimeSeries withValues(std::vector<std::optional<double>> values) const;

private:
    std::string channel_id_;
    std::int64_t start_time_;
    std::int64_t step_seconds_;
    std::vector<std::optional<double>> values_;
};

/**
 * @brief Resamples a set of channels onto one shared grid.
 *
 * The common grid starts at the largest multiple of step_seconds that is
 * <= the earliest start among the inputs and covers the union of their
 * extents.  Each output slot holds the arithmetic mean of the input
 * readings whose timestamps fall inside [slot, slot + step); a slot with
 * no readings is missing.  Requesting a grid finer than any input's
 * native spacing throws UpsampleUnsupported; aligning a series already on
 * the target grid reproduces it exactly.
 */
std::vector<TimeSeries> align(const std::vector<TimeSeries>& series_list,
                              std::int64_t step_seconds);

}  // namespace fedcast::core
