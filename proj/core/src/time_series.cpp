#include "fedcast/time_series.hpp"

#include <algorithm>
#include <limits>

#include "fedcast/errors.hpp"

namespace fedcast::core {

namespace {

/// Floor division for possibly negative epoch values.
std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

TimeSeries::TimeSeries(std::string channel_id, std::int64_t start_time,
                       std::int64_t step_seconds,
                       std::vector<std::optional<double>> values)
    : channel_id_(std::move(channel_id)),
      start_time_(start_time),
      step_seconds_(step_seconds),
      values_(std::move(values)) {
    if (channel_id_.empty()) {
        throw InvalidSpec("TimeSeries: channel id must not be empty");
    }
    if (step_seconds_ <= 0) {
        throw InvalidSpec("TimeSeries '" + channel_id_ +
                          "': step must be positive, got " +
                          std::to_string(step_seconds_));
    }
}

std::size_t TimeSeries::presentCount() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(),
                      [](const auto& v) { return v.has_value(); }));
}

TimeSeries TimeSeries::withChannelId(std::string channel_id) const {
    return TimeSeries(std::move(channel_id), start_time_, step_seconds_, values_);
}

TimeSeries TimeSeries::withValues(std::vector<std::optional<double>> values) const {
    return TimeSeries(channel_id_, start_time_, step_seconds_, std::move(values));
}

std::vector<TimeSeries> align(const std::vector<TimeSeries>& series_list,
                              std::int64_t step_seconds) {
    if (step_seconds <= 0) {
        throw InvalidSpec("align: step must be positive, got " +
                          std::to_string(step_seconds));
    }
    if (series_list.empty()) return {};

    std::int64_t min_start = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_end = std::numeric_limits<std::int64_t>::min();
    for (const auto& s : series_list) {
        if (step_seconds < s.stepSeconds()) {
            throw UpsampleUnsupported(
                "align: channel '" + s.channelId() + "' is sampled every " +
                std::to_string(s.stepSeconds()) +
                "s; refusing to resample onto the finer " +
                std::to_string(step_seconds) + "s grid");
        }
        min_start = std::min(min_start, s.startTime());
        max_end = std::max(max_end, s.endTime());
    }

    // Anchor the shared grid at the step multiple at or below the earliest
    // start so the same inputs always land on the same absolute grid.
    const std::int64_t grid_start = floor_div(min_start, step_seconds) * step_seconds;
    const std::int64_t span = max_end - grid_start;
    const std::size_t length =
        static_cast<std::size_t>(floor_div(span + step_seconds - 1, step_seconds));

    std::vector<TimeSeries> out;
    out.reserve(series_list.size());
    for (const auto& s : series_list) {
        std::vector<double> sums(length, 0.0);
        std::vector<std::size_t> counts(length, 0);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s.present(i)) continue;
            const std::size_t bucket = static_cast<std::size_t>(
                floor_div(s.timeAt(i) - grid_start, step_seconds));
            sums[bucket] += *s.at(i);
            ++counts[bucket];
        }
        std::vector<std::optional<double>> values(length);
        for (std::size_t b = 0; b < length; ++b) {
            if (counts[b] > 0) {
                values[b] = sums[b] / static_cast<double>(counts[b]);
            }
        }
        out.emplace_back(s.channelId(), grid_start, step_seconds, std::move(values));
    }
    return out;
}

}  // namespace fedcast::core
