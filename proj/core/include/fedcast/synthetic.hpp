#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcast/cleaning.hpp"
#include "fedcast/time_series.hpp"

namespace fedcast::ingest {

/// Instrument families we synthesize and clean; each carries documented
/// plausibility thresholds.
enum class ChannelKind { Temperature, RelativeHumidity, Co2, Energy };

ChannelKind channel_kind_from_name(const std::string& name);
std::string channel_kind_name(ChannelKind kind);

/// Default threshold policy per instrument family: temperature
/// [-50, 60] degC, relative humidity [0, 100] %, CO2 [0, 10000] ppm,
/// energy [0, 1e7] kWh; all with the two-hour interpolation limit.
CleaningPolicy default_cleaning_policy(ChannelKind kind);

/// One synthetic channel: a mean level plus daily and weekly sinusoids
/// plus white Gaussian noise.
struct SyntheticChannel {
    std::string id;
    ChannelKind kind = ChannelKind::Temperature;
    double mean = 20.0;
    double daily_amp = 0.0;
    double weekly_amp = 0.0;
    double noise_sd = 0.0;
};

/**
 * @brief Recipe for an hourly synthetic building dataset.
 *
 * With occupancy_spikes set, CO2 channels additionally receive one
 * rectangular occupancy pulse on randomly chosen days: within the
 * [opening_hour, closing_hour) window a day is occupied with
 * spike_probability, and the pulse's start hour and duration are drawn
 * uniformly inside the window.  Every channel consumes its own RNG
 * stream derived from (seed, channel id), so adding a channel never
 * changes the others' values.
 */
struct SyntheticSpec {
    int days = 30;
    std::uint64_t seed = 0;
    std::int64_t start_time = 1609459200;  // 2021-01-01T00:00:00Z
    std::vector<SyntheticChannel> channels;
    bool occupancy_spikes = false;
    int opening_hour = 9;
    int closing_hour = 17;
    double spike_amplitude = 300.0;
    double spike_probability = 0.8;

    void validate() const;
};

/**
 * @brief Materializes the recipe as hourly series of length 24 * days.
 *
 * The sinusoids are evaluated on the hour-of-day / hour-of-week phase,
 * so a noise-free daily channel is exactly 24-periodic (bit-for-bit) and
 * the whole output is a pure function of the spec.
 */
std::vector<core::TimeSeries> synthesize(const SyntheticSpec& spec);

}  // namespace fedcast::ingest
