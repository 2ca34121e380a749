#include "fedcast/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "fedcast/errors.hpp"
#include "fedcast/rng.hpp"

namespace fedcast::ingest {

ChannelKind channel_kind_from_name(const std::string& name) {
    if (name == "temperature") return ChannelKind::Temperature;
    if (name == "rh") return ChannelKind::RelativeHumidity;
    if (name == "co2") return ChannelKind::Co2;
    if (name == "energy") return ChannelKind::Energy;
    throw InvalidSpec("unknown channel kind '" + name +
                      "' (expected temperature, rh, co2 or energy)");
}

std::string channel_kind_name(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::Temperature: return "temperature";
        case ChannelKind::RelativeHumidity: return "rh";
        case ChannelKind::Co2: return "co2";
        case ChannelKind::Energy: return "energy";
    }
    throw InvalidSpec("unhandled channel kind");
}

CleaningPolicy default_cleaning_policy(ChannelKind kind) {
    CleaningPolicy p;
    switch (kind) {
        case ChannelKind::Temperature:
            p.min_valid = -50.0;
            p.max_valid = 60.0;
            break;
        case ChannelKind::RelativeHumidity:
            p.min_valid = 0.0;
            p.max_valid = 100.0;
            break;
        case ChannelKind::Co2:
            p.min_valid = 0.0;
            p.max_valid = 10000.0;
            break;
        case ChannelKind::Energy:
            p.min_valid = 0.0;
            p.max_valid = 1e7;
            break;
    }
    return p;
}

void SyntheticSpec::validate() const {
    if (days < 1) {
        throw InvalidSpec("SyntheticSpec: days must be >= 1, got " +
                          std::to_string(days));
    }
    if (opening_hour < 0 || closing_hour > 24 || opening_hour >= closing_hour) {
        throw InvalidSpec("SyntheticSpec: need 0 <= opening_hour < closing_hour <= 24");
    }
    if (spike_probability < 0.0 || spike_probability > 1.0) {
        throw InvalidSpec("SyntheticSpec: spike_probability must lie in [0, 1]");
    }
    std::set<std::string> seen;
    for (const auto& c : channels) {
        if (c.id.empty()) throw InvalidSpec("SyntheticSpec: empty channel id");
        if (!seen.insert(c.id).second) {
            throw InvalidSpec("SyntheticSpec: duplicate channel id '" + c.id + "'");
        }
        if (c.noise_sd < 0.0) {
            throw InvalidSpec("SyntheticSpec: negative noise_sd for '" + c.id + "'");
        }
    }
}

std::vector<core::TimeSeries> synthesize(const SyntheticSpec& spec) {
    spec.validate();

    const std::size_t n = static_cast<std::size_t>(spec.days) * 24;
    constexpr double two_pi = 2.0 * std::numbers::pi;

    std::vector<core::TimeSeries> out;
    out.reserve(spec.channels.size());
    for (const auto& ch : spec.channels) {
        SplitMix64 noise(derive_stream(spec.seed, fnv1a64(ch.id + "/noise")));
        SplitMix64 spikes(derive_stream(spec.seed, fnv1a64(ch.id + "/spikes")));

        std::vector<std::optional<double>> values(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Evaluate the sinusoids on the wrapped phase so equal phases
            // give bit-identical values; a noise-free daily channel is
            // then exactly periodic.
            const double day_phase = static_cast<double>(i % 24) / 24.0;
            const double week_phase = static_cast<double>(i % 168) / 168.0;
            double v = ch.mean + ch.daily_amp * std::sin(two_pi * day_phase) +
                       ch.weekly_amp * std::sin(two_pi * week_phase);
            if (ch.noise_sd > 0.0) v += ch.noise_sd * noise.nextGaussian();
            values[i] = v;
        }

        if (spec.occupancy_spikes && ch.kind == ChannelKind::Co2) {
            const auto window = static_cast<std::uint64_t>(spec.closing_hour -
                                                           spec.opening_hour);
            for (int d = 0; d < spec.days; ++d) {
                // Draw all three variates every day so the stream position
                // never depends on earlier outcomes.
                const bool occupied = spikes.nextDouble() < spec.spike_probability;
                const auto start = spikes.nextBelow(window);
                const auto duration = 1 + spikes.nextBelow(window - start);
                if (!occupied) continue;
                const std::size_t base = static_cast<std::size_t>(d) * 24 +
                                         static_cast<std::size_t>(spec.opening_hour) +
                                         static_cast<std::size_t>(start);
                for (std::uint64_t k = 0; k < duration; ++k) {
                    *values[base + k] += spec.spike_amplitude;
                }
            }
        }

        out.emplace_back(ch.id, spec.start_time, 3600, std::move(values));
    }
    return out;
}

}  // namespace fedcast::ingest
