#pragma once

#include <cstdint>
#include <string>

#include "fedcast/time_series.hpp"

namespace fedcast::ingest {

/**
 * @brief Threshold rules plus the gap-repair limit for one channel kind.
 *
 * Readings outside [min_valid, max_valid] are physically impossible for
 * the instrument and become missing.  Missing runs shorter than
 * max_interp_gap_seconds are bridged linearly between their present
 * neighbours; runs at least that long (two hours by default), and runs
 * touching either end of the series, are kept as gaps because filling
 * them would invent structure.
 */
struct CleaningPolicy {
    double min_valid = 0.0;
    double max_valid = 0.0;
    std::int64_t max_interp_gap_seconds = 7200;

    void validate() const;
};

/// What clean() did, for audit trails.
struct CleaningReport {
    std::size_t outliers_removed = 0;
    std::size_t points_interpolated = 0;
    std::size_t gaps_retained = 0;

    std::string toJson() const;
};

struct CleanResult {
    core::TimeSeries series;
    CleaningReport report;
};

/**
 * @brief Applies threshold removal, then bounded linear interpolation.
 *
 * Order matters: a reading knocked out by the thresholds can still be
 * bridged when the resulting run is short enough.  A run of g missing
 * slots is interpolated when g * step < max_interp_gap_seconds and both
 * neighbours exist; gaps_retained counts the runs left untouched.
 */
CleanResult clean(const core::TimeSeries& series, const CleaningPolicy& policy);

}  // namespace fedcast::ingest
