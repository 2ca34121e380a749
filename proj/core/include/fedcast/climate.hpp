#pragma once

#include <cstddef>
#include <span>

#include "fedcast/time_series.hpp"

namespace fedcast::climate {

/**
 * @brief Humidity mixing ratio in g of water vapor per kg of dry air.
 *
 * MR = 38.015 * (10^(7.65 t / (243.12 + t)) * RH)
 *             / (p - 0.06112 * 10^(7.65 t / (243.12 + t)) * RH)
 *
 * with t in degC, RH in percent and p in hPa (1013 when unmeasured,
 * the standard-atmosphere convention).  Throws NonPhysical when RH is
 * outside [0, 100], p is not positive, or the denominator (the dry-air
 * partial pressure) is not positive.
 */
double mixing_ratio(double t_celsius, double rh_percent,
                    double pressure_hpa = 1013.0);

/**
 * @brief Mold-growth RH threshold for the most susceptible substrate
 * class: cosh(0.128324 * (30 - t)) + 75, in percent RH.
 *
 * Values of RH above this limit indicate elevated biological risk; the
 * curve bottoms out at exactly 76 % around 30 degC.
 */
double lim1(double t_celsius);

/// Pointwise mixing ratio over paired channels on one grid; a slot is
/// present only where both inputs are.  Throws ShapeError when the grids
/// differ.
core::TimeSeries mixing_ratio_series(const core::TimeSeries& t_celsius,
                                     const core::TimeSeries& rh_percent,
                                     double pressure_hpa = 1013.0);

/**
 * @brief Centered moving average spanning window_days around each slot.
 *
 * The window reaches half a span each way and weights the two boundary
 * slots by 1/2 (the standard even-window centered mean), which makes the
 * filter annihilate any oscillation whose period divides the span
 * exactly.  Slots are averaged over the present values only; the result
 * is missing near the edges and wherever more than max_missing_frac of
 * the window's weight is missing.  The series' step must divide one day.
 */
core::TimeSeries centered_moving_average(const core::TimeSeries& series,
                                         int window_days,
                                         double max_missing_frac = 0.2);

/// Options for the seasonal RH decomposition.
struct En15757Options {
    int window_days = 30;
    /// Percentile bounds (linear interpolation) of the short-term
    /// deviations that frame the target band.
    double band_low_pct = 7.0;
    double band_high_pct = 93.0;
    double max_missing_frac = 0.2;
};

/// Seasonal/short-term split of an RH record.
struct SeasonalDecomposition {
    /// Mean of all present readings over the record.
    double annual_mean_rh = 0.0;
    /// 30-day (by default) centered moving average; missing at the edges.
    core::TimeSeries seasonal;
    /// reading - seasonal, where both are present.
    core::TimeSeries deviations;
    /// Percentile band of the deviations.
    double band_low = 0.0;
    double band_high = 0.0;
};

/**
 * @brief Seasonal-cycle analysis of an RH channel.
 *
 * Splits the record into a slow seasonal component (centered moving
 * average) and short-term deviations, and frames the deviations with a
 * percentile band; readings whose deviation leaves the band are the
 * fluctuation-risk candidates.  Throws SeriesTooShort when the record
 * cannot support a single full window or holds no present values, and
 * InvalidSpec for bad options.
 */
SeasonalDecomposition en15757_decompose(const core::TimeSeries& rh,
                                        const En15757Options& options = {});

/// Pearson correlation of two equal-length vectors (n >= 2).  Throws
/// UndefinedCorrelation when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

struct MannWhitneyResult {
    /// min(U_a, U_b), computed from midranks.
    double u = 0.0;
    /// Two-sided p-value.
    double p_value = 1.0;
    /// True when the p-value came from full enumeration of the null
    /// distribution rather than the normal approximation.
    bool exact = false;
};

/**
 * @brief Two-sided Mann-Whitney U test with tied midranks.
 *
 * When the smaller group has at most 8 observations (and the subset
 * count stays enumerable, <= 2e6), the p-value enumerates the exact null
 * distribution of U over all group assignments; otherwise it uses the
 * normal approximation with tie-corrected variance and a 0.5 continuity
 * correction.  Identical samples give p = 1.
 */
MannWhitneyResult mann_whitney_u(std::span<const double> a,
                                 std::span<const double> b);

/// Exceedance counts over paired slots.
struct ExceedanceStats {
    std::size_t evaluated = 0;
    std::size_t exceeding = 0;
    double fraction = 0.0;
};

/// Fraction of paired present hours where RH exceeds the mold threshold
/// lim1(t).  Grids must match.
ExceedanceStats lim_exceedance(const core::TimeSeries& t_celsius,
                               const core::TimeSeries& rh_percent);

/// Fraction of paired present slots where a > b (e.g. indoor vs outdoor
/// mixing ratio).  Grids must match.
ExceedanceStats series_exceedance(const core::TimeSeries& a,
                                  const core::TimeSeries& b);

}  // namespace fedcast::climate
