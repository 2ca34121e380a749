#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcast/time_series.hpp"

namespace fedcast::core {

/**
 * @brief Describes how supervised samples are cut from aligned channels.
 *
 * A sample anchored at origin index o packs the last `lookback` target
 * values and past-covariate values (indices o-lookback+1 .. o), the next
 * `horizon` future-covariate values (o+1 .. o+horizon), and the next
 * `horizon` target values as the label.
 */
struct WindowSpec {
    int lookback = 24;
    int horizon = 6;
    std::string target_id;
    std::vector<std::string> past_covariate_ids;
    std::vector<std::string> future_covariate_ids;

    /// Throws InvalidSpec on nonsensical shapes (non-positive sizes, an
    /// empty target id, the target listed as a future covariate, or a
    /// repeated covariate id).
    void validate() const;
};

/// One supervised sample.  Covariate blocks are row-major: xb_past is
/// lookback x k (k past covariates), xf_future is horizon x m.
struct WindowSample {
    std::vector<double> y_past;
    std::vector<double> xb_past;
    std::vector<double> xf_future;
    std::vector<double> y_future;
    std::int64_t origin_time = 0;
};

/**
 * @brief An ordered set of complete supervised samples on one grid.
 *
 * Samples are ordered by origin time.  Every sample is complete: windows
 * touching any missing value are excluded at construction, so downstream
 * training and evaluation never see gaps.
 */
class SupervisedWindowSet {
public:
    SupervisedWindowSet(std::vector<WindowSample> samples, int lookback,
                        int n_past_covariates, int n_future_covariates,
                        int horizon, std::int64_t step_seconds);

    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const WindowSample& operator[](std::size_t i) const { return samples_[i]; }
    const std::vector<WindowSample>& samples() const noexcept { return samples_; }

    int lookback() const noexcept { return lookback_; }
    int horizon() const noexcept { return horizon_; }
    int pastCovariates() const noexcept { return n_past_covariates_; }
    int futureCovariates() const noexcept { return n_future_covariates_; }
    std::int64_t stepSeconds() const noexcept { return step_seconds_; }

    /// Length of the flattened feature vector [y_past | xb_past | xf_future].
    std::size_t featureDim() const noexcept {
        return static_cast<std::size_t>(lookback_) * (1 + n_past_covariates_) +
               static_cast<std::size_t>(horizon_) * n_future_covariates_;
    }

    /// True when `other` was cut with the same shape parameters.
    bool sameShape(const SupervisedWindowSet& other) const noexcept;

    /// Merged set re-ordered by origin time (stable, so *this precedes
    /// `other` at equal origins); shapes must match.
    SupervisedWindowSet concat(const SupervisedWindowSet& other) const;

private:
    std::vector<WindowSample> samples_;
    int lookback_;
    int n_past_covariates_;
    int n_future_covariates_;
    int horizon_;
    std::int64_t step_seconds_;
};

/**
 * @brief Cuts every complete supervised window from aligned channels.
 *
 * All referenced channels must share one grid (same start, step and
 * length).  Origin indices run from lookback-1 to length-horizon-1, so a
 * fully present input yields length - lookback - horizon + 1 samples;
 * windows overlapping a missing value in any referenced channel are
 * dropped.  Throws UnknownChannel for an unreferenced id and ShapeError
 * if the channels disagree on their grid.
 */
SupervisedWindowSet make_windows(const std::vector<TimeSeries>& channels,
                                 const WindowSpec& spec);

/// Train/validation/test partition of a window set.
struct SplitResult {
    SupervisedWindowSet train;
    SupervisedWindowSet val;
    SupervisedWindowSet test;
};

/**
 * @brief Chronological train/val/test split with leakage trimming.
 *
 * Samples are partitioned in origin order: the first
 * floor(n * train_frac) go to train, the next floor(n * val_frac) to
 * val, the rest to test.  A sample then stays in an earlier partition
 * only if its label window ends strictly before the first origin of the
 * next non-empty partition, so no label instant is ever visible to an
 * earlier partition's inputs.  val_frac may be zero (no validation
 * partition); if train, test, or a requested val partition ends up empty
 * the split throws SplitTooSmall.
 */
SplitResult chronological_split(const SupervisedWindowSet& windows,
                                double train_frac, double val_frac);

}  // namespace fedcast::core
