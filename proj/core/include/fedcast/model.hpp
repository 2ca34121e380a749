#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedcast/losses.hpp"
#include "fedcast/param_vector.hpp"
#include "fedcast/windowing.hpp"

namespace fedcast::models {

/**
 * @brief Per-feature standardization fitted on a training partition only.
 *
 * apply() flattens a sample as [y_past | xb_past | xf_future] and maps
 * each feature to (x - mean) / std.  Features whose training std is
 * below 1e-12 pass through unscaled (mean 0, scale 1) so constant
 * covariates cannot produce NaNs.
 */
class Scaler {
public:
    /// No-op scaler for a given feature dimension.
    static Scaler identity(std::size_t dim);

    /// Fits means and (population) standard deviations on `train`.
    static Scaler fit(const core::SupervisedWindowSet& train);

    std::size_t dim() const noexcept { return mean_.size(); }

    /// Flattened, standardized feature vector; throws ShapeError when the
    /// sample's flattened length differs from dim().
    std::vector<double> apply(const core::WindowSample& sample) const;

    std::span<const double> means() const noexcept { return mean_; }
    std::span<const double> scales() const noexcept { return scale_; }

private:
    Scaler(std::vector<double> mean, std::vector<double> scale);

    std::vector<double> mean_;
    std::vector<double> scale_;
};

/// Architecture selector plus its hyper-parameters.
struct ModelSpec {
    enum class Kind { SeasonalNaive, Linear, Dense };

    Kind kind = Kind::Linear;
    /// Seasonal period in grid steps (SeasonalNaive only).
    int period = 24;
    /// Hidden widths (Dense only; Linear has none by definition).
    std::vector<int> hidden;
    /// Probability levels for quantile output heads; empty means a point
    /// model.  Must be strictly increasing, each inside (0, 1).
    std::vector<double> quantile_levels;

    void validate() const;
};

ModelSpec::Kind model_kind_from_name(const std::string& name);
std::string model_kind_name(ModelSpec::Kind kind);

/**
 * @brief A multi-horizon forecaster over fixed-shape window samples.
 *
 * Implementations are pure functions of (params, sample): they hold the
 * architecture, dimensions and input scaler, never any mutable training
 * state, so the same parameter vector always produces the same forecast.
 * Point models emit `horizon` values; quantile models emit
 * horizon x levels values row-major (all levels of step 1 first).
 */
class ForecastModel {
public:
    virtual ~ForecastModel() = default;

    /// Human-readable architecture name, e.g. "dense[32]".
    virtual std::string name() const = 0;

    /// Layout tag carried by every compatible ParamVector.
    virtual const std::string& layoutTag() const noexcept = 0;

    virtual std::size_t paramCount() const noexcept = 0;
    virtual bool trainable() const noexcept = 0;

    virtual int lookback() const noexcept = 0;
    virtual int horizon() const noexcept = 0;
    virtual const std::vector<double>& quantileLevels() const noexcept = 0;
    virtual const Scaler& scaler() const noexcept = 0;

    /// Number of outputs per sample: horizon, or horizon * levels.
    std::size_t outputDim() const noexcept {
        return static_cast<std::size_t>(horizon()) *
               std::max<std::size_t>(1, quantileLevels().size());
    }

    /// Seeded initial parameters: Glorot-uniform weights, zero biases.
    virtual ParamVector initParams(std::uint64_t seed) const = 0;

    virtual std::vector<double> predict(const ParamVector& params,
                                        const core::WindowSample& sample) const = 0;

    /// Mean over the batch of the per-sample loss.
    virtual double meanLoss(const ParamVector& params,
                            std::span<const core::WindowSample> batch,
                            LossKind loss) const = 0;

    /// Analytic gradient of meanLoss w.r.t. the parameters.  Throws
    /// NotTrainable for parameter-free models.
    virtual ParamVector gradient(const ParamVector& params,
                                 std::span<const core::WindowSample> batch,
                                 LossKind loss) const = 0;
};

/**
 * @brief Builds a model for windows shaped like `shape`.
 *
 * The scaler should be fitted on the caller's training partition (or be
 * Scaler::identity).  Throws InvalidSpec on inconsistent architecture
 * parameters, including a SeasonalNaive period exceeding the lookback.
 */
std::unique_ptr<ForecastModel> make_model(const ModelSpec& spec,
                                          const core::SupervisedWindowSet& shape,
                                          Scaler scaler);

}  // namespace fedcast::models
