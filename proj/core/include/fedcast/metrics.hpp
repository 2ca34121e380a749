#pragma once

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fedcast/model.hpp"

namespace fedcast::metrics {

/**
 * @brief Coefficient of variation of the RMSE, in percent:
 * 100 * sqrt(mean((pred - truth)^2)) / mean(truth).
 * Throws UndefinedNormalization unless mean(truth) > 0, and ShapeError
 * on length mismatch or empty inputs.
 */
double cv_rmse(std::span<const double> pred, std::span<const double> truth);

/// Normalized mean bias error in percent (signed):
/// 100 * mean(pred - truth) / mean(truth).  Same preconditions as cv_rmse.
double nmbe(std::span<const double> pred, std::span<const double> truth);

/**
 * @brief Normalized quantile risk at one level:
 * 2 * sum(pinball(pred, truth, level)) / sum(truth).
 * `pred` holds the level's predictions, matched elementwise to `truth`.
 * Throws UndefinedNormalization unless sum(truth) > 0.
 */
double rho_risk(std::span<const double> pred, std::span<const double> truth,
                double level);

/// Measurement classes with distinct calibration thresholds.
enum class ComplianceTask { WholeBuildingEnergy, IndoorTRh, Co2 };

ComplianceTask compliance_task_from_name(const std::string& name);
std::string compliance_task_name(ComplianceTask task);

/**
 * @brief Hourly calibration gate for a metric pair.
 *
 * Whole-building energy and CO2 pass at CV-RMSE <= 30 and |NMBE| <= 10;
 * indoor temperature/RH at CV-RMSE <= 20 and |NMBE| <= 5.  Boundary
 * values pass.
 */
bool compliant(double cv_rmse_pct, double nmbe_pct, ComplianceTask task);

/// Pooled evaluation of one model over one window set.
struct EvalReport {
    std::string model_name;
    std::size_t n_samples = 0;
    std::size_t n_points = 0;  // samples * horizon
    /// NaN when the model has no point head (quantile model without a
    /// 0.5 level); rendered as null in JSON.
    double cv_rmse_pct = std::numeric_limits<double>::quiet_NaN();
    double nmbe_pct = std::numeric_limits<double>::quiet_NaN();
    /// Level -> normalized quantile risk (quantile models only).
    std::map<double, double> rho_risk_by_level;
    /// Fraction of (sample, step) pairs whose predicted quantiles are not
    /// monotone in the level (quantile models only).
    double quantile_crossing_rate = 0.0;
    bool has_quantiles = false;
    /// Task name -> gate outcome for all three calibration classes.
    std::map<std::string, bool> compliance;

    std::string toJson() const;
};

/**
 * @brief Evaluates params over every sample, pooling all (sample, step)
 * pairs into one flat comparison.
 *
 * Point forecasts (a quantile model's 0.5 level, when present) feed
 * CV-RMSE, NMBE and the compliance gates; every quantile level gets its
 * rho-risk.  Throws InvalidSpec on an empty set and ShapeError when the
 * set's shape does not match the model.
 */
EvalReport evaluate(const models::ForecastModel& model,
                    const models::ParamVector& params,
                    const core::SupervisedWindowSet& data);

}  // namespace fedcast::metrics
