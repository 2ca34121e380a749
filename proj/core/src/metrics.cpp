#include "fedcast/metrics.hpp"

#include <cmath>

#include <json.hpp>

#include "fedcast/errors.hpp"

namespace fedcast::metrics {

namespace {

void require_pair(std::span<const double> pred, std::span<const double> truth,
                  const char* what) {
    if (pred.size() != truth.size()) {
        throw ShapeError(std::string(what) + ": size mismatch (" +
                         std::to_string(pred.size()) + " vs " +
                         std::to_string(truth.size()) + ")");
    }
    if (pred.empty()) {
        throw ShapeError(std::string(what) + ": empty inputs");
    }
}

double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

}  // namespace

double cv_rmse(std::span<const double> pred, std::span<const double> truth) {
    require_pair(pred, truth, "cv_rmse");
    const double norm = mean_of(truth);
    if (!(norm > 0.0)) {
        throw UndefinedNormalization(
            "cv_rmse: mean of the measured values must be positive, got " +
            std::to_string(norm));
    }
    double se = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        se += e * e;
    }
    return 100.0 * std::sqrt(se / static_cast<double>(pred.size())) / norm;
}

double nmbe(std::span<const double> pred, std::span<const double> truth) {
    require_pair(pred, truth, "nmbe");
    const double norm = mean_of(truth);
    if (!(norm > 0.0)) {
        throw UndefinedNormalization(
            "nmbe: mean of the measured values must be positive, got " +
            std::to_string(norm));
    }
    double bias = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        bias += pred[i] - truth[i];
    }
    return 100.0 * (bias / static_cast<double>(pred.size())) / norm;
}

double rho_risk(std::span<const double> pred, std::span<const double> truth,
                double level) {
    require_pair(pred, truth, "rho_risk");
    if (!(level > 0.0 && level < 1.0)) {
        throw InvalidQuantile("rho_risk: level " + std::to_string(level) +
                              " is outside (0, 1)");
    }
    double denom = 0.0;
    double pinball_sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        denom += truth[i];
        const double d = pred[i] - truth[i];
        pinball_sum += d > 0.0 ? (1.0 - level) * d : -level * d;
    }
    if (!(denom > 0.0)) {
        throw UndefinedNormalization(
            "rho_risk: sum of the measured values must be positive, got " +
            std::to_string(denom));
    }
    return 2.0 * pinball_sum / denom;
}

ComplianceTask compliance_task_from_name(const std::string& name) {
    if (name == "whole_building") return ComplianceTask::WholeBuildingEnergy;
    if (name == "indoor_t_rh") return ComplianceTask::IndoorTRh;
    if (name == "co2") return ComplianceTask::Co2;
    throw InvalidSpec("unknown compliance task '" + name +
                      "' (expected whole_building, indoor_t_rh or co2)");
}

std::string compliance_task_name(ComplianceTask task) {
    switch (task) {
        case ComplianceTask::WholeBuildingEnergy: return "whole_building";
        case ComplianceTask::IndoorTRh: return "indoor_t_rh";
        case ComplianceTask::Co2: return "co2";
    }
    throw InvalidSpec("unhandled compliance task");
}

bool compliant(double cv_rmse_pct, double nmbe_pct, ComplianceTask task) {
    const bool tight = task == ComplianceTask::IndoorTRh;
    const double cv_limit = tight ? 20.0 : 30.0;
    const double nmbe_limit = tight ? 5.0 : 10.0;
    return cv_rmse_pct <= cv_limit && std::fabs(nmbe_pct) <= nmbe_limit;
}

std::string EvalReport::toJson() const {
    nlohmann::json j;
    j["model"] = model_name;
    j["n_samples"] = n_samples;
    j["n_points"] = n_points;
    j["cv_rmse_pct"] = std::isfinite(cv_rmse_pct)
                           ? nlohmann::json(cv_rmse_pct)
                           : nlohmann::json(nullptr);
    j["nmbe_pct"] = std::isfinite(nmbe_pct) ? nlohmann::json(nmbe_pct)
                                            : nlohmann::json(nullptr);
    j["compliance"] = compliance;
    if (has_quantiles) {
        nlohmann::json risks = nlohmann::json::object();
        for (const auto& [level, risk] : rho_risk_by_level) {
            char key[32];
            std::snprintf(key, sizeof key, "%.6g", level);
            risks[key] = risk;
        }
        j["rho_risk"] = risks;
        j["quantile_crossing_rate"] = quantile_crossing_rate;
    }
    return j.dump(2);
}

EvalReport evaluate(const models::ForecastModel& model,
                    const models::ParamVector& params,
                    const core::SupervisedWindowSet& data) {
    if (data.empty()) {
        throw InvalidSpec("evaluate: window set is empty");
    }
    if (data.lookback() != model.lookback() || data.horizon() != model.horizon()) {
        throw ShapeError("evaluate: window set shape does not match the model");
    }

    const auto& levels = model.quantileLevels();
    const std::size_t n_levels = levels.size();
    const auto h = static_cast<std::size_t>(model.horizon());

    EvalReport report;
    report.model_name = model.name();
    report.n_samples = data.size();
    report.n_points = data.size() * h;
    report.has_quantiles = n_levels > 0;

    std::vector<double> truth;
    truth.reserve(report.n_points);
    std::vector<double> point;
    point.reserve(report.n_points);
    std::vector<std::vector<double>> per_level(n_levels);
    for (auto& v : per_level) v.reserve(report.n_points);

    // A quantile model's point forecast is its median head, when present.
    std::size_t median_idx = n_levels;
    for (std::size_t q = 0; q < n_levels; ++q) {
        if (levels[q] == 0.5) median_idx = q;
    }

    std::size_t crossings = 0;
    for (const auto& s : data.samples()) {
        const auto pred = model.predict(params, s);
        truth.insert(truth.end(), s.y_future.begin(), s.y_future.end());
        if (n_levels == 0) {
            point.insert(point.end(), pred.begin(), pred.end());
            continue;
        }
        for (std::size_t t = 0; t < h; ++t) {
            bool crossed = false;
            for (std::size_t q = 0; q < n_levels; ++q) {
                const double v = pred[t * n_levels + q];
                per_level[q].push_back(v);
                if (q > 0 && v < pred[t * n_levels + q - 1]) crossed = true;
            }
            if (crossed) ++crossings;
            if (median_idx < n_levels) {
                point.push_back(pred[t * n_levels + median_idx]);
            }
        }
    }

    if (!point.empty()) {
        report.cv_rmse_pct = cv_rmse(point, truth);
        report.nmbe_pct = nmbe(point, truth);
        for (auto task : {ComplianceTask::WholeBuildingEnergy,
                          ComplianceTask::IndoorTRh, ComplianceTask::Co2}) {
            report.compliance[compliance_task_name(task)] =
                compliant(report.cv_rmse_pct, report.nmbe_pct, task);
        }
    }
    for (std::size_t q = 0; q < n_levels; ++q) {
        report.rho_risk_by_level[levels[q]] = rho_risk(per_level[q], truth, levels[q]);
    }
    if (n_levels > 0) {
        report.quantile_crossing_rate =
            static_cast<double>(crossings) / static_cast<double>(report.n_points);
    }
    return report;
}

}  // namespace fedcast::metrics
