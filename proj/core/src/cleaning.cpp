#include "fedcast/cleaning.hpp"

#include <json.hpp>

#include "fedcast/errors.hpp"

namespace fedcast::ingest {

void CleaningPolicy::validate() const {
    if (!(min_valid < max_valid)) {
        throw InvalidSpec("CleaningPolicy: need min_valid < max_valid");
    }
    if (max_interp_gap_seconds < 0) {
        throw InvalidSpec("CleaningPolicy: max_interp_gap_seconds must be >= 0");
    }
}

std::string CleaningReport::toJson() const {
    nlohmann::json j{{"outliers_removed", outliers_removed},
                     {"points_interpolated", points_interpolated},
                     {"gaps_retained", gaps_retained}};
    return j.dump(2);
}

CleanResult clean(const core::TimeSeries& series, const CleaningPolicy& policy) {
    policy.validate();

    CleaningReport report;
    std::vector<std::optional<double>> values = series.values();
    for (auto& v : values) {
        if (v && (*v < policy.min_valid || *v > policy.max_valid)) {
            v.reset();
            ++report.outliers_removed;
        }
    }

    const std::size_t n = values.size();
    std::size_t i = 0;
    while (i < n) {
        if (values[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !values[j]) ++j;
        const std::size_t run = j - i;
        const bool interior = i > 0 && j < n;
        const std::int64_t run_span =
            static_cast<std::int64_t>(run) * series.stepSeconds();
        if (interior && run_span < policy.max_interp_gap_seconds) {
            const double left = *values[i - 1];
            const double right = *values[j];
            for (std::size_t k = i; k < j; ++k) {
                const double t = static_cast<double>(k - (i - 1)) /
                                 static_cast<double>(run + 1);
                values[k] = left + (right - left) * t;
            }
            report.points_interpolated += run;
        } else {
            ++report.gaps_retained;
        }
        i = j;
    }

    return CleanResult{series.withValues(std::move(values)), report};
}

}  // namespace fedcast::ingest
