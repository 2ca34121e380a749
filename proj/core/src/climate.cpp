#include "fedcast/climate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fedcast/errors.hpp"

namespace fedcast::climate {

double mixing_ratio(double t_celsius, double rh_percent, double pressure_hpa) {
    if (!(rh_percent >= 0.0 && rh_percent <= 100.0)) {
        throw NonPhysical("mixing_ratio: RH " + std::to_string(rh_percent) +
                          " % is outside [0, 100]");
    }
    if (!(pressure_hpa > 0.0)) {
        throw NonPhysical("mixing_ratio: pressure must be positive, got " +
                          std::to_string(pressure_hpa) + " hPa");
    }
    const double sat = std::pow(10.0, 7.65 * t_celsius / (243.12 + t_celsius));
    const double vapor = 0.06112 * sat * rh_percent;
    const double denom = pressure_hpa - vapor;
    if (!(denom > 0.0)) {
        throw NonPhysical("mixing_ratio: vapor pressure " +
                          std::to_string(vapor) +
                          " hPa reaches the total pressure " +
                          std::to_string(pressure_hpa) + " hPa");
    }
    return 38.015 * sat * rh_percent / denom;
}

double lim1(double t_celsius) {
    return std::cosh(0.128324 * (30.0 - t_celsius)) + 75.0;
}

namespace {

void require_same_grid(const core::TimeSeries& a, const core::TimeSeries& b,
                       const char* what) {
    if (a.startTime() != b.startTime() || a.stepSeconds() != b.stepSeconds() ||
        a.size() != b.size()) {
        throw ShapeError(std::string(what) + ": channels '" + a.channelId() +
                         "' and '" + b.channelId() + "' are not on one grid");
    }
}

/// Percentile with linear interpolation between order statistics
/// (index p/100 * (n-1) into the sorted values).
double percentile(std::vector<double>& values, double pct) {
    std::sort(values.begin(), values.end());
    const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[lo + 1] - values[lo]) * frac;
}

double binomial_count(std::size_t n, std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        c *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        if (c > 1e18) return c;  // beyond any enumeration cap
    }
    return c;
}

}  // namespace

core::TimeSeries mixing_ratio_series(const core::TimeSeries& t_celsius,
                                     const core::TimeSeries& rh_percent,
                                     double pressure_hpa) {
    require_same_grid(t_celsius, rh_percent, "mixing_ratio_series");
    std::vector<std::optional<double>> values(t_celsius.size());
    for (std::size_t i = 0; i < t_celsius.size(); ++i) {
        if (t_celsius.present(i) && rh_percent.present(i)) {
            values[i] = mixing_ratio(*t_celsius.at(i), *rh_percent.at(i),
                                     pressure_hpa);
        }
    }
    return core::TimeSeries(t_celsius.channelId() + "/mr",
                            t_celsius.startTime(), t_celsius.stepSeconds(),
                            std::move(values));
}

core::TimeSeries centered_moving_average(const core::TimeSeries& series,
                                         int window_days,
                                         double max_missing_frac) {
    if (window_days < 1) {
        throw InvalidSpec("centered_moving_average: window_days must be >= 1");
    }
    if (!(max_missing_frac >= 0.0 && max_missing_frac <= 1.0)) {
        throw InvalidSpec(
            "centered_moving_average: max_missing_frac must lie in [0, 1]");
    }
    if (86400 % series.stepSeconds() != 0) {
        throw InvalidSpec("centered_moving_average: step " +
                          std::to_string(series.stepSeconds()) +
                          "s does not divide one day");
    }
    const auto per_day = static_cast<std::size_t>(86400 / series.stepSeconds());
    const std::size_t half = per_day * static_cast<std::size_t>(window_days) / 2;
    if (2 * half + 1 > series.size()) {
        throw SeriesTooShort("centered_moving_average: need at least " +
                             std::to_string(2 * half + 1) + " slots, have " +
                             std::to_string(series.size()));
    }

    const double total_weight = static_cast<double>(2 * half);
    std::vector<std::optional<double>> out(series.size());
    for (std::size_t i = half; i + half < series.size(); ++i) {
        double sum = 0.0, weight = 0.0;
        for (std::size_t j = i - half; j <= i + half; ++j) {
            if (!series.present(j)) continue;
            const double w = (j == i - half || j == i + half) ? 0.5 : 1.0;
            sum += w * *series.at(j);
            weight += w;
        }
        if (total_weight - weight > max_missing_frac * total_weight) continue;
        out[i] = sum / weight;
    }
    return core::TimeSeries(series.channelId() + "/cma", series.startTime(),
                            series.stepSeconds(), std::move(out));
}

SeasonalDecomposition en15757_decompose(const core::TimeSeries& rh,
                                        const En15757Options& options) {
    if (!(options.band_low_pct >= 0.0 && options.band_high_pct <= 100.0 &&
          options.band_low_pct < options.band_high_pct)) {
        throw InvalidSpec("en15757_decompose: need 0 <= band_low < band_high <= 100");
    }

    double total = 0.0;
    std::size_t n_present = 0;
    for (std::size_t i = 0; i < rh.size(); ++i) {
        if (rh.present(i)) {
            total += *rh.at(i);
            ++n_present;
        }
    }
    if (n_present == 0) {
        throw SeriesTooShort("en15757_decompose: channel '" + rh.channelId() +
                             "' holds no present readings");
    }

    const double annual_mean = total / static_cast<double>(n_present);
    auto seasonal = centered_moving_average(rh, options.window_days,
                                            options.max_missing_frac);

    std::vector<std::optional<double>> dev(rh.size());
    std::vector<double> dev_values;
    for (std::size_t i = 0; i < rh.size(); ++i) {
        if (rh.present(i) && seasonal.present(i)) {
            dev[i] = *rh.at(i) - *seasonal.at(i);
            dev_values.push_back(*dev[i]);
        }
    }
    if (dev_values.empty()) {
        throw SeriesTooShort("en15757_decompose: no slot has both a reading "
                             "and a seasonal value");
    }
    core::TimeSeries deviations(rh.channelId() + "/dev", rh.startTime(),
                                rh.stepSeconds(), std::move(dev));
    return SeasonalDecomposition{annual_mean, std::move(seasonal),
                                 std::move(deviations),
                                 percentile(dev_values, options.band_low_pct),
                                 percentile(dev_values, options.band_high_pct)};
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw ShapeError("pearson: size mismatch (" + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) {
        throw InvalidSpec("pearson: need at least two observations");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedCorrelation("pearson: a constant input has no "
                                   "defined correlation");
    }
    return sxy / std::sqrt(sxx * syy);
}

MannWhitneyResult mann_whitney_u(std::span<const double> a,
                                 std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw InvalidSpec("mann_whitney_u: both groups must be non-empty");
    }
    const std::size_t na = a.size(), nb = b.size(), n = na + nb;

    // Pooled midranks: ties share the average of the ranks they occupy.
    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return pooled[i] < pooled[j];
    });
    std::vector<double> rank(n);
    double tie_term = 0.0;  // sum over tie groups of t^3 - t
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[idx[j]] == pooled[idx[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j + 1);
        for (std::size_t k = i; k < j; ++k) rank[idx[k]] = mid;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < na; ++i) rank_sum_a += rank[i];
    const double products = static_cast<double>(na) * static_cast<double>(nb);
    const double u_a =
        rank_sum_a - static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;
    const double u_b = products - u_a;

    MannWhitneyResult result;
    result.u = std::min(u_a, u_b);

    const std::size_t n_small = std::min(na, nb);
    const double n_subsets = binomial_count(n, n_small);
    if (n_small <= 8 && n_subsets <= 2e6) {
        // Exact path: enumerate every assignment of n_small pooled ranks
        // to the smaller group.  The null distribution of U is symmetric
        // about products/2, so counting U_small <= min(U_a, U_b) gives
        // the lower-tail probability for either group.
        std::vector<double> sorted_ranks = rank;
        std::sort(sorted_ranks.begin(), sorted_ranks.end());
        std::vector<std::size_t> comb(n_small);
        std::iota(comb.begin(), comb.end(), std::size_t{0});
        const double base =
            static_cast<double>(n_small) * static_cast<double>(n_small + 1) / 2.0;
        std::size_t count = 0, total = 0;
        while (true) {
            double rs = 0.0;
            for (std::size_t pos : comb) rs += sorted_ranks[pos];
            if (rs - base <= result.u + 1e-9) ++count;
            ++total;

            // Next lexicographic combination of {0..n-1} choose n_small.
            std::size_t k = n_small;
            while (k > 0 && comb[k - 1] == n - n_small + k - 1) --k;
            if (k == 0) break;
            ++comb[k - 1];
            for (std::size_t m = k; m < n_small; ++m) comb[m] = comb[m - 1] + 1;
        }
        result.exact = true;
        result.p_value = std::min(
            1.0, 2.0 * static_cast<double>(count) / static_cast<double>(total));
        return result;
    }

    // Normal approximation with tie-corrected variance and a continuity
    // correction of one half.
    const double mu = products / 2.0;
    const double nn = static_cast<double>(n);
    const double variance =
        products / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (!(variance > 0.0)) {
        result.p_value = 1.0;  // complete tie: every value identical
        return result;
    }
    const double z =
        std::max(0.0, (std::fabs(result.u - mu) - 0.5)) / std::sqrt(variance);
    result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return result;
}

ExceedanceStats lim_exceedance(const core::TimeSeries& t_celsius,
                               const core::TimeSeries& rh_percent) {
    require_same_grid(t_celsius, rh_percent, "lim_exceedance");
    ExceedanceStats stats;
    for (std::size_t i = 0; i < t_celsius.size(); ++i) {
        if (!t_celsius.present(i) || !rh_percent.present(i)) continue;
        ++stats.evaluated;
        if (*rh_percent.at(i) > lim1(*t_celsius.at(i))) ++stats.exceeding;
    }
    if (stats.evaluated > 0) {
        stats.fraction = static_cast<double>(stats.exceeding) /
                         static_cast<double>(stats.evaluated);
    }
    return stats;
}

ExceedanceStats series_exceedance(const core::TimeSeries& a,
                                  const core::TimeSeries& b) {
    require_same_grid(a, b, "series_exceedance");
    ExceedanceStats stats;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a.present(i) || !b.present(i)) continue;
        ++stats.evaluated;
        if (*a.at(i) > *b.at(i)) ++stats.exceeding;
    }
    if (stats.evaluated > 0) {
        stats.fraction = static_cast<double>(stats.exceeding) /
                         static_cast<double>(stats.evaluated);
    }
    return stats;
}

}  // namespace fedcast::climate
