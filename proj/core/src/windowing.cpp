#include "fedcast/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fedcast/errors.hpp"

namespace fedcast::core {

void WindowSpec::validate() const {
    if (lookback < 1) {
        throw InvalidSpec("WindowSpec: lookback must be >= 1, got " +
                          std::to_string(lookback));
    }
    if (horizon < 1) {
        throw InvalidSpec("WindowSpec: horizon must be >= 1, got " +
                          std::to_string(horizon));
    }
    if (target_id.empty()) {
        throw InvalidSpec("WindowSpec: target id must not be empty");
    }
    for (const auto& id : future_covariate_ids) {
        if (id == target_id) {
            throw InvalidSpec(
                "WindowSpec: target '" + target_id +
                "' may not be a future covariate (its future is the label)");
        }
    }
    const auto check_unique = [](const std::vector<std::string>& ids,
                                 const char* role) {
        std::set<std::string> seen;
        for (const auto& id : ids) {
            if (!seen.insert(id).second) {
                throw InvalidSpec(std::string("WindowSpec: duplicate ") + role +
                                  " covariate '" + id + "'");
            }
        }
    };
    check_unique(past_covariate_ids, "past");
    check_unique(future_covariate_ids, "future");
}

SupervisedWindowSet::SupervisedWindowSet(std::vector<WindowSample> samples,
                                         int lookback, int n_past_covariates,
                                         int n_future_covariates, int horizon,
                                         std::int64_t step_seconds)
    : samples_(std::move(samples)),
      lookback_(lookback),
      n_past_covariates_(n_past_covariates),
      n_future_covariates_(n_future_covariates),
      horizon_(horizon),
      step_seconds_(step_seconds) {
    if (lookback_ < 1 || horizon_ < 1 || n_past_covariates_ < 0 ||
        n_future_covariates_ < 0 || step_seconds_ <= 0) {
        throw InvalidSpec("SupervisedWindowSet: invalid shape parameters");
    }
    const auto w = static_cast<std::size_t>(lookback_);
    const auto h = static_cast<std::size_t>(horizon_);
    for (const auto& s : samples_) {
        if (s.y_past.size() != w || s.y_future.size() != h ||
            s.xb_past.size() != w * static_cast<std::size_t>(n_past_covariates_) ||
            s.xf_future.size() != h * static_cast<std::size_t>(n_future_covariates_)) {
            throw ShapeError("SupervisedWindowSet: sample blocks do not match "
                             "the declared window shape");
        }
    }
}

bool SupervisedWindowSet::sameShape(const SupervisedWindowSet& other) const noexcept {
    return lookback_ == other.lookback_ && horizon_ == other.horizon_ &&
           n_past_covariates_ == other.n_past_covariates_ &&
           n_future_covariates_ == other.n_future_covariates_ &&
           step_seconds_ == other.step_seconds_;
}

SupervisedWindowSet SupervisedWindowSet::concat(const SupervisedWindowSet& other) const {
    if (!sameShape(other)) {
        throw ShapeError("concat: window sets have different shapes");
    }
    std::vector<WindowSample> merged;
    merged.reserve(samples_.size() + other.samples_.size());
    merged.insert(merged.end(), samples_.begin(), samples_.end());
    merged.insert(merged.end(), other.samples_.begin(), other.samples_.end());
    std::stable_sort(merged.begin(), merged.end(),
                     [](const WindowSample& a, const WindowSample& b) {
                         return a.origin_time < b.origin_time;
                     });
    return SupervisedWindowSet(std::move(merged), lookback_, n_past_covariates_,
                               n_future_covariates_, horizon_, step_seconds_);
}

namespace {

const TimeSeries& find_channel(const std::vector<TimeSeries>& channels,
                               const std::string& id) {
    for (const auto& c : channels) {
        if (c.channelId() == id) return c;
    }
    throw UnknownChannel("make_windows: no channel named '" + id + "'");
}

/// Prefix counts of present slots; presentInRange(a, b) is O(1).
struct PresenceIndex {
    std::vector<std::size_t> prefix;

    explicit PresenceIndex(const TimeSeries& s) : prefix(s.size() + 1, 0) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            prefix[i + 1] = prefix[i] + (s.present(i) ? 1 : 0);
        }
    }

    /// True when every slot in [a, b] is present.
    bool allPresent(std::size_t a, std::size_t b) const noexcept {
        return prefix[b + 1] - prefix[a] == b - a + 1;
    }
};

void copy_range(const TimeSeries& s, std::size_t a, std::size_t b,
                std::vector<double>& out) {
    for (std::size_t i = a; i <= b; ++i) out.push_back(*s.at(i));
}

}  // namespace

SupervisedWindowSet make_windows(const std::vector<TimeSeries>& channels,
                                 const WindowSpec& spec) {
    spec.validate();

    const TimeSeries& target = find_channel(channels, spec.target_id);
    std::vector<const TimeSeries*> past, future;
    for (const auto& id : spec.past_covariate_ids) {
        past.push_back(&find_channel(channels, id));
    }
    for (const auto& id : spec.future_covariate_ids) {
        future.push_back(&find_channel(channels, id));
    }

    std::vector<const TimeSeries*> referenced{&target};
    referenced.insert(referenced.end(), past.begin(), past.end());
    referenced.insert(referenced.end(), future.begin(), future.end());
    for (const TimeSeries* c : referenced) {
        if (c->startTime() != target.startTime() ||
            c->stepSeconds() != target.stepSeconds() ||
            c->size() != target.size()) {
            throw ShapeError("make_windows: channel '" + c->channelId() +
                             "' is not on the target's grid; align() first");
        }
    }

    std::vector<PresenceIndex> indices;
    indices.reserve(referenced.size());
    for (const TimeSeries* c : referenced) indices.emplace_back(*c);
    const PresenceIndex& target_idx = indices[0];

    const std::size_t w = static_cast<std::size_t>(spec.lookback);
    const std::size_t h = static_cast<std::size_t>(spec.horizon);
    const std::size_t L = target.size();

    std::vector<WindowSample> samples;
    if (L >= w + h) {
        for (std::size_t o = w - 1; o + h < L; ++o) {
            const std::size_t past_lo = o - (w - 1);
            bool complete = target_idx.allPresent(past_lo, o + h);
            for (std::size_t p = 0; complete && p < past.size(); ++p) {
                complete = indices[1 + p].allPresent(past_lo, o);
            }
            for (std::size_t f = 0; complete && f < future.size(); ++f) {
                complete = indices[1 + past.size() + f].allPresent(o + 1, o + h);
            }
            if (!complete) continue;

            WindowSample s;
            s.y_past.reserve(w);
            copy_range(target, past_lo, o, s.y_past);
            s.xb_past.reserve(w * past.size());
            for (std::size_t i = past_lo; i <= o; ++i) {
                for (const TimeSeries* c : past) s.xb_past.push_back(*c->at(i));
            }
            s.xf_future.reserve(h * future.size());
            for (std::size_t i = o + 1; i <= o + h; ++i) {
                for (const TimeSeries* c : future) s.xf_future.push_back(*c->at(i));
            }
            s.y_future.reserve(h);
            copy_range(target, o + 1, o + h, s.y_future);
            s.origin_time = target.timeAt(o);
            samples.push_back(std::move(s));
        }
    }

    return SupervisedWindowSet(std::move(samples), spec.lookback,
                               static_cast<int>(past.size()),
                               static_cast<int>(future.size()), spec.horizon,
                               target.stepSeconds());
}

SplitResult chronological_split(const SupervisedWindowSet& windows,
                                double train_frac, double val_frac) {
    if (!(train_frac > 0.0) || !(val_frac >= 0.0) ||
        !(train_frac + val_frac < 1.0)) {
        throw InvalidSpec(
            "chronological_split: need train_frac > 0, val_frac >= 0 and "
            "train_frac + val_frac < 1");
    }

    const std::size_t n = windows.size();
    // The epsilon absorbs cases like 10 * 0.7 = 6.999... so nominal
    // fractions of round counts land on the intended boundary.
    const auto n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * train_frac + 1e-9));
    const auto n_val = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * val_frac + 1e-9));

    const auto& all = windows.samples();
    std::vector<WindowSample> train(all.begin(), all.begin() + n_train);
    std::vector<WindowSample> val(all.begin() + n_train,
                                  all.begin() + n_train + n_val);
    std::vector<WindowSample> test(all.begin() + n_train + n_val, all.end());

    // A sample's label spans (origin, origin + horizon * step].  Drop tail
    // samples of each partition whose labels reach into the next
    // partition's origins.
    const std::int64_t label_span =
        static_cast<std::int64_t>(windows.horizon()) * windows.stepSeconds();
    const auto trim_against = [&](std::vector<WindowSample>& earlier,
                                  const std::vector<WindowSample>& next) {
        if (next.empty()) return;
        const std::int64_t next_first = next.front().origin_time;
        while (!earlier.empty() &&
               earlier.back().origin_time + label_span >= next_first) {
            earlier.pop_back();
        }
    };
    trim_against(val, test);
    trim_against(train, val.empty() ? test : val);

    if (train.empty()) {
        throw SplitTooSmall("chronological_split: train partition is empty "
                            "after leakage trimming");
    }
    if (val.empty() && val_frac > 0.0) {
        throw SplitTooSmall("chronological_split: validation partition is "
                            "empty after leakage trimming");
    }
    if (test.empty()) {
        throw SplitTooSmall("chronological_split: test partition is empty");
    }

    const auto wrap = [&](std::vector<WindowSample>&& s) {
        return SupervisedWindowSet(std::move(s), windows.lookback(),
                                   windows.pastCovariates(),
                                   windows.futureCovariates(), windows.horizon(),
                                   windows.stepSeconds());
    };
    return SplitResult{wrap(std::move(train)), wrap(std::move(val)),
                       wrap(std::move(test))};
}

}  // namespace fedcast::core
