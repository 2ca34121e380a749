#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fedcast/cleaning.hpp"
#include "fedcast/csv.hpp"
#include "fedcast/errors.hpp"
#include "fedcast/rng.hpp"
#include "fedcast/synthetic.hpp"

using namespace fedcast;
using core::TimeSeries;

namespace {

std::string temp_csv(const std::string& name, const std::string& content) {
    const auto path =
        (std::filesystem::temp_directory_path() / ("fedcast_test_" + name))
            .string();
    std::ofstream out(path, std::ios::trunc);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("ISO-8601 parsing handles zones and separators") {
    CHECK(ingest::parse_iso8601("2021-01-01T00:00:00Z") == 1609459200);
    CHECK(ingest::parse_iso8601("2021-01-01 00:00:00Z") == 1609459200);
    CHECK(ingest::parse_iso8601("2021-01-01T01:00:00+01:00") == 1609459200);
    CHECK(ingest::parse_iso8601("2020-12-31T23:30:00-00:30") == 1609459200);
    CHECK(ingest::parse_iso8601("1970-01-01T00:00:00Z") == 0);
    // CET summer reading: UTC+2.
    CHECK(ingest::parse_iso8601("2021-06-15T14:00:00+02:00") ==
          ingest::parse_iso8601("2021-06-15T12:00:00Z"));
}

TEST_CASE("ISO-8601 parsing rejects malformed stamps") {
    for (const char* bad :
         {"2021-13-01T00:00:00Z", "2021-01-32T00:00:00Z",
          "2021-02-30T00:00:00Z", "2021-01-01T24:00:00Z",
          "2021-01-01T00:61:00Z", "2021-01-01", "2021-01-01T00:00:00",
          "garbage", "2021-01-01T00:00:00+1:00", ""}) {
        CHECK_THROWS_AS(ingest::parse_iso8601(bad), Error);
    }
}

TEST_CASE("ISO-8601 formatting round-trips") {
    CHECK(ingest::format_iso8601_utc(1609459200) == "2021-01-01T00:00:00Z");
    CHECK(ingest::format_iso8601_utc(0) == "1970-01-01T00:00:00Z");
    SplitMix64 rng(99);
    for (int i = 0; i < 200; ++i) {
        const auto t = static_cast<std::int64_t>(rng.nextBelow(4102444800ULL));
        CHECK(ingest::parse_iso8601(ingest::format_iso8601_utc(t)) == t);
    }
    // Leap-day round trip.
    CHECK(ingest::format_iso8601_utc(
              ingest::parse_iso8601("2020-02-29T12:00:00Z")) ==
          "2020-02-29T12:00:00Z");
}

TEST_CASE("long CSV write and read round-trip preserves values and gaps") {
    TimeSeries a("a", 1609459200, 3600,
                 {1.5, std::nullopt, 0.1 + 0.2, -3.25});
    TimeSeries b("b", 1609459200, 3600, {10.0, 11.0, std::nullopt, 13.0});
    const auto path = (std::filesystem::temp_directory_path() /
                       "fedcast_test_roundtrip.csv")
                          .string();
    ingest::write_long_csv(path, {a, b});
    const auto back = ingest::read_long_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].channelId() == "a");
    CHECK(back[0].startTime() == a.startTime());
    CHECK(back[0].stepSeconds() == 3600);
    CHECK(back[0].values() == a.values());
    CHECK(back[1].values() == b.values());
}

TEST_CASE("CSV reader infers the step from the modal gap") {
    const auto path = temp_csv("modal.csv",
                               "TIME,UUID,VALUE\n"
                               "2021-01-01T00:00:00Z,x,1\n"
                               "2021-01-01T01:00:00Z,x,2\n"
                               "2021-01-01T02:00:00Z,x,3\n"
                               "2021-01-01T04:00:00Z,x,4\n");
    const auto out = ingest::read_long_csv(path);
    REQUIRE(out.size() == 1);
    CHECK(out[0].stepSeconds() == 3600);
    REQUIRE(out[0].size() == 5);
    CHECK_FALSE(out[0].present(3));  // the skipped 03:00 slot
    CHECK(*out[0].at(4) == 4.0);
}

TEST_CASE("CSV reader keeps channel order of first appearance") {
    const auto path = temp_csv("order.csv",
                               "TIME,UUID,VALUE\n"
                               "2021-01-01T00:00:00Z,zeta,1\n"
                               "2021-01-01T00:00:00Z,alpha,2\n"
                               "2021-01-01T01:00:00Z,zeta,3\n"
                               "2021-01-01T01:00:00Z,alpha,4\n");
    const auto out = ingest::read_long_csv(path);
    REQUIRE(out.size() == 2);
    CHECK(out[0].channelId() == "zeta");
    CHECK(out[1].channelId() == "alpha");
}

TEST_CASE("CSV reader reports duplicate keys and malformed rows by line") {
    const auto dup = temp_csv("dup.csv",
                              "TIME,UUID,VALUE\n"
                              "2021-01-01T00:00:00Z,x,1\n"
                              "2021-01-01T00:00:00Z,x,2\n");
    CHECK_THROWS_AS(ingest::read_long_csv(dup), DuplicateKey);

    const auto bad_value = temp_csv("badval.csv",
                                    "TIME,UUID,VALUE\n"
                                    "2021-01-01T00:00:00Z,x,oops\n");
    CHECK_THROWS_WITH_AS(ingest::read_long_csv(bad_value),
                         doctest::Contains("line 2"), MalformedRow);

    const auto off_grid = temp_csv("offgrid.csv",
                                   "TIME,UUID,VALUE\n"
                                   "2021-01-01T00:00:00Z,x,1\n"
                                   "2021-01-01T01:00:00Z,x,2\n"
                                   "2021-01-01T02:00:00Z,x,3\n"
                                   "2021-01-01T03:30:00Z,x,4\n");
    CHECK_THROWS_AS(ingest::read_long_csv(off_grid), MalformedRow);

    const auto bad_header = temp_csv("badhdr.csv", "time,id,val\n");
    CHECK_THROWS_AS(ingest::read_long_csv(bad_header), MalformedRow);

    const auto missing_col = temp_csv("twocol.csv",
                                      "TIME,UUID,VALUE\n"
                                      "2021-01-01T00:00:00Z,x\n");
    CHECK_THROWS_AS(ingest::read_long_csv(missing_col), MalformedRow);
}

TEST_CASE("cleaning removes outliers then bridges short gaps only") {
    // Step 3600, policy limit 7200: a 1-slot gap is bridged, a 2-slot gap
    // (2 * 3600 = 7200, not strictly less) is kept.
    TimeSeries s("t", 0, 3600,
                 {10.0, 1e9, 11.0, std::nullopt, std::nullopt, 12.0});
    ingest::CleaningPolicy policy{-50.0, 60.0, 7200};
    const auto result = ingest::clean(s, policy);
    CHECK(result.report.outliers_removed == 1);
    CHECK(result.report.points_interpolated == 1);
    CHECK(result.report.gaps_retained == 1);
    CHECK(*result.series.at(1) == 10.5);
    CHECK_FALSE(result.series.present(3));
    CHECK_FALSE(result.series.present(4));
    CHECK(*result.series.at(5) == 12.0);
}

TEST_CASE("cleaning keeps gaps that touch the series boundary") {
    TimeSeries s("t", 0, 3600, {std::nullopt, 5.0, 6.0, std::nullopt});
    ingest::CleaningPolicy policy{-50.0, 60.0, 7200};
    const auto result = ingest::clean(s, policy);
    CHECK_FALSE(result.series.present(0));
    CHECK_FALSE(result.series.present(3));
    CHECK(result.report.points_interpolated == 0);
    CHECK(result.report.gaps_retained == 2);
}

TEST_CASE("default cleaning thresholds per channel kind") {
    const auto rh =
        ingest::default_cleaning_policy(ingest::ChannelKind::RelativeHumidity);
    CHECK(rh.min_valid == 0.0);
    CHECK(rh.max_valid == 100.0);
    CHECK(rh.max_interp_gap_seconds == 7200);
    const auto temp =
        ingest::default_cleaning_policy(ingest::ChannelKind::Temperature);
    CHECK(temp.min_valid == -50.0);
    CHECK(temp.max_valid == 60.0);
    const auto co2 = ingest::default_cleaning_policy(ingest::ChannelKind::Co2);
    CHECK(co2.min_valid == 0.0);
    CHECK(co2.max_valid == 10000.0);
    CHECK(ingest::channel_kind_from_name("energy") ==
          ingest::ChannelKind::Energy);
    CHECK_THROWS_AS(ingest::channel_kind_from_name("sound"), Error);
}

TEST_CASE("synthesis is deterministic and a pure function of the spec") {
    ingest::SyntheticSpec spec;
    spec.days = 5;
    spec.seed = 123;
    spec.channels = {{"t", ingest::ChannelKind::Temperature, 20.0, 2.0, 0.5,
                      0.3}};
    const auto a = ingest::synthesize(spec);
    const auto b = ingest::synthesize(spec);
    REQUIRE(a.size() == 1);
    CHECK(a[0].size() == 5 * 24);
    CHECK(a[0].values() == b[0].values());
    spec.seed = 124;
    CHECK(ingest::synthesize(spec)[0].values() != a[0].values());
}

TEST_CASE("noise-free daily channels are bit-exactly 24-periodic") {
    ingest::SyntheticSpec spec;
    spec.days = 7;
    spec.channels = {{"t", ingest::ChannelKind::Temperature, 20.0, 3.0, 0.0,
                      0.0}};
    const auto out = ingest::synthesize(spec);
    const auto& v = out[0].values();
    for (std::size_t i = 24; i < v.size(); ++i) {
        CHECK(*v[i] == *v[i - 24]);
    }
}

TEST_CASE("adding a channel never perturbs existing channels") {
    ingest::SyntheticSpec spec;
    spec.days = 4;
    spec.seed = 5;
    spec.channels = {{"t", ingest::ChannelKind::Temperature, 20.0, 2.0, 0.0,
                      0.4}};
    const auto solo = ingest::synthesize(spec);
    spec.channels.push_back(
        {"rh", ingest::ChannelKind::RelativeHumidity, 50.0, 5.0, 0.0, 1.0});
    const auto both = ingest::synthesize(spec);
    REQUIRE(both.size() == 2);
    CHECK(both[0].values() == solo[0].values());
}

TEST_CASE("occupancy spikes hit CO2 channels only inside opening hours") {
    ingest::SyntheticSpec spec;
    spec.days = 10;
    spec.seed = 77;
    spec.occupancy_spikes = true;
    spec.spike_probability = 1.0;
    spec.channels = {
        {"co2", ingest::ChannelKind::Co2, 420.0, 0.0, 0.0, 0.0},
        {"t", ingest::ChannelKind::Temperature, 20.0, 0.0, 0.0, 0.0}};
    const auto out = ingest::synthesize(spec);
    const auto& co2 = out[0].values();
    int elevated_days = 0;
    for (int day = 0; day < spec.days; ++day) {
        bool elevated_today = false;
        for (int hour = 0; hour < 24; ++hour) {
            const double v = *co2[static_cast<std::size_t>(day * 24 + hour)];
            if (v != 420.0) {
                CHECK(v == 420.0 + spec.spike_amplitude);
                CHECK(hour >= spec.opening_hour);
                CHECK(hour < spec.closing_hour);
                elevated_today = true;
            }
        }
        if (elevated_today) ++elevated_days;
    }
    CHECK(elevated_days == spec.days);  // probability 1: every day occupied
    // The non-CO2 channel is untouched.
    for (const auto& v : out[1].values()) CHECK(*v == 20.0);

    spec.spike_probability = 0.0;
    const auto quiet = ingest::synthesize(spec);
    for (const auto& v : quiet[0].values()) CHECK(*v == 420.0);
}

TEST_CASE("synthetic spec validation") {
    ingest::SyntheticSpec spec;
    spec.channels = {{"t", ingest::ChannelKind::Temperature, 20.0, 0.0, 0.0,
                      0.0}};
    CHECK_NOTHROW(spec.validate());
    spec.days = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    spec.days = 3;
    spec.channels.push_back(spec.channels.front());  // duplicate id
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
    spec.channels.pop_back();
    spec.opening_hour = 18;
    spec.closing_hour = 9;
    spec.occupancy_spikes = true;
    CHECK_THROWS_AS(spec.validate(), InvalidSpec);
}
