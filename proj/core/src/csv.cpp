#include "fedcast/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <unordered_map>

#include "fedcast/errors.hpp"

namespace fedcast::ingest {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
/// public-domain civil calendar algorithms).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) noexcept {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m,
                     unsigned& d) noexcept {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = yy + (m <= 2);
}

unsigned days_in_month(std::int64_t y, unsigned m) noexcept {
    static constexpr unsigned kDays[12] = {31, 28, 31, 30, 31, 30,
                                           31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[m - 1];
}

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t width,
                      std::int64_t& out) noexcept {
    std::int64_t v = 0;
    for (std::size_t i = pos; i < pos + width; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

struct Row {
    std::int64_t time;
    double value;
    std::size_t line;
};

}  // namespace

std::int64_t parse_iso8601(std::string_view text) {
    const auto fail = [&]() -> std::int64_t {
        throw Error("invalid ISO-8601 timestamp '" + std::string(text) + "'");
    };

    if (text.size() != 20 && text.size() != 25) return fail();
    std::int64_t year, month, day, hour, minute, second;
    if (!parse_fixed_uint(text, 0, 4, year) || text[4] != '-' ||
        !parse_fixed_uint(text, 5, 2, month) || text[7] != '-' ||
        !parse_fixed_uint(text, 8, 2, day) ||
        (text[10] != 'T' && text[10] != ' ') ||
        !parse_fixed_uint(text, 11, 2, hour) || text[13] != ':' ||
        !parse_fixed_uint(text, 14, 2, minute) || text[16] != ':' ||
        !parse_fixed_uint(text, 17, 2, second)) {
        return fail();
    }
    if (month < 1 || month > 12 || day < 1 ||
        day > days_in_month(year, static_cast<unsigned>(month)) || hour > 23 ||
        minute > 59 || second > 59) {
        return fail();
    }

    std::int64_t offset = 0;
    if (text.size() == 20) {
        if (text[19] != 'Z') return fail();
    } else {
        const char sign = text[19];
        if (sign != '+' && sign != '-') return fail();
        std::int64_t oh, om;
        if (!parse_fixed_uint(text, 20, 2, oh) || text[22] != ':' ||
            !parse_fixed_uint(text, 23, 2, om) || oh > 23 || om > 59) {
            return fail();
        }
        offset = (oh * 60 + om) * 60;
        if (sign == '-') offset = -offset;
    }

    const std::int64_t days =
        days_from_civil(year, static_cast<unsigned>(month),
                        static_cast<unsigned>(day));
    return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_iso8601_utc(std::int64_t epoch_seconds) {
    const std::int64_t days = floor_div(epoch_seconds, 86400);
    std::int64_t secs = epoch_seconds - days * 86400;
    std::int64_t year;
    unsigned month, day;
    civil_from_days(days, year, month, day);
    const int hour = static_cast<int>(secs / 3600);
    const int minute = static_cast<int>((secs % 3600) / 60);
    const int second = static_cast<int>(secs % 60);
    char buf[36];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02dZ",
                  static_cast<long long>(year), month, day, hour, minute,
                  second);
    return buf;
}

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::vector<core::TimeSeries> read_long_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");

    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) {
        throw MalformedRow(1, "empty file; expected header TIME,UUID,VALUE");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "TIME,UUID,VALUE") {
        throw MalformedRow(1, "expected header TIME,UUID,VALUE, got '" + line + "'");
    }

    std::vector<std::string> channel_order;
    std::unordered_map<std::string, std::vector<Row>> rows_by_channel;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos
                                                : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos ||
            line.find(',', c2 + 1) != std::string::npos) {
            throw MalformedRow(line_no, "expected exactly 3 comma-separated fields");
        }
        const std::string_view time_field(line.data(), c1);
        const std::string uuid = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string_view value_field(line.data() + c2 + 1,
                                           line.size() - c2 - 1);

        if (uuid.empty()) throw MalformedRow(line_no, "empty UUID field");

        Row row{};
        row.line = line_no;
        try {
            row.time = parse_iso8601(time_field);
        } catch (const Error& e) {
            throw MalformedRow(line_no, e.what());
        }
        const auto vr = std::from_chars(value_field.data(),
                                        value_field.data() + value_field.size(),
                                        row.value);
        if (vr.ec != std::errc{} ||
            vr.ptr != value_field.data() + value_field.size() ||
            !std::isfinite(row.value)) {
            throw MalformedRow(line_no, "invalid VALUE field '" +
                                            std::string(value_field) + "'");
        }

        auto [it, inserted] = rows_by_channel.try_emplace(uuid);
        if (inserted) channel_order.push_back(uuid);
        it->second.push_back(row);
    }

    std::vector<core::TimeSeries> out;
    out.reserve(channel_order.size());
    for (const auto& uuid : channel_order) {
        auto& rows = rows_by_channel[uuid];
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.time < b.time; });
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].time == rows[i - 1].time) {
                throw DuplicateKey("duplicate reading for channel '" + uuid +
                                   "' at " + format_iso8601_utc(rows[i].time) +
                                   " (line " + std::to_string(rows[i].line) + ")");
            }
        }

        // Native spacing: the most frequent gap between consecutive
        // readings, ties toward the smaller gap.  A single reading gets
        // the hourly default since no gap is observable.
        std::int64_t step = 3600;
        if (rows.size() >= 2) {
            std::map<std::int64_t, std::size_t> gap_counts;
            for (std::size_t i = 1; i < rows.size(); ++i) {
                ++gap_counts[rows[i].time - rows[i - 1].time];
            }
            std::size_t best = 0;
            for (const auto& [gap, count] : gap_counts) {
                if (count > best) {
                    best = count;
                    step = gap;
                }
            }
        }

        const std::int64_t start = rows.front().time;
        for (const auto& r : rows) {
            if ((r.time - start) % step != 0) {
                throw MalformedRow(r.line, "timestamp " +
                                               format_iso8601_utc(r.time) +
                                               " is off the inferred " +
                                               std::to_string(step) +
                                               "s grid of channel '" + uuid + "'");
            }
        }
        const auto length = static_cast<std::size_t>(
            (rows.back().time - start) / step + 1);
        std::vector<std::optional<double>> values(length);
        for (const auto& r : rows) {
            values[static_cast<std::size_t>((r.time - start) / step)] = r.value;
        }
        out.emplace_back(uuid, start, step, std::move(values));
    }
    return out;
}

void write_long_csv(const std::string& path,
                    const std::vector<core::TimeSeries>& series) {
    std::ofstream outf(path, std::ios::trunc);
    if (!outf) throw Error("cannot open '" + path + "' for writing");

    outf << "TIME,UUID,VALUE\n";
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s.present(i)) continue;
            outf << format_iso8601_utc(s.timeAt(i)) << ',' << s.channelId()
                 << ',' << format_double(*s.at(i)) << '\n';
        }
    }
    if (!outf) throw Error("failed writing '" + path + "'");
}

}  // namespace fedcast::ingest
