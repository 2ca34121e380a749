#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fedcast/time_series.hpp"

namespace fedcast::ingest {

/**
 * @brief Reads a long-format sensor dump.
 *
 * Expected layout: a `TIME,UUID,VALUE` header followed by one reading
 * per row (ISO-8601 timestamp, channel id, decimal value).  Rows may
 * arrive in any order; one TimeSeries per distinct UUID comes back, in
 * first-appearance order.  Each channel's spacing is inferred as the
 * most frequent gap between its sorted timestamps (ties broken towards
 * the smaller gap); grid slots without a row are missing.
 *
 * Throws MalformedRow (with the 1-based line number) for an unparsable
 * row or a timestamp off the inferred grid, and DuplicateKey when two
 * rows share (TIME, UUID).
 */
std::vector<core::TimeSeries> read_long_csv(const std::string& path);

/// Writes series back in the same long format, one row per present value,
/// channels in the given order, each channel's rows in time order.
/// Timestamps are rendered in UTC; values round-trip exactly.
void write_long_csv(const std::string& path,
                    const std::vector<core::TimeSeries>& series);

/**
 * @brief Parses "YYYY-MM-DDTHH:MM:SS" with a "Z" or "+HH:MM"/"-HH:MM"
 * suffix into epoch seconds.  A space may stand in for the 'T'.
 * Throws Error on any other shape.
 */
std::int64_t parse_iso8601(std::string_view text);

/// Renders epoch seconds as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601_utc(std::int64_t epoch_seconds);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace fedcast::ingest
