#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dackrr/experiments.hpp"

namespace dackrr {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Header `N,m,lambda,metric,mean,stderr,trials`, one line per row, LF endings.
std::string rate_csv(const RateResult& result);
std::vector<RateRow> parse_rate_csv(const std::string& text);

/// Columns metric,m_rule,slope,stderr,intercept,points.
std::string slopes_csv(const RateResult& result);

/// Log-log scatter of mean vs N per (metric, m) series, with each fitted line.
std::string rate_svg(const RateResult& result);

enum class EmitFormat { Csv, Svg };

/// Writes the result; throws IoError when the path cannot be written.
void emit(const RateResult& result, EmitFormat format, const std::filesystem::path& path);
std::vector<RateRow> read_rate_csv(const std::filesystem::path& path);

/// Writes `text` verbatim (binary mode, so LF stays LF).
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dackrr
