#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qsdlim/qsd.hpp"

namespace qsdlim {

/// "%.17g": strtod reads back the identical double. Non-finite values
/// print as "nan", "inf", "-inf".
std::string format_double(double x);

/// Strict parse of a full field; throws DomainError on trailing junk.
double parse_double(std::string_view field);

std::vector<std::string> split_csv_line(std::string_view line);

/// Columns t,x,sigma2,return. The first row has an empty return field.
void write_path_csv(std::ostream& out, const SamplePath& path);
SamplePath read_path_csv(std::istream& in);

/// Reads the "return" column of a path CSV, or a single-column file of
/// returns (with or without a header).
std::vector<double> read_returns_csv(std::istream& in);

/// Flat key-value record written as a two-line CSV (header, values).
using Record = std::vector<std::pair<std::string, std::string>>;
void write_record_csv(std::ostream& out, const std::vector<Record>& rows);
std::vector<Record> read_record_csv(std::istream& in);

}  // namespace qsdlim
