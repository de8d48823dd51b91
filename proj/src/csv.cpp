#include "qsdlim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "qsdlim/errors.hpp"

namespace qsdlim {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(std::string_view field) {
  const std::string text(field);
  if (text.empty()) throw DomainError("empty numeric field");
  char* end = nullptr;
  const double x = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) throw DomainError("bad numeric field '" + text + "'");
  return x;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

void write_path_csv(std::ostream& out, const SamplePath& path) {
  if (path.x.size() != path.times.size() || path.sigma2.size() != path.x.size() ||
      path.returns.size() + 1 != path.x.size())
    throw DomainError("inconsistent SamplePath lengths");
  out << "t,x,sigma2,return\n";
  for (std::size_t k = 0; k < path.x.size(); ++k) {
    out << format_double(path.times[k]) << ',' << format_double(path.x[k]) << ','
        << format_double(path.sigma2[k]) << ',';
    if (k > 0) out << format_double(path.returns[k - 1]);
    out << '\n';
  }
}

SamplePath read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty path CSV");
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"t", "x", "sigma2", "return"})
    throw DomainError("path CSV header must be t,x,sigma2,return");
  SamplePath path;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw DomainError("path CSV row needs 4 fields");
    path.times.push_back(parse_double(fields[0]));
    path.x.push_back(parse_double(fields[1]));
    path.sigma2.push_back(parse_double(fields[2]));
    if (path.x.size() == 1) {
      if (!fields[3].empty()) throw DomainError("first path row must have an empty return");
    } else {
      path.returns.push_back(parse_double(fields[3]));
    }
  }
  if (path.x.empty()) throw DomainError("path CSV has no rows");
  return path;
}

std::vector<double> read_returns_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty returns file");
  auto header = split_csv_line(line);
  std::vector<double> out;
  std::size_t column = 0;
  bool has_header = true;
  if (header.size() == 1) {
    char* end = nullptr;
    std::strtod(header[0].c_str(), &end);
    has_header = header[0].empty() || end != header[0].c_str() + header[0].size();
    if (!has_header) out.push_back(parse_double(header[0]));
  } else {
    bool found = false;
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == "return" || header[i] == "y") {
        column = i;
        found = true;
      }
    if (!found) throw DomainError("returns CSV needs a 'return' column");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() <= column) throw DomainError("short row in returns CSV");
    if (fields[column].empty()) continue;  // first row of a path file
    out.push_back(parse_double(fields[column]));
  }
  return out;
}

void write_record_csv(std::ostream& out, const std::vector<Record>& rows) {
  if (rows.empty()) return;
  for (std::size_t i = 0; i < rows.front().size(); ++i)
    out << (i ? "," : "") << rows.front()[i].first;
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != rows.front().size()) throw DomainError("ragged record rows");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i].second;
    out << '\n';
  }
}

std::vector<Record> read_record_csv(std::istream& in) {
  std::string line;
  std::vector<Record> rows;
  if (!std::getline(in, line)) return rows;
  const auto header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw DomainError("record row width mismatch");
    Record row;
    for (std::size_t i = 0; i < header.size(); ++i) row.emplace_back(header[i], fields[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qsdlim
