#include "tndipw/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace tndipw::csv {

namespace {

struct ParsedRow {
  IndividualRecord record;
  bool y1_present = true;
};

std::uint8_t parse_bit(std::string_view field, std::size_t line, std::string_view column) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  throw ConfigError(fmt::format("line {}: column {} must be 0 or 1, got '{}'", line, column, field));
}

void check_header(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("empty CSV input");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != kRecordHeader) {
    throw ConfigError(fmt::format("unexpected CSV header '{}', expected '{}'", header, kRecordHeader));
  }
}

ParsedRow parse_row(const std::string& raw, std::size_t line) {
  std::string_view text(raw);
  if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
  std::array<std::string_view, kVariableCount> fields;
  std::size_t count = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      if (count == kVariableCount) throw ConfigError(fmt::format("line {}: too many fields", line));
      fields[count++] = text.substr(start, i - start);
      start = i + 1;
    }
  }
  if (count != kVariableCount) throw ConfigError(fmt::format("line {}: expected 8 fields, got {}", line, count));

  ParsedRow row;
  auto& r = row.record;
  r.c = parse_bit(fields[0], line, "c");
  r.x = parse_bit(fields[1], line, "x");
  r.u = parse_bit(fields[2], line, "u");
  if (fields[3].empty()) {
    row.y1_present = false;
  } else {
    r.y1 = parse_bit(fields[3], line, "y1");
  }
  r.y_other = parse_bit(fields[4], line, "y_other");
  r.w = parse_bit(fields[5], line, "w");
  r.h = parse_bit(fields[6], line, "h");
  r.t = parse_bit(fields[7], line, "t");
  return row;
}

template <class Fn>
void for_each_row(std::istream& in, Fn&& fn) {
  check_header(in);
  std::string raw;
  std::size_t line = 1;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.empty() || raw == "\r") continue;
    fn(parse_row(raw, line), line);
  }
}

}  // namespace

void write_records(std::ostream& out, const std::vector<IndividualRecord>& records) {
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << int(r.c) << ',' << int(r.x) << ',' << int(r.u) << ',' << int(r.y1) << ',' << int(r.y_other) << ','
        << int(r.w) << ',' << int(r.h) << ',' << int(r.t) << '\n';
  }
}

void write_sample(std::ostream& out, const StudySample& sample) {
  out << kRecordHeader << '\n';
  for (const auto& r : sample.records) {
    out << r.value(Variable::c) << ',' << r.value(Variable::x) << ',' << r.value(Variable::u) << ',';
    if (r.y1_observed()) out << r.value(Variable::y1);
    out << ',' << r.value(Variable::y_other) << ',' << r.value(Variable::w) << ',' << r.value(Variable::h) << ','
        << r.value(Variable::t) << '\n';
  }
}

std::vector<IndividualRecord> read_records(std::istream& in) {
  std::vector<IndividualRecord> records;
  for_each_row(in, [&](const ParsedRow& row, std::size_t line) {
    if (!row.y1_present) throw ConfigError(fmt::format("line {}: population records need y1", line));
    records.push_back(row.record);
  });
  return records;
}

StudySample read_sample(std::istream& in, double q0_assumed) {
  std::vector<ObservedRecord> records;
  for_each_row(in, [&](const ParsedRow& row, std::size_t line) {
    if (row.record.t == 1 && !row.y1_present) {
      throw ConfigError(fmt::format("line {}: tested record without y1", line));
    }
    records.emplace_back(row.record, records.size());
  });
  const bool controls = std::any_of(records.begin(), records.end(), [](const auto& r) { return !r.tested(); });
  const bool symptomatic = std::all_of(records.begin(), records.end(),
                                       [](const auto& r) { return !r.tested() || r.value(Variable::w) == 1; });
  DesignTag tag = controls ? (symptomatic ? DesignTag::proper_tnd_plus_controls : DesignTag::all_tested_plus_controls)
                           : (symptomatic ? DesignTag::proper_tnd : DesignTag::tested_only);
  return make_sample(std::move(records), tag, q0_assumed);
}

void save_records(const std::filesystem::path& path, const std::vector<IndividualRecord>& records) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  write_records(out, records);
}

std::vector<IndividualRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_records(in);
}

void save_sample(const std::filesystem::path& path, const StudySample& sample) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  write_sample(out, sample);
}

StudySample load_sample(const std::filesystem::path& path, double q0_assumed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_sample(in, q0_assumed);
}

}  // namespace tndipw::csv
