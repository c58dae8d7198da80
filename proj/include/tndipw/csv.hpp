#pragma once

#include "tndipw/records.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace tndipw::csv {

/// Header shared by population and sample files.
inline constexpr const char* kRecordHeader = "c,x,u,y1,y_other,w,h,t";

void write_records(std::ostream& out, const std::vector<IndividualRecord>& records);
/// Masked y1 is written as an empty field.
void write_sample(std::ostream& out, const StudySample& sample);

/// Reads complete records; an empty y1 field is rejected.
std::vector<IndividualRecord> read_records(std::istream& in);
/// Reads a sample file; records keep their row number as source index and
/// strata are recounted. The design tag is inferred from the records.
StudySample read_sample(std::istream& in, double q0_assumed);

void save_records(const std::filesystem::path& path, const std::vector<IndividualRecord>& records);
std::vector<IndividualRecord> load_records(const std::filesystem::path& path);
void save_sample(const std::filesystem::path& path, const StudySample& sample);
StudySample load_sample(const std::filesystem::path& path, double q0_assumed);

}  // namespace tndipw::csv
