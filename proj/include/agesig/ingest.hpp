#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "agesig/types.hpp"

namespace agesig {

enum class InputFormat { kDelimited, kJsonLines };

// Column mapping for raw visit-record files. Age comes either from a direct
// age column or is derived from birthdate + visit date (completed years).
struct ParseSchema {
  InputFormat format = InputFormat::kDelimited;
  char delimiter = ',';
  std::string patient_column = "patient_id";
  std::string code_column = "code";
  std::string age_column = "age";  // set empty to derive from the date columns
  std::string birthdate_column;
  std::string visit_date_column = "visit_date";

  bool derives_age() const { return age_column.empty(); }
};

struct RowError {
  std::size_t line = 0;  // 1-based physical line number
  std::string reason;
};

struct ParseResult {
  std::vector<VisitRecord> records;
  std::vector<RowError> errors;
  std::size_t rows_total = 0;  // data rows seen; records + errors == rows_total
};

// Uppercases, strips a dot suffix ("M54.5" -> "M54") and validates the
// 3-character category pattern. Throws CodeFormatError on violation.
Icd10Category normalize_code(std::string_view raw);

// Parses a delimited-text stream (header row required) or line-delimited
// JSON. Malformed rows become RowError entries; parsing never stops early.
// Throws IoError for an unreadable stream and SchemaError when a required
// column is missing from a delimited header.
ParseResult parse_records(std::istream& input, const ParseSchema& schema);

struct DroppedCohort {
  Icd10Category code;
  int patient_count = 0;
  std::string reason;
};

struct CohortBuild {
  std::map<Icd10Category, Cohort> cohorts;
  std::vector<DroppedCohort> dropped;
};

// Aggregates records into one cohort per code. A patient is counted once per
// code at the earliest-visit age (minimum age, which makes parallel merges
// order-independent). Cohorts below min_patients are dropped and reported.
CohortBuild build_cohorts(std::span<const VisitRecord> records, int min_patients);

// Drop report: "code,patient_count,reason".
void write_drop_report(std::ostream& out, std::span<const DroppedCohort> dropped);

}  // namespace agesig
