#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agesig/errors.hpp"

namespace agesig {

// Ages are binned into integer years 0..99; anything above is clamped into
// the last bin when signatures are built.
inline constexpr int kAgeBins = 100;

// 3-character ICD-10 category: one uppercase letter followed by two digits,
// e.g. "J20". Construction validates the exact pattern; use normalize_code()
// for raw inputs that still need trimming/uppercasing/truncation.
class Icd10Category {
 public:
  explicit Icd10Category(std::string_view value);

  std::string str() const { return std::string(value_.data(), value_.size()); }
  char letter() const { return value_[0]; }

  friend auto operator<=>(const Icd10Category&, const Icd10Category&) = default;

 private:
  std::array<char, 3> value_;
};

// Minimal calendar date; enough for claims exports (ISO "YYYY-MM-DD").
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  static std::optional<Date> parse(std::string_view iso);
  std::string str() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

// One claim row after validation.
struct VisitRecord {
  std::string patient_id;
  int age = 0;  // years, >= 0
  Icd10Category code;
  std::optional<Date> visit_date;  // informational
};

struct CohortMember {
  std::string patient_id;
  int age = 0;
};

// Distinct patients carrying one ICD-10 category, each counted once at
// earliest-visit age. Members are kept sorted by patient id.
class Cohort {
 public:
  Cohort(Icd10Category code, std::vector<CohortMember> members);

  const Icd10Category& code() const { return code_; }
  const std::vector<CohortMember>& members() const { return members_; }
  int patient_count() const { return static_cast<int>(members_.size()); }
  std::vector<int> ages() const;

 private:
  Icd10Category code_;
  std::vector<CohortMember> members_;
};

}  // namespace agesig
