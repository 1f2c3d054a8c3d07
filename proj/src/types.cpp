#include "agesig/types.hpp"

#include <algorithm>
#include <cstdio>

#include "agesig/textio.hpp"

namespace agesig {

Icd10Category::Icd10Category(std::string_view value) {
  if (value.size() != 3 || value[0] < 'A' || value[0] > 'Z' ||
      value[1] < '0' || value[1] > '9' || value[2] < '0' || value[2] > '9') {
    throw CodeFormatError(std::string(value));
  }
  value_ = {value[0], value[1], value[2]};
}

namespace {

bool valid_ymd(int y, int m, int d) {
  if (y < 1 || m < 1 || m > 12 || d < 1) return false;
  static constexpr int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int max_d = days[m - 1];
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) max_d = 29;
  return d <= max_d;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view iso) {
  iso = trim(iso);
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(iso.substr(0, 4), y) || !parse_int(iso.substr(5, 2), m) ||
      !parse_int(iso.substr(8, 2), d)) {
    return std::nullopt;
  }
  if (!valid_ymd(y, m, d)) return std::nullopt;
  return Date{y, m, d};
}

std::string Date::str() const {
  char buf[11];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

Cohort::Cohort(Icd10Category code, std::vector<CohortMember> members)
    : code_(code), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end(),
            [](const CohortMember& a, const CohortMember& b) {
              return a.patient_id < b.patient_id;
            });
  for (std::size_t i = 1; i < members_.size(); ++i) {
    if (members_[i].patient_id == members_[i - 1].patient_id) {
      throw std::invalid_argument("cohort " + code_.str() +
                                  ": duplicate patient id " + members_[i].patient_id);
    }
  }
}

std::vector<int> Cohort::ages() const {
  std::vector<int> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.age);
  return out;
}

}  // namespace agesig
