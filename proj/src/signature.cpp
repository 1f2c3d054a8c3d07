#include "agesig/signature.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "agesig/textio.hpp"

namespace agesig {

AgeSignature build_signature(const Cohort& cohort) {
  if (cohort.patient_count() < 1) {
    throw EmptyCohortError("cohort " + cohort.code().str() + " has no members");
  }
  std::array<int, kAgeBins> counts{};
  for (const auto& m : cohort.members()) {
    ++counts[std::min(m.age, kAgeBins - 1)];
  }
  AgeSignature sig{cohort.code(), {}, cohort.patient_count()};
  double total = static_cast<double>(cohort.patient_count());
  for (int i = 0; i < kAgeBins; ++i) {
    sig.mass[i] = static_cast<double>(counts[i]) / total;
  }
  return sig;
}

double squared_signature_distance(const AgeSignature& a, const AgeSignature& b) {
  double sq = 0.0;
  for (int i = 0; i < kAgeBins; ++i) {
    double d = a.mass[i] - b.mass[i];
    sq += d * d;
  }
  return sq;
}

double signature_distance(const AgeSignature& a, const AgeSignature& b) {
  return std::sqrt(squared_signature_distance(a, b));
}

void write_signatures_csv(std::ostream& out, std::span<const AgeSignature> sigs) {
  out << "code";
  for (int i = 0; i < kAgeBins; ++i) out << ",mass_" << i;
  out << ",support\n";
  for (const auto& sig : sigs) {
    out << sig.code.str();
    for (int i = 0; i < kAgeBins; ++i) out << ',' << format_double(sig.mass[i]);
    out << ',' << sig.support << '\n';
  }
}

std::vector<AgeSignature> read_signatures_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("signatures file is empty");
  std::vector<AgeSignature> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line, ',');
    if (fields.size() != static_cast<std::size_t>(kAgeBins) + 2) {
      throw IoError("signatures line " + std::to_string(line_no) +
                    ": expected " + std::to_string(kAgeBins + 2) + " fields");
    }
    AgeSignature sig{Icd10Category(trim(fields[0])), {}, 0};
    for (int i = 0; i < kAgeBins; ++i) {
      if (!parse_double(fields[1 + i], sig.mass[i])) {
        throw IoError("signatures line " + std::to_string(line_no) + ": bad mass value");
      }
    }
    if (!parse_int(fields[kAgeBins + 1], sig.support) || sig.support < 1) {
      throw IoError("signatures line " + std::to_string(line_no) + ": bad support");
    }
    out.push_back(std::move(sig));
  }
  return out;
}

}  // namespace agesig
