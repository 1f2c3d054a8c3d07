#include "agesig/report.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "agesig/svg.hpp"
#include "agesig/textio.hpp"

namespace agesig {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::vector<std::vector<CodeCount>> top_codes(std::span<const CodeCount> counts,
                                              std::span<const int> labels,
                                              int k, int top_n) {
  if (counts.size() != labels.size()) {
    throw std::invalid_argument("labels must cover all codes");
  }
  if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");

  std::vector<std::vector<CodeCount>> per_cluster(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    per_cluster[static_cast<std::size_t>(labels[i])].push_back(counts[i]);
  }
  for (auto& cluster : per_cluster) {
    std::sort(cluster.begin(), cluster.end(),
              [](const CodeCount& a, const CodeCount& b) {
                if (a.patients != b.patients) return a.patients > b.patients;
                return a.code < b.code;
              });
    if (cluster.size() > static_cast<std::size_t>(top_n)) {
      cluster.erase(cluster.begin() + top_n, cluster.end());
    }
  }
  return per_cluster;
}

int classify_exit(const std::exception& error) {
  if (dynamic_cast<const DegenerateElbowError*>(&error) ||
      dynamic_cast<const ZeroBandwidthError*>(&error) ||
      dynamic_cast<const EmptyCohortError*>(&error)) {
    return 3;
  }
  if (dynamic_cast<const Error*>(&error)) return 2;  // io/schema/parse/empty
  if (dynamic_cast<const std::invalid_argument*>(&error)) return 1;
  return 3;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Prefixes the failing stage onto any error escaping it, preserving the
// error type so exit-code mapping still sees it.
template <typename F>
auto stage(const char* name, F&& f) {
  auto prefixed = [name](const std::exception& e) {
    return std::string(name) + ": " + e.what();
  };
  try {
    return std::forward<F>(f)();
  } catch (const DegenerateElbowError& e) {
    throw DegenerateElbowError(prefixed(e));
  } catch (const ZeroBandwidthError& e) {
    throw ZeroBandwidthError(prefixed(e));
  } catch (const EmptyCohortError& e) {
    throw EmptyCohortError(prefixed(e));
  } catch (const EmptyInputError& e) {
    throw EmptyInputError(prefixed(e));
  } catch (const SchemaError& e) {
    throw SchemaError(prefixed(e));
  } catch (const IoError& e) {
    throw IoError(prefixed(e));
  } catch (const std::exception& e) {
    throw Error(prefixed(e));
  }
}

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir_ / name).string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + (dir_ / name).string());
    files_.push_back({name, bytes.size(), sha256_hex(bytes)});
  }

  nlohmann::json manifest_files() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : files_) {
      arr.push_back({{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.digest}});
    }
    return arr;
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct Entry {
    std::string name;
    std::size_t bytes;
    std::string digest;
  };
  std::filesystem::path dir_;
  std::vector<Entry> files_;
};

nlohmann::json schema_to_json(const ParseSchema& schema) {
  return {{"format", schema.format == InputFormat::kDelimited ? "delimited" : "jsonl"},
          {"delimiter", std::string(1, schema.delimiter)},
          {"patient_column", schema.patient_column},
          {"code_column", schema.code_column},
          {"age_column", schema.age_column},
          {"birthdate_column", schema.birthdate_column},
          {"visit_date_column", schema.visit_date_column}};
}

nlohmann::json config_to_json(const PipelineConfig& config) {
  nlohmann::json j;
  j["input_path"] = config.input_path;
  j["schema"] = schema_to_json(config.schema);
  j["min_patients"] = config.min_patients;
  j["k_max"] = config.k_max;
  if (config.k_override) j["k_override"] = *config.k_override;
  if (config.kde_bandwidth) j["kde_bandwidth"] = *config.kde_bandwidth;
  j["emit_kde"] = config.emit_kde;
  j["emit_svg"] = config.emit_svg;
  j["top_n"] = config.top_n;
  j["output_dir"] = config.output_dir;
  if (config.synth_spec) {
    j["synth_spec"] = nlohmann::json::parse(population_spec_to_json(*config.synth_spec));
  }
  return j;
}

SvgChart elbow_chart(const ElbowCurve& curve, int k_used) {
  SvgChart chart;
  chart.title = "within-cluster dispersion";
  chart.x_label = "k";
  chart.y_label = "W(k)";
  SvgSeries series;
  for (std::size_t i = 0; i < curve.k_values.size(); ++i) {
    series.x.push_back(curve.k_values[i]);
    series.y.push_back(curve.dispersion[i]);
  }
  series.color = "#1f77b4";
  series.width = 1.5;
  chart.series.push_back(std::move(series));
  for (std::size_t i = 0; i < curve.k_values.size(); ++i) {
    if (curve.k_values[i] == k_used) {
      chart.markers.push_back({static_cast<double>(k_used), curve.dispersion[i]});
    }
  }
  return chart;
}

}  // namespace

ClusterReport run_pipeline(const PipelineConfig& config) {
  if (config.k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (config.k_override && (*config.k_override < 1 || *config.k_override > config.k_max)) {
    throw std::invalid_argument("k override must be in [1, k_max]");
  }
  if (!config.synth_spec && config.input_path.empty()) {
    throw std::invalid_argument("no input: give a record file or a synthetic spec");
  }

  auto t_start = Clock::now();
  nlohmann::json timings;
  OutputSet outputs{config.output_dir};

  // ingest
  auto t_stage = Clock::now();
  ParseResult parsed = stage("ingest", [&] {
    if (config.synth_spec) {
      GeneratedPopulation population = generate_population(*config.synth_spec);
      ParseResult r;
      r.records = std::move(population.records);
      r.rows_total = r.records.size();
      return r;
    }
    std::ifstream in(config.input_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + config.input_path);
    return parse_records(in, config.schema);
  });
  if (parsed.records.empty()) throw Error("ingest: no records");

  CohortBuild cohorts = stage("ingest", [&] {
    return build_cohorts(parsed.records, config.min_patients);
  });
  if (cohorts.cohorts.empty()) {
    throw Error("ingest: no cohorts reach min_patients=" +
                std::to_string(config.min_patients));
  }
  timings["ingest_ms"] = ms_since(t_stage);

  // signatures
  t_stage = Clock::now();
  std::vector<AgeSignature> signatures = stage("signature", [&] {
    std::vector<AgeSignature> sigs;
    sigs.reserve(cohorts.cohorts.size());
    for (const auto& [code, cohort] : cohorts.cohorts) {
      sigs.push_back(build_signature(cohort));
    }
    return sigs;
  });
  timings["signature_ms"] = ms_since(t_stage);

  // clustering
  t_stage = Clock::now();
  Dendrogram dendrogram = stage("hac", [&] { return ward_cluster(signatures); });
  timings["hac_ms"] = ms_since(t_stage);

  // selection
  t_stage = Clock::now();
  int n = dendrogram.n_leaves;
  if (config.k_override && *config.k_override > n) {
    throw std::invalid_argument("k override " + std::to_string(*config.k_override) +
                                " exceeds the " + std::to_string(n) +
                                " clustered codes");
  }
  int k_max_eff = std::min(config.k_max, n);
  ElbowCurve curve = stage("selection", [&] {
    return dispersion_curve(signatures, dendrogram, k_max_eff);
  });
  int k_used = 0;
  std::optional<int> selected;
  if (config.k_override) {
    k_used = *config.k_override;
  } else {
    k_used = stage("selection", [&] { return select_k(curve); });
    selected = k_used;
  }
  curve.selected_k = k_used;
  std::vector<int> labels = stage("selection", [&] { return cut_tree(dendrogram, k_used); });
  timings["selection_ms"] = ms_since(t_stage);

  // summaries
  t_stage = Clock::now();
  ClusterReport report;
  report.k = k_used;
  report.selected_k = selected;
  std::vector<CodeCount> counts;
  counts.reserve(signatures.size());
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    report.labels.emplace_back(signatures[i].code, labels[i]);
    counts.push_back({signatures[i].code, signatures[i].support});
  }

  std::vector<std::vector<EcdfVector>> member_ecdfs(static_cast<std::size_t>(k_used));
  std::vector<std::vector<std::size_t>> member_idx(static_cast<std::size_t>(k_used));
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    auto c = static_cast<std::size_t>(labels[i]);
    member_ecdfs[c].push_back(ecdf(signatures[i]));
    member_idx[c].push_back(i);
  }
  auto tops = top_codes(counts, labels, k_used, config.top_n);
  for (int c = 0; c < k_used; ++c) {
    auto uc = static_cast<std::size_t>(c);
    ClusterSummary summary;
    summary.member_count = static_cast<int>(member_idx[uc].size());
    for (std::size_t i : member_idx[uc]) summary.total_patients += signatures[i].support;
    summary.mean_ecdf = cluster_mean_ecdf(member_ecdfs[uc]);
    for (const auto& cc : tops[uc]) summary.top.emplace_back(cc.code, cc.patients);
    report.clusters.push_back(std::move(summary));
  }
  timings["summaries_ms"] = ms_since(t_stage);

  // file emission
  t_stage = Clock::now();
  {
    std::ostringstream s;
    s << "code,cluster\n";
    for (const auto& [code, label] : report.labels) {
      s << code.str() << ',' << label << '\n';
    }
    outputs.write("labels.csv", s.str());
  }
  {
    std::ostringstream s;
    write_dendrogram(s, dendrogram);
    outputs.write("dendrogram.txt", s.str());
    outputs.write("dendrogram.newick", to_newick(dendrogram) + "\n");
  }
  {
    std::ostringstream s;
    write_signatures_csv(s, signatures);
    outputs.write("signatures.csv", s.str());
  }
  {
    std::ostringstream s;
    write_elbow_csv(s, curve);
    outputs.write("elbow.csv", s.str());
  }
  {
    std::ostringstream s;
    write_drop_report(s, cohorts.dropped);
    outputs.write("dropped.csv", s.str());
  }
  for (int c = 0; c < k_used; ++c) {
    auto uc = static_cast<std::size_t>(c);
    std::ostringstream s;
    s << "age,mean";
    for (std::size_t i : member_idx[uc]) s << ',' << signatures[i].code.str();
    s << '\n';
    for (int a = 0; a < kAgeBins; ++a) {
      s << a << ',' << format_double(report.clusters[uc].mean_ecdf.values[a]);
      for (const auto& member : member_ecdfs[uc]) {
        s << ',' << format_double(member.values[a]);
      }
      s << '\n';
    }
    outputs.write("ecdf_cluster_" + std::to_string(c) + ".csv", s.str());
  }
  {
    std::ostringstream s;
    s << "cluster,rank,code,patients\n";
    for (int c = 0; c < k_used; ++c) {
      const auto& top = report.clusters[static_cast<std::size_t>(c)].top;
      for (std::size_t r = 0; r < top.size(); ++r) {
        s << c << ',' << (r + 1) << ',' << top[r].first.str() << ','
          << top[r].second << '\n';
      }
    }
    outputs.write("top_codes.csv", s.str());
  }

  std::vector<int> kde_skipped;
  if (config.emit_kde) {
    for (int c = 0; c < k_used; ++c) {
      auto uc = static_cast<std::size_t>(c);
      std::vector<int> ages;
      for (std::size_t i : member_idx[uc]) {
        const Cohort& cohort = cohorts.cohorts.at(signatures[i].code);
        auto cohort_ages = cohort.ages();
        ages.insert(ages.end(), cohort_ages.begin(), cohort_ages.end());
      }
      try {
        DensityCurve curve_c = stage("density", [&] {
          return kde(ages, 0.5, config.kde_bandwidth);
        });
        std::ostringstream s;
        write_curve_csv(s, curve_c);
        outputs.write("kde_cluster_" + std::to_string(c) + ".csv", s.str());
      } catch (const Error&) {
        // Degenerate spread in one cluster only loses that overlay.
        kde_skipped.push_back(c);
      }
    }
  }

  if (config.emit_svg) {
    outputs.write("elbow.svg", render_chart(elbow_chart(curve, k_used)));
    std::vector<SvgChart> panels;
    for (int c = 0; c < k_used; ++c) {
      auto uc = static_cast<std::size_t>(c);
      SvgChart panel;
      panel.title = "cluster " + std::to_string(c) + " (" +
                    std::to_string(report.clusters[uc].member_count) + " codes)";
      panel.x_label = "age";
      panel.y_label = "ECDF";
      for (const auto& member : member_ecdfs[uc]) {
        SvgSeries s;
        for (int a = 0; a < kAgeBins; ++a) {
          s.x.push_back(a);
          s.y.push_back(member.values[a]);
        }
        s.color = "#bbbbbb";
        s.width = 0.8;
        panel.series.push_back(std::move(s));
      }
      SvgSeries mean_series;
      for (int a = 0; a < kAgeBins; ++a) {
        mean_series.x.push_back(a);
        mean_series.y.push_back(report.clusters[uc].mean_ecdf.values[a]);
      }
      mean_series.color = "#d62728";
      mean_series.width = 2.0;
      panel.series.push_back(std::move(mean_series));
      panels.push_back(std::move(panel));
    }
    outputs.write("ecdf_panels.svg", render_panel_grid(panels));
  }
  timings["emit_ms"] = ms_since(t_stage);
  timings["total_ms"] = ms_since(t_start);

  nlohmann::json manifest;
  manifest["config"] = config_to_json(config);
  manifest["counts"] = {{"rows", parsed.rows_total},
                        {"records", parsed.records.size()},
                        {"row_errors", parsed.errors.size()},
                        {"cohorts", cohorts.cohorts.size()},
                        {"cohorts_dropped", cohorts.dropped.size()},
                        {"codes_clustered", n}};
  if (config.synth_spec) manifest["rng"] = kRngAlgorithm;
  if (selected) manifest["selected_k"] = *selected;
  manifest["k_used"] = k_used;
  if (!kde_skipped.empty()) manifest["kde_skipped"] = kde_skipped;
  manifest["timings_ms"] = timings;
  manifest["files"] = outputs.manifest_files();

  std::ofstream mf(outputs.dir() / "manifest.json", std::ios::binary);
  if (!mf) throw IoError("cannot write manifest.json");
  mf << manifest.dump(2) << '\n';

  return report;
}

}  // namespace agesig
