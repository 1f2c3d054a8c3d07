// agesig: cluster ICD-10 categories by the age distribution of their patients.
//
// Subcommands:
//   run      full pipeline: records (or synthetic spec) -> cluster report
//   synth    generate a synthetic population to files
//   cluster  signatures csv -> dendrogram / labels / elbow
//   plot     curve csv -> svg
//
// Exit codes: 0 success, 1 usage error, 2 input/parse failure,
// 3 numerical/degenerate failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "agesig/report.hpp"
#include "agesig/svg.hpp"
#include "agesig/textio.hpp"

namespace {

struct SchemaFlags {
  std::string format = "delimited";
  std::string delimiter = ",";
  std::string patient_col = "patient_id";
  std::string code_col = "code";
  std::string age_col = "age";
  std::string birthdate_col;
  std::string date_col = "visit_date";

  void attach(CLI::App* cmd) {
    cmd->add_option("--format", format, "Input format: delimited or jsonl")
        ->check(CLI::IsMember({"delimited", "jsonl"}));
    cmd->add_option("--delimiter", delimiter, "Field delimiter (default ,)");
    cmd->add_option("--patient-col", patient_col, "Patient id column");
    cmd->add_option("--code-col", code_col, "ICD-10 code column");
    cmd->add_option("--age-col", age_col,
                    "Age column; pass an empty string to derive age from dates");
    cmd->add_option("--birthdate-col", birthdate_col,
                    "Birthdate column (with --date-col, replaces --age-col)");
    cmd->add_option("--date-col", date_col, "Visit date column");
  }

  agesig::ParseSchema to_schema() const {
    agesig::ParseSchema schema;
    schema.format = format == "jsonl" ? agesig::InputFormat::kJsonLines
                                      : agesig::InputFormat::kDelimited;
    if (delimiter.size() != 1) {
      throw CLI::ValidationError("--delimiter", "must be a single character");
    }
    schema.delimiter = delimiter[0];
    schema.patient_column = patient_col;
    schema.code_column = code_col;
    schema.age_column = birthdate_col.empty() ? age_col : "";
    schema.birthdate_column = birthdate_col;
    schema.visit_date_column = date_col;
    return schema;
  }
};

agesig::PopulationSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw agesig::IoError("cannot open spec " + path);
  return agesig::population_spec_from_json(in);
}

int cmd_run(const agesig::PipelineConfig& config) {
  agesig::ClusterReport report = agesig::run_pipeline(config);
  std::cout << "clustered " << report.labels.size() << " codes into " << report.k
            << " clusters";
  if (report.selected_k) std::cout << " (elbow-selected k=" << *report.selected_k << ")";
  std::cout << "\noutputs in " << config.output_dir << std::endl;
  return 0;
}

int cmd_synth(const agesig::PopulationSpec& spec, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  agesig::GeneratedPopulation population = agesig::generate_population(spec);

  auto write = [&](const std::string& name, const std::string& bytes) {
    std::ofstream out(std::filesystem::path(out_dir) / name, std::ios::binary);
    if (!out) throw agesig::IoError("cannot write " + name);
    out << bytes;
  };
  {
    std::ostringstream s;
    agesig::write_records_csv(s, population.records);
    write("records.csv", s.str());
  }
  {
    std::ostringstream s;
    agesig::write_truth_csv(s, population.truth);
    write("truth.csv", s.str());
  }
  write("synth_meta.json", agesig::population_spec_to_json(spec) + "\n");

  std::cout << "wrote " << population.records.size() << " records for "
            << population.truth.cluster_of.size() << " codes to " << out_dir
            << std::endl;
  return 0;
}

int cmd_cluster(const std::string& signatures_path, const std::string& out_dir,
                int k_max, std::optional<int> k_override) {
  std::ifstream in(signatures_path);
  if (!in) throw agesig::IoError("cannot open " + signatures_path);
  std::vector<agesig::AgeSignature> signatures = agesig::read_signatures_csv(in);
  if (signatures.empty()) throw agesig::Error("cluster: signatures file has no rows");

  agesig::Dendrogram dendrogram = agesig::ward_cluster(signatures);
  int n = dendrogram.n_leaves;
  if (k_override && *k_override > n) {
    throw CLI::ValidationError("--k", "exceeds number of signatures");
  }
  agesig::ElbowCurve curve =
      agesig::dispersion_curve(signatures, dendrogram, std::min(k_max, n));
  int k_used = k_override ? *k_override : agesig::select_k(curve);
  curve.selected_k = k_used;
  std::vector<int> labels = agesig::cut_tree(dendrogram, k_used);

  std::filesystem::create_directories(out_dir);
  auto path = [&](const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  {
    std::ofstream out(path("dendrogram.txt"), std::ios::binary);
    agesig::write_dendrogram(out, dendrogram);
  }
  {
    std::ofstream out(path("dendrogram.newick"), std::ios::binary);
    out << agesig::to_newick(dendrogram) << '\n';
  }
  {
    std::ofstream out(path("elbow.csv"), std::ios::binary);
    agesig::write_elbow_csv(out, curve);
  }
  {
    std::ofstream out(path("labels.csv"), std::ios::binary);
    out << "code,cluster\n";
    for (std::size_t i = 0; i < signatures.size(); ++i) {
      out << signatures[i].code.str() << ',' << labels[i] << '\n';
    }
  }
  std::cout << "clustered " << n << " signatures into " << k_used
            << " clusters; outputs in " << out_dir << std::endl;
  return 0;
}

int cmd_plot(const std::string& input, const std::string& output,
             const std::string& kind) {
  std::ifstream in(input);
  if (!in) throw agesig::IoError("cannot open " + input);

  agesig::SvgChart chart;
  chart.title = std::filesystem::path(input).filename().string();
  std::string header;
  if (!std::getline(in, header)) throw agesig::IoError("empty curve file");
  auto columns = agesig::split_fields(header, ',');
  if (columns.size() < 2) throw agesig::Error("plot: need at least two columns");

  std::vector<agesig::SvgSeries> series(columns.size() - 1);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = agesig::split_fields(line, ',');
    double x = 0.0;
    if (!agesig::parse_double(fields[0], x)) {
      throw agesig::Error("plot: bad x value in " + line);
    }
    for (std::size_t c = 1; c < fields.size() && c < columns.size(); ++c) {
      double y = 0.0;
      if (!agesig::parse_double(fields[c], y)) continue;
      series[c - 1].x.push_back(x);
      series[c - 1].y.push_back(y);
    }
  }
  chart.x_label = std::string(columns[0]);
  chart.y_label = kind;
  for (std::size_t c = 0; c < series.size(); ++c) {
    series[c].color = c == 0 ? "#1f77b4" : "#bbbbbb";
    if (!series[c].x.empty()) chart.series.push_back(std::move(series[c]));
  }

  std::ofstream out(output, std::ios::binary);
  if (!out) throw agesig::IoError("cannot write " + output);
  out << agesig::render_chart(chart);
  std::cout << "wrote " << output << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"age-density signature clustering for ICD-10 visit records"};
  app.require_subcommand(1);
  // Flags may come from a config file ("agesig --config run.ini run");
  // sections name the subcommand, explicit flags override file values.
  app.set_config("--config", "", "Read flags from an INI/TOML file");

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  std::string run_input, run_spec, run_out = "out";
  SchemaFlags run_schema;
  agesig::PipelineConfig config;
  bool run_use_default_spec = false;
  run->add_option("--input", run_input, "Visit-record file");
  run->add_option("--synth-spec", run_spec, "Population spec json replacing --input");
  run->add_flag("--default-spec", run_use_default_spec,
                "Use the built-in six-cluster population spec as input");
  run_schema.attach(run);
  run->add_option("--min-patients", config.min_patients,
                  "Drop cohorts with fewer patients (default 50)")
      ->check(CLI::PositiveNumber);
  run->add_option("--k-max", config.k_max, "Elbow search range 1..k_max (default 20)")
      ->check(CLI::PositiveNumber);
  int run_k = 0;
  auto* run_k_opt = run->add_option("--k", run_k, "Cluster count override (skips elbow)");
  double run_bw = 0.0;
  auto* run_bw_opt =
      run->add_option("--bandwidth", run_bw, "Explicit KDE bandwidth in years");
  run->add_flag("--kde", config.emit_kde, "Emit per-cluster KDE curve csv");
  run->add_flag("--svg", config.emit_svg, "Emit elbow + ECDF panel SVG plots");
  run->add_option("--top-n", config.top_n, "Codes per cluster in top_codes.csv")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", run_out, "Output directory (default out)");
  std::uint64_t run_seed = 1337;
  run->add_option("--seed", run_seed, "Seed for --default-spec");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic population");
  std::string synth_spec_path, synth_out = "synth_out";
  bool synth_default = false;
  std::uint64_t synth_seed = 1337;
  synth->add_option("--spec", synth_spec_path, "Population spec json");
  synth->add_flag("--default-spec", synth_default, "Use the built-in six-cluster spec");
  synth->add_option("--seed", synth_seed, "Seed for --default-spec");
  synth->add_option("--out", synth_out, "Output directory");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Cluster a signatures csv");
  std::string cluster_sigs, cluster_out = "cluster_out";
  int cluster_kmax = 20, cluster_k = 0;
  cluster->add_option("--signatures", cluster_sigs, "signatures.csv input")->required();
  cluster->add_option("--k-max", cluster_kmax, "Elbow search range")
      ->check(CLI::PositiveNumber);
  auto* cluster_k_opt = cluster->add_option("--k", cluster_k, "Cluster count override");
  cluster->add_option("--out", cluster_out, "Output directory");

  // plot
  auto* plot = app.add_subcommand("plot", "Render a curve csv to svg");
  std::string plot_in, plot_out = "plot.svg", plot_kind = "y";
  plot->add_option("--curve", plot_in, "Curve csv (first column = x)")->required();
  plot->add_option("--out", plot_out, "Output svg path");
  plot->add_option("--kind", plot_kind, "y-axis label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      if (config.min_patients < 1 || config.k_max < 1 || config.top_n < 1) {
        throw CLI::ValidationError("run", "counts must be positive");
      }
      if (*run_k_opt) config.k_override = run_k;
      if (*run_bw_opt) config.kde_bandwidth = run_bw;
      config.schema = run_schema.to_schema();
      config.input_path = run_input;
      config.output_dir = run_out;
      if (run_use_default_spec) {
        config.synth_spec = agesig::default_six_cluster_spec(run_seed);
      } else if (!run_spec.empty()) {
        config.synth_spec = load_spec(run_spec);
      }
      return cmd_run(config);
    }
    if (synth->parsed()) {
      if (!synth_default && synth_spec_path.empty()) {
        throw CLI::ValidationError("synth", "need --spec or --default-spec");
      }
      agesig::PopulationSpec spec = synth_default
                                        ? agesig::default_six_cluster_spec(synth_seed)
                                        : load_spec(synth_spec_path);
      return cmd_synth(spec, synth_out);
    }
    if (cluster->parsed()) {
      std::optional<int> k;
      if (*cluster_k_opt) k = cluster_k;
      return cmd_cluster(cluster_sigs, cluster_out, cluster_kmax, k);
    }
    if (plot->parsed()) {
      return cmd_plot(plot_in, plot_out, plot_kind);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return agesig::classify_exit(e);
  }
  return 1;
}
