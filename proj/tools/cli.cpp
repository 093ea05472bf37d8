#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "p300/data_model.hpp"
#include "p300/errors.hpp"
#include "p300/pca.hpp"
#include "p300/preprocess.hpp"
#include "p300/rng.hpp"
#include "p300/selection.hpp"
#include "p300/serialization.hpp"
#include "p300/synthgen.hpp"

namespace p300::cli {

namespace fs = std::filesystem;

namespace {

// Flags shared by every command that reads a recording.
struct InputFlags {
  std::string input;
  bool no_filter = false;
  bool no_zero_phase = false;
  double bp_low = kDefaultBandLowHz;
  double bp_high = kDefaultBandHighHz;
  int bp_order = kDefaultBandOrder;
  double window_s = 1.0;
  std::string normalize = "row";
};

void add_filter_flags(CLI::App* app, InputFlags& flags) {
  app->add_option("--bp-low", flags.bp_low, "Bandpass low edge in Hz")->capture_default_str();
  app->add_option("--bp-high", flags.bp_high, "Bandpass high edge in Hz")->capture_default_str();
  app->add_option("--bp-order", flags.bp_order, "Butterworth prototype order (even)")
      ->capture_default_str();
  app->add_flag("--no-zero-phase", flags.no_zero_phase,
                "Filter causally instead of forward-backward");
}

void add_input_flags(CLI::App* app, InputFlags& flags, bool required) {
  auto* opt = app->add_option("--in", flags.input,
                              "Recording CSV (sidecar JSON next to it with the same stem)");
  if (required) opt->required();
  app->add_flag("--no-filter", flags.no_filter, "Skip bandpass filtering");
  add_filter_flags(app, flags);
  app->add_option("--window", flags.window_s, "Epoch length in seconds")->capture_default_str();
  app->add_option("--normalize", flags.normalize, "Normalization scope: row, channel or none")
      ->capture_default_str();
}

void apply_input_flags(const InputFlags& flags, PreprocessConfig& config) {
  config.filter = !flags.no_filter;
  config.zero_phase = !flags.no_zero_phase;
  config.bp_low_hz = flags.bp_low;
  config.bp_high_hz = flags.bp_high;
  config.bp_order = flags.bp_order;
  config.window_s = flags.window_s;
  config.normalize = parse_normalize_scope(flags.normalize);
}

ChannelSubtrialDataset load_dataset(const std::string& path, const PreprocessConfig& config) {
  RecordingFormat format;
  format.window_s = config.window_s;
  const auto loaded = load_recording(path, format);
  return prepare_dataset(loaded.recording, loaded.log, config);
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const int value = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(value);
    } catch (const std::exception&) {
      throw ConfigError("bad component index '" + item + "'");
    }
  }
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IOError("cannot create directory '" + dir.string() + "': " + ec.message());
}

// --- synth -----------------------------------------------------------------

struct SynthFlags {
  SynthConfig config;
  std::string out_dir;
  std::string name = "recording";
  std::string noise = "white";
};

void setup_synth(CLI::App& root, SynthFlags& f) {
  auto* app = root.add_subcommand("synth", "Generate a synthetic oddball recording");
  auto& c = f.config;
  app->add_option("--out", f.out_dir, "Output directory")->required();
  app->add_option("--name", f.name, "File stem of the recording")->capture_default_str();
  app->add_option("--amplitude", c.p300_amplitude, "P300 amplitude (0 disables)")
      ->capture_default_str();
  app->add_option("--noise-std", c.noise_std, "Background noise standard deviation")
      ->capture_default_str();
  app->add_option("--noise", f.noise, "Noise model: white or pink")->capture_default_str();
  app->add_option("--n-target", c.n_target, "Target stimuli")->capture_default_str();
  app->add_option("--n-nontarget", c.n_nontarget, "Non-target stimuli")->capture_default_str();
  app->add_option("--fs", c.sampling_rate_hz, "Sampling rate in Hz")->capture_default_str();
  app->add_option("--channels", c.n_channels, "Channel count")->capture_default_str();
  app->add_option("--latency", c.p300_latency_s, "P300 peak latency in seconds")
      ->capture_default_str();
  app->add_option("--width", c.p300_width_s, "P300 Gaussian width (std) in seconds")
      ->capture_default_str();
  app->add_option("--jitter", c.latency_jitter_s, "Latency jitter std in seconds")
      ->capture_default_str();
  app->add_option("--weights", c.channel_weights, "Per-channel amplitude weights")
      ->delimiter(',');
  app->add_option("--isi", c.isi_s, "Inter-stimulus interval in seconds")->capture_default_str();
  app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

int run_synth(SynthFlags& f, std::ostream& out) {
  f.config.noise = parse_noise_model(f.noise);
  const auto session = generate_oddball(f.config);
  ensure_directory(f.out_dir);
  const fs::path csv = fs::path(f.out_dir) / (f.name + ".csv");
  save_recording(session.recording, session.log, csv);
  out << csv.string() << '\n';
  return kExitOk;
}

// --- preprocess ------------------------------------------------------------

struct PreprocessFlags {
  InputFlags input;
  std::string output;
};

void setup_preprocess(CLI::App& root, PreprocessFlags& f) {
  auto* app = root.add_subcommand("preprocess", "Bandpass-filter a continuous recording");
  app->add_option("--in", f.input.input, "Recording CSV")->required();
  app->add_option("--out", f.output, "Output CSV (sidecar written next to it)")->required();
  add_filter_flags(app, f.input);
  app->add_option("--normalize", f.input.normalize,
                  "Continuous normalization after filtering: channel or none")
      ->default_val("none");
}

int run_preprocess(PreprocessFlags& f, std::ostream& out) {
  if (f.input.normalize != "channel" && f.input.normalize != "none") {
    throw ConfigError("preprocess --normalize must be 'channel' or 'none'");
  }
  const auto loaded = load_recording(f.input.input);
  const auto coeffs = design_bandpass(f.input.bp_low, f.input.bp_high, f.input.bp_order,
                                      loaded.recording.sampling_rate_hz);
  auto filtered = apply_filter(coeffs, loaded.recording, !f.input.no_zero_phase);
  if (f.input.normalize == "channel") filtered = zscore_channels(filtered);
  const fs::path target(f.output);
  if (target.has_parent_path()) ensure_directory(target.parent_path());
  save_recording(filtered, loaded.log, target);
  out << target.string() << '\n';
  return kExitOk;
}

// --- fit-pca ---------------------------------------------------------------

struct FitPcaFlags {
  InputFlags input;
  std::string output;
  std::string model;
  std::string project;
  std::string components;
  bool balance = false;
  std::uint64_t seed = 0;
};

void setup_fit_pca(CLI::App& root, FitPcaFlags& f) {
  auto* app = root.add_subcommand("fit-pca", "Fit principal components or project with a model");
  add_input_flags(app, f.input, true);
  app->add_option("--out", f.output, "Write the fitted model JSON here");
  app->add_option("--model", f.model, "Use this fitted model instead of fitting");
  app->add_option("--project", f.project, "Write projected features (CSV) here");
  app->add_option("--components", f.components,
                  "Comma-separated component indices for --project (default: all)");
  app->add_flag("--balance", f.balance, "Balance classes before fitting");
  app->add_option("--seed", f.seed, "Balancing seed")->capture_default_str();
}

int run_fit_pca(FitPcaFlags& f, std::ostream& out) {
  if (f.output.empty() && f.project.empty()) {
    throw ConfigError("fit-pca needs --out and/or --project");
  }
  PreprocessConfig config;
  apply_input_flags(f.input, config);
  auto ds = load_dataset(f.input.input, config);
  if (f.balance) ds = balance_classes(ds, derive_seed(f.seed, "balance"));

  const PcaModel model = f.model.empty() ? fit_pca(ds.X) : pca_from_json(read_json_file(f.model));
  if (!f.output.empty()) {
    write_text_file(f.output, dump_json(pca_to_json(model)));
    out << f.output << '\n';
  }
  if (!f.project.empty()) {
    std::vector<int> indices = parse_index_list(f.components);
    if (indices.empty()) {
      for (int i = 0; i < model.n_components(); ++i) indices.push_back(i);
    }
    const Matrix projected = project(model, ds.X, indices);
    std::ostringstream csv;
    csv << std::setprecision(17) << "group_id,channel,label";
    for (const int i : indices) csv << ",pc" << i;
    csv << '\n';
    for (Index r = 0; r < projected.rows(); ++r) {
      const auto ur = static_cast<std::size_t>(r);
      csv << ds.group_id[ur] << ',' << ds.channel_index[ur] << ',' << ds.y[ur];
      for (Index c = 0; c < projected.cols(); ++c) csv << ',' << projected(r, c);
      csv << '\n';
    }
    write_text_file(f.project, csv.str());
    out << f.project << '\n';
  }
  return kExitOk;
}

// --- select ----------------------------------------------------------------

struct SelectFlags {
  InputFlags input;
  std::string output;
  std::string classifier = "lda";
  int pool = 50;
  int top_n = 0;
  int folds = 3;
  bool prefix_mode = false;
  bool shared_pca = false;
  bool no_balance = false;
  std::optional<int> hidden_units;
  std::uint64_t seed = 0;
};

void setup_select(CLI::App& root, SelectFlags& f) {
  auto* app = root.add_subcommand("select", "Cross-validated forward selection of components");
  add_input_flags(app, f.input, true);
  app->add_option("--out", f.output, "Selection result JSON")->required();
  app->add_option("--classifier", f.classifier, "lda, qda, lr or nlr")->capture_default_str();
  app->add_option("--pool", f.pool, "Full forward selection pool size")->capture_default_str();
  app->add_option("--top-n", f.top_n, "Restrict the pool to the top N components (0: off)")
      ->capture_default_str();
  app->add_option("--folds", f.folds, "Cross-validation folds")->capture_default_str();
  app->add_flag("--prefix-mode", f.prefix_mode,
                "With --top-n, score prefixes of the top components instead");
  app->add_flag("--shared-pca", f.shared_pca, "Fit PCA once instead of per fold");
  app->add_flag("--no-balance", f.no_balance, "Use the data unbalanced");
  app->add_option("--hidden-units", f.hidden_units, "NLR hidden units (default: features)");
  app->add_option("--seed", f.seed, "Random seed")->capture_default_str();
}

int run_select(SelectFlags& f, std::ostream& out) {
  PreprocessConfig config;
  apply_input_flags(f.input, config);
  auto ds = load_dataset(f.input.input, config);
  if (!f.no_balance) ds = balance_classes(ds, derive_seed(f.seed, "balance"));

  ClassifierSpec spec;
  spec.kind = parse_classifier_kind(f.classifier);
  spec.hidden_units = f.hidden_units;
  const auto scope = f.shared_pca ? PcaScope::Shared : PcaScope::PerFold;
  const auto seed = derive_seed(f.seed, "selection");
  SelectionResult result;
  if (f.top_n > 0) {
    result = f.prefix_mode ? prefix_select(ds, spec, f.top_n, f.folds, seed, scope)
                           : restricted_forward_select(ds, spec, f.top_n, f.folds, seed, scope);
  } else {
    if (f.prefix_mode) throw ConfigError("--prefix-mode needs --top-n");
    result = forward_select(ds, spec, f.pool, f.folds, seed, scope);
  }
  write_text_file(f.output, dump_json(selection_to_json(result)));
  out << f.output << '\n';
  return kExitOk;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateFlags {
  InputFlags input;
  std::string config_file;
  std::string out_dir;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> classifier;
  std::optional<std::string> features;
  std::optional<std::string> components;
  std::optional<int> pool;
  std::optional<int> top_n;
  std::optional<int> folds;
  std::optional<int> hidden_units;
  std::optional<int> jobs;
  std::optional<std::string> label;
  bool prefix_mode = false;
  bool shared_pca = false;
  bool no_balance = false;
  bool fixed_balance = false;
  CLI::App* app = nullptr;
};

void setup_evaluate(CLI::App& root, EvaluateFlags& f) {
  auto* app = root.add_subcommand("evaluate", "Run the repeated split/train/vote experiment");
  f.app = app;
  app->add_option("--config", f.config_file,
                  "JSON config (pipeline keys plus optional \"data\"); flags override it");
  add_input_flags(app, f.input, false);
  app->add_option("--out", f.out_dir, "Output directory for report.json and summary.csv")
      ->required();
  app->add_option("--reps", f.reps, "Repetitions (default 20)");
  app->add_option("--seed", f.seed, "Master seed (default 0)");
  app->add_option("--classifier", f.classifier, "lda, qda, lr or nlr (default lda)");
  app->add_option("--features", f.features, "raw, pca, fs or restricted (default raw)");
  app->add_option("--components", f.components, "Component indices for --features pca");
  app->add_option("--pool", f.pool, "Forward selection pool (default 50)");
  app->add_option("--top-n", f.top_n, "Restricted selection pool (default 5)");
  app->add_option("--folds", f.folds, "Cross-validation folds (default 3)");
  app->add_option("--hidden-units", f.hidden_units, "NLR hidden units (default: features)");
  app->add_option("--jobs", f.jobs, "Repetitions run concurrently (default 1)");
  app->add_option("--label", f.label, "Column label in report tables");
  app->add_flag("--prefix-mode", f.prefix_mode, "Restricted selection scores prefixes only");
  app->add_flag("--shared-pca", f.shared_pca, "Selection fits PCA once, not per fold");
  app->add_flag("--no-balance", f.no_balance, "Do not balance classes");
  app->add_flag("--fixed-balance", f.fixed_balance,
                "Balance once per dataset instead of every repetition");
}

int run_evaluate(EvaluateFlags& f, std::ostream& out) {
  PipelineConfig config;
  std::string data = f.input.input;
  if (!f.config_file.empty()) {
    auto j = read_json_file(f.config_file);
    if (j.is_object() && j.contains("data")) {
      if (data.empty()) {
        fs::path p = j["data"].get<std::string>();
        if (p.is_relative()) p = fs::path(f.config_file).parent_path() / p;
        data = p.string();
      }
      j.erase("data");
    }
    config = pipeline_config_from_json(j);
  }
  if (data.empty()) throw ConfigError("evaluate needs --in or a config with \"data\"");

  auto given = [&f](const char* name) { return f.app->count(name) > 0; };
  if (given("--no-filter")) config.preprocess.filter = false;
  if (given("--no-zero-phase")) config.preprocess.zero_phase = false;
  if (given("--bp-low")) config.preprocess.bp_low_hz = f.input.bp_low;
  if (given("--bp-high")) config.preprocess.bp_high_hz = f.input.bp_high;
  if (given("--bp-order")) config.preprocess.bp_order = f.input.bp_order;
  if (given("--window")) config.preprocess.window_s = f.input.window_s;
  if (given("--normalize")) config.preprocess.normalize = parse_normalize_scope(f.input.normalize);
  if (f.reps) config.n_repetitions = *f.reps;
  if (f.seed) config.seed = *f.seed;
  if (f.classifier) config.classifier.kind = parse_classifier_kind(*f.classifier);
  if (f.features) config.features.mode = parse_feature_mode(*f.features);
  if (f.components) config.features.components = parse_index_list(*f.components);
  if (f.pool) config.features.max_pool = *f.pool;
  if (f.top_n) config.features.top_n = *f.top_n;
  if (f.folds) config.features.folds = *f.folds;
  if (f.hidden_units) config.classifier.hidden_units = *f.hidden_units;
  if (f.jobs) config.jobs = *f.jobs;
  if (f.label) config.label = *f.label;
  if (f.prefix_mode) config.features.prefix_mode = true;
  if (f.shared_pca) config.features.pca_scope = PcaScope::Shared;
  if (f.no_balance) config.balance = false;
  if (f.fixed_balance) config.rebalance_per_repetition = false;
  if (config.label.empty()) config.label = fs::path(data).stem().string();
  config.validate();

  const auto ds = load_dataset(data, config.preprocess);
  const auto report = run_experiment(ds, config);

  ensure_directory(f.out_dir);
  const fs::path report_path = fs::path(f.out_dir) / "report.json";
  write_text_file(report_path, dump_json(report_to_json(report)));
  const auto table = build_report_table({report}, {config.label});
  write_text_file(fs::path(f.out_dir) / "summary.csv", render_csv(table));
  out << render_text(table);
  return kExitOk;
}

// --- report ----------------------------------------------------------------

struct ReportFlags {
  std::vector<std::string> inputs;
  std::string csv;
};

void setup_report(CLI::App& root, ReportFlags& f) {
  auto* app = root.add_subcommand("report", "Tabulate evaluation reports (methods x datasets)");
  app->add_option("reports", f.inputs, "report.json files")->required();
  app->add_option("--csv", f.csv, "Also write the table as CSV");
}

int run_report(ReportFlags& f, std::ostream& out) {
  std::vector<EvalReport> reports;
  std::vector<std::string> labels;
  for (const auto& path : f.inputs) {
    if (!fs::exists(path)) throw IOError("report '" + path + "' does not exist");
    reports.push_back(report_from_json(read_json_file(path)));
    labels.push_back(fs::path(path).parent_path().filename().string());
  }
  const auto table = build_report_table(reports, labels);
  if (!f.csv.empty()) write_text_file(f.csv, render_csv(table));
  out << render_text(table);
  return kExitOk;
}

std::string format_percent(double fraction) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << 100.0 * fraction;
  std::string text = ss.str();
  while (text.back() == '0' && text[text.size() - 2] != '.') text.pop_back();
  return text;
}

}  // namespace

std::string method_name(const PipelineConfig& config) {
  const auto base = to_string(config.classifier.kind);
  return config.features.mode == FeatureMode::Raw ? base : "PCA+" + base;
}

std::string format_cell(const EvalReport& report) {
  if (!report.mean_accuracy) return "-";
  std::string cell = format_percent(*report.mean_accuracy);
  const auto mode = report.config.features.mode;
  if (mode == FeatureMode::PcaForwardSelect || mode == FeatureMode::PcaRestrictedSelect) {
    std::map<std::size_t, int> counts;
    for (const auto& r : report.repetitions) {
      if (r.accuracy) ++counts[r.chosen_components.size()];
    }
    if (!counts.empty()) {
      const auto modal = std::max_element(
          counts.begin(), counts.end(),
          [](const auto& a, const auto& b) { return a.second < b.second; });
      cell += "(" + std::to_string(modal->first) + ")";
    }
  }
  return cell;
}

ReportTable build_report_table(const std::vector<EvalReport>& reports,
                               const std::vector<std::string>& fallback_labels) {
  static const std::vector<std::string> kOrder = {"LDA", "QDA", "LR", "NLR"};
  ReportTable table;
  std::vector<std::pair<std::size_t, std::size_t>> placement;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::string column = reports[i].config.label;
    if (column.empty()) {
      column = i < fallback_labels.size() ? fallback_labels[i] : "report" + std::to_string(i + 1);
    }
    const auto row = method_name(reports[i].config);
    auto col_it = std::find(table.columns.begin(), table.columns.end(), column);
    if (col_it == table.columns.end()) col_it = table.columns.insert(table.columns.end(), column);
    if (std::find(table.rows.begin(), table.rows.end(), row) == table.rows.end()) {
      table.rows.push_back(row);
    }
  }
  auto rank = [](const std::string& row) {
    const bool pca = row.rfind("PCA+", 0) == 0;
    const auto base = pca ? row.substr(4) : row;
    const auto it = std::find(kOrder.begin(), kOrder.end(), base);
    return std::make_pair(pca ? 1 : 0, it - kOrder.begin());
  };
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [&](const auto& a, const auto& b) { return rank(a) < rank(b); });

  table.cells.assign(table.rows.size(), std::vector<std::string>(table.columns.size()));
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::string column = reports[i].config.label;
    if (column.empty()) {
      column = i < fallback_labels.size() ? fallback_labels[i] : "report" + std::to_string(i + 1);
    }
    const auto r = std::find(table.rows.begin(), table.rows.end(),
                             method_name(reports[i].config)) - table.rows.begin();
    const auto c = std::find(table.columns.begin(), table.columns.end(), column) -
                   table.columns.begin();
    table.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
        format_cell(reports[i]);
  }
  return table;
}

std::string render_csv(const ReportTable& table) {
  std::string out = "method";
  for (const auto& c : table.columns) out += "," + c;
  out += '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += table.rows[r];
    for (const auto& cell : table.cells[r]) out += "," + cell;
    out += '\n';
  }
  return out;
}

std::string render_text(const ReportTable& table) {
  std::size_t first = std::string("Method").size();
  for (const auto& r : table.rows) first = std::max(first, r.size());
  std::vector<std::size_t> widths;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::size_t w = table.columns[c].size();
    for (const auto& row : table.cells) w = std::max(w, row[c].size());
    widths.push_back(w);
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(first)) << "Method";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << "  " << std::right << std::setw(static_cast<int>(widths[c])) << table.columns[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << std::left << std::setw(static_cast<int>(first)) << table.rows[r];
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out << "  " << std::right << std::setw(static_cast<int>(widths[c])) << table.cells[r][c];
    }
    out << '\n';
  }
  return out.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-trial P300 classification pipeline", "p300"};
  app.require_subcommand(1);

  SynthFlags synth;
  PreprocessFlags preprocess;
  FitPcaFlags fit_pca_flags;
  SelectFlags select;
  EvaluateFlags evaluate;
  ReportFlags report;
  setup_synth(app, synth);
  setup_preprocess(app, preprocess);
  setup_fit_pca(app, fit_pca_flags);
  setup_select(app, select);
  setup_evaluate(app, evaluate);
  setup_report(app, report);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as CallForHelp from the subcommand.
    err << "error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "synth") return run_synth(synth, out);
    if (name == "preprocess") return run_preprocess(preprocess, out);
    if (name == "fit-pca") return run_fit_pca(fit_pca_flags, out);
    if (name == "select") return run_select(select, out);
    if (name == "evaluate") return run_evaluate(evaluate, out);
    if (name == "report") return run_report(report, out);
    err << "error: unknown subcommand " << name << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << e.kind() << "]: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace p300::cli
