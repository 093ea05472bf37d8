#include "p300/serialization.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "p300/errors.hpp"

namespace p300 {

namespace {

Json vector_to_json(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

Vector vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

Json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
    throw ParseError("matrix data does not match its declared shape");
  }
  return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

template <typename Fn>
auto parse_or_throw(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&key](const char* a) { return key == a; });
    if (!known) throw ConfigError("unknown key '" + key + "' in " + context);
  }
}

template <typename T>
void read_if(const Json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

Json class_params_to_json(const GaussianClassParams& c) {
  return {{"label", c.label},
          {"count", c.count},
          {"prior", c.prior},
          {"mean", vector_to_json(c.mean)},
          {"covariance", matrix_to_json(c.covariance)}};
}

GaussianClassParams class_params_from_json(const Json& j) {
  GaussianClassParams c;
  c.label = j.at("label").get<int>();
  c.count = j.at("count").get<Index>();
  c.prior = j.at("prior").get<double>();
  c.mean = vector_from_json(j.at("mean"));
  c.covariance = matrix_from_json(j.at("covariance"));
  return c;
}

void expect_type(const Json& j, const char* type) {
  if (j.at("type").get<std::string>() != type) {
    throw ParseError(std::string("expected a serialized ") + type + " model");
  }
}

std::string scope_name(PcaScope scope) {
  return scope == PcaScope::PerFold ? "per_fold" : "shared";
}

PcaScope parse_scope(const std::string& name) {
  if (name == "per_fold") return PcaScope::PerFold;
  if (name == "shared") return PcaScope::Shared;
  throw ConfigError("unknown pca_scope '" + name + "' (expected per_fold or shared)");
}

SelectionMethod parse_method(const std::string& name) {
  if (name == "forward") return SelectionMethod::Forward;
  if (name == "restricted") return SelectionMethod::Restricted;
  if (name == "prefix") return SelectionMethod::Prefix;
  throw ParseError("unknown selection method '" + name + "'");
}

Json optional_to_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

Json pca_to_json(const PcaModel& model) {
  return {{"type", "pca"},
          {"n_train", model.n_train},
          {"mean", vector_to_json(model.mean)},
          {"components", matrix_to_json(model.components)},
          {"singular_values", vector_to_json(model.singular_values)}};
}

PcaModel pca_from_json(const Json& j) {
  return parse_or_throw("PCA model", [&] {
    expect_type(j, "pca");
    PcaModel m;
    m.n_train = j.at("n_train").get<Index>();
    m.mean = vector_from_json(j.at("mean"));
    m.components = matrix_from_json(j.at("components"));
    m.singular_values = vector_from_json(j.at("singular_values"));
    if (m.mean.size() != m.components.rows() ||
        m.singular_values.size() != m.components.cols()) {
      throw ParseError("PCA model fields have inconsistent shapes");
    }
    return m;
  });
}

Json lda_to_json(const LdaModel& model) {
  Json classes = Json::array();
  for (const auto& c : model.classes) classes.push_back(class_params_to_json(c));
  return {{"type", "lda"},
          {"classes", classes},
          {"pooled_covariance", matrix_to_json(model.pooled_covariance)},
          {"ridge", model.ridge}};
}

LdaModel lda_from_json(const Json& j) {
  return parse_or_throw("LDA model", [&] {
    expect_type(j, "lda");
    std::vector<GaussianClassParams> classes;
    for (const auto& c : j.at("classes")) classes.push_back(class_params_from_json(c));
    return make_lda(std::move(classes), matrix_from_json(j.at("pooled_covariance")),
                    j.at("ridge").get<double>());
  });
}

Json qda_to_json(const QdaModel& model) {
  Json classes = Json::array();
  for (const auto& c : model.classes) classes.push_back(class_params_to_json(c));
  return {{"type", "qda"}, {"classes", classes}, {"ridge", model.ridge}};
}

QdaModel qda_from_json(const Json& j) {
  return parse_or_throw("QDA model", [&] {
    expect_type(j, "qda");
    std::vector<GaussianClassParams> classes;
    for (const auto& c : j.at("classes")) classes.push_back(class_params_from_json(c));
    return make_qda(std::move(classes), j.at("ridge").get<double>());
  });
}

Json nn_to_json(const NnModel& model) {
  const auto& w = model.weights;
  return {{"type", "nn"},
          {"n_inputs", w.n_inputs},
          {"n_hidden", w.n_hidden},
          {"n_outputs", w.n_outputs},
          {"classes", model.classes},
          {"theta", vector_to_json(w.flatten())},
          {"training",
           {{"iterations", model.diagnostics.iterations},
            {"final_loss", model.diagnostics.final_loss},
            {"stop", to_string(model.diagnostics.reason)}}}};
}

NnModel nn_from_json(const Json& j) {
  return parse_or_throw("network model", [&] {
    expect_type(j, "nn");
    NnModel m;
    m.weights = NetworkWeights::unflatten(j.at("n_inputs").get<Index>(),
                                          j.at("n_hidden").get<Index>(),
                                          j.at("n_outputs").get<Index>(),
                                          vector_from_json(j.at("theta")));
    m.classes = j.at("classes").get<std::vector<int>>();
    if (static_cast<Index>(m.classes.size()) != m.weights.n_outputs) {
      throw ParseError("class list does not match output count");
    }
    if (j.contains("training")) {
      m.diagnostics.iterations = j["training"].value("iterations", 0);
      m.diagnostics.final_loss = j["training"].value("final_loss", 0.0);
    }
    return m;
  });
}

Json classifier_to_json(const Classifier& model) {
  Json out = std::visit(
      [](const auto& m) -> Json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LdaModel>) return lda_to_json(m);
        else if constexpr (std::is_same_v<M, QdaModel>) return qda_to_json(m);
        else return nn_to_json(m);
      },
      model.model());
  out["classifier"] = to_string(model.kind());
  return out;
}

Json selection_to_json(const SelectionResult& result) {
  return {{"method", to_string(result.method)},
          {"classifier", to_string(result.classifier)},
          {"pool_size", result.pool_size},
          {"folds", result.folds},
          {"seed", result.seed},
          {"greedy_order", result.greedy_order},
          {"step_accuracies", result.step_accuracies},
          {"chosen_indices", result.chosen_indices}};
}

namespace {

SelectionResult selection_from_json(const Json& j) {
  SelectionResult r;
  r.method = parse_method(j.at("method").get<std::string>());
  r.classifier = parse_classifier_kind(j.at("classifier").get<std::string>());
  r.pool_size = j.at("pool_size").get<int>();
  r.folds = j.at("folds").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.greedy_order = j.at("greedy_order").get<std::vector<int>>();
  r.step_accuracies = j.at("step_accuracies").get<std::vector<double>>();
  r.chosen_indices = j.at("chosen_indices").get<std::vector<int>>();
  return r;
}

}  // namespace

Json pipeline_config_to_json(const PipelineConfig& c) {
  const auto& p = c.preprocess;
  const auto& f = c.features;
  const auto& k = c.classifier;
  return {
      {"label", c.label},
      {"seed", c.seed},
      {"repetitions", c.n_repetitions},
      {"test_fraction", c.test_fraction},
      {"balance", c.balance},
      {"rebalance_per_repetition", c.rebalance_per_repetition},
      {"preprocess",
       {{"filter", p.filter},
        {"bp_low", p.bp_low_hz},
        {"bp_high", p.bp_high_hz},
        {"bp_order", p.bp_order},
        {"zero_phase", p.zero_phase},
        {"window_s", p.window_s},
        {"normalize", to_string(p.normalize)}}},
      {"features",
       {{"mode", to_string(f.mode)},
        {"components", f.components},
        {"max_pool", f.max_pool},
        {"top_n", f.top_n},
        {"prefix_mode", f.prefix_mode},
        {"folds", f.folds},
        {"pca_scope", scope_name(f.pca_scope)}}},
      {"classifier",
       {{"kind", to_string(k.kind)},
        {"hidden_units", k.hidden_units ? Json(*k.hidden_units) : Json(nullptr)},
        {"covariance", {{"unbiased", k.covariance.unbiased}, {"ridge", k.covariance.ridge}}},
        {"scg",
         {{"max_iterations", k.scg.max_iterations},
          {"gradient_tolerance", k.scg.gradient_tolerance},
          {"initial_lambda", k.scg.initial_lambda},
          {"sigma", k.scg.sigma},
          {"loss_tolerance", k.scg.loss_tolerance}}}}},
  };
}

PipelineConfig pipeline_config_from_json(const Json& j) {
  try {
    PipelineConfig c;
    check_keys(j,
               {"label", "seed", "repetitions", "test_fraction", "balance",
                "rebalance_per_repetition", "jobs", "preprocess", "features", "classifier"},
               "pipeline config");
    read_if(j, "label", c.label);
    read_if(j, "seed", c.seed);
    read_if(j, "repetitions", c.n_repetitions);
    read_if(j, "test_fraction", c.test_fraction);
    read_if(j, "balance", c.balance);
    read_if(j, "rebalance_per_repetition", c.rebalance_per_repetition);
    read_if(j, "jobs", c.jobs);

    if (j.contains("preprocess")) {
      const auto& p = j["preprocess"];
      check_keys(p, {"filter", "bp_low", "bp_high", "bp_order", "zero_phase", "window_s",
                     "normalize"},
                 "preprocess");
      read_if(p, "filter", c.preprocess.filter);
      read_if(p, "bp_low", c.preprocess.bp_low_hz);
      read_if(p, "bp_high", c.preprocess.bp_high_hz);
      read_if(p, "bp_order", c.preprocess.bp_order);
      read_if(p, "zero_phase", c.preprocess.zero_phase);
      read_if(p, "window_s", c.preprocess.window_s);
      if (p.contains("normalize")) {
        c.preprocess.normalize = parse_normalize_scope(p["normalize"].get<std::string>());
      }
    }
    if (j.contains("features")) {
      const auto& f = j["features"];
      check_keys(f, {"mode", "components", "max_pool", "top_n", "prefix_mode", "folds",
                     "pca_scope"},
                 "features");
      if (f.contains("mode")) c.features.mode = parse_feature_mode(f["mode"].get<std::string>());
      read_if(f, "components", c.features.components);
      read_if(f, "max_pool", c.features.max_pool);
      read_if(f, "top_n", c.features.top_n);
      read_if(f, "prefix_mode", c.features.prefix_mode);
      read_if(f, "folds", c.features.folds);
      if (f.contains("pca_scope")) {
        c.features.pca_scope = parse_scope(f["pca_scope"].get<std::string>());
      }
    }
    if (j.contains("classifier")) {
      const auto& k = j["classifier"];
      check_keys(k, {"kind", "hidden_units", "covariance", "scg"}, "classifier");
      if (k.contains("kind")) c.classifier.kind = parse_classifier_kind(k["kind"].get<std::string>());
      if (k.contains("hidden_units") && !k["hidden_units"].is_null()) {
        c.classifier.hidden_units = k["hidden_units"].get<int>();
      }
      if (k.contains("covariance")) {
        const auto& cov = k["covariance"];
        check_keys(cov, {"unbiased", "ridge"}, "covariance");
        read_if(cov, "unbiased", c.classifier.covariance.unbiased);
        read_if(cov, "ridge", c.classifier.covariance.ridge);
      }
      if (k.contains("scg")) {
        const auto& s = k["scg"];
        check_keys(s, {"max_iterations", "gradient_tolerance", "initial_lambda", "sigma",
                       "loss_tolerance"},
                   "scg");
        read_if(s, "max_iterations", c.classifier.scg.max_iterations);
        read_if(s, "gradient_tolerance", c.classifier.scg.gradient_tolerance);
        read_if(s, "initial_lambda", c.classifier.scg.initial_lambda);
        read_if(s, "sigma", c.classifier.scg.sigma);
        read_if(s, "loss_tolerance", c.classifier.scg.loss_tolerance);
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
}

Json report_to_json(const EvalReport& report) {
  Json reps = Json::array();
  for (const auto& r : report.repetitions) {
    Json entry = {{"index", r.index},
                  {"accuracy", optional_to_json(r.accuracy)},
                  {"channel_accuracy", optional_to_json(r.channel_accuracy)},
                  {"chosen_components", r.chosen_components},
                  {"n_train_subtrials", r.n_train_subtrials},
                  {"n_test_subtrials", r.n_test_subtrials},
                  {"error", r.error_kind ? Json{{"kind", *r.error_kind},
                                                {"message", r.error_message}}
                                         : Json(nullptr)}};
    if (r.selection) entry["selection"] = selection_to_json(*r.selection);
    reps.push_back(std::move(entry));
  }
  return {{"config", pipeline_config_to_json(report.config)},
          {"mean_accuracy", optional_to_json(report.mean_accuracy)},
          {"mean_channel_accuracy", optional_to_json(report.mean_channel_accuracy)},
          {"error_tallies", report.error_tallies},
          {"repetitions", reps}};
}

EvalReport report_from_json(const Json& j) {
  return parse_or_throw("evaluation report", [&] {
    EvalReport report;
    report.config = pipeline_config_from_json(j.at("config"));
    report.mean_accuracy = optional_from_json(j.at("mean_accuracy"));
    report.mean_channel_accuracy = optional_from_json(j.at("mean_channel_accuracy"));
    report.error_tallies = j.at("error_tallies").get<std::map<std::string, int>>();
    for (const auto& e : j.at("repetitions")) {
      RepetitionResult r;
      r.index = e.at("index").get<int>();
      r.accuracy = optional_from_json(e.at("accuracy"));
      r.channel_accuracy = optional_from_json(e.at("channel_accuracy"));
      r.chosen_components = e.at("chosen_components").get<std::vector<int>>();
      r.n_train_subtrials = e.at("n_train_subtrials").get<int>();
      r.n_test_subtrials = e.at("n_test_subtrials").get<int>();
      if (!e.at("error").is_null()) {
        r.error_kind = e["error"].at("kind").get<std::string>();
        r.error_message = e["error"].at("message").get<std::string>();
      }
      if (e.contains("selection")) r.selection = selection_from_json(e["selection"]);
      report.repetitions.push_back(std::move(r));
    }
    return report;
  });
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IOError("failed writing '" + path.string() + "'");
}

}  // namespace p300
