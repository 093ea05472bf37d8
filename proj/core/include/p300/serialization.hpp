#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "p300/classifier.hpp"
#include "p300/evaluation.hpp"
#include "p300/pca.hpp"
#include "p300/selection.hpp"

namespace p300 {

using Json = nlohmann::json;

// Matrices are stored column-major as flat arrays next to their shape.
Json pca_to_json(const PcaModel& model);
PcaModel pca_from_json(const Json& j);

Json lda_to_json(const LdaModel& model);
LdaModel lda_from_json(const Json& j);
Json qda_to_json(const QdaModel& model);
QdaModel qda_from_json(const Json& j);
Json nn_to_json(const NnModel& model);
NnModel nn_from_json(const Json& j);
Json classifier_to_json(const Classifier& model);

Json selection_to_json(const SelectionResult& result);

// Unknown keys are rejected with ConfigError; missing keys keep defaults.
Json pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const Json& j);

Json report_to_json(const EvalReport& report);
EvalReport report_from_json(const Json& j);

// Pretty-printed with a trailing newline. Identical values give identical
// bytes.
std::string dump_json(const Json& j);
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace p300
