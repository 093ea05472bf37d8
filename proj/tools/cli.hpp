#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "p300/evaluation.hpp"

namespace p300::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs one command line (args excludes the program name). Results go to out,
// diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Methods x datasets accuracy table.
struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  // cells[row][column]; "" where no report covers the pair.
  std::vector<std::vector<std::string>> cells;
};

// "47.33", "55.0(2)" or "-" for a report without a mean accuracy.
std::string format_cell(const EvalReport& report);
// Row name such as "LDA" or "PCA+LDA".
std::string method_name(const PipelineConfig& config);

// labels[i] names the column for reports[i] when the report's own label is
// empty.
ReportTable build_report_table(const std::vector<EvalReport>& reports,
                               const std::vector<std::string>& fallback_labels);
std::string render_csv(const ReportTable& table);
std::string render_text(const ReportTable& table);

}  // namespace p300::cli
