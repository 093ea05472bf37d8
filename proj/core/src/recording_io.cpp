#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "p300/data_model.hpp"
#include "p300/errors.hpp"

namespace p300 {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view text, std::size_t line_no) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse number '" +
                     std::string(text) + "'");
  }
  return value;
}

void append_number(std::string& out, double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  out.append(buffer, ptr);
}

}  // namespace

std::filesystem::path sidecar_path_for(const std::filesystem::path& csv_path) {
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  return sidecar;
}

LoadedRecording load_recording(const std::filesystem::path& csv_path,
                               const RecordingFormat& format) {
  std::ifstream csv(csv_path);
  if (!csv) throw IOError("cannot open recording '" + csv_path.string() + "'");

  std::string line;
  if (!std::getline(csv, line)) {
    throw ParseError("recording '" + csv_path.string() + "' is empty");
  }
  const auto header = split_fields(trim(line));
  if (header.size() < 2 || trim(header.front()) != "time") {
    throw ParseError("header must be 'time,<ch1>,...,<chN>'");
  }
  std::vector<std::string> names;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const auto name = trim(header[i]);
    if (name.empty()) throw ParseError("empty channel name in header");
    names.emplace_back(name);
  }

  const std::size_t n_channels = names.size();
  std::vector<double> values;
  std::size_t n_samples = 0;
  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_fields(row);
    if (fields.size() != n_channels + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(n_channels + 1) + " fields, found " +
                       std::to_string(fields.size()));
    }
    parse_double(fields[0], line_no);
    for (std::size_t c = 0; c < n_channels; ++c) {
      values.push_back(parse_double(fields[c + 1], line_no));
    }
    ++n_samples;
  }

  LoadedRecording out;
  out.recording.channel_names = std::move(names);
  out.recording.samples.resize(static_cast<Index>(n_channels), static_cast<Index>(n_samples));
  for (std::size_t t = 0; t < n_samples; ++t) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      out.recording.samples(static_cast<Index>(c), static_cast<Index>(t)) =
          values[t * n_channels + c];
    }
  }

  const auto sidecar_path =
      format.sidecar.empty() ? sidecar_path_for(csv_path) : format.sidecar;
  std::ifstream sidecar(sidecar_path);
  if (!sidecar) throw IOError("cannot open sidecar '" + sidecar_path.string() + "'");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(sidecar);
    out.recording.sampling_rate_hz = meta.at("sampling_rate_hz").get<double>();
    out.log.onsets = meta.at("onsets").get<std::vector<std::int64_t>>();
    out.log.labels = meta.at("labels").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("sidecar '" + sidecar_path.string() + "': " + e.what());
  }

  out.recording.validate();
  out.log.validate(out.recording.n_timepoints(),
                   window_samples(out.recording.sampling_rate_hz, format.window_s));
  return out;
}

void save_recording(const Recording& rec, const StimulusLog& log,
                    const std::filesystem::path& csv_path,
                    const std::filesystem::path& sidecar_path) {
  rec.validate();
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IOError("cannot write '" + csv_path.string() + "'");

  std::string buffer = "time";
  for (const auto& name : rec.channel_names) {
    buffer += ',';
    buffer += name;
  }
  buffer += '\n';
  for (Index t = 0; t < rec.n_timepoints(); ++t) {
    append_number(buffer, static_cast<double>(t) / rec.sampling_rate_hz);
    for (Index c = 0; c < rec.n_channels(); ++c) {
      buffer += ',';
      append_number(buffer, rec.samples(c, t));
    }
    buffer += '\n';
    if (buffer.size() > (1u << 20)) {
      csv << buffer;
      buffer.clear();
    }
  }
  csv << buffer;
  if (!csv) throw IOError("failed writing '" + csv_path.string() + "'");

  nlohmann::json meta;
  meta["sampling_rate_hz"] = rec.sampling_rate_hz;
  meta["onsets"] = log.onsets;
  meta["labels"] = log.labels;
  const auto meta_path = sidecar_path.empty() ? sidecar_path_for(csv_path) : sidecar_path;
  std::ofstream sidecar(meta_path, std::ios::binary);
  if (!sidecar) throw IOError("cannot write '" + meta_path.string() + "'");
  sidecar << meta.dump(2) << '\n';
}

}  // namespace p300
