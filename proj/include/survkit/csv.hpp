#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <survkit/errors.hpp>
#include <survkit/task.hpp>

namespace survkit {

// Shortest round-trip decimal representation; used everywhere a double is
// written to disk so reruns are byte-identical.
inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += "\"";
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw SurvError(ErrorCode::ConfigError, "CSV has no column '" + name + "'");
    return static_cast<int>(it - header.begin());
  }
};

// RFC-4180 style parse: quoted fields, doubled quotes, CRLF tolerated.
inline CsvTable parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (!any || records.empty())
    throw SurvError(ErrorCode::ConfigError, "CSV input is empty");

  CsvTable table;
  table.header = records.front();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw SurvError(ErrorCode::ConfigError,
                      "CSV row " + std::to_string(r) + " has " +
                          std::to_string(records[r].size()) + " fields, header has " +
                          std::to_string(table.header.size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SurvError(ErrorCode::ConfigError, "cannot open '" + path + "'");
  return parse_csv(in);
}

inline void write_task_csv(const SurvivalTask& task, std::ostream& out) {
  for (const auto& name : task.feature_names()) out << csv_escape(name) << ',';
  out << "time,status\n";
  for (int i = 0; i < task.n(); ++i) {
    for (int j = 0; j < task.p(); ++j) out << format_double(task.features()(i, j)) << ',';
    out << format_double(task.time()[i]) << ',' << task.status()[i] << '\n';
  }
}

// Per-column ingest encoding: numeric passthrough or one-hot over the sorted
// level set with the first level as reference.
struct ColumnEncoding {
  std::string name;
  bool numeric = true;
  std::vector<std::string> levels;
};

struct EncodingManifest {
  std::string time_col = "time";
  std::string event_col = "status";
  std::vector<ColumnEncoding> columns;
};

namespace detail {

inline bool parse_double_strict(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

inline int parse_event(const std::string& s, std::size_t row) {
  if (s == "0" || s == "false" || s == "FALSE") return 0;
  if (s == "1" || s == "true" || s == "TRUE") return 1;
  throw SurvError(ErrorCode::InvalidArgument,
                  "event value '" + s + "' at data row " + std::to_string(row + 1) +
                      " is not in {0,1,true,false,TRUE,FALSE}");
}

}  // namespace detail

struct IngestResult {
  SurvivalTask task;
  EncodingManifest manifest;
};

// Builds the manifest from the data (numeric columns pass through, string
// columns one-hot) and materializes the encoded task. Row order preserved.
inline IngestResult ingest_csv(const CsvTable& table, const std::string& time_col,
                               const std::string& event_col, const std::string& id) {
  if (table.rows.empty()) throw SurvError(ErrorCode::EmptyTask, "CSV has a header but no rows");
  const int tcol = table.column(time_col);
  const int ecol = table.column(event_col);

  EncodingManifest manifest;
  manifest.time_col = time_col;
  manifest.event_col = event_col;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (static_cast<int>(j) == tcol || static_cast<int>(j) == ecol) continue;
    ColumnEncoding enc;
    enc.name = table.header[j];
    std::set<std::string> levels;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string& v = table.rows[r][j];
      if (v.empty())
        throw SurvError(ErrorCode::MissingValue, "missing value at data row " +
                                                     std::to_string(r + 1) + " column '" +
                                                     enc.name + "'");
      double parsed;
      if (!detail::parse_double_strict(v, parsed)) enc.numeric = false;
      levels.insert(v);
    }
    if (!enc.numeric) enc.levels.assign(levels.begin(), levels.end());
    manifest.columns.push_back(std::move(enc));
  }

  const int n = static_cast<int>(table.rows.size());
  Eigen::VectorXd time(n);
  Eigen::VectorXi status(n);
  for (int r = 0; r < n; ++r) {
    const std::string& tv = table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(tcol)];
    double t;
    if (!detail::parse_double_strict(tv, t))
      throw SurvError(ErrorCode::InvalidArgument,
                      "cannot parse time value '" + tv + "' at data row " + std::to_string(r + 1));
    time[r] = t;
    status[r] = detail::parse_event(
        table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(ecol)],
        static_cast<std::size_t>(r));
  }

  Eigen::MatrixXd features;
  std::vector<std::string> feature_names;
  for (const auto& enc : manifest.columns) {
    if (enc.numeric) {
      feature_names.push_back(enc.name);
    } else {
      for (std::size_t l = 1; l < enc.levels.size(); ++l)
        feature_names.push_back(enc.name + "=" + enc.levels[l]);
    }
  }
  features.resize(n, static_cast<Eigen::Index>(feature_names.size()));
  for (int r = 0; r < n; ++r) {
    int out_j = 0;
    for (std::size_t j = 0, src = 0; src < table.header.size(); ++src) {
      if (static_cast<int>(src) == tcol || static_cast<int>(src) == ecol) continue;
      const auto& enc = manifest.columns[j++];
      const std::string& v = table.rows[static_cast<std::size_t>(r)][src];
      if (enc.numeric) {
        double parsed;
        if (!detail::parse_double_strict(v, parsed))
          throw SurvError(ErrorCode::InvalidArgument,
                          "cannot parse numeric value '" + v + "' in column '" + enc.name + "'");
        features(r, out_j++) = parsed;
      } else {
        auto it = std::find(enc.levels.begin(), enc.levels.end(), v);
        if (it == enc.levels.end())
          throw SurvError(ErrorCode::FeatureMismatch,
                          "unknown level '" + v + "' for column '" + enc.name + "'");
        const std::size_t idx = static_cast<std::size_t>(it - enc.levels.begin());
        for (std::size_t l = 1; l < enc.levels.size(); ++l)
          features(r, out_j++) = (idx == l) ? 1.0 : 0.0;
      }
    }
  }

  return IngestResult{SurvivalTask(id, std::move(features), std::move(feature_names),
                                   std::move(time), std::move(status)),
                      std::move(manifest)};
}

inline IngestResult ingest_csv_file(const std::string& path, const std::string& time_col,
                                    const std::string& event_col, const std::string& id) {
  CsvTable table = read_csv(path);
  return ingest_csv(table, time_col, event_col, id);
}

// Re-applies a stored manifest to new data (predict-time path); the level sets
// and column kinds must match the training-time encoding.
inline std::pair<Eigen::MatrixXd, std::vector<std::string>> apply_manifest(
    const EncodingManifest& manifest, const CsvTable& table) {
  if (table.rows.empty()) throw SurvError(ErrorCode::EmptyNewdata, "CSV has a header but no rows");
  std::vector<std::string> feature_names;
  std::vector<int> src_cols;
  for (const auto& enc : manifest.columns) {
    src_cols.push_back(table.column(enc.name));
    if (enc.numeric) {
      feature_names.push_back(enc.name);
    } else {
      for (std::size_t l = 1; l < enc.levels.size(); ++l)
        feature_names.push_back(enc.name + "=" + enc.levels[l]);
    }
  }
  const int n = static_cast<int>(table.rows.size());
  Eigen::MatrixXd features(n, static_cast<Eigen::Index>(feature_names.size()));
  for (int r = 0; r < n; ++r) {
    int out_j = 0;
    for (std::size_t j = 0; j < manifest.columns.size(); ++j) {
      const auto& enc = manifest.columns[j];
      const std::string& v =
          table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(src_cols[j])];
      if (v.empty())
        throw SurvError(ErrorCode::MissingValue,
                        "missing value at data row " + std::to_string(r + 1) + " column '" +
                            enc.name + "'");
      if (enc.numeric) {
        double parsed;
        if (!detail::parse_double_strict(v, parsed))
          throw SurvError(ErrorCode::InvalidArgument,
                          "cannot parse numeric value '" + v + "' in column '" + enc.name + "'");
        features(r, out_j++) = parsed;
      } else {
        auto it = std::find(enc.levels.begin(), enc.levels.end(), v);
        if (it == enc.levels.end())
          throw SurvError(ErrorCode::FeatureMismatch,
                          "unknown level '" + v + "' for column '" + enc.name + "'");
        const std::size_t idx = static_cast<std::size_t>(it - enc.levels.begin());
        for (std::size_t l = 1; l < enc.levels.size(); ++l)
          features(r, out_j++) = (idx == l) ? 1.0 : 0.0;
      }
    }
  }
  return {std::move(features), std::move(feature_names)};
}

}  // namespace survkit
