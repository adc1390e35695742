#pragma once

// Writes a run's outputs: metrics.json, parity CSVs, SVG plots, model blobs,
// noise reports and the manifest. The output directory is held under a lock
// file for the duration; on failure every file written so far is removed.

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include "selnoise/core/csv.hpp"
#include "selnoise/core/error.hpp"
#include "selnoise/core/hash.hpp"
#include "selnoise/core/numfmt.hpp"
#include "selnoise/experiment/runner.hpp"
#include "selnoise/experiment/svg.hpp"

#ifndef SELNOISE_VERSION
#define SELNOISE_VERSION "0.1.0"
#endif

namespace selnoise::experiment {

namespace fs = std::filesystem;

inline constexpr const char* kLockName = ".selnoise.lock";

inline std::string parity_csv(const std::vector<ParityRecord>& records) {
  std::ostringstream out;
  csv::write_row(out, {"id", "y", "yhat", "s"});
  for (const auto& r : records)
    csv::write_row(out, {std::to_string(r.id), format_real(r.y), format_real(r.yhat), r.s ? "1" : "0"});
  return out.str();
}

inline std::vector<ParityRecord> read_parity_csv(const std::string& text, const std::string& source) {
  const csv::Table t = csv::parse(text);
  const auto ci = t.column("id"), cy = t.column("y"), cp = t.column("yhat"), cs = t.column("s");
  if (ci == csv::Table::npos || cy == csv::Table::npos || cp == csv::Table::npos || cs == csv::Table::npos)
    throw ValidationError(source + ": parity CSV needs columns id, y, yhat, s");
  std::vector<ParityRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto id = row.size() > ci ? parse_int<std::int64_t>(row[ci]) : std::nullopt;
    const auto y = row.size() > cy ? parse_real(row[cy]) : std::nullopt;
    const auto p = row.size() > cp ? parse_real(row[cp]) : std::nullopt;
    const bool s_ok = row.size() > cs && (row[cs] == "0" || row[cs] == "1");
    if (!id || !y || !p || !s_ok) throw ValidationError(source + ":" + std::to_string(t.lines[r]) + ": malformed parity row");
    out.push_back({*id, *y, *p, row[cs] == "1"});
  }
  return out;
}

inline std::vector<svg::BarGroup> bar_groups(const RunResult& r, const std::string& split_label) {
  std::vector<svg::BarGroup> g;
  for (const auto& c : r.cells)
    if (c.split.label == split_label) g.push_back({c.condition.name, c.mse_s0, c.mse_s1});
  return g;
}

// Bar groups from a metrics.json document, optionally restricted to one split.
inline std::vector<svg::BarGroup> bar_groups_from_metrics(const std::string& text, const std::string& split_label,
                                                          const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(source + ": not valid JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("cells") || !j["cells"].is_array())
    throw ValidationError(source + ": metrics JSON needs a \"cells\" array");
  std::set<std::string> splits;
  for (const auto& c : j["cells"]) splits.insert(c.value("split", ""));
  std::vector<svg::BarGroup> out;
  for (const auto& c : j["cells"]) {
    const std::string sp = c.value("split", "");
    if (!split_label.empty() && sp != split_label) continue;
    auto num = [&](const char* k) -> std::optional<double> {
      if (!c.contains(k) || c[k].is_null()) return std::nullopt;
      if (!c[k].is_number()) throw ValidationError(source + ": " + k + " must be a number");
      return c[k].get<double>();
    };
    const std::string name = c.value("condition", "?");
    out.push_back({split_label.empty() && splits.size() > 1 ? sp + "/" + name : name, num("mse_s0"), num("mse_s1")});
  }
  if (out.empty()) throw ValidationError(source + ": no cells to plot");
  return out;
}

class OutputWriter {
 public:
  explicit OutputWriter(fs::path root) : root_(std::move(root)) {}

  OutputWriter(const OutputWriter&) = delete;
  OutputWriter& operator=(const OutputWriter&) = delete;

  ~OutputWriter() {
    if (!committed_) rollback();
    release();
  }

  void acquire() {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw IoError("cannot create output directory " + root_.string() + ": " + ec.message());
    const fs::path lock = root_ / kLockName;
    const int fd = ::open(lock.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST) throw IoError("output directory " + root_.string() + " is locked by another run (" + lock.string() + ")");
      throw IoError("cannot create lock " + lock.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
    locked_ = true;
  }

  // Atomic write through a temporary sibling and rename.
  void write(const std::string& rel, const std::string& content) {
    const fs::path path = root_ / rel;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write " + tmp.string());
      out << content;
      out.flush();
      if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
      fs::remove(tmp, ec);
      throw IoError("cannot move " + tmp.string() + " into place");
    }
    written_.push_back({rel, content});
  }

  const std::vector<std::pair<std::string, std::string>>& written() const { return written_; }
  void commit() { committed_ = true; }

 private:
  void rollback() {
    std::error_code ec;
    for (const auto& [rel, _] : written_) fs::remove(root_ / rel, ec);
    for (const char* dir : {"parity", "plots", "models", "noise"}) {
      const fs::path d = root_ / dir;
      if (fs::is_directory(d, ec) && fs::is_empty(d, ec)) fs::remove(d, ec);
    }
  }

  void release() {
    if (!locked_) return;
    std::error_code ec;
    fs::remove(root_ / kLockName, ec);
    locked_ = false;
  }

  fs::path root_;
  bool locked_ = false;
  bool committed_ = false;
  std::vector<std::pair<std::string, std::string>> written_;
};

inline OrderedJson manifest_json(const RunResult& r, const std::vector<std::pair<std::string, std::string>>& files,
                                 std::size_t threads) {
  OrderedJson m;
  m["format"] = "selnoise-manifest";
  m["version"] = 1;
  m["software_version"] = SELNOISE_VERSION;
  m["config_hash"] = r.config.hash();
  m["config"] = r.config.resolved();
  m["threads"] = threads;
  OrderedJson seeds;
  seeds["master"] = r.config.seed;
  seeds["data"] = r.data_seed;
  if (r.config.kind == Kind::gcn) seeds["split"] = r.split_seed;
  OrderedJson trials = OrderedJson::array();
  for (std::size_t t = 0; t < r.trial_seeds.size(); ++t)
    trials.push_back({{"trial", t},
                      {"subsample", r.trial_seeds[t].subsample},
                      {"noise", r.trial_seeds[t].noise},
                      {"train", r.trial_seeds[t].train}});
  seeds["trials"] = trials;
  m["seeds"] = seeds;
  OrderedJson splits = OrderedJson::array();
  for (const auto& s : r.splits)
    splits.push_back({{"label", s.label},
                      {"threshold", s.predicate.threshold},
                      {"percentile", detail::opt(s.percentile)},
                      {"direction", to_string(s.predicate.direction)}});
  m["splits"] = splits;
  if (r.config.kind == Kind::gcn) m["dropped_rows"] = r.dropped_rows;
  OrderedJson outs = OrderedJson::array();
  for (const auto& [rel, content] : files)
    outs.push_back({{"path", rel}, {"bytes", content.size()}, {"fnv1a", ExperimentConfig::hex64(fnv1a(content))}});
  m["outputs"] = outs;
  OrderedJson timings;
  for (const auto& [name, ms] : r.timings_ms) timings[name] = ms;
  m["timings_ms"] = timings;
  return m;
}

// Writes everything under `out`. Returns the list of files written (relative paths).
inline std::vector<std::string> write_outputs(const RunResult& r, const fs::path& out, std::size_t threads = 1) {
  OutputWriter w(out);
  w.acquire();
  detail::stage("write", [&] {
    w.write("metrics.json", r.metrics_json());
    for (const auto& c : r.cells) {
      if (r.config.eval.parity) w.write("parity/" + c.file_stem() + ".csv", parity_csv(c.parity));
      if (r.config.eval.plots)
        w.write("plots/" + c.file_stem() + ".svg", svg::parity(c.parity, c.split.label + " / " + c.condition.name));
      if (c.model_blob) w.write("models/" + c.file_stem() + ".json", *c.model_blob);
      if (c.noise_report) w.write("noise/" + c.file_stem() + ".json", c.noise_report->to_json());
    }
    if (r.config.eval.plots)
      for (const auto& s : r.splits)
        w.write("plots/region_bars__" + s.label + ".svg", svg::region_bars(bar_groups(r, s.label), s.label));
    w.write("manifest.json", manifest_json(r, w.written(), threads).dump(2) + "\n");
    return 0;
  });
  w.commit();
  std::vector<std::string> files;
  for (const auto& [rel, _] : w.written()) files.push_back(rel);
  return files;
}

// A manifest document replays as its embedded config.
inline bool is_manifest(const nlohmann::json& j) {
  return j.is_object() && j.contains("format") && j["format"] == "selnoise-manifest";
}

inline ExperimentConfig config_from_document(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (is_manifest(j)) {
    if (!j.contains("config")) throw ValidationError("manifest has no embedded config");
    return parse_config(j["config"]);
  }
  return parse_config(j);
}

}  // namespace selnoise::experiment
