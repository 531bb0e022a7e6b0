#pragma once

// CSV/JSON emission, content-hash run ids and run manifests. Result files
// are fully rendered in memory first and only then written, so a failing run
// leaves nothing behind.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "qmetric/chern.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/toolkit/config.hpp"

namespace qmetric::toolkit {

inline constexpr const char* kCodeVersion = "qmetric-0.3.0";

// 17 significant digits, '.' decimal point, independent of the global locale.
inline std::string format_number(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& add(double x) { return text(format_number(x)); }
    Row& add(std::size_t x) { return text(std::to_string(x)); }
    Row& add(int x) { return text(std::to_string(x)); }
    Row& add(const std::string& s) { return text(s); }
    Row& add(const char* s) { return text(s); }
    Row& add(const std::optional<double>& x) { return text(x ? format_number(*x) : std::string()); }

   private:
    friend class CsvTable;
    Row& text(std::string s) {
      if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        s = q + "\"";
      }
      cells_.push_back(std::move(s));
      return *this;
    }
    std::vector<std::string> cells_;
  };

  Row& row() {
    rows_.emplace_back();
    return rows_.back();
  }

  std::string render() const {
    std::string out = join(header_);
    for (const auto& r : rows_) {
      if (r.cells_.size() != header_.size()) throw ContractViolation("csv row width differs from header");
      out += join(r.cells_);
    }
    return out;
  }

  std::size_t size() const noexcept { return rows_.size(); }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
  }
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

inline std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

// Content hash of the configuration, the command and the code version.
inline std::string run_id(const RunConfig& cfg, const std::string& command) {
  return sha256_hex(std::string(kCodeVersion) + "\n" + command + "\n" + cfg.canonical()).substr(0, 16);
}

inline nlohmann::json chern_json(const ChernResult& r) {
  nlohmann::json j;
  j["value"] = r.value;
  j["mod2"] = r.mod2 ? nlohmann::json(*r.mod2) : nlohmann::json(nullptr);
  j["deviation"] = r.deviation;
  j["coarse"] = r.coarse;
  j["method"] = r.method;
  j["source"] = r.source;
  j["normalization"] = r.normalization.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.normalization);
  j["grid"] = r.grid;
  auto opt = [](const std::optional<double>& x) { return x ? nlohmann::json(*x) : nlohmann::json(nullptr); };
  j["delta_lambda"] = opt(r.delta_lambda);
  j["T"] = opt(r.T);
  j["substeps"] = r.substeps ? nlohmann::json(static_cast<std::size_t>(*r.substeps)) : nlohmann::json(nullptr);
  j["time_unit"] = r.time_unit ? nlohmann::json(*r.time_unit) : nlohmann::json(nullptr);
  j["clamped_nodes"] = r.clamped_nodes;
  j["calibration_ratio"] = opt(r.calibration_ratio);
  j["value_paper_printed"] = opt(r.value_paper_printed);
  j["value_oracle_calibrated"] = opt(r.value_oracle_calibrated);
  return j;
}

// JSON text with full double precision and a trailing newline.
inline std::string render_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Collects rendered outputs and writes them together with the manifest.
class RunOutput {
 public:
  RunOutput(const RunConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)), id_(run_id(cfg, command_)),
        started_(std::chrono::system_clock::now()) {}

  const std::string& id() const noexcept { return id_; }
  std::filesystem::path directory() const { return std::filesystem::path(cfg_.out) / id_; }

  void add_file(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }
  void headline(const std::string& key, nlohmann::json value) { headline_[key] = std::move(value); }

  nlohmann::json manifest() const {
    nlohmann::json m;
    m["run_id"] = id_;
    m["code_version"] = kCodeVersion;
    m["command"] = command_;
    m["started_utc"] = utc_timestamp(started_);
    m["finished_utc"] = utc_timestamp(std::chrono::system_clock::now());
    m["config"] = cfg_.doc;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& f : files_) outs.push_back(f.first);
    m["outputs"] = outs;
    m["headline"] = headline_.is_null() ? nlohmann::json::object() : headline_;
    return m;
  }

  // Writes every file, then the manifest. Anything written is removed again
  // if a later write fails.
  std::filesystem::path commit() const {
    namespace fs = std::filesystem;
    const fs::path dir = directory();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    std::vector<fs::path> written;
    auto write = [&](const std::string& name, const std::string& content) {
      const fs::path p = dir / name;
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      written.push_back(p);
      out << content;
      out.close();
      if (!out) throw Error("failed to write '" + p.string() + "'");
    };
    try {
      for (const auto& f : files_) write(f.first, f.second);
      write("manifest.json", render_json(manifest()));
    } catch (...) {
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
    return dir;
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::string id_;
  std::chrono::system_clock::time_point started_;
  std::vector<std::pair<std::string, std::string>> files_;
  nlohmann::json headline_;
};

}  // namespace qmetric::toolkit
