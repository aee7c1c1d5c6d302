#pragma once

// Deterministic text output: shortest round-trip double formatting, CSV
// writing with a single comment header line, and JSON (de)serialization of
// the model parameters.

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "ful/common.hpp"
#include "ful/model.hpp"

namespace ful {

inline std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(long long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(const std::string& v) { return v; }
inline std::string fmt(const char* v) { return v; }

inline nlohmann::json params_to_json(const ModelParams& mp) {
  return nlohmann::json{{"A", mp.A}, {"B", mp.B}, {"T", mp.T}};
}

// Derived fields are always recomputed, never trusted from the file. Accepts
// either {A, B, T} or the resonant constructor form {A, B, p, q}.
inline ModelParams params_from_json(const nlohmann::json& j) {
  if (!j.contains("A") || !j.contains("B"))
    throw config_error("parameters need A and B");
  double A = j.at("A").get<double>();
  double B = j.at("B").get<double>();
  bool has_T = j.contains("T");
  bool has_pq = j.contains("p") || j.contains("q");
  if (has_T && has_pq)
    throw config_error("give either T or the resonant pair (p, q), not both");
  if (has_T) return ModelParams(A, B, j.at("T").get<double>());
  if (j.contains("p") && j.contains("q"))
    return ModelParams::quantum_resonant(A, B, j.at("p").get<long long>(),
                                         j.at("q").get<long long>());
  throw config_error("parameters need T or the resonant pair (p, q)");
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& columns,
            const std::string& header_note) {
    out_.open(path);
    if (!out_) throw error("cannot open output file: " + path);
    out_ << "# " << header_note << "\n" << columns << "\n";
  }

  template <typename... Ts>
  void row(const Ts&... vals) {
    bool first = true;
    ((out_ << (first ? "" : ","), first = false, out_ << fmt(vals)), ...);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline std::string header_note(const ModelParams& mp, const std::string& extra = "") {
  std::string note = std::string("ful ") + kVersion + " params=" + params_to_json(mp).dump();
  if (!extra.empty()) note += " " + extra;
  return note;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw error("cannot open output file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace ful
