#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rotor_spectra/error.hpp"
#include "rotor_spectra/model.hpp"

namespace rotor {

// Model configuration file (JSON):
//
//   {
//     "beta": ["pi/20", "e/7", "1/sqrt2"],   // tokens or numbers
//     "L": [11, 7, 15],
//     "generator": "laplacian",              // or an N x N array of rows
//     "delta": 0.1,
//     "epsilons": [0.1],
//     "ks": [1],
//     "bins": 128, "seed": 1, "tol": 1e-9, "x_res": 256,
//     "paths": 1000, "steps": 1000, "top_m": 3
//   }
//
// Everything except beta and L is optional.

struct RunConfig {
  std::vector<double> beta;
  std::vector<int> widths;
  std::optional<MatrixR> generator;  // empty: Laplacian
  double delta = 0.0;
  std::vector<double> epsilons{0.1};
  std::vector<long> ks{1};
  int bins = 128;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  int x_res = 256;
  int paths = 1000;
  int steps = 1000;
  int top_m = 3;
  std::string source_text;  // raw file contents, hashed into the manifest

  BandModel model() const { return build_band_model(beta, widths); }
  NoiseGenerator noise() const {
    if (generator) return NoiseGenerator(*generator);
    int n = 0;
    for (int w : widths) n += w;
    return laplacian_generator(n);
  }
};

/// Accepts the tokens pi/20, e/7 and 1/sqrt2, or a plain decimal number.
inline double parse_speed(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw Error(ErrorCode::Config, "speed must be a number or a string token");
  const std::string s = v.get<std::string>();
  if (s == "pi/20") return std::numbers::pi / 20.0;
  if (s == "e/7") return std::numbers::e / 7.0;
  if (s == "1/sqrt2") return 1.0 / std::numbers::sqrt2;
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(ErrorCode::Config, "unknown speed token '" + s + "'");
  return out;
}

inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  RunConfig c;
  c.source_text = text;
  try {
    if (!j.contains("beta") || !j.contains("L")) throw Error(ErrorCode::Config, "config needs beta and L");
    for (const auto& b : j.at("beta")) c.beta.push_back(parse_speed(b));
    c.widths = j.at("L").get<std::vector<int>>();
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      if (g.is_string()) {
        if (g.get<std::string>() != "laplacian") throw Error(ErrorCode::Config, "unknown generator name");
      } else {
        const auto rows = g.get<std::vector<std::vector<double>>>();
        MatrixR m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows.size()) throw Error(ErrorCode::Config, "generator must be square");
          for (std::size_t col = 0; col < rows.size(); ++col)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = rows[r][col];
        }
        c.generator = std::move(m);
      }
    }
    if (j.contains("delta")) c.delta = j.at("delta").get<double>();
    if (j.contains("epsilons")) c.epsilons = j.at("epsilons").get<std::vector<double>>();
    if (j.contains("ks")) c.ks = j.at("ks").get<std::vector<long>>();
    if (j.contains("bins")) c.bins = j.at("bins").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("x_res")) c.x_res = j.at("x_res").get<int>();
    if (j.contains("paths")) c.paths = j.at("paths").get<int>();
    if (j.contains("steps")) c.steps = j.at("steps").get<int>();
    if (j.contains("top_m")) c.top_m = j.at("top_m").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("bad field type: ") + e.what());
  }
  int n = 0;
  for (int w : c.widths) n += w;
  if (c.beta.size() != c.widths.size() || c.beta.empty()) throw Error(ErrorCode::Config, "beta and L differ in length");
  if (c.generator && c.generator->rows() != n) throw Error(ErrorCode::Config, "generator size does not match sum(L)");
  if (c.delta < 0) throw Error(ErrorCode::Config, "delta must be nonnegative");
  for (double e : c.epsilons)
    if (!(e >= 0)) throw Error(ErrorCode::Config, "epsilons must be nonnegative");
  if (c.bins < 2) throw Error(ErrorCode::Config, "bins must be at least 2");
  if (c.x_res < 1) throw Error(ErrorCode::Config, "x_res must be positive");
  if (c.paths < 0 || c.steps < 0 || c.top_m < 1) throw Error(ErrorCode::Config, "paths, steps, top_m out of range");
  if (!(c.tol > 0)) throw Error(ErrorCode::Config, "tol must be positive");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// FNV-1a, 64 bit. Identifies a config in run manifests.
inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace rotor
