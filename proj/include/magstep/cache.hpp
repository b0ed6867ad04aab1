#pragma once

// On-disk cache for spectral invariants, keyed by (a, L, n_points).  The
// document is a versioned JSON object holding exactly the constants and
// profiles that downstream 2D runs consume; rewriting the same invariants
// reproduces the file byte for byte.

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>

#include <json.hpp>

#include "magstep/core.hpp"
#include "magstep/invariants.hpp"
#include "magstep/io.hpp"

namespace magstep {

inline constexpr int kCacheSchemaVersion = 1;

/// Cache directory resolution: the MAGSTEP_CACHE environment variable wins
/// over the configured directory.
inline std::filesystem::path resolve_cache_dir(const std::string& configured) {
  if (const char* env = std::getenv("MAGSTEP_CACHE"); env && *env) {
    return std::filesystem::path(env);
  }
  return std::filesystem::path(configured);
}

inline std::string cache_key(double a, const Grid1D& g) {
  return "invariants_a" + format_double(a) + "_L" + format_double(g.L) + "_n" +
         std::to_string(g.n_points) + ".json";
}

/// Serializes the shareable subset of SpectralInvariants.  Key order is fixed
/// so the byte stream is deterministic.
inline std::string invariants_to_json(const SpectralInvariants& inv) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kCacheSchemaVersion;
  doc["a"] = inv.a;
  doc["grid"] = {{"L", inv.grid.L}, {"n", inv.grid.n_points}};
  doc["beta_a"] = inv.beta_a;
  doc["zeta_a"] = inv.zeta_a;
  doc["M2"] = inv.M2;
  doc["M3"] = inv.M3;
  doc["I2"] = inv.I2;
  doc["c2"] = inv.c2;
  doc["beta_ext"] = inv.beta_ext;
  doc["zeta_ext"] = inv.zeta_ext;
  doc["I2_ext"] = inv.I2_ext;
  doc["c2_ext"] = inv.c2_ext;
  doc["phi0"] = inv.phi0;
  doc["dphi0"] = inv.dphi0;
  doc["phi_a"] = inv.phi_a;
  doc["phi_cor"] = inv.phi_cor;
  return doc.dump(2) + "\n";
}

/// Parses a cache document back into a (partial) SpectralInvariants.  Fields
/// that are not part of the document (diagnostic extras, the second band
/// derivative) are left NaN; the discrete corrector pairing is recomputed
/// from the stored profile since it is a cheap local sum.
inline SpectralInvariants invariants_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  require(doc.value("schema_version", -1) == kCacheSchemaVersion,
          "invariants cache: unsupported schema version");
  SpectralInvariants inv;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  inv.a = doc.at("a").get<double>();
  inv.grid = Grid1D(doc.at("grid").at("L").get<double>(),
                    doc.at("grid").at("n").get<std::size_t>());
  inv.beta_a = doc.at("beta_a").get<double>();
  inv.zeta_a = doc.at("zeta_a").get<double>();
  inv.M2 = doc.at("M2").get<double>();
  inv.M3 = doc.at("M3").get<double>();
  inv.I2 = doc.at("I2").get<double>();
  inv.c2 = doc.at("c2").get<double>();
  inv.beta_ext = doc.at("beta_ext").get<double>();
  inv.zeta_ext = doc.at("zeta_ext").get<double>();
  inv.I2_ext = doc.at("I2_ext").get<double>();
  inv.c2_ext = doc.at("c2_ext").get<double>();
  inv.phi0 = doc.at("phi0").get<double>();
  inv.dphi0 = doc.at("dphi0").get<double>();
  inv.phi_a = doc.at("phi_a").get<std::vector<double>>();
  inv.phi_cor = doc.at("phi_cor").get<std::vector<double>>();
  require(inv.phi_a.size() == inv.grid.n_points &&
              inv.phi_cor.size() == inv.grid.n_points,
          "invariants cache: profile length does not match the grid");
  inv.mu_second = nan;
  inv.M1 = nan;
  inv.M1_raw = inv.M2_raw = inv.M3_raw = nan;
  inv.M2_closed = inv.M3_closed = nan;
  inv.M2_closed_ext = inv.M3_closed_ext = nan;
  inv.int_binv = nan;
  {
    std::vector<double> w = h1_weight(inv.a, inv.zeta_a, inv.grid);
    std::vector<double> h1phi = h1_apply(w, inv.phi_a, inv.grid);
    double acc = 0.0;
    for (std::size_t i = 0; i < h1phi.size(); ++i) acc += h1phi[i] * inv.phi_a[i];
    inv.M3_weak = acc * inv.grid.step();
  }
  return inv;
}

/// Loads cached invariants if a document for (a, grid) exists.
inline std::optional<SpectralInvariants> cache_load(
    const std::filesystem::path& dir, double a, const Grid1D& g) {
  std::filesystem::path file = dir / cache_key(a, g);
  if (!std::filesystem::exists(file)) return std::nullopt;
  return invariants_from_json(read_file(file));
}

/// Serializes and stores invariants; returns the exact bytes written so the
/// caller can emit an identical output document.
inline std::string cache_store(const std::filesystem::path& dir,
                               const SpectralInvariants& inv) {
  std::string text = invariants_to_json(inv);
  atomic_write_file(dir / cache_key(inv.a, inv.grid), text);
  return text;
}

/// Raw cached bytes for (a, grid), if present (byte-identical replay path).
inline std::optional<std::string> cache_load_bytes(
    const std::filesystem::path& dir, double a, const Grid1D& g) {
  std::filesystem::path file = dir / cache_key(a, g);
  if (!std::filesystem::exists(file)) return std::nullopt;
  return read_file(file);
}

}  // namespace magstep
