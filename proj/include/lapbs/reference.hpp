#pragma once

// Crank-Nicolson reference for the basket put and its on-disk cache.
//
// Cache layout: one line of JSON metadata terminated by '\n', then the
// (M1+1)*(M2+1) nodal values as little-endian IEEE-754 doubles in mesh node
// order (x1 fastest).

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "lapbs/cn_baseline.hpp"
#include "lapbs/fem2d.hpp"

namespace lapbs {

struct ReferenceSpec {
  int cells{512};
  double L{600.0};
  double dt{0.02};
  std::string cache{"basket_reference.bin"};
};

inline nlohmann::json reference_metadata(const Basket2D& b, const ReferenceSpec& spec) {
  return {{"format", "lapbs-reference-v1"},
          {"cells", spec.cells},
          {"L", spec.L},
          {"dt", spec.dt},
          {"r", b.r},
          {"a11", b.a[0][0]},
          {"a12", b.a[0][1]},
          {"a22", b.a[1][1]},
          {"strike", b.strike},
          {"maturity", b.maturity}};
}

/// Zero-Neumann at x_i = 0, zero-Dirichlet at x_i = L on the extended square.
inline RealField2D build_reference(const Basket2D& b, const ReferenceSpec& spec) {
  Basket2D ext = b;
  ext.L1 = ext.L2 = spec.L;
  const Mesh2D mesh(spec.L, spec.L, spec.cells, spec.cells);
  return march2d(mesh, ext, EdgeSpec::dirichlet_far(), MaxPutPayoff{b.strike},
                 MarchConfig::from_dt(b.maturity, spec.dt));
}

inline void save_reference(const std::string& path, const RealField2D& f, const nlohmann::json& meta) {
  static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");
  const auto tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("save_reference: cannot open " + tmp);
    os << meta.dump() << '\n';
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("save_reference: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

/// The cached field, or nullopt when the file is missing or was built from
/// different parameters.
inline std::optional<RealField2D> load_reference(const std::string& path, const nlohmann::json& meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::string line;
  if (!std::getline(is, line)) return std::nullopt;
  nlohmann::json stored;
  try {
    stored = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (stored != meta) return std::nullopt;
  const int cells = meta.at("cells").get<int>();
  const double L = meta.at("L").get<double>();
  RealField2D f{Mesh2D(L, L, cells, cells), {}};
  f.values.resize(f.mesh.nodes());
  is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (is.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(double))) return std::nullopt;
  return f;
}

/// Load the cache if it matches, otherwise build and store it.
inline RealField2D obtain_reference(const Basket2D& b, const ReferenceSpec& spec, bool rebuild = false,
                                    bool* built = nullptr) {
  const auto meta = reference_metadata(b, spec);
  if (!rebuild)
    if (auto f = load_reference(spec.cache, meta)) {
      if (built) *built = false;
      return std::move(*f);
    }
  auto f = build_reference(b, spec);
  const auto dir = std::filesystem::path(spec.cache).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  save_reference(spec.cache, f, meta);
  if (built) *built = true;
  return f;
}

}  // namespace lapbs
