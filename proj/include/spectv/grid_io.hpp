#pragma once

#include <spectv/grid.hpp>

#include "json.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace spectv {

enum class Method { gradient_flow, variational, iss };
enum class DomainKind { wavelength, frequency };
// which end of the t axis the residual belongs to
enum class ResidualTail { right, left };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::gradient_flow: return "gradient-flow";
    case Method::variational: return "variational";
    case Method::iss: return "iss";
  }
  return "";
}
inline std::string to_string(DomainKind k) {
  return k == DomainKind::wavelength ? "wavelength" : "frequency";
}
inline std::string to_string(ResidualTail r) { return r == ResidualTail::right ? "right" : "left"; }

inline Method method_from_string(const std::string& s) {
  if (s == "gradient-flow") return Method::gradient_flow;
  if (s == "variational") return Method::variational;
  if (s == "iss") return Method::iss;
  throw Error(Errc::validation, "unknown method '" + s + "'");
}
inline DomainKind domain_from_string(const std::string& s) {
  if (s == "wavelength") return DomainKind::wavelength;
  if (s == "frequency") return DomainKind::frequency;
  throw Error(Errc::validation, "unknown domainKind '" + s + "'");
}
inline ResidualTail tail_from_string(const std::string& s) {
  if (s == "right") return ResidualTail::right;
  if (s == "left") return ResidualTail::left;
  throw Error(Errc::validation, "unknown residualTail '" + s + "'");
}

struct DecompositionArchive {
  Method method = Method::gradient_flow;
  DomainKind domainKind = DomainKind::wavelength;
  double dt = 1.0;
  double mean = 0.0;
  std::vector<double> tGrid;
  std::vector<Grid> bands;
  Grid residual;
  // wavelength archives from a forward flow keep t > t_N content (right);
  // ISS keeps s > s_N content, which is t -> 0 (left)
  ResidualTail residualTail = ResidualTail::right;

  void validate() const {
    if (tGrid.empty()) throw Error(Errc::validation, "empty tGrid");
    if (bands.size() != tGrid.size())
      throw Error(Errc::validation, "bands length differs from tGrid length");
    for (std::size_t i = 0; i < tGrid.size(); ++i) {
      if (!(tGrid[i] > 0.0)) throw Error(Errc::validation, "tGrid entries must be > 0");
      if (i && !(tGrid[i] > tGrid[i - 1]))
        throw Error(Errc::validation, "tGrid must be strictly increasing");
    }
    residual.validate();
    for (const auto& b : bands)
      if (!b.same_shape(residual)) throw Error(Errc::shape, "band dims differ from residual");
  }

  bool operator==(const DecompositionArchive&) const = default;
};

namespace detail {

inline double parse_double(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Errc::malformed_input,
                "line " + std::to_string(line) + ": cannot parse '" + std::string(s) + "'");
  return v;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline Grid read_csv(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  std::vector<double> vals;
  std::size_t cols = 0, rows = 0, lineNo = 0;
  bool any2d = false;
  double spacing = 1.0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineNo;
    std::string_view sv(line);
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (sv.front() == '#') {
      auto k = sv.find("spacing=");
      if (k != std::string_view::npos) spacing = detail::parse_double(sv.substr(k + 8), lineNo);
      continue;
    }
    std::size_t n = 0;
    std::size_t start = 0;
    while (true) {
      auto pos = sv.find(',', start);
      vals.push_back(detail::parse_double(sv.substr(start, pos - start), lineNo));
      ++n;
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (n > 1) any2d = true;
    if (rows == 0) cols = n;
    else if (n != cols)
      throw Error(Errc::shape, "line " + std::to_string(lineNo) + ": ragged row");
    ++rows;
  }
  if (rows == 0) throw Error(Errc::malformed_input, "empty file " + path.string());
  if (!any2d) return Grid({rows}, std::move(vals), spacing);
  return Grid({rows, cols}, std::move(vals), spacing);
}

inline void write_csv(const Grid& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  const std::size_t C = g.ndim() == 2 ? g.cols() : 1;
  if (g.spacing != 1.0) out << "# spacing=" << detail::fmt(g.spacing) << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << detail::fmt(g[i]);
    out << (((i + 1) % C == 0) ? '\n' : ',');
  }
}

inline Grid read_pgm(const std::filesystem::path& path) {
  const std::string data = detail::read_file(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < data.size()) {
      char c = data[pos];
      if (c == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    std::size_t b = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(b, pos - b);
  };
  if (data.size() < 2 || data.compare(0, 2, "P5") != 0)
    throw Error(Errc::unsupported_format, "only binary PGM (P5) is supported");
  pos = 2;
  auto num = [&](const char* what) {
    std::string t = token();
    long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size() || v <= 0)
      throw Error(Errc::malformed_input, std::string("bad PGM ") + what);
    return static_cast<std::size_t>(v);
  };
  std::size_t w = num("width"), h = num("height"), maxval = num("maxval");
  if (maxval > 65535) throw Error(Errc::unsupported_format, "PGM maxval > 65535");
  ++pos;  // single whitespace after maxval
  const std::size_t bps = maxval < 256 ? 1 : 2;
  if (data.size() < pos + w * h * bps) throw Error(Errc::malformed_input, "truncated PGM raster");
  Grid g({h, w});
  const auto* b = reinterpret_cast<const unsigned char*>(data.data() + pos);
  for (std::size_t i = 0; i < w * h; ++i) {
    unsigned v = bps == 1 ? b[i] : (unsigned(b[2 * i]) << 8) | b[2 * i + 1];
    g[i] = double(v) / double(maxval);
  }
  return g;
}

inline void write_pgm(const Grid& g, const std::filesystem::path& path, bool normalize) {
  if (g.ndim() != 2) throw Error(Errc::dimensionality, "PGM output needs a 2D grid");
  double lo = 0.0, hi = 1.0;
  if (normalize) {
    auto [a, b] = std::minmax_element(g.values.begin(), g.values.end());
    lo = *a;
    hi = *b;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << "P5\n" << g.cols() << ' ' << g.rows() << "\n255\n";
  std::vector<unsigned char> buf(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double v = hi > lo ? (g[i] - lo) / (hi - lo) : 0.0;
    v = std::clamp(v, 0.0, 1.0);
    buf[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

// extension-based dispatch used by the CLI
inline bool is_pgm_path(const std::filesystem::path& p) {
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ".pgm";
}
inline Grid read_grid(const std::filesystem::path& p) { return is_pgm_path(p) ? read_pgm(p) : read_csv(p); }
inline void write_grid(const Grid& g, const std::filesystem::path& p) {
  if (is_pgm_path(p)) write_pgm(g, p, true);
  else write_csv(g, p);
}

namespace detail {

inline void write_raw(const Grid& g, const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  std::vector<std::uint64_t> buf(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(g[i]);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    buf[i] = u;
  }
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * 8));
  if (!out) throw Error(Errc::io, "short write " + p.string());
}

inline Grid read_raw(const std::filesystem::path& p, const std::vector<std::size_t>& dims, double h) {
  if (!std::filesystem::exists(p))
    throw Error(Errc::corrupt_archive, "missing raster file " + p.filename().string());
  std::string data = read_file(p);
  const std::size_t n = Grid::product(dims);
  if (data.size() != n * 8)
    throw Error(Errc::corrupt_archive, "raster file " + p.filename().string() + " has wrong size");
  Grid g(dims, h);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t u;
    std::memcpy(&u, data.data() + 8 * i, 8);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    g[i] = std::bit_cast<double>(u);
  }
  return g;
}

}  // namespace detail

inline void write_archive(const DecompositionArchive& a, const std::filesystem::path& dir) {
  a.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json m;
  m["method"] = to_string(a.method);
  m["domainKind"] = to_string(a.domainKind);
  m["dt"] = a.dt;
  m["mean"] = a.mean;
  m["tGrid"] = a.tGrid;
  m["dims"] = a.residual.dims;
  m["spacing"] = a.residual.spacing;
  m["residualTail"] = to_string(a.residualTail);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < a.bands.size(); ++i) {
    std::ostringstream nm;
    nm << "band_" << std::setw(4) << std::setfill('0') << i << ".f64";
    names.push_back(nm.str());
    detail::write_raw(a.bands[i], dir / names.back());
  }
  m["bands"] = names;
  m["residual"] = "residual.f64";
  detail::write_raw(a.residual, dir / "residual.f64");
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(Errc::io, "cannot write manifest");
  out << m.dump(2) << '\n';
}

inline DecompositionArchive read_archive(const std::filesystem::path& dir) {
  const auto mp = dir / "manifest.json";
  if (!std::filesystem::exists(mp)) throw Error(Errc::corrupt_archive, "missing manifest.json");
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(detail::read_file(mp));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_archive, std::string("manifest.json: ") + e.what());
  }
  DecompositionArchive a;
  try {
    a.method = method_from_string(m.at("method").get<std::string>());
    a.domainKind = domain_from_string(m.at("domainKind").get<std::string>());
    a.dt = m.at("dt").get<double>();
    a.mean = m.at("mean").get<double>();
    a.tGrid = m.at("tGrid").get<std::vector<double>>();
    auto dims = m.at("dims").get<std::vector<std::size_t>>();
    double h = m.value("spacing", 1.0);
    if (m.contains("residualTail")) a.residualTail = tail_from_string(m["residualTail"].get<std::string>());
    auto names = m.at("bands").get<std::vector<std::string>>();
    if (a.tGrid.empty()) throw Error(Errc::validation, "empty tGrid");
    if (names.size() != a.tGrid.size())
      throw Error(Errc::corrupt_archive, "band list length differs from tGrid length");
    for (const auto& nm : names) a.bands.push_back(detail::read_raw(dir / nm, dims, h));
    a.residual = detail::read_raw(dir / m.value("residual", std::string("residual.f64")), dims, h);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_archive, std::string("manifest.json: ") + e.what());
  }
  a.validate();
  return a;
}

}  // namespace spectv
