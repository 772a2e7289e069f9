#pragma once

#include <spectv/flows.hpp>
#include <spectv/grid_io.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace spectv {

enum class SpectrumKind { S1, S2sq, S3sq };

inline std::string to_string(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::S1: return "S1";
    case SpectrumKind::S2sq: return "S2sq";
    case SpectrumKind::S3sq: return "S3sq";
  }
  return "";
}

struct SpectrumCurve {
  SpectrumKind kind = SpectrumKind::S1;
  DomainKind domainKind = DomainKind::wavelength;
  std::vector<double> tGrid, weights, values;
  std::vector<bool> negative;

  // S(t): S1 as is, the square-root of the clipped value otherwise
  std::vector<double> magnitude() const {
    std::vector<double> m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      m[i] = kind == SpectrumKind::S1 ? values[i] : std::sqrt(std::max(0.0, values[i]));
    return m;
  }
  double integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * weights[i];
    return s;
  }
};

// S1 = ||phi||_1, S2sq = <phi, 2 t p>, S3sq = <phi, f>. S2 uses the trace:
// for the gradient flow p at t_n is the centred difference
// (u_{n-1} - u_{n+1})/(2 dt), which is the average of the implicit
// subgradients p_n and p_{n+1}.
inline SpectrumCurve spectrum(const DecompositionArchive& a, SpectrumKind kind,
                              const FlowTrace* trace = nullptr, const Grid* f = nullptr) {
  a.validate();
  SpectrumCurve c;
  c.kind = kind;
  c.domainKind = a.domainKind;
  c.tGrid = a.tGrid;
  c.weights = quadrature_weights(a.tGrid);
  c.values.assign(a.tGrid.size(), 0.0);
  if (kind == SpectrumKind::S2sq) {
    if (!trace) throw Error(Errc::missing_dependency, "S2 needs the flow trace");
    if (a.method == Method::iss || trace->method == Method::iss || a.domainKind != DomainKind::wavelength)
      throw Error(Errc::method_mismatch, "S2 is defined for forward-flow wavelength archives");
    if (trace->u.size() != a.bands.size() + 2)
      throw Error(Errc::shape, "trace length does not match archive");
  }
  if (kind == SpectrumKind::S3sq) {
    if (!f) throw Error(Errc::missing_dependency, "S3 needs the input f");
    require_same_shape(*f, a.residual);
  }
  for (std::size_t i = 0; i < a.bands.size(); ++i) {
    const Grid& b = a.bands[i];
    double v = 0.0;
    switch (kind) {
      case SpectrumKind::S1: v = norm1(b); break;
      case SpectrumKind::S3sq: v = dot(b, *f); break;
      case SpectrumKind::S2sq: {
        const std::size_t n = i + 1;
        const double tn = a.tGrid[i];
        Grid pb = like(b);
        if (trace->method == Method::gradient_flow) {
          for (std::size_t j = 0; j < pb.size(); ++j)
            pb[j] = (trace->u[n - 1][j] - trace->u[n + 1][j]) / (2.0 * trace->dt);
        } else {
          pb = trace->p[n];
        }
        v = 2.0 * tn * dot(b, pb);
        break;
      }
    }
    c.values[i] = v;
  }
  c.negative.resize(c.values.size());
  for (std::size_t i = 0; i < c.values.size(); ++i) c.negative[i] = c.values[i] < 0.0;
  return c;
}

// mean + sum_n band_n w_n + (residual - mean)
inline Grid reconstruct(const DecompositionArchive& a) {
  a.validate();
  const auto w = quadrature_weights(a.tGrid);
  Grid out = a.residual;
  for (std::size_t n = 0; n < a.bands.size(); ++n) axpy(out, w[n], a.bands[n]);
  return out;
}

enum class Interpolation { left_constant, linear };

inline std::string to_string(Interpolation i) {
  return i == Interpolation::linear ? "linear" : "left-constant";
}

// H(t): leftTail before the first knot, rightTail after the last one.
struct TransferFunction {
  std::vector<std::pair<double, double>> knots;
  Interpolation interpolation = Interpolation::left_constant;
  double leftTail = 0.0;
  double rightTail = 1.0;

  void validate() const {
    if (knots.empty()) throw Error(Errc::validation, "transfer function needs a knot");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!std::isfinite(knots[i].first) || !std::isfinite(knots[i].second))
        throw Error(Errc::validation, "non-finite knot");
      if (i && !(knots[i].first > knots[i - 1].first))
        throw Error(Errc::validation, "knots must be strictly increasing");
    }
    if (!std::isfinite(leftTail) || !std::isfinite(rightTail))
      throw Error(Errc::validation, "non-finite tail");
  }

  double operator()(double t) const {
    if (t < knots.front().first) return leftTail;
    if (t > knots.back().first) return rightTail;
    auto it = std::upper_bound(knots.begin(), knots.end(), t,
                               [](double v, const auto& k) { return v < k.first; });
    const auto& lo = *(it - 1);
    if (interpolation == Interpolation::left_constant || it == knots.end() || lo.first == t)
      return lo.second;
    const double s = (t - lo.first) / (it->first - lo.first);
    return lo.second + s * (it->second - lo.second);
  }
};

// aH1 + bH2 sampled on the union of knots. Exact for left-constant inputs.
inline TransferFunction combine(double a, const TransferFunction& h1, double b, const TransferFunction& h2) {
  TransferFunction r;
  r.interpolation = (h1.interpolation == Interpolation::left_constant &&
                     h2.interpolation == Interpolation::left_constant)
                        ? Interpolation::left_constant
                        : Interpolation::linear;
  r.leftTail = a * h1.leftTail + b * h2.leftTail;
  r.rightTail = a * h1.rightTail + b * h2.rightTail;
  std::vector<double> ts;
  for (auto& k : h1.knots) ts.push_back(k.first);
  for (auto& k : h2.knots) ts.push_back(k.first);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  for (double t : ts) r.knots.emplace_back(t, a * h1(t) + b * h2(t));
  return r;
}

inline TransferFunction ideal_lpf(double tc) {
  if (!(tc >= 0)) throw Error(Errc::validation, "cutoff must be >= 0");
  return {{{tc, 1.0}}, Interpolation::left_constant, 0.0, 1.0};
}
inline TransferFunction ideal_hpf(double tc) {
  if (!(tc >= 0)) throw Error(Errc::validation, "cutoff must be >= 0");
  return {{{tc, 0.0}}, Interpolation::left_constant, 1.0, 0.0};
}
inline TransferFunction band_pass(double t1, double t2) {
  if (!(t1 > 0) || !(t1 < t2)) throw Error(Errc::invalid_band, "need 0 < t1 < t2");
  return {{{t1, 1.0}, {t2, 1.0}}, Interpolation::left_constant, 0.0, 0.0};
}
inline TransferFunction band_stop(double t1, double t2) {
  if (!(t1 > 0) || !(t1 < t2)) throw Error(Errc::invalid_band, "need 0 < t1 < t2");
  return {{{t1, 0.0}, {t2, 0.0}}, Interpolation::left_constant, 1.0, 1.0};
}

// H(t) = 0 for t <= t1, (t - t1)/t beyond; linear knots with sup error <= tol
// on [t1, tMax]. |H''| = 2 t1/t^3 shrinks with t, so steps grow.
inline TransferFunction flow_stop_filter(double t1, double tMax, double tol = 1e-3) {
  if (!(t1 >= 0)) throw Error(Errc::validation, "t1 must be >= 0");
  TransferFunction h;
  h.interpolation = Interpolation::linear;
  h.rightTail = 1.0;
  if (t1 == 0.0) {
    h.leftTail = 1.0;
    h.knots = {{0.0, 1.0}};
    return h;
  }
  h.leftTail = 0.0;
  double t = t1;
  h.knots.emplace_back(t1, 0.0);
  while (t < tMax) {
    const double step = 0.9 * std::sqrt(8.0 * tol * t * t * t / (2.0 * t1));
    t = std::min(tMax, t + step);
    h.knots.emplace_back(t, (t - t1) / t);
  }
  return h;
}

// mean + sum H(t_n) band_n w_n + H_tail (residual - mean); frequency
// archives are evaluated at t = 1/s.
inline Grid apply_filter(const DecompositionArchive& a, const TransferFunction& H) {
  a.validate();
  H.validate();
  const auto w = quadrature_weights(a.tGrid);
  const bool freq = a.domainKind == DomainKind::frequency;
  const bool resRightInT = (a.residualTail == ResidualTail::right) != freq;
  Grid out = like(a.residual, a.mean);
  for (std::size_t n = 0; n < a.bands.size(); ++n) {
    const double t = freq ? 1.0 / a.tGrid[n] : a.tGrid[n];
    const double hv = H(t);
    if (hv != 0.0) axpy(out, hv * w[n], a.bands[n]);
  }
  const double ht = resRightInT ? H.rightTail : H.leftTail;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += ht * (a.residual[i] - a.mean);
  return out;
}

struct Peak {
  double t = 0.0;
  double mass = 0.0;
  std::size_t first = 0, last = 0;  // bin range, inclusive
};

// Runs of bins with value >= relThreshold * max, mass-weighted centroid.
inline std::vector<Peak> detect_peaks(const SpectrumCurve& c, double relThreshold = 0.05) {
  if (!(relThreshold > 0 && relThreshold < 1)) throw Error(Errc::validation, "relThreshold must be in (0,1)");
  std::vector<Peak> out;
  if (c.values.empty()) return out;
  const double mx = *std::max_element(c.values.begin(), c.values.end());
  if (!(mx > 0)) return out;
  const double thr = relThreshold * mx;
  std::size_t i = 0;
  while (i < c.values.size()) {
    if (c.values[i] < thr) {
      ++i;
      continue;
    }
    Peak p;
    p.first = i;
    double mt = 0.0;
    while (i < c.values.size() && c.values[i] >= thr) {
      p.mass += c.values[i] * c.weights[i];
      mt += c.tGrid[i] * c.values[i] * c.weights[i];
      ++i;
    }
    p.last = i - 1;
    p.t = mt / p.mass;
    out.push_back(p);
  }
  return out;
}

inline void write_spectrum_csv(const SpectrumCurve& c, const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  out << "t,value\n";
  for (std::size_t i = 0; i < c.values.size(); ++i)
    out << detail::fmt(c.tGrid[i]) << ',' << detail::fmt(c.values[i]) << '\n';
}

inline void write_transfer_function(const TransferFunction& h, const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  out << "# interpolation=" << to_string(h.interpolation) << " leftTail=" << detail::fmt(h.leftTail)
      << " rightTail=" << detail::fmt(h.rightTail) << '\n';
  for (auto& [t, v] : h.knots) out << detail::fmt(t) << ',' << detail::fmt(v) << '\n';
}

inline TransferFunction read_transfer_function(const std::filesystem::path& p) {
  std::istringstream in(detail::read_file(p));
  std::string line;
  TransferFunction h;
  std::size_t lineNo = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string kv;
      while (hs >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "interpolation") {
          if (v == "linear") h.interpolation = Interpolation::linear;
          else if (v == "left-constant") h.interpolation = Interpolation::left_constant;
          else throw Error(Errc::malformed_input, "line " + std::to_string(lineNo) + ": unknown interpolation");
        } else if (k == "leftTail") {
          h.leftTail = detail::parse_double(v, lineNo);
        } else if (k == "rightTail") {
          h.rightTail = detail::parse_double(v, lineNo);
        }
      }
      header = true;
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(Errc::malformed_input, "line " + std::to_string(lineNo) + ": expected t,H");
    h.knots.emplace_back(detail::parse_double(std::string_view(line).substr(0, comma), lineNo),
                         detail::parse_double(std::string_view(line).substr(comma + 1), lineNo));
  }
  if (!header) throw Error(Errc::malformed_input, "missing transfer-function header");
  h.validate();
  return h;
}

}  // namespace spectv
