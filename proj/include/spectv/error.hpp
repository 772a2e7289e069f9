#pragma once

#include <stdexcept>
#include <string>

namespace spectv {

enum class Errc {
  malformed_input,
  shape,
  unsupported_format,
  corrupt_archive,
  validation,
  dimensionality,
  non_smooth_point,
  insufficient_trace,
  method_mismatch,
  division,
  missing_dependency,
  invalid_band,
  geometry,
  precondition,
  degenerate_input,
  io,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_input: return "malformed-input";
    case Errc::shape: return "shape";
    case Errc::unsupported_format: return "unsupported-format";
    case Errc::corrupt_archive: return "corrupt-archive";
    case Errc::validation: return "validation";
    case Errc::dimensionality: return "dimensionality";
    case Errc::non_smooth_point: return "non-smooth-point";
    case Errc::insufficient_trace: return "insufficient-trace";
    case Errc::method_mismatch: return "method-mismatch";
    case Errc::division: return "division";
    case Errc::missing_dependency: return "missing-dependency";
    case Errc::invalid_band: return "invalid-band";
    case Errc::geometry: return "geometry";
    case Errc::precondition: return "precondition";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + " error: " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace spectv
