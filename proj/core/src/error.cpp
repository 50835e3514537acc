#include "socmap/error.hpp"

namespace socmap {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::io: return "io";
    case Errc::schema: return "schema";
    case Errc::parse: return "parse";
    case Errc::duplicate: return "duplicate";
    case Errc::insufficient_data: return "insufficient_data";
    case Errc::domain: return "domain";
    case Errc::state: return "state";
    case Errc::configuration: return "configuration";
    case Errc::imputation: return "imputation";
    case Errc::shape: return "shape";
    case Errc::degenerate: return "degenerate";
    case Errc::spec: return "spec";
    case Errc::data: return "data";
    case Errc::training: return "training";
    case Errc::convergence: return "convergence";
    case Errc::leakage: return "leakage";
    case Errc::format: return "format";
    case Errc::truncation: return "truncation";
    case Errc::extent: return "extent";
    case Errc::registry: return "registry";
    case Errc::dependency: return "dependency";
    case Errc::alignment: return "alignment";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + " error: " + message), code_(code) {}

int exit_code(Errc code) {
  switch (code) {
    case Errc::io:
      return 2;
    case Errc::convergence:
    case Errc::training:
      return 4;
    default:
      return 3;
  }
}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace socmap
