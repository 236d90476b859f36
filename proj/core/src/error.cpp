#include "svmboot/error.hpp"

namespace svmboot {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input: return "input";
    case ErrorKind::config: return "config";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace svmboot
