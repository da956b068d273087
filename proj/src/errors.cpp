#include "qmet/errors.hpp"

namespace qmet {

std::string_view error_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SingularQfim: return "SingularQfim";
    case ErrorKind::DegenerateModel: return "DegenerateModel";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::TooManyParameters: return "TooManyParameters";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ChainViolation: return "ChainViolation";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::Validation: return "Validation";
  }
  return "Unknown";
}

}  // namespace qmet
