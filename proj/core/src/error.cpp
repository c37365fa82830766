#include "clusterfdr/error.hpp"

namespace clusterfdr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::TruncatedData: return "TruncatedData";
    case ErrorKind::NonFiniteVoxel: return "NonFiniteVoxel";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidP: return "InvalidP";
    case ErrorKind::MissingP: return "MissingP";
    case ErrorKind::Schema: return "SchemaError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace clusterfdr
