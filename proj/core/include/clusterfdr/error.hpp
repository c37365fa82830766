#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clusterfdr {

enum class ErrorKind {
  Io,
  UnsupportedDatatype,
  MalformedHeader,
  TruncatedData,
  NonFiniteVoxel,
  EmptyMask,
  DimMismatch,
  InvalidArgument,
  InvalidP,
  MissingP,
  Schema,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind() when they
// need to map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace clusterfdr
