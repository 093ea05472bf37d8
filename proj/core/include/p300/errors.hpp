#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace p300 {

// Base of every error raised by the library. kind() is the stable short name
// used in report tallies (e.g. "SingularCovarianceError").
class Error : public std::runtime_error {
 public:
  Error(std::string_view kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define P300_DEFINE_ERROR(Name)                                         \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// Input parsing and schema.
P300_DEFINE_ERROR(ParseError);
P300_DEFINE_ERROR(SchemaError);
P300_DEFINE_ERROR(RangeError);
P300_DEFINE_ERROR(IOError);
P300_DEFINE_ERROR(ConfigError);

// Dataset handling.
P300_DEFINE_ERROR(EmptyClassError);
P300_DEFINE_ERROR(SplitError);
P300_DEFINE_ERROR(GroupError);

// Signal processing.
P300_DEFINE_ERROR(DesignError);
P300_DEFINE_ERROR(RateError);
P300_DEFINE_ERROR(DegenerateRowError);

// Models.
P300_DEFINE_ERROR(InsufficientDataError);
P300_DEFINE_ERROR(IndexError);
P300_DEFINE_ERROR(DimError);
P300_DEFINE_ERROR(SingularCovarianceError);
P300_DEFINE_ERROR(TargetError);
P300_DEFINE_ERROR(NumericalError);

#undef P300_DEFINE_ERROR

}  // namespace p300
