#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace paraprec {

// Every library failure derives from Error and carries a stable name that the
// CLI reports verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }
  // Input problems (bad config, unreadable files) as opposed to numerical trouble.
  virtual bool is_input_error() const noexcept { return false; }

 private:
  std::string name_;
};

#define PARAPREC_DEFINE_ERROR(Type)                                        \
  class Type : public Error {                                              \
   public:                                                                 \
    explicit Type(const std::string& what) : Error(#Type, what) {}         \
  };

PARAPREC_DEFINE_ERROR(DimensionError)
PARAPREC_DEFINE_ERROR(InvalidArgument)
PARAPREC_DEFINE_ERROR(InvalidSize)
PARAPREC_DEFINE_ERROR(NotSPD)
PARAPREC_DEFINE_ERROR(SketchTooSmall)
PARAPREC_DEFINE_ERROR(KappaTooSmall)
PARAPREC_DEFINE_ERROR(DegenerateTestSpace)
PARAPREC_DEFINE_ERROR(GenerationFailed)

#undef PARAPREC_DEFINE_ERROR

class SingularOperator : public Error {
 public:
  SingularOperator(long pivot, const std::string& what)
      : Error("SingularOperator", what + " (pivot " + std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

class SingularReducedSystem : public Error {
 public:
  SingularReducedSystem(std::vector<double> xi, const std::string& what)
      : Error("SingularReducedSystem", what), xi_(std::move(xi)) {}
  const std::vector<double>& xi() const noexcept { return xi_; }

 private:
  std::vector<double> xi_;
};

// Iterative eigen/singular value estimates that did not reach tolerance.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> best)
      : Error("ConvergenceFailure", what), best_(std::move(best)) {}
  const std::vector<double>& best_estimates() const noexcept { return best_; }

 private:
  std::vector<double> best_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, long line, const std::string& what)
      : Error("ParseError", source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  long line() const noexcept { return line_; }
  bool is_input_error() const noexcept override { return true; }

 private:
  long line_;
};

class EmptyMatrix : public Error {
 public:
  explicit EmptyMatrix(const std::string& what) : Error("EmptyMatrix", what) {}
  bool is_input_error() const noexcept override { return true; }
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("ConfigError", field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }
  bool is_input_error() const noexcept override { return true; }

 private:
  std::string field_;
};

}  // namespace paraprec
