#pragma once

#include <stdexcept>
#include <string>

namespace steklov {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// v or w vanishes or blows up where a density is needed and nothing closed-form
// is available to fall back on.
class DegenerateWeightError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double partial)
      : Error(what), partial_(partial) {}
  double partial() const { return partial_; }

 private:
  double partial_;
};

// reference map leaves the corridor a(t) < ref(t) < b(t)
class CorridorError : public Error {
 public:
  CorridorError(const std::string& what, double t) : Error(what), t_(t) {}
  double at() const { return t_; }

 private:
  double t_;
};

class FairwayUndefinedError : public Error {
 public:
  FairwayUndefinedError(const std::string& what, double x) : Error(what), x_(x) {}
  double at() const { return x_; }

 private:
  double x_;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  enum class Kind { syntax, unknown_key, missing_field, out_of_range, bad_value };

  ParseError(Kind kind, int line, std::string field, const std::string& msg)
      : Error(format(kind, line, field, msg)), kind_(kind), line_(line), field_(std::move(field)) {}

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(Kind kind, int line, const std::string& field, const std::string& msg) {
    static const char* names[] = {"syntax error", "unknown key", "missing field", "value out of range",
                                  "bad value"};
    std::string s = names[static_cast<int>(kind)];
    if (line > 0) s += " at line " + std::to_string(line);
    if (!field.empty()) s += " (" + field + ")";
    if (!msg.empty()) s += ": " + msg;
    return s;
  }

  Kind kind_;
  int line_;
  std::string field_;
};

}  // namespace steklov
