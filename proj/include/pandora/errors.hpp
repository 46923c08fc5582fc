#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pandora {

/// Library error with a stable machine-readable code. The CLI surfaces these
/// as {"error": code, "detail": detail} with a nonzero exit status.
class PandoraError : public std::runtime_error {
 public:
  PandoraError(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail),
        code_(std::move(code)),
        detail_(detail) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

/// One structural problem found while validating an instance.
struct Violation {
  std::string code;
  std::string detail;
};

/// Carries the full list of violations found by validation.
class ValidationError : public PandoraError {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : PandoraError(violations.empty() ? "InvalidInstance" : violations.front().code,
                     join(violations)),
        violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<Violation>& vs) {
    std::string out;
    for (const auto& v : vs) {
      if (!out.empty()) out += "; ";
      out += v.detail;
    }
    return out;
  }

  std::vector<Violation> violations_;
};

}  // namespace pandora
