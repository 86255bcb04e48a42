#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmapq {

// One model-validation or load-time violation. `code` is a stable tag
// ("NonGenerator", "ImproperKernel", "BadDistribution", "IndexError",
// "SchemaError", "SyntaxError"); `where` points at the offending field.
struct Violation {
    std::string code;
    std::string where;
    std::string message;
};

class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error("[" + code + "] " + msg), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

  private:
    std::string code_;
};

// Transform argument outside its admissible set (|z|>1, p outside [0,1], ...).
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error("DomainError", msg) {}
};

// A requested time does not lie on the configured grid, or a jump epoch of a
// deterministic law falls between grid nodes.
struct GridError : Error {
    explicit GridError(const std::string& msg) : Error("GridError", msg) {}
};

// Generator or embedded chain is not irreducible where stationary analysis
// needs it.
struct ReducibleError : Error {
    explicit ReducibleError(const std::string& msg) : Error("Reducible", msg) {}
};

// An infinite-horizon integral cannot reach its tail bound on the configured
// horizon.
struct TruncationError : Error {
    explicit TruncationError(const std::string& msg) : Error("TruncationError", msg) {}
};

struct NotDegenerateError : Error {
    explicit NotDegenerateError(const std::string& msg) : Error("NotDegenerate", msg) {}
};

struct NotNormalizedError : Error {
    explicit NotNormalizedError(const std::string& msg) : Error("NotNormalized", msg) {}
};

struct NonProbabilityError : Error {
    explicit NonProbabilityError(const std::string& msg) : Error("NonProbability", msg) {}
};

struct ExplosionGuardError : Error {
    explicit ExplosionGuardError(const std::string& msg) : Error("ExplosionGuard", msg) {}
};

struct LabelMismatchError : Error {
    explicit LabelMismatchError(const std::string& msg) : Error("LabelMismatch", msg) {}
};

// Carries the complete violation list from validate()/load.
class ModelError : public Error {
  public:
    explicit ModelError(std::vector<Violation> violations)
        : Error(violations.empty() ? "ModelError" : violations.front().code,
                format(violations)),
          violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const noexcept { return violations_; }

  private:
    static std::string format(const std::vector<Violation>& vs) {
        std::string out;
        for (const auto& v : vs) {
            if (!out.empty()) out += "; ";
            out += v.code + " at " + v.where + ": " + v.message;
        }
        return out.empty() ? "unknown model error" : out;
    }
    std::vector<Violation> violations_;
};

}  // namespace mmapq
