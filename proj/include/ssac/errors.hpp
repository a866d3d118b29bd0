#pragma once

#include <stdexcept>
#include <string>

namespace ssac {

struct NonUniqueStationary : std::runtime_error {
  explicit NonUniqueStationary(const std::string& what) : std::runtime_error(what) {}
};

struct MixingCapExceeded : std::runtime_error {
  explicit MixingCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct SingularA : std::runtime_error {
  explicit SingularA(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroProbabilityAction : std::runtime_error {
  explicit ZeroProbabilityAction(const std::string& what) : std::runtime_error(what) {}
};

struct StepTooLarge : std::runtime_error {
  explicit StepTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct GainTooLarge : std::runtime_error {
  explicit GainTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct WindowIncomplete : std::runtime_error {
  explicit WindowIncomplete(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidModel : std::runtime_error {
  explicit InvalidModel(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ssac
