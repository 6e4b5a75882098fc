#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace swarmrx {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Correlation peak did not clear the detection threshold.
class FrameNotFound : public Error {
 public:
  FrameNotFound(double peak_ratio, double threshold)
      : Error("frame not found: peak/off-peak ratio " + std::to_string(peak_ratio) +
              " below threshold " + std::to_string(threshold)),
        peak_ratio_(peak_ratio) {}
  double peak_ratio() const noexcept { return peak_ratio_; }

 private:
  double peak_ratio_;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class DegenerateCombination : public Error {
 public:
  using Error::Error;
};

// Every alive member has been excluded.
class SwarmLost : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Scenario parse or validation failure. Carries every problem found, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out;
    for (const auto& p : problems) {
      if (!out.empty()) out += '\n';
      out += p;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

}  // namespace swarmrx
