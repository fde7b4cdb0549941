#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sck {

// Root of every error the library raises on bad input or unidentified estimands.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration (column mapping, DGP spec, flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data failed validation (non-binary values, missing cells, degenerate arms).
class DataError : public Error {
 public:
  using Error::Error;
};

// The requested estimand cannot be computed on this sample.
class EstimationError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public EstimationError {
 public:
  RankDeficiencyError(const std::string& what, std::vector<std::string> columns)
      : EstimationError(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class WeakFirstStageError : public EstimationError {
 public:
  WeakFirstStageError(const std::string& what, double first_stage_stat)
      : EstimationError(what), first_stage_stat_(first_stage_stat) {}
  double first_stage_stat() const noexcept { return first_stage_stat_; }

 private:
  double first_stage_stat_;
};

}  // namespace sck
