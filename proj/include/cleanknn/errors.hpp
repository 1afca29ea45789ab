#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cleanknn {

// Error categories double as CLI exit codes:
//   usage/config = 2, data = 3, numerical = 4.
enum class ErrorCategory : int { usage = 2, data = 3, numeric = 4 };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(msg), cat_(cat) {}
  ErrorCategory category() const noexcept { return cat_; }
  int exit_code() const noexcept { return static_cast<int>(cat_); }

private:
  ErrorCategory cat_;
};

// --- ingest ---

struct IoError final : Error {
  explicit IoError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct MalformedLine final : Error {
  MalformedLine(std::size_t line, const std::string& detail)
      : Error(ErrorCategory::data,
              "malformed line " + std::to_string(line) + ": " + detail),
        line_no(line) {}
  std::size_t line_no;
};

struct EmptyInput final : Error {
  EmptyInput() : Error(ErrorCategory::data, "no interactions to binarize") {}
};

struct TooFewFolds final : Error {
  explicit TooFewFolds(std::uint32_t n)
      : Error(ErrorCategory::usage,
              "n_folds must be >= 2, got " + std::to_string(n)) {}
};

struct FoldOutOfRange final : Error {
  FoldOutOfRange(std::uint32_t fold, std::uint32_t n_folds)
      : Error(ErrorCategory::usage, "test fold " + std::to_string(fold) +
                                        " out of range for " +
                                        std::to_string(n_folds) + " folds") {}
};

struct CorruptFile final : Error {
  explicit CorruptFile(const std::string& why)
      : Error(ErrorCategory::data, "corrupt file: " + why), reason(why) {}
  std::string reason;
};

// --- sparse-core ---

struct EmptyMatrix final : Error {
  EmptyMatrix() : Error(ErrorCategory::data, "matrix has no entries") {}
};

struct ZeroDivisorOnNonemptyColumn final : Error {
  explicit ZeroDivisorOnNonemptyColumn(std::size_t j)
      : Error(ErrorCategory::data,
              "non-positive divisor for non-empty column " + std::to_string(j)),
        column(j) {}
  std::size_t column;
};

struct DimensionMismatch final : Error {
  explicit DimensionMismatch(const std::string& msg)
      : Error(ErrorCategory::data, msg) {}
};

struct IndexOutOfRange final : Error {
  IndexOutOfRange(std::size_t index, std::size_t bound)
      : Error(ErrorCategory::data, "index " + std::to_string(index) +
                                       " out of range [0, " +
                                       std::to_string(bound) + ")") {}
};

// --- spectral ---

struct NoConvergence final : Error {
  explicit NoConvergence(std::uint32_t iters)
      : Error(ErrorCategory::numeric,
              "SVD residual tolerance unmet after " + std::to_string(iters) +
                  " iterations"),
        iterations(iters) {}
  std::uint32_t iterations;
};

struct InvalidRank final : Error {
  explicit InvalidRank(const std::string& msg)
      : Error(ErrorCategory::usage, msg) {}
};

struct NotSymmetric final : Error {
  NotSymmetric() : Error(ErrorCategory::data, "matrix is not symmetric") {}
};

struct TooLarge final : Error {
  explicit TooLarge(const std::string& msg)
      : Error(ErrorCategory::usage, msg) {}
};

// --- rmt ---

struct ZeroDimension final : Error {
  ZeroDimension() : Error(ErrorCategory::usage, "matrix dimension is zero") {}
};

struct EmptySpectrum final : Error {
  EmptySpectrum() : Error(ErrorCategory::data, "empty eigenvalue list") {}
};

struct RankOutOfRange final : Error {
  RankOutOfRange(std::uint32_t f, std::size_t len)
      : Error(ErrorCategory::usage, "rank " + std::to_string(f) +
                                        " exceeds spectrum length " +
                                        std::to_string(len)) {}
};

// --- cleaner ---

struct ZeroVector final : Error {
  ZeroVector() : Error(ErrorCategory::data, "zero vector has no direction") {}
};

struct ConstantVector final : Error {
  ConstantVector()
      : Error(ErrorCategory::data, "constant vector has zero variance") {}
};

struct ScaleMismatch final : Error {
  explicit ScaleMismatch(const std::string& msg)
      : Error(ErrorCategory::data, msg) {}
};

struct DegenerateShrinkage final : Error {
  DegenerateShrinkage(double top, double xi)
      : Error(ErrorCategory::numeric,
              "top squared singular value " + std::to_string(top) +
                  " does not exceed xi " + std::to_string(xi)) {}
};

// --- eval ---

struct EmptyRelevantSet final : Error {
  EmptyRelevantSet() : Error(ErrorCategory::data, "relevant set is empty") {}
};

struct DegenerateCandidates final : Error {
  DegenerateCandidates()
      : Error(ErrorCategory::data,
              "AUC needs at least one relevant and one irrelevant candidate") {}
};

struct NoEvaluableUsers final : Error {
  NoEvaluableUsers()
      : Error(ErrorCategory::data, "no user has held-out interactions") {}
};

struct EmptyGrid final : Error {
  EmptyGrid() : Error(ErrorCategory::usage, "grid of F values is empty") {}
};

// --- cli ---

struct UnknownModelLabel final : Error {
  explicit UnknownModelLabel(const std::string& label)
      : Error(ErrorCategory::usage, "unknown model label: " + label) {}
};

}  // namespace cleanknn
