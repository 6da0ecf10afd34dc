#pragma once

#include <stdexcept>
#include <string>

namespace agdst {

/// Contract violations on in-memory structures (schema mismatch, bad ids, ...).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (probabilities out of range, unknown slots in
/// policies, inconsistent run settings).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input data files (corpus JSON and friends).
struct IngestionError : ConfigError {
  using ConfigError::ConfigError;
};

/// Non-finite values in the numeric pipeline.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failures and unreadable binary artifacts.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Checkpoint load failures, with the reason kept machine-checkable.
struct CheckpointError : IoError {
  enum class Reason { BadMagic, VersionMismatch, VocabHashMismatch, Truncated };

  CheckpointError(Reason r, const std::string& msg) : IoError(msg), reason(r) {}

  Reason reason;
};

}  // namespace agdst
