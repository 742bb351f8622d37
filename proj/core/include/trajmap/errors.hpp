#pragma once

#include <stdexcept>
#include <string>

namespace trajmap {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

// Gateway
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Replay store has no entry for a request digest. This is a test or
/// fixture configuration problem, not something callers can recover from.
struct ReplayMiss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContextOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JsonRecoveryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingBinding : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Metrics / similarity
struct EmptyReference : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingReference : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyTrajectory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownLocation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reference map / baselines
struct MissingParentLevel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TaggerUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Visualization
struct UnknownFormat : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace trajmap
