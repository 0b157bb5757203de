#pragma once

#include <stdexcept>
#include <string>

namespace wrapsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateVelocity : Error {
  DegenerateVelocity() : Error("velocity norm below eps_v") {}
};
struct CollinearPoints : Error {
  CollinearPoints() : Error("points are collinear") {}
};
struct ParallelPlanes : Error {
  ParallelPlanes() : Error("plane normals are parallel") {}
};
struct StepOnTerminal : Error {
  StepOnTerminal() : Error("step() called on a terminal state") {}
};
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};
struct TrajectoryTooShort : Error {
  TrajectoryTooShort() : Error("trajectory has fewer than 3 samples") {}
};
struct InsufficientData : Error {
  explicit InsufficientData(const std::string& what) : Error(what) {}
};
struct BufferTooSmall : Error {
  BufferTooSmall() : Error("replay buffer smaller than batch size") {}
};
struct EmptyBuffer : Error {
  EmptyBuffer() : Error("replay buffer is empty") {}
};
struct MissingCheckpoint : Error {
  explicit MissingCheckpoint(const std::string& path)
      : Error("missing checkpoint: " + path) {}
};
struct IoFailure : Error {
  explicit IoFailure(const std::string& what) : Error(what) {}
};
struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

}  // namespace wrapsim
