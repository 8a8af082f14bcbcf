#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lhloc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// geometry
class DomainError : public Error {
 public:
  using Error::Error;
};
class DegenerateRay : public Error {
 public:
  using Error::Error;
};

// crossing beam
class ParallelRays : public Error {
 public:
  using Error::Error;
};
class IncompleteEpoch : public Error {
 public:
  using Error::Error;
};

// ekf
class MeasurementRejected : public Error {
 public:
  MeasurementRejected(double innovation, double gate)
      : Error("measurement rejected: innovation " + std::to_string(innovation) +
              " exceeds gate " + std::to_string(gate)),
        innovation_(innovation),
        gate_(gate) {}
  double innovation() const { return innovation_; }
  double gate() const { return gate_; }

 private:
  double innovation_;
  double gate_;
};

// alignment
class InvalidAnchors : public Error {
 public:
  using Error::Error;
};
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};
class InsufficientOverlap : public Error {
 public:
  using Error::Error;
};

// metrics
class TooFewSamples : public Error {
 public:
  using Error::Error;
};
class EmptyDataset : public Error {
 public:
  using Error::Error;
};

// io
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};
class VersionError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lhloc
