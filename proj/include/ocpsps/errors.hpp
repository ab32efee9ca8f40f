#pragma once

#include <stdexcept>
#include <string>

namespace ocpsps {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number for JSONL sources
/// (0 for whole-file formats).
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// A record violates a type invariant. Carries the field path, e.g.
/// "detections[0].score".
class InvariantViolation : public Error {
public:
    InvariantViolation(const std::string& field, const std::string& message)
        : Error(field + ": " + message), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class DegenerateBox : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class EmptyLevels : public Error {
public:
    using Error::Error;
};

class NoDetections : public Error {
public:
    using Error::Error;
};

class FrameMismatch : public Error {
public:
    using Error::Error;
};

class StaleFrame : public Error {
public:
    using Error::Error;
};

class UnknownLot : public Error {
public:
    using Error::Error;
};

class RoutingUnavailable : public Error {
public:
    using Error::Error;
};

class NonFiniteCost : public Error {
public:
    using Error::Error;
};

class ZeroGroundTruthCost : public Error {
public:
    using Error::Error;
};

class EmptyRound : public Error {
public:
    using Error::Error;
};

class MismatchedFrames : public Error {
public:
    using Error::Error;
};

}  // namespace ocpsps
