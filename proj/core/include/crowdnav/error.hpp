#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crowdnav {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or input; the CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

/// Base for weight-file problems. Each subclass names the offending tensor.
class WeightsError : public Error {
 public:
  WeightsError(const std::string& what, std::string tensor)
      : Error(what), tensor_(std::move(tensor)) {}
  const std::string& tensor() const { return tensor_; }

 private:
  std::string tensor_;
};

class MissingTensorError : public WeightsError {
 public:
  explicit MissingTensorError(const std::string& tensor)
      : WeightsError("missing tensor '" + tensor + "'", tensor) {}
};

class ShapeMismatchError : public WeightsError {
 public:
  ShapeMismatchError(const std::string& tensor, const std::string& detail)
      : WeightsError("shape mismatch for tensor '" + tensor + "': " + detail, tensor) {}
};

class TruncatedBinaryError : public WeightsError {
 public:
  TruncatedBinaryError(const std::string& tensor, const std::string& detail)
      : WeightsError("truncated weight binary at tensor '" + tensor + "': " + detail,
                     tensor) {}
};

/// Non-finite network output during inference.
class ModelDivergenceError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss during training.
class TrainingDivergenceError : public Error {
 public:
  TrainingDivergenceError(const std::string& what, std::size_t epoch, std::size_t batch)
      : Error(what), epoch_(epoch), batch_(batch) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& detail)
      : Error(source + ":" + std::to_string(line) + ": " + detail), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace crowdnav
