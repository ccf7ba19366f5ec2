#pragma once

#include <stdexcept>
#include <string>

namespace leaddrift {

// Error taxonomy maps 1:1 onto CLI exit codes (see tools/leaddrift.cpp):
// config 2, data 3, training 4.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& msg, int epoch)
      : std::runtime_error(msg + " (epoch " + std::to_string(epoch) + ")"),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace leaddrift
