#pragma once

#include <stdexcept>
#include <string>

namespace mtsmt {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class EncodingError : public Error {
 public:
  EncodingError(const std::string& msg, std::size_t byte_offset)
      : Error(msg), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& msg, std::size_t byte_offset = 0)
      : Error(msg), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

}  // namespace mtsmt
