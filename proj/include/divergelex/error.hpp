#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divergelex {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-supplied configuration or arguments are invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data cannot support the requested operation.
class DataError : public Error {
 public:
  using Error::Error;
};

class EmptyVocabularyError : public DataError {
 public:
  EmptyVocabularyError() : DataError("no token survives the vocabulary threshold") {}
};

class UnknownWordError : public DataError {
 public:
  explicit UnknownWordError(const std::string& word)
      : DataError("word not in vocabulary: '" + word + "'"), word_(word) {}
  const std::string& word() const noexcept { return word_; }

 private:
  std::string word_;
};

class ZeroVectorError : public DataError {
 public:
  ZeroVectorError() : DataError("cosine similarity of a zero vector is undefined") {}
};

class GroupCountError : public DataError {
 public:
  explicit GroupCountError(std::size_t observed)
      : DataError("expected exactly two group tags, observed " + std::to_string(observed)) {}
};

// A word's interpreting set has no neighbor left to project into the global space.
class EmptyProjectionError : public DataError {
 public:
  explicit EmptyProjectionError(const std::string& word)
      : DataError("no neighbor of '" + word + "' can be projected into the global space") {}
};

class EmptyCandidatesError : public DataError {
 public:
  EmptyCandidatesError() : DataError("no candidate word is shared by both groups and the global space") {}
};

class NonFiniteLossError : public DataError {
 public:
  explicit NonFiniteLossError(std::size_t epoch)
      : DataError("training loss became non-finite in epoch " + std::to_string(epoch)) {}
};

class InfeasibleSpecError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Malformed input file; line is 1-based, 0 when not applicable.
class FormatError : public DataError {
 public:
  FormatError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace divergelex
