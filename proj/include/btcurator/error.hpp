#pragma once

#include <stdexcept>
#include <string>

namespace btcurator {

// Exit-code classes surfaced by the CLI: config=1, data=2, provider=3.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Failure of a translator or embedding provider.
class ProviderError : public std::runtime_error {
 public:
  explicit ProviderError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace btcurator
