#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sausage {

/// A caller violated an operation's precondition. `key()` names the offending
/// parameter so the CLI can report it.
class PreconditionError : public std::invalid_argument
{
  public:
    PreconditionError(std::string key, std::string const& what)
        : std::invalid_argument(key + ": " + what), key_(std::move(key))
    {
    }

    [[nodiscard]] std::string const& key() const noexcept { return key_; }

  private:
    std::string key_;
};

/// Numerical failure (singular system, no convergence).
class NumericError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, char const* key, std::string const& what)
{
    if (!cond)
        throw PreconditionError(key, what);
}

}  // namespace sausage
