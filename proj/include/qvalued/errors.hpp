#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qv {

/// Malformed input: mismatched shapes, out-of-range radii, bad configuration.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Sheet tracking failed because two matchings were indistinguishable.
class CollisionError : public std::runtime_error {
 public:
  CollisionError(const std::string& what, std::vector<int> nodes)
      : std::runtime_error(what), nodes_(std::move(nodes)) {}

  /// Angular node indices where the matching was ambiguous.
  const std::vector<int>& nodes() const { return nodes_; }

 private:
  std::vector<int> nodes_;
};

}  // namespace qv
