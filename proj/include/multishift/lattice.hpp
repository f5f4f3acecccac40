#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace multishift {

/// A point of N^d. Directions j are 0-based in the API.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> components);
  static MultiIndex zero(std::size_t d);

  std::size_t dim() const noexcept { return c_.size(); }
  int operator[](std::size_t j) const { return c_[j]; }
  int degree() const noexcept;
  const std::vector<int>& components() const noexcept { return c_; }

  MultiIndex plus(std::size_t j) const;
  MultiIndex minus(std::size_t j) const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<int> c_;
};

/// Renders as an integer array, e.g. "[1,2]".
std::string to_string(const MultiIndex& a);

/// Graded order: ascending degree, then lexicographic.
bool graded_less(const MultiIndex& a, const MultiIndex& b);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// All indices of degree <= max_degree in graded order.
std::vector<MultiIndex> enumerate(std::size_t d, int max_degree);

struct PathStep {
  MultiIndex from;
  std::size_t direction;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// Coordinate-major path 0 -> a: all steps in direction 0, then 1, ...
std::vector<PathStep> monotone_path(const MultiIndex& a);
/// Reverse coordinate-major path: direction d-1 first, then d-2, ...
std::vector<PathStep> reverse_monotone_path(const MultiIndex& a);

/// The simplex {a : |a| <= N} with position lookup and neighbour tables.
class Truncation {
 public:
  Truncation(std::size_t d, int max_degree);

  std::size_t dim() const noexcept { return d_; }
  int max_degree() const noexcept { return max_degree_; }
  std::size_t size() const noexcept { return indices_.size(); }

  const MultiIndex& operator[](std::size_t pos) const { return indices_[pos]; }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }

  std::optional<std::size_t> find(const MultiIndex& a) const;
  std::size_t position(const MultiIndex& a) const;

  /// Position of a + e_j, or -1 when it leaves the truncation.
  std::ptrdiff_t up(std::size_t pos, std::size_t j) const { return up_[pos * d_ + j]; }
  /// Position of a - e_j, or -1 when a_j == 0.
  std::ptrdiff_t down(std::size_t pos, std::size_t j) const { return down_[pos * d_ + j]; }

  /// Number of indices with degree <= degree (a prefix of the graded order).
  std::size_t count_up_to(int degree) const;

 private:
  std::size_t d_;
  int max_degree_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, std::size_t> lookup_;
  std::vector<std::ptrdiff_t> up_;
  std::vector<std::ptrdiff_t> down_;
};

}  // namespace multishift
