#include "multishift/lattice.hpp"

#include <algorithm>
#include <numeric>

#include "multishift/error.hpp"

namespace multishift {

MultiIndex::MultiIndex(std::vector<int> components) : c_(std::move(components)) {
  if (c_.empty()) throw Error(ErrorCode::IndexOutOfRange, "MultiIndex: dimension must be >= 1");
  for (int x : c_)
    if (x < 0) throw Error(ErrorCode::IndexOutOfRange, "MultiIndex: negative component");
}

MultiIndex MultiIndex::zero(std::size_t d) { return MultiIndex(std::vector<int>(d, 0)); }

int MultiIndex::degree() const noexcept { return std::accumulate(c_.begin(), c_.end(), 0); }

MultiIndex MultiIndex::plus(std::size_t j) const {
  MultiIndex r = *this;
  r.c_.at(j) += 1;
  return r;
}

MultiIndex MultiIndex::minus(std::size_t j) const {
  if (c_.at(j) == 0) throw Error(ErrorCode::IndexOutOfRange, "MultiIndex: component already zero");
  MultiIndex r = *this;
  r.c_[j] -= 1;
  return r;
}

std::string to_string(const MultiIndex& a) {
  std::string s = "[";
  for (std::size_t j = 0; j < a.dim(); ++j) {
    if (j) s += ',';
    s += std::to_string(a[j]);
  }
  return s + "]";
}

bool graded_less(const MultiIndex& a, const MultiIndex& b) {
  const int da = a.degree();
  const int db = b.degree();
  if (da != db) return da < db;
  return a.components() < b.components();
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace {

// Appends every index of exactly `degree` in lexicographic order.
void append_level(std::size_t d, int degree, std::vector<int>& prefix, int remaining,
                  std::vector<MultiIndex>& out) {
  if (prefix.size() + 1 == d) {
    prefix.push_back(remaining);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int x = 0; x <= remaining; ++x) {
    prefix.push_back(x);
    append_level(d, degree, prefix, remaining - x, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> enumerate(std::size_t d, int max_degree) {
  if (d == 0) throw Error(ErrorCode::IndexOutOfRange, "enumerate: d must be >= 1");
  if (max_degree < 0) throw Error(ErrorCode::IndexOutOfRange, "enumerate: N must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(binomial(static_cast<std::uint64_t>(max_degree) + d, d));
  std::vector<int> prefix;
  for (int k = 0; k <= max_degree; ++k) append_level(d, k, prefix, k, out);
  return out;
}

std::vector<PathStep> monotone_path(const MultiIndex& a) {
  std::vector<PathStep> path;
  MultiIndex cur = MultiIndex::zero(a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j)
    for (int k = 0; k < a[j]; ++k) {
      path.push_back({cur, j});
      cur = cur.plus(j);
    }
  return path;
}

std::vector<PathStep> reverse_monotone_path(const MultiIndex& a) {
  std::vector<PathStep> path;
  MultiIndex cur = MultiIndex::zero(a.dim());
  for (std::size_t j = a.dim(); j-- > 0;)
    for (int k = 0; k < a[j]; ++k) {
      path.push_back({cur, j});
      cur = cur.plus(j);
    }
  return path;
}

Truncation::Truncation(std::size_t d, int max_degree)
    : d_(d), max_degree_(max_degree), indices_(enumerate(d, max_degree)) {
  for (std::size_t p = 0; p < indices_.size(); ++p) lookup_.emplace(indices_[p], p);
  up_.assign(indices_.size() * d_, -1);
  down_.assign(indices_.size() * d_, -1);
  for (std::size_t p = 0; p < indices_.size(); ++p) {
    for (std::size_t j = 0; j < d_; ++j) {
      if (indices_[p].degree() < max_degree_)
        up_[p * d_ + j] = static_cast<std::ptrdiff_t>(lookup_.at(indices_[p].plus(j)));
      if (indices_[p][j] > 0)
        down_[p * d_ + j] = static_cast<std::ptrdiff_t>(lookup_.at(indices_[p].minus(j)));
    }
  }
}

std::optional<std::size_t> Truncation::find(const MultiIndex& a) const {
  auto it = lookup_.find(a);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t Truncation::position(const MultiIndex& a) const {
  auto p = find(a);
  if (!p) throw Error(ErrorCode::IndexOutOfRange, "index " + to_string(a) + " outside truncation");
  return *p;
}

std::size_t Truncation::count_up_to(int degree) const {
  if (degree < 0) return 0;
  if (degree >= max_degree_) return indices_.size();
  return binomial(static_cast<std::uint64_t>(degree) + d_, d_);
}

}  // namespace multishift
