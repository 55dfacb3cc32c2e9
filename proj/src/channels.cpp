#include "gcpinn/channels.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace gcpinn {

namespace {

void enumerate(int dim, int order, int start, std::vector<int>& prefix,
               std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == order) {
    out.push_back(prefix);
    return;
  }
  for (int a = start; a < dim; ++a) {
    prefix.push_back(a);
    enumerate(dim, order, a, prefix, out);
    prefix.pop_back();
  }
}

// All set partitions of {0..n-1}; each partition is a list of blocks.
std::vector<std::vector<std::vector<int>>> set_partitions(int n) {
  std::vector<std::vector<std::vector<int>>> result;
  std::vector<std::vector<int>> current;
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      result.push_back(current);
      return;
    }
    // index loop: the recursion may reallocate `current`
    for (std::size_t b = 0; b < current.size(); ++b) {
      current[b].push_back(i);
      rec(i + 1);
      current[b].pop_back();
    }
    current.push_back({i});
    rec(i + 1);
    current.pop_back();
  };
  rec(0);
  return result;
}

}  // namespace

int ChannelSet::count(int dim, int order) {
  int total = 0;
  for (int k = 0; k <= order; ++k) {
    // multisets of size k from dim symbols
    long num = 1, den = 1;
    for (int i = 0; i < k; ++i) {
      num *= dim + i;
      den *= i + 1;
    }
    total += static_cast<int>(num / den);
  }
  return total;
}

ChannelSet::ChannelSet(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("ChannelSet: dim must be in [1,3]");
  if (order < 0 || order > 3) throw std::invalid_argument("ChannelSet: order must be in [0,3]");
  for (int k = 0; k <= order; ++k) {
    std::vector<int> prefix;
    enumerate(dim, k, 0, prefix, axes_);
  }
  shift_.assign(axes_.size(), std::vector<int>(dim, -1));
  for (int c = 0; c < size(); ++c) {
    for (int a = 0; a < dim; ++a) {
      std::vector<int> ext = axes_[c];
      ext.push_back(a);
      shift_[c][a] = index(ext);
    }
  }
  terms_.resize(axes_.size());
  for (int c = 0; c < size(); ++c) {
    const auto& ax = axes_[c];
    if (ax.empty()) {
      terms_[c].push_back(FaaTerm{0, {}});
      continue;
    }
    for (const auto& partition : set_partitions(static_cast<int>(ax.size()))) {
      FaaTerm term;
      term.order = static_cast<int>(partition.size());
      for (const auto& block : partition) {
        std::vector<int> block_axes;
        for (int pos : block) block_axes.push_back(ax[pos]);
        term.blocks.push_back(index(block_axes));
      }
      terms_[c].push_back(std::move(term));
    }
  }
}

int ChannelSet::index(std::span<const int> axes) const {
  if (static_cast<int>(axes.size()) > order_) return -1;
  std::vector<int> sorted(axes.begin(), axes.end());
  std::sort(sorted.begin(), sorted.end());
  for (int a : sorted) {
    if (a < 0 || a >= dim_) throw std::out_of_range("ChannelSet: axis out of range");
  }
  auto it = std::find(axes_.begin(), axes_.end(), sorted);
  return it == axes_.end() ? -1 : static_cast<int>(it - axes_.begin());
}

int ChannelSet::second(int a, int b) const {
  const int ax[2] = {a, b};
  return index(ax);
}

}  // namespace gcpinn
