#pragma once

#include <span>
#include <vector>

namespace gcpinn {

/// One term of the multivariate Faa di Bruno expansion of d^I f(z):
/// f^(order)(z) * prod_b z_{blocks[b]}.
struct FaaTerm {
  int order = 0;
  std::vector<int> blocks;
};

/// Enumerates the distinct partial derivatives ("channels") of a field in
/// `dim` variables up to total order `order`. Channels are ordered by total
/// order, then lexicographically by their sorted axis list, so the set for a
/// lower order is always a prefix of the set for a higher one.
class ChannelSet {
 public:
  ChannelSet(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(axes_.size()); }

  /// Sorted axis list of channel c (empty for the value channel).
  const std::vector<int>& axes(int c) const { return axes_[c]; }
  int channel_order(int c) const { return static_cast<int>(axes_[c].size()); }

  /// Channel index of a (not necessarily sorted) axis list; -1 when the
  /// list exceeds the set's order.
  int index(std::span<const int> axes) const;
  int value() const { return 0; }
  int first(int axis) const { return 1 + axis; }
  int second(int a, int b) const;

  /// Channel of d/dx_axis applied to channel c, or -1 past the max order.
  int shifted(int c, int axis) const { return shift_[c][axis]; }

  const std::vector<FaaTerm>& terms(int c) const { return terms_[c]; }

  static int count(int dim, int order);

 private:
  int dim_;
  int order_;
  std::vector<std::vector<int>> axes_;
  std::vector<std::vector<int>> shift_;
  std::vector<std::vector<FaaTerm>> terms_;
};

}  // namespace gcpinn
