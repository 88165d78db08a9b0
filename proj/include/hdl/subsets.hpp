#pragma once

#include <algorithm>
#include <vector>

#include "hdl/errors.hpp"

namespace hdl {

// Lexicographic enumeration of the size-k subsets of a sorted ground set.
// next() fills `out` with the current subset and advances; it returns false
// once the family is exhausted. k = 0 yields the single empty subset.
class FixedSizeSubsets {
  public:
    FixedSizeSubsets(std::vector<int> ground, int k)
        : ground_(std::move(ground)), k_(k) {
        std::sort(ground_.begin(), ground_.end());
        if (k_ < 0 || k_ > static_cast<int>(ground_.size())) {
            done_ = true;
            return;
        }
        idx_.resize(k_);
        for (int i = 0; i < k_; ++i) idx_[i] = i;
    }

    bool next(std::vector<int>& out) {
        if (done_) return false;
        out.resize(k_);
        for (int i = 0; i < k_; ++i) out[i] = ground_[idx_[i]];
        advance();
        return true;
    }

  private:
    void advance() {
        const int m = static_cast<int>(ground_.size());
        int i = k_ - 1;
        while (i >= 0 && idx_[i] == m - k_ + i) --i;
        if (i < 0) {
            done_ = true;
            return;
        }
        ++idx_[i];
        for (int j = i + 1; j < k_; ++j) idx_[j] = idx_[j - 1] + 1;
    }

    std::vector<int> ground_;
    int k_ = 0;
    std::vector<int> idx_;
    bool done_ = false;
};

// Family of adjustment sets used by the aggregate statistics: all subsets
// of size exactly min(k, |ground|). When k >= |ground| this collapses to
// the single subset equal to the whole ground set.
inline std::vector<std::vector<int>> enumerate_subsets(
    const std::vector<int>& ground, int k) {
    const int size = std::min<int>(k, static_cast<int>(ground.size()));
    std::vector<std::vector<int>> out;
    FixedSizeSubsets family(ground, size);
    std::vector<int> subset;
    while (family.next(subset)) out.push_back(subset);
    return out;
}

// Visits every subset of `ground` with size <= max_size, ascending by size
// and lexicographic within each size. Stops early when fn returns false.
template <typename Fn>
void for_each_subset_up_to(const std::vector<int>& ground, int max_size,
                           Fn&& fn) {
    const int cap = std::min<int>(max_size, static_cast<int>(ground.size()));
    std::vector<int> subset;
    for (int size = 0; size <= cap; ++size) {
        FixedSizeSubsets family(ground, size);
        while (family.next(subset)) {
            if (!fn(subset)) return;
        }
    }
}

// true if sorted vector `v` contains x.
inline bool sorted_contains(const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
}

// Removes x from a sorted vector copy.
inline std::vector<int> sorted_without(std::vector<int> v, int x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x) v.erase(it);
    return v;
}

// Inserts x into a sorted vector copy.
inline std::vector<int> sorted_with(std::vector<int> v, int x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
    return v;
}

}  // namespace hdl
