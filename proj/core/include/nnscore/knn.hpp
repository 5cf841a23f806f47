#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nnscore/dataset.hpp"

namespace nnscore {

/// Ordered k-nearest result. Distances are unsquared L2, sorted
/// non-decreasing, ties broken by ascending dataset index. Downstream code
/// squares them again (the proposal exponentiates -d^2 / (2 sigma^2)); they
/// are returned unsquared to match that contract.
struct NeighborSet {
    std::vector<std::size_t> indices;
    std::vector<double> dists;
    std::size_t k = 0;
};

/// Exact L2 search over an immutable DatasetStore. Distances use the
/// expansion ||z - x||^2 = ||z||^2 - 2 z.x + ||x||^2 with precomputed
/// ||x||^2, computed blockwise.
class KnnIndex {
public:
    explicit KnnIndex(const DatasetStore& data, std::size_t block_size = 1024);

    const DatasetStore& data() const noexcept { return *data_; }
    std::size_t block_size() const noexcept { return block_size_; }

private:
    const DatasetStore* data_;
    std::size_t block_size_;
};

KnnIndex build_index(const DatasetStore& data, std::size_t block_size = 1024);

/// Top-k selection via a bounded heap over blockwise distances. Requires
/// 1 <= k <= n and query dimension equal to the dataset dimension.
NeighborSet search(const KnnIndex& index, std::span<const double> query, std::size_t k);

}  // namespace nnscore
