#include "nnscore/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nnscore/math.hpp"

namespace nnscore {

KnnIndex::KnnIndex(const DatasetStore& data, std::size_t block_size)
    : data_(&data), block_size_(block_size > 0 ? block_size : 1024) {}

KnnIndex build_index(const DatasetStore& data, std::size_t block_size) {
    return KnnIndex(data, block_size);
}

namespace {

struct Candidate {
    double sq_dist;
    std::size_t index;
};

// Max-heap ordering on (sq_dist, index): the heap top is the current worst
// member, so ties resolve toward smaller dataset indices.
bool heap_less(const Candidate& a, const Candidate& b) {
    if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
    return a.index < b.index;
}

}  // namespace

NeighborSet search(const KnnIndex& index, std::span<const double> query, std::size_t k) {
    const DatasetStore& data = index.data();
    if (query.size() != data.dim()) throw std::invalid_argument("query dimension mismatch");
    if (k < 1 || k > data.size()) {
        throw std::invalid_argument("k must satisfy 1 <= k <= dataset size");
    }

    const double query_sq_norm = squared_norm(query);
    std::vector<Candidate> heap;
    heap.reserve(k);

    const std::size_t n = data.size();
    const std::size_t block = index.block_size();
    for (std::size_t begin = 0; begin < n; begin += block) {
        const std::size_t end = std::min(begin + block, n);
        for (std::size_t i = begin; i < end; ++i) {
            const Candidate cand{data.squared_distance_to(query, query_sq_norm, i), i};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), heap_less);
            } else if (heap_less(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), heap_less);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), heap_less);
            }
        }
    }

    std::sort_heap(heap.begin(), heap.end(), heap_less);

    NeighborSet result;
    result.k = k;
    result.indices.resize(k);
    result.dists.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        result.indices[j] = heap[j].index;
        result.dists[j] = std::sqrt(heap[j].sq_dist);
    }
    return result;
}

}  // namespace nnscore
