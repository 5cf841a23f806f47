#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nnscore {

/// Immutable finite dataset backing the Dirac-mixture data distribution.
/// Points are stored at 32-bit precision (the on-disk format); all
/// arithmetic on them is done in double. Squared norms are precomputed for
/// the blocked distance expansion used by search and the exact oracle.
class DatasetStore {
public:
    DatasetStore(std::vector<float> points, std::size_t n, std::size_t dim);

    static DatasetStore from_doubles(const std::vector<double>& points, std::size_t n,
                                     std::size_t dim);

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const float> point(std::size_t i) const {
        return {points_.data() + i * dim_, dim_};
    }
    std::vector<double> point_as_double(std::size_t i) const;
    double sq_norm(std::size_t i) const { return sq_norms_[i]; }
    const std::vector<float>& raw_points() const noexcept { return points_; }
    const std::vector<double>& sq_norms() const noexcept { return sq_norms_; }

    /// ||q||^2 - 2 q.x_i + ||x_i||^2, clamped at zero. Every squared
    /// distance between a query and a dataset point goes through this one
    /// expression so that search, proposals, and the exact oracle agree
    /// bit-for-bit on likelihood exponents.
    double squared_distance_to(std::span<const double> query, double query_sq_norm,
                               std::size_t i) const {
        const float* row = points_.data() + i * dim_;
        double dot = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) dot += query[j] * static_cast<double>(row[j]);
        const double sq = query_sq_norm - 2.0 * dot + sq_norms_[i];
        return sq > 0.0 ? sq : 0.0;
    }

private:
    std::vector<float> points_;    // n x dim, row-major
    std::vector<double> sq_norms_; // per-row squared L2 norm
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
};

enum class SyntheticKind { GaussianMixture, UniformHypercube, TwoMoons };

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::GaussianMixture;
    std::size_t n = 0;
    std::size_t dim = 0;
    std::size_t components = 1;   // GaussianMixture
    double component_std = 0.05;  // GaussianMixture / TwoMoons noise
    std::uint64_t seed = 0;
};

/// Reads the "NNSE" binary format, falling back to headerless CSV when the
/// magic bytes are absent.
DatasetStore load_dataset(const std::string& path);

/// Writes the binary format: "NNSE", u32 version = 1, u64 n, u64 dim, then
/// n*dim little-endian IEEE-754 f32 values, row-major.
void save_dataset(const DatasetStore& data, const std::string& path);

/// Deterministic synthetic data; identical output for identical specs.
DatasetStore generate_dataset(const SyntheticSpec& spec);

/// Largest pairwise L2 distance (full O(n^2 d) scan).
double dataset_diameter(const DatasetStore& data);

/// Smallest nonzero pairwise L2 distance; exact duplicates are skipped.
double dataset_min_gap(const DatasetStore& data);

}  // namespace nnscore
