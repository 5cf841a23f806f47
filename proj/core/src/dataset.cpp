#include "nnscore/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <type_traits>

#include "nnscore/csv.hpp"
#include "nnscore/errors.hpp"
#include "nnscore/math.hpp"
#include "nnscore/rng.hpp"

namespace nnscore {

namespace {

constexpr char kMagic[4] = {'N', 'N', 'S', 'E'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ofstream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(std::begin(bytes), std::end(bytes));
    }
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, std::size_t offset, const char* what) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw FormatError(std::string("truncated file while reading ") + what, offset);
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(std::begin(bytes), std::end(bytes));
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

DatasetStore::DatasetStore(std::vector<float> points, std::size_t n, std::size_t dim)
    : points_(std::move(points)), n_(n), dim_(dim) {
    if (n_ < 1 || dim_ < 1) throw DataError("dataset requires n >= 1 and dim >= 1");
    if (points_.size() != n_ * dim_) throw DataError("dataset buffer size mismatch");
    for (float v : points_) {
        if (!std::isfinite(v)) throw DataError("dataset contains NaN or Inf entries");
    }
    sq_norms_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        const float* row = points_.data() + i * dim_;
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
            const double v = static_cast<double>(row[j]);
            s += v * v;
        }
        sq_norms_[i] = s;
    }
}

DatasetStore DatasetStore::from_doubles(const std::vector<double>& points, std::size_t n,
                                        std::size_t dim) {
    std::vector<float> narrowed(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) narrowed[i] = static_cast<float>(points[i]);
    return DatasetStore(std::move(narrowed), n, dim);
}

std::vector<double> DatasetStore::point_as_double(std::size_t i) const {
    const float* row = points_.data() + i * dim_;
    return std::vector<double>(row, row + dim_);
}

DatasetStore load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open dataset file: " + path);

    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 0) throw FormatError("empty dataset file: " + path, 0);
    if (in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0) {
        const auto version = read_le<std::uint32_t>(in, 4, "version");
        if (version != kVersion) {
            throw FormatError("unsupported dataset version " + std::to_string(version), 4);
        }
        const auto n = read_le<std::uint64_t>(in, 8, "point count");
        const auto dim = read_le<std::uint64_t>(in, 16, "dimension");
        if (n == 0 || dim == 0) throw FormatError("dataset header declares zero size", 8);

        std::vector<float> points(n * dim);
        for (std::size_t i = 0; i < points.size(); ++i) {
            points[i] = read_le<float>(in, 24 + i * sizeof(float), "point data");
        }
        char extra;
        if (in.read(&extra, 1)) {
            throw FormatError("trailing bytes after point data", 24 + points.size() * 4);
        }
        return DatasetStore(std::move(points), n, dim);
    }

    // No magic: headerless CSV.
    const CsvTable table = read_csv_matrix(path);
    std::vector<float> points(table.values.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        points[i] = static_cast<float>(table.values[i]);
    }
    return DatasetStore(std::move(points), table.rows, table.cols);
}

void save_dataset(const DatasetStore& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open dataset file for writing: " + path);
    out.write(kMagic, 4);
    write_le(out, kVersion);
    write_le(out, static_cast<std::uint64_t>(data.size()));
    write_le(out, static_cast<std::uint64_t>(data.dim()));
    for (float v : data.raw_points()) write_le(out, v);
    if (!out) throw FormatError("write failed: " + path);
}

namespace {

void validate_spec(const SyntheticSpec& spec) {
    if (spec.n < 1) throw ConfigError("synthetic spec requires n >= 1");
    if (spec.dim < 1) throw ConfigError("synthetic spec requires dim >= 1");
    if (spec.kind == SyntheticKind::GaussianMixture) {
        if (spec.components < 1) throw ConfigError("GMM requires components >= 1");
        if (!(spec.component_std > 0.0)) throw ConfigError("GMM requires component_std > 0");
    }
    if (spec.kind == SyntheticKind::TwoMoons && spec.dim != 2) {
        throw ConfigError("two-moons data is 2-dimensional");
    }
}

std::vector<double> gmm_points(const SyntheticSpec& spec, RngStream& rng) {
    // Component means drawn once, uniform in [-1, 1]^dim.
    std::vector<double> means(spec.components * spec.dim);
    for (double& m : means) m = 2.0 * rng.uniform() - 1.0;

    std::vector<double> pts(spec.n * spec.dim);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t comp = rng.uniform_index(spec.components);
        for (std::size_t j = 0; j < spec.dim; ++j) {
            pts[i * spec.dim + j] = means[comp * spec.dim + j] + spec.component_std * rng.normal();
        }
    }
    return pts;
}

std::vector<double> two_moons_points(const SyntheticSpec& spec, RngStream& rng) {
    std::vector<double> pts(spec.n * 2);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double angle = std::numbers::pi * rng.uniform();
        double x, y;
        if (i % 2 == 0) {
            x = std::cos(angle);
            y = std::sin(angle);
        } else {
            x = 1.0 - std::cos(angle);
            y = 0.5 - std::sin(angle);
        }
        pts[i * 2] = x + spec.component_std * rng.normal();
        pts[i * 2 + 1] = y + spec.component_std * rng.normal();
    }
    return pts;
}

}  // namespace

DatasetStore generate_dataset(const SyntheticSpec& spec) {
    validate_spec(spec);
    RngStream rng(derive_seed(spec.seed, static_cast<std::uint64_t>(spec.kind), spec.n, spec.dim));

    std::vector<double> pts;
    switch (spec.kind) {
        case SyntheticKind::GaussianMixture:
            pts = gmm_points(spec, rng);
            break;
        case SyntheticKind::UniformHypercube:
            pts.resize(spec.n * spec.dim);
            for (double& v : pts) v = rng.uniform();
            break;
        case SyntheticKind::TwoMoons:
            pts = two_moons_points(spec, rng);
            break;
    }
    return DatasetStore::from_doubles(pts, spec.n, spec.dim);
}

double dataset_diameter(const DatasetStore& data) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < data.size(); ++i) {
        const auto xi = data.point_as_double(i);
        for (std::size_t j = i + 1; j < data.size(); ++j) {
            best = std::max(best, data.squared_distance_to(xi, data.sq_norm(i), j));
        }
    }
    return std::sqrt(best);
}

double dataset_min_gap(const DatasetStore& data) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < data.size(); ++i) {
        const auto xi = data.point_as_double(i);
        for (std::size_t j = i + 1; j < data.size(); ++j) {
            const double sq = data.squared_distance_to(xi, data.sq_norm(i), j);
            if (sq > 0.0) best = std::min(best, sq);
        }
    }
    return std::isfinite(best) ? std::sqrt(best) : 0.0;
}

}  // namespace nnscore
