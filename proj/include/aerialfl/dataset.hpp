#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "aerialfl/rng.hpp"

namespace aerialfl {

/// Labelled samples stored row-major in one flat buffer.
struct Dataset {
    std::vector<float> features;
    std::vector<int> labels;
    int dim = 0;
    int classes = 0;

    std::size_t size() const { return labels.size(); }
    std::span<const float> sample(std::size_t i) const
    {
        return {features.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
};

/// Reads an IDX image/label file pair (magic 0x803 / 0x801, big-endian
/// headers, unsigned pixel bytes). Gzip-compressed files are accepted too.
/// Pixels are scaled to [0, 1]. Throws std::runtime_error on malformed input.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int classes = 10);

struct DataSplit {
    Dataset train;
    Dataset test;
};

/// Loads train-{images-idx3,labels-idx1}-ubyte and t10k-* from dir, with or
/// without a .gz suffix. max_train truncates the training split (0 keeps all).
DataSplit load_mnist(const std::filesystem::path& dir, std::size_t max_train = 0);

/// Gaussian blobs: class c is centred on a random unit vector scaled by
/// separation, with isotropic unit noise. Balanced classes, shuffled order.
Dataset make_synthetic_blobs(std::size_t per_class, int classes, int dim, double separation, Rng& rng);

/// Train/test pair drawn from one set of class centres.
DataSplit make_synthetic_split(std::size_t train_per_class, std::size_t test_per_class, int classes, int dim,
                               double separation, std::uint64_t seed);

} // namespace aerialfl
