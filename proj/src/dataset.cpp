#include "aerialfl/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include <zlib.h>

namespace aerialfl {
namespace {

// gzread passes uncompressed files through unchanged, so one reader serves
// both plain and .gz IDX files.
class IdxReader {
public:
    explicit IdxReader(const std::filesystem::path& path) : path_(path.string())
    {
        file_ = gzopen(path_.c_str(), "rb");
        if (file_ == nullptr) {
            throw std::runtime_error("cannot open " + path_);
        }
    }
    ~IdxReader() { gzclose(file_); }
    IdxReader(const IdxReader&) = delete;
    IdxReader& operator=(const IdxReader&) = delete;

    std::uint32_t read_u32()
    {
        std::array<unsigned char, 4> b{};
        read(b.data(), b.size());
        return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
    }

    void read(unsigned char* out, std::size_t n)
    {
        while (n > 0) {
            const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
            const int got = gzread(file_, out, chunk);
            if (got <= 0) {
                throw std::runtime_error(path_ + ": truncated IDX file");
            }
            out += got;
            n -= static_cast<std::size_t>(got);
        }
    }

    const std::string& path() const { return path_; }

private:
    std::string path_;
    gzFile file_ = nullptr;
};

std::filesystem::path resolve(const std::filesystem::path& dir, const std::string& stem)
{
    for (const char* suffix : {"", ".gz"}) {
        auto p = dir / (stem + suffix);
        if (std::filesystem::exists(p)) {
            return p;
        }
    }
    throw std::runtime_error("missing " + (dir / stem).string() + "[.gz]");
}

Dataset truncated(Dataset d, std::size_t n)
{
    if (n == 0 || n >= d.size()) {
        return d;
    }
    d.labels.resize(n);
    d.features.resize(n * static_cast<std::size_t>(d.dim));
    return d;
}

} // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int classes)
{
    IdxReader img(images);
    if (img.read_u32() != 0x00000803u) {
        throw std::runtime_error(img.path() + ": bad image magic");
    }
    const std::uint32_t count = img.read_u32();
    const std::uint32_t rows = img.read_u32();
    const std::uint32_t cols = img.read_u32();

    IdxReader lab(labels);
    if (lab.read_u32() != 0x00000801u) {
        throw std::runtime_error(lab.path() + ": bad label magic");
    }
    if (lab.read_u32() != count) {
        throw std::runtime_error(lab.path() + ": label count does not match " + img.path());
    }

    Dataset d;
    d.dim = static_cast<int>(rows * cols);
    d.classes = classes;
    std::vector<unsigned char> pixels(static_cast<std::size_t>(count) * rows * cols);
    img.read(pixels.data(), pixels.size());
    d.features.resize(pixels.size());
    std::transform(pixels.begin(), pixels.end(), d.features.begin(),
                   [](unsigned char p) { return static_cast<float>(p) / 255.0f; });

    std::vector<unsigned char> raw(count);
    lab.read(raw.data(), raw.size());
    d.labels.assign(raw.begin(), raw.end());
    for (int y : d.labels) {
        if (y >= classes) {
            throw std::runtime_error(lab.path() + ": label " + std::to_string(y) + " out of range");
        }
    }
    return d;
}

DataSplit load_mnist(const std::filesystem::path& dir, std::size_t max_train)
{
    DataSplit s;
    s.train = truncated(load_idx(resolve(dir, "train-images-idx3-ubyte"), resolve(dir, "train-labels-idx1-ubyte")),
                        max_train);
    s.test = load_idx(resolve(dir, "t10k-images-idx3-ubyte"), resolve(dir, "t10k-labels-idx1-ubyte"));
    return s;
}

namespace {

std::vector<double> blob_centres(int classes, int dim, double separation, Rng& rng)
{
    std::normal_distribution<double> normal;
    std::vector<double> centres(static_cast<std::size_t>(classes) * dim);
    for (int c = 0; c < classes; ++c) {
        double* v = centres.data() + static_cast<std::size_t>(c) * dim;
        double len = 0.0;
        for (int j = 0; j < dim; ++j) {
            v[j] = normal(rng);
            len += v[j] * v[j];
        }
        len = std::sqrt(len);
        for (int j = 0; j < dim; ++j) {
            v[j] *= separation / len;
        }
    }
    return centres;
}

Dataset draw_blobs(const std::vector<double>& centres, std::size_t per_class, int classes, int dim, Rng& rng)
{
    std::normal_distribution<double> normal;
    const std::size_t n = per_class * static_cast<std::size_t>(classes);
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
    }
    std::shuffle(order.begin(), order.end(), rng);

    Dataset d;
    d.dim = dim;
    d.classes = classes;
    d.labels = order;
    d.features.resize(n * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        const double* c = centres.data() + static_cast<std::size_t>(order[i]) * dim;
        float* x = d.features.data() + i * static_cast<std::size_t>(dim);
        for (int j = 0; j < dim; ++j) {
            x[j] = static_cast<float>(c[j] + normal(rng));
        }
    }
    return d;
}

} // namespace

Dataset make_synthetic_blobs(std::size_t per_class, int classes, int dim, double separation, Rng& rng)
{
    if (classes < 1 || dim < 1) {
        throw std::invalid_argument("synthetic blobs need classes >= 1 and dim >= 1");
    }
    const auto centres = blob_centres(classes, dim, separation, rng);
    return draw_blobs(centres, per_class, classes, dim, rng);
}

DataSplit make_synthetic_split(std::size_t train_per_class, std::size_t test_per_class, int classes, int dim,
                               double separation, std::uint64_t seed)
{
    if (classes < 1 || dim < 1) {
        throw std::invalid_argument("synthetic blobs need classes >= 1 and dim >= 1");
    }
    Rng rng = make_stream(seed, {stream_tag::data});
    const auto centres = blob_centres(classes, dim, separation, rng);
    DataSplit s;
    s.train = draw_blobs(centres, train_per_class, classes, dim, rng);
    s.test = draw_blobs(centres, test_per_class, classes, dim, rng);
    return s;
}

} // namespace aerialfl
