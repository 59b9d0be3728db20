#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "qmlp/common.hpp"

namespace qmlp {

// Labeled k x k images with pixels in [0, 1].
struct Dataset {
    int k = 0;
    std::vector<std::vector<double>> images; // row-major k*k
    std::vector<int> labels;

    std::size_t size() const { return images.size(); }

    Dataset head(std::size_t n) const {
        Dataset d;
        d.k = k;
        n = std::min(n, size());
        d.images.assign(images.begin(), images.begin() + static_cast<std::ptrdiff_t>(n));
        d.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
        return d;
    }
};

namespace detail {

inline std::vector<unsigned char> read_file_maybe_gz(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (raw.size() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b) {
        // gzip container: inflate in chunks
        std::vector<unsigned char> out;
        z_stream zs{};
        if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
            throw DataError("gzip init failed for " + path);
        zs.next_in = raw.data();
        zs.avail_in = static_cast<uInt>(raw.size());
        std::vector<unsigned char> buf(1 << 20);
        int rc = Z_OK;
        while (rc != Z_STREAM_END) {
            zs.next_out = buf.data();
            zs.avail_out = static_cast<uInt>(buf.size());
            rc = inflate(&zs, Z_NO_FLUSH);
            if (rc != Z_OK && rc != Z_STREAM_END) {
                inflateEnd(&zs);
                throw DataError("gzip decode failed for " + path);
            }
            out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
        }
        inflateEnd(&zs);
        return out;
    }
    return raw;
}

inline std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off,
                          const std::string& path) {
    if (off + 4 > b.size())
        throw DataError(path + ": truncated at offset " + std::to_string(off));
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
           (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

} // namespace detail

// Parses the standard IDX pair (magic 0x803 images, 0x801 labels), scaling
// pixel bytes to [0, 1]. Accepts gzip-compressed files.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img = detail::read_file_maybe_gz(images_path);
    const auto lab = detail::read_file_maybe_gz(labels_path);

    if (detail::be32(img, 0, images_path) != 0x00000803u)
        throw DataError(images_path + ": bad magic at offset 0 (want 0x00000803)");
    if (detail::be32(lab, 0, labels_path) != 0x00000801u)
        throw DataError(labels_path + ": bad magic at offset 0 (want 0x00000801)");

    const std::uint32_t n_img = detail::be32(img, 4, images_path);
    const std::uint32_t rows = detail::be32(img, 8, images_path);
    const std::uint32_t cols = detail::be32(img, 12, images_path);
    const std::uint32_t n_lab = detail::be32(lab, 4, labels_path);
    if (n_img != n_lab)
        throw DataError("image/label count mismatch: " + std::to_string(n_img) + " vs " +
                        std::to_string(n_lab));
    if (rows != cols) throw DataError(images_path + ": non-square images unsupported");
    const std::size_t px = static_cast<std::size_t>(rows) * cols;
    if (img.size() < 16 + static_cast<std::size_t>(n_img) * px)
        throw DataError(images_path + ": truncated at offset " + std::to_string(img.size()));
    if (lab.size() < 8 + n_lab)
        throw DataError(labels_path + ": truncated at offset " + std::to_string(lab.size()));

    Dataset d;
    d.k = static_cast<int>(rows);
    d.images.reserve(n_img);
    d.labels.reserve(n_img);
    for (std::uint32_t i = 0; i < n_img; ++i) {
        std::vector<double> im(px);
        const std::size_t base = 16 + static_cast<std::size_t>(i) * px;
        for (std::size_t j = 0; j < px; ++j) im[j] = img[base + j] / 255.0;
        d.images.push_back(std::move(im));
        const int y = lab[8 + i];
        if (y < 0 || y > 9)
            throw DataError(labels_path + ": label " + std::to_string(y) + " out of 0..9 at index " +
                            std::to_string(i));
        d.labels.push_back(y);
    }
    return d;
}

// Average pooling of one 28x28 image down to k x k. k=3 center-crops to
// 27x27 first (rows/cols 0..26) since 28 is not divisible by 3.
inline std::vector<double> downsample(const std::vector<double>& image, int k) {
    if (image.size() != 28 * 28) throw ConfigError("downsample: expected a 28x28 image");
    if (k != 2 && k != 3 && k != 4) throw ConfigError("downsample: k must be 2, 3 or 4");
    const int src = k == 3 ? 27 : 28;
    const int block = src / k;
    std::vector<double> out(static_cast<std::size_t>(k) * k, 0.0);
    for (int br = 0; br < k; ++br)
        for (int bc = 0; bc < k; ++bc) {
            double s = 0.0;
            for (int r = 0; r < block; ++r)
                for (int c = 0; c < block; ++c)
                    s += image[static_cast<std::size_t>(br * block + r) * 28 +
                               static_cast<std::size_t>(bc * block + c)];
            out[static_cast<std::size_t>(br) * k + bc] = s / (block * block);
        }
    return out;
}

inline Dataset downsample_all(const Dataset& d, int k) {
    Dataset out;
    out.k = k;
    out.labels = d.labels;
    out.images.reserve(d.size());
    for (const auto& im : d.images) out.images.push_back(downsample(im, k));
    return out;
}

// Row-major flatten, angle = pi * pixel. Pixels must lie in [0, 1].
inline std::vector<double> to_angles(const std::vector<double>& image) {
    std::vector<double> a(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) {
        if (!(image[i] >= 0.0 && image[i] <= 1.0))
            throw DataError("to_angles: pixel " + std::to_string(i) + " outside [0, 1]");
        a[i] = kPi * image[i];
    }
    return a;
}

enum class SyntheticKind { TwoGaussians, Parity, Constant };

// Deterministic labeled fixtures for fast tests.
inline Dataset synthetic(SyntheticKind kind, int n, std::uint64_t seed, int k = 2) {
    if (n < 1) throw ConfigError("synthetic: n must be positive");
    Dataset d;
    d.k = k;
    rng::Stream s(rng::hash_combine(seed, 0x5e7f));
    const std::size_t px = static_cast<std::size_t>(k) * k;
    for (int i = 0; i < n; ++i) {
        std::vector<double> im(px);
        int label = 0;
        switch (kind) {
            case SyntheticKind::Constant:
                for (auto& p : im) p = 0.5;
                label = 0;
                break;
            case SyntheticKind::TwoGaussians: {
                // class 0 near 0.25, class 1 near 0.75; margin >= 0.2
                label = i % 2;
                const double mean = label == 0 ? 0.25 : 0.75;
                for (auto& p : im) {
                    double v = mean + 0.05 * (s.next_double() * 2.0 - 1.0);
                    p = std::min(1.0, std::max(0.0, v));
                }
                break;
            }
            case SyntheticKind::Parity: {
                int ones = 0;
                for (auto& p : im) {
                    const bool bit = s.next_double() < 0.5;
                    ones += bit;
                    p = bit ? 1.0 : 0.0;
                }
                label = ones % 2;
                break;
            }
        }
        d.images.push_back(std::move(im));
        d.labels.push_back(label);
    }
    return d;
}

} // namespace qmlp
