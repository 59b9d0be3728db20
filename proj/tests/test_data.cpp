#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include <zlib.h>

#include "qmlp/data.hpp"
#include "qmlp/simulator.hpp"

using namespace qmlp;
using Catch::Approx;

namespace {

std::string mnist_dir() {
    const char* d = std::getenv("QMLP_MNIST_DIR");
    REQUIRE(d != nullptr);
    return d;
}

void put_be32(std::vector<unsigned char>& b, std::uint32_t v) {
    b.push_back(static_cast<unsigned char>(v >> 24));
    b.push_back(static_cast<unsigned char>(v >> 16));
    b.push_back(static_cast<unsigned char>(v >> 8));
    b.push_back(static_cast<unsigned char>(v));
}

// A 2-sample 28x28 fixture: image 0 all zeros except pixel (0,0)=255,
// image 1 all 51 (=> 0.2). Labels 3 and 7.
void write_fixture(const std::string& img_path, const std::string& lab_path,
                   std::uint32_t img_magic = 0x803, std::uint32_t lab_count = 2,
                   int bad_label = -1, bool truncate_images = false) {
    std::vector<unsigned char> img;
    put_be32(img, img_magic);
    put_be32(img, 2);
    put_be32(img, 28);
    put_be32(img, 28);
    for (int i = 0; i < 28 * 28; ++i) img.push_back(i == 0 ? 255 : 0);
    for (int i = 0; i < 28 * 28; ++i) img.push_back(51);
    if (truncate_images) img.resize(img.size() - 100);

    std::vector<unsigned char> lab;
    put_be32(lab, 0x801);
    put_be32(lab, lab_count);
    lab.push_back(3);
    lab.push_back(bad_label >= 0 ? static_cast<unsigned char>(bad_label) : 7);

    std::ofstream(img_path, std::ios::binary)
        .write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
    std::ofstream(lab_path, std::ios::binary)
        .write(reinterpret_cast<const char*>(lab.data()), static_cast<std::streamsize>(lab.size()));
}

void gzip_file(const std::string& src, const std::string& dst) {
    std::ifstream in(src, std::ios::binary);
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    gzFile gz = gzopen(dst.c_str(), "wb");
    REQUIRE(gz != nullptr);
    REQUIRE(gzwrite(gz, raw.data(), static_cast<unsigned>(raw.size())) ==
            static_cast<int>(raw.size()));
    gzclose(gz);
}

} // namespace

TEST_CASE("IDX fixture parsing") {
    write_fixture("fix-images", "fix-labels");
    const auto d = load_idx("fix-images", "fix-labels");
    REQUIRE(d.size() == 2);
    REQUIRE(d.k == 28);
    REQUIRE(d.labels[0] == 3);
    REQUIRE(d.labels[1] == 7);
    REQUIRE(d.images[0][0] == Approx(1.0));
    REQUIRE(d.images[0][1] == 0.0);
    REQUIRE(d.images[1][100] == Approx(51.0 / 255.0));
}

TEST_CASE("gzip-compressed IDX files load identically") {
    write_fixture("fixg-images", "fixg-labels");
    gzip_file("fixg-images", "fixg-images.gz");
    gzip_file("fixg-labels", "fixg-labels.gz");
    const auto plain = load_idx("fixg-images", "fixg-labels");
    const auto gz = load_idx("fixg-images.gz", "fixg-labels.gz");
    REQUIRE(plain.images == gz.images);
    REQUIRE(plain.labels == gz.labels);
}

TEST_CASE("IDX guards") {
    SECTION("missing file") { REQUIRE_THROWS_AS(load_idx("no-such", "no-such"), DataError); }
    SECTION("bad magic") {
        write_fixture("bad1-images", "bad1-labels", 0x804);
        REQUIRE_THROWS_AS(load_idx("bad1-images", "bad1-labels"), DataError);
    }
    SECTION("count mismatch") {
        write_fixture("bad2-images", "bad2-labels", 0x803, 3);
        REQUIRE_THROWS_AS(load_idx("bad2-images", "bad2-labels"), DataError);
    }
    SECTION("label out of range") {
        write_fixture("bad3-images", "bad3-labels", 0x803, 2, 11);
        REQUIRE_THROWS_AS(load_idx("bad3-images", "bad3-labels"), DataError);
    }
    SECTION("truncated image payload") {
        write_fixture("bad4-images", "bad4-labels", 0x803, 2, -1, true);
        REQUIRE_THROWS_AS(load_idx("bad4-images", "bad4-labels"), DataError);
    }
}

TEST_CASE("the bundled MNIST split loads and is sane") {
    const auto dir = mnist_dir();
    const auto train = load_idx(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
    const auto test = load_idx(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
    REQUIRE(train.size() >= 5000);
    REQUIRE(test.size() >= 1000);
    REQUIRE(train.k == 28);
    std::array<int, 10> counts{};
    for (int y : train.labels) ++counts[static_cast<std::size_t>(y)];
    for (int c = 0; c < 10; ++c) REQUIRE(counts[static_cast<std::size_t>(c)] > 0);
    for (double p : train.images[0]) {
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
    }
}

TEST_CASE("average pooling") {
    SECTION("constant images stay constant") {
        const std::vector<double> im(28 * 28, 0.4);
        for (int k : {2, 3, 4}) {
            const auto out = downsample(im, k);
            REQUIRE(out.size() == static_cast<std::size_t>(k * k));
            for (double v : out) REQUIRE(v == Approx(0.4));
        }
    }
    SECTION("single-pixel mass spreads over the block") {
        std::vector<double> im(28 * 28, 0.0);
        im[0] = 1.0;
        REQUIRE(downsample(im, 2)[0] == Approx(1.0 / 196.0)); // 14x14 block
        REQUIRE(downsample(im, 3)[0] == Approx(1.0 / 81.0));  // 9x9 block
        REQUIRE(downsample(im, 4)[0] == Approx(1.0 / 49.0));  // 7x7 block
    }
    SECTION("k=3 crops the last row and column") {
        std::vector<double> im(28 * 28, 0.0);
        im[27 * 28 + 27] = 1.0;
        const auto out3 = downsample(im, 3);
        for (double v : out3) REQUIRE(v == 0.0);
        REQUIRE(downsample(im, 2)[3] == Approx(1.0 / 196.0));
    }
    SECTION("guards") {
        REQUIRE_THROWS_AS(downsample(std::vector<double>(10, 0.0), 2), ConfigError);
        REQUIRE_THROWS_AS(downsample(std::vector<double>(784, 0.0), 5), ConfigError);
    }
}

TEST_CASE("angle mapping") {
    const auto a = to_angles({0.0, 0.5, 1.0});
    REQUIRE(a[0] == 0.0);
    REQUIRE(a[1] == Approx(kPi / 2));
    REQUIRE(a[2] == Approx(kPi));
    REQUIRE_THROWS_AS(to_angles({1.2}), DataError);
    REQUIRE_THROWS_AS(to_angles({-0.1}), DataError);
}

// RX(pi*p) on |0> gives <Z> = cos(pi*p), so acos(<Z>)/pi recovers the pixel.
TEST_CASE("angle encoding round-trips a pixel through <Z>") {
    for (double p : {0.0, 0.31, 0.72, 1.0}) {
        Statevector sv = new_ground(1);
        apply_gate(sv, GateOp::one(GateKind::RX, 0, Param::literal(kPi * p)));
        const double rec = std::acos(std::clamp(expect_z(sv, 0), -1.0, 1.0)) / kPi;
        REQUIRE(rec == Approx(p).margin(1e-12));
    }
}

TEST_CASE("synthetic fixtures") {
    SECTION("two gaussians are margin-separated") {
        const auto d = synthetic(SyntheticKind::TwoGaussians, 100, 4, 2);
        REQUIRE(d.size() == 100);
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double mean =
                std::accumulate(d.images[i].begin(), d.images[i].end(), 0.0) / 4.0;
            if (d.labels[i] == 0)
                REQUIRE(mean < 0.4);
            else
                REQUIRE(mean > 0.6);
        }
    }
    SECTION("parity labels match the pixel sum") {
        const auto d = synthetic(SyntheticKind::Parity, 50, 5, 3);
        for (std::size_t i = 0; i < d.size(); ++i) {
            int ones = 0;
            for (double p : d.images[i]) ones += p > 0.5;
            REQUIRE(d.labels[i] == ones % 2);
        }
    }
    SECTION("deterministic in the seed") {
        const auto a = synthetic(SyntheticKind::TwoGaussians, 20, 9);
        const auto b = synthetic(SyntheticKind::TwoGaussians, 20, 9);
        REQUIRE(a.images == b.images);
        REQUIRE_THROWS_AS(synthetic(SyntheticKind::Parity, 0, 1), ConfigError);
    }
}

TEST_CASE("head truncates consistently") {
    const auto d = synthetic(SyntheticKind::TwoGaussians, 10, 2);
    const auto h = d.head(4);
    REQUIRE(h.size() == 4);
    REQUIRE(h.images[3] == d.images[3]);
    REQUIRE(d.head(50).size() == 10);
}
