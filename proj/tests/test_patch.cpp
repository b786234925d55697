#include <catch2/catch_amalgamated.hpp>

#include "semcom/image.hpp"
#include "semcom/rng.hpp"

using namespace semcom;

namespace {

Image random_image(int h, int w, std::uint64_t seed) {
    Image img(h, w);
    Rng rng(seed);
    for (auto& p : img.pixels) p = static_cast<float>(rng.uniform());
    return img;
}

}  // namespace

TEST_CASE("patchify produces the expected grid geometry") {
    Image img = random_image(32, 32, 1);
    MatF p = patchify<float>(img, 4);
    CHECK(p.rows() == 64);
    CHECK(p.cols() == 48);
}

TEST_CASE("patchify of an all-zero image is a single zero patch") {
    Image img(8, 8, 0.0f);
    MatF p = patchify<float>(img, 8);
    REQUIRE(p.rows() == 1);
    REQUIRE(p.cols() == 192);
    CHECK(p.cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("patchify/unpatchify round-trips bit-exactly") {
    Image img = random_image(16, 16, 2);
    Image back = unpatchify(patchify<float>(img, 4), 16, 16);
    REQUIRE(back.pixels.size() == img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) REQUIRE(back.pixels[i] == img.pixels[i]);
}

TEST_CASE("patchify rejects non-divisible geometry") {
    Image img = random_image(10, 8, 3);
    CHECK_THROWS_AS(patchify<float>(img, 4), DimensionError);
}

TEST_CASE("unpatchify rejects mismatched patch counts") {
    MatF p = MatF::Zero(3, 48);  // 3 patches cannot tile 16x16 at patch 4
    CHECK_THROWS_AS(unpatchify(p, 16, 16), DimensionError);
}

TEST_CASE("single-patch sequence unpatchifies to the patch itself") {
    Rng rng(4);
    MatF p(1, 48);
    for (Eigen::Index j = 0; j < p.cols(); ++j) p(0, j) = static_cast<float>(rng.uniform());
    Image img = unpatchify(p, 4, 4);
    int k = 0;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c) REQUIRE(img.at(y, x, c) == p(0, k++));
}

TEST_CASE("patch rows follow raster order and values are preserved") {
    // encode each pixel's (y, x, c) into its value so placement is checkable
    const int h = 16, w = 12, ps = 4;
    Image img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = static_cast<float>((y * w + x) * 3 + c) / (h * w * 3);
    MatF p = patchify<float>(img, ps);
    const int gw = w / ps;
    REQUIRE(p.rows() == (h / ps) * gw);
    for (Eigen::Index row = 0; row < p.rows(); ++row) {
        const int py = static_cast<int>(row) / gw, px = static_cast<int>(row) % gw;
        int k = 0;
        for (int y = 0; y < ps; ++y)
            for (int x = 0; x < ps; ++x)
                for (int c = 0; c < 3; ++c) {
                    const float expected =
                        static_cast<float>(((py * ps + y) * w + (px * ps + x)) * 3 + c) / (h * w * 3);
                    REQUIRE(p(row, k++) == expected);
                }
    }

    // round-trip across a grid of geometries
    for (int hh : {4, 8, 12}) {
        for (int ww : {4, 8, 16}) {
            for (int pp : {2, 4}) {
                Image a = random_image(hh, ww, static_cast<std::uint64_t>(hh * 100 + ww * 10 + pp));
                Image b = unpatchify(patchify<float>(a, pp), hh, ww);
                REQUIRE(b.pixels == a.pixels);
            }
        }
    }
}
