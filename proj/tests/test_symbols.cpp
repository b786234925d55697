#include <catch2/catch_amalgamated.hpp>

#include "semcom/channel.hpp"
#include "semcom/rng.hpp"
#include "semcom/symbols.hpp"

using namespace semcom;

TEST_CASE("power normalization yields unit mean symbol power") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_index(8));
        const int d = 2 * (1 + static_cast<int>(rng.uniform_index(32)));
        MatF kept(n, d);
        rng.fill_normal(kept, rng.uniform(0.01, 50.0));
        SymbolFrameF f = features_to_symbols(kept, all_ones_bitmap(n));
        REQUIRE(frame_mean_power(f) == Catch::Approx(1.0).margin(1e-6));
        REQUIRE(popcount(f.bitmap) == n);
    }
}

TEST_CASE("input already at unit power keeps scale 1 and symbols unchanged") {
    // half the entries +-1, half 0: sum of squares = n*d/2 = n*c exactly
    const int n = 2, d = 8;
    MatF kept = MatF::Zero(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d / 2; ++j) kept(i, 2 * j) = (j % 2 == 0) ? 1.0f : -1.0f;
    SymbolFrameF f = features_to_symbols(kept, all_ones_bitmap(n));
    REQUIRE(f.scale == 1.0f);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d / 2; ++j) {
            REQUIRE(f.symbols(i, j).real() == kept(i, 2 * j));
            REQUIRE(f.symbols(i, j).imag() == kept(i, 2 * j + 1));
        }
}

TEST_CASE("single spike feature normalizes to the hand-computed magnitude") {
    // v = [2,0,...,0], d = 64: scale = sqrt(n*c)/||v|| = sqrt(32)/2, so the
    // one nonzero symbol has magnitude 2*scale = sqrt(32)
    MatF kept = MatF::Zero(1, 64);
    kept(0, 0) = 2.0f;
    SymbolFrameF f = features_to_symbols(kept, all_ones_bitmap(1));
    REQUIRE(f.scale == Catch::Approx(std::sqrt(32.0) / 2.0).epsilon(1e-6));
    REQUIRE(std::abs(f.symbols(0, 0)) == Catch::Approx(std::sqrt(32.0)).epsilon(1e-6));
    for (int j = 1; j < 32; ++j) REQUIRE(std::abs(f.symbols(0, j)) == 0.0f);
    REQUIRE(frame_mean_power(f) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("all-zero features raise a degenerate-frame error") {
    MatF kept = MatF::Zero(3, 8);
    CHECK_THROWS_AS(features_to_symbols(kept, all_ones_bitmap(3)), DegenerateFrameError);
}

TEST_CASE("popcount/bitmap mismatch is rejected") {
    MatF kept = MatF::Ones(2, 4);
    MaskBitmap bm(5, 0);
    bm[0] = 1;  // popcount 1 != 2 rows
    CHECK_THROWS_AS(features_to_symbols(kept, bm), DimensionError);
}

TEST_CASE("symbols_to_features inverts features_to_symbols") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_index(6));
        const int d = 2 * (1 + static_cast<int>(rng.uniform_index(16)));
        MatF kept(n, d);
        rng.fill_normal(kept, 3.0);
        SymbolFrameF f = features_to_symbols(kept, all_ones_bitmap(n));
        MatF back = symbols_to_features(f);
        REQUIRE((back - kept).cwiseAbs().maxCoeff() < 1e-6f * std::max(1.0f, kept.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("missing scale metadata is an error") {
    SymbolFrameF f;
    f.symbols = CMat<float>::Ones(1, 4);
    f.bitmap = all_ones_bitmap(1);
    f.has_scale = false;
    CHECK_THROWS_AS(symbols_to_features(f), Error);
}

TEST_CASE("noiseless channel end-to-end recovers the kept features") {
    Rng rng(13);
    MatF kept(4, 32);
    rng.fill_normal(kept, 1.5);
    SymbolFrameF f = features_to_symbols(kept, all_ones_bitmap(4));
    for (auto kind : {ChannelKind::awgn, ChannelKind::rayleigh_slow}) {
        Rng ch_rng(99);
        auto [received, report] = transmit(f, kind, kNoiselessSnrDb, ch_rng);
        MatF back = symbols_to_features(received);
        REQUIRE((back - kept).cwiseAbs().maxCoeff() < 1e-6f);
    }
}

TEST_CASE("awgn at 10 dB matches the analytic recovered-noise variance") {
    // recovered = kept + n/scale, so each real component has variance
    // (sigma^2/2)/scale^2; normalize residuals and pool over >= 1e5 elements
    Rng rng(14);
    const double sigma2 = noise_variance_for_snr_db(10.0);
    double pooled = 0.0;
    long long count = 0;
    Rng ch_rng(1234);
    for (int frame_i = 0; frame_i < 30; ++frame_i) {
        MatF kept(64, 64);
        rng.fill_normal(kept, rng.uniform(0.5, 4.0));
        SymbolFrameF f = features_to_symbols(kept, all_ones_bitmap(64));
        auto [received, report] = transmit(f, ChannelKind::awgn, 10.0, ch_rng);
        MatF back = symbols_to_features(received);
        const double unit = std::sqrt(sigma2 / 2.0) / static_cast<double>(f.scale);
        for (Eigen::Index i = 0; i < kept.rows(); ++i)
            for (Eigen::Index j = 0; j < kept.cols(); ++j) {
                const double z = (static_cast<double>(back(i, j)) - kept(i, j)) / unit;
                pooled += z * z;
                ++count;
            }
    }
    REQUIRE(count >= 100000);
    REQUIRE(pooled / static_cast<double>(count) == Catch::Approx(1.0).epsilon(0.05));
}
