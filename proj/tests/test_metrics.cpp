#include <catch2/catch_amalgamated.hpp>

#include "semcom/metrics.hpp"

using namespace semcom;

namespace {

std::vector<std::pair<int, double>> curve_of(const std::vector<double>& sims) {
    std::vector<std::pair<int, double>> c;
    for (std::size_t i = 0; i < sims.size(); ++i) c.emplace_back(static_cast<int>(i) + 1, sims[i]);
    return c;
}

}  // namespace

TEST_CASE("find_L_opt on a strictly increasing curve returns L_tot") {
    CHECK(find_L_opt(curve_of({0.1, 0.3, 0.5, 0.7, 0.9}), 0.01) == 5);
}

TEST_CASE("find_L_opt example: plateau within eps") {
    // target = 0.91 - 0.01 = 0.90; first L with sim >= 0.90 is L = 2
    CHECK(find_L_opt(curve_of({0.5, 0.9, 0.91, 0.91}), 0.01) == 2);
}

TEST_CASE("find_L_opt with eps 0 finds the first index of an exactly flat tail") {
    CHECK(find_L_opt(curve_of({0.2, 0.8, 0.8, 0.8}), 0.0) == 2);
}

TEST_CASE("find_L_opt is monotone in eps") {
    const auto curve = curve_of({0.1, 0.55, 0.8, 0.86, 0.9, 0.905, 0.91, 0.91});
    int prev = 1 << 20;
    for (double eps : {0.0, 0.005, 0.01, 0.05, 0.2}) {
        const int l_opt = find_L_opt(curve, eps);
        CHECK(l_opt <= prev);
        prev = l_opt;
    }
}

TEST_CASE("find_L_opt validates curve coverage") {
    std::vector<std::pair<int, double>> gap{{1, 0.5}, {3, 0.8}};
    CHECK_THROWS_AS(find_L_opt(gap, 0.01), DimensionError);
    CHECK_THROWS_AS(find_L_opt({}, 0.01), DimensionError);
}

TEST_CASE("spearman rank correlation sanity") {
    CHECK(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) == Catch::Approx(1.0));
    CHECK(spearman_rho({1, 2, 3, 4}, {9, 7, 5, 3}) == Catch::Approx(-1.0));
    // monotone in rank even when nonlinear
    CHECK(spearman_rho({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == Catch::Approx(1.0));
    const double noisy = spearman_rho({1, 2, 3, 4, 5, 6}, {1.0, 2.1, 1.9, 3.5, 3.4, 4.0});
    CHECK(noisy > 0.8);
    CHECK(noisy < 1.0);
}

TEST_CASE("cosine similarity guards zero embeddings") {
    VecD a = VecD::Zero(4), b = VecD::Ones(4);
    CHECK_THROWS_AS(cosine_similarity(a, b), Error);
    VecD c(3), d(3);
    c << 1, 2, 3;
    d << 2, 4, 6;
    CHECK(cosine_similarity(c, d) == Catch::Approx(1.0));
    CHECK(cosine_similarity(c, -d) == Catch::Approx(-1.0));
    CHECK(cosine_similarity(c, d) == cosine_similarity(d, c));
}
