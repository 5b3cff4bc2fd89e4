#include <doctest.h>

#include <cmath>
#include <random>

#include "mff/filter.hpp"

using namespace mff;

namespace {

Tensor randn(Shape shape, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Tensor t(std::move(shape), 0.0);
    for (auto& v : t.raw()) v = dist(rng);
    return t;
}

} // namespace

TEST_CASE("similarity matrix is the scaled cross inner-product table") {
    Tensor modal({2, 2}, {1, 0, 0, 1});
    Tensor strengthened({3, 2}, {1, 2, 3, 4, 5, 6});
    Tensor sim = similarity_matrix(modal, strengthened);
    CHECK(sim.shape() == Shape{2, 3});
    const double s = 1.0 / std::sqrt(2.0);
    const std::vector<double> expected{1 * s, 3 * s, 5 * s, 2 * s, 4 * s, 6 * s};
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(sim.data()[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("consistency scores form a probability vector") {
    Tensor sim({2, 3}, {0, 0, 0, 0, 0, 0});
    Tensor scores = consistency_scores(sim);
    CHECK(scores.shape() == Shape{2});
    CHECK(scores.data()[0] == doctest::Approx(0.5));

    // a row with uniformly larger similarity gets the larger score
    Tensor skew({2, 3}, {1, 1, 1, 2, 2, 2});
    Tensor s2 = consistency_scores(skew);
    CHECK(s2.at(1) > s2.at(0));
    CHECK(s2.at(0) + s2.at(1) == doctest::Approx(1.0));

    // the own axis reduces columns instead: one score per strengthened position
    Tensor own = consistency_scores(skew, ScoreAxis::own);
    CHECK(own.shape() == Shape{3});
}

TEST_CASE("inverted scores complement the originals") {
    Tensor scores({3}, {0.2, 0.3, 0.5});
    Tensor inv = invert_scores(scores);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(inv.at(i) == doctest::Approx(1.0 - scores.at(i)));
}

TEST_CASE("branch output shapes and score identity") {
    std::mt19937_64 rng(1);
    auto params = FilterParams::init(8, 2, rng);
    Tensor modal = randn({4, 8}, rng);
    Tensor strengthened = randn({6, 8}, rng);

    BranchOutput out = run_branch(modal, strengthened, params.sa_image);
    CHECK(out.inconsistency.shape() == Shape{8});
    CHECK(out.consistency_scores.shape() == Shape{4});
    CHECK(out.inconsistency_scores.shape() == Shape{4});

    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        total += out.consistency_scores.at(i);
        CHECK(out.consistency_scores.at(i) + out.inconsistency_scores.at(i) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("positions aligned with the context score as more consistent") {
    std::mt19937_64 rng(2);
    auto params = FilterParams::init(4, 1, rng);
    // strengthened sequence lives along e0; one modal row matches, one is orthogonal
    Tensor strengthened({3, 4}, 0.0);
    for (std::size_t i = 0; i < 3; ++i) strengthened.raw()[i * 4] = 1.0;
    Tensor modal({2, 4}, {1, 0, 0, 0, 0, 1, 0, 0});
    BranchOutput out = run_branch(modal, strengthened, params.sa_text);
    CHECK(out.consistency_scores.at(0) > out.consistency_scores.at(1));
    CHECK(out.inconsistency_scores.at(0) < out.inconsistency_scores.at(1));
}

TEST_CASE("filter branch gradients match finite differences") {
    std::mt19937_64 rng(3);
    auto params = FilterParams::init(6, 2, rng);
    Tensor modal = randn({3, 6}, rng);
    Tensor strengthened = randn({4, 6}, rng);
    std::vector<Tensor> leaves{modal, strengthened};
    params.visit("", [&](const std::string&, Tensor& t) { leaves.push_back(t); });
    auto f = [&] {
        BranchOutput out = run_branch(modal, strengthened, params.sa_image);
        return sum_all(sigmoid(out.inconsistency));
    };
    CHECK(grad_check(f, leaves, 1e-5, 6, 42) < 1e-4);
}
