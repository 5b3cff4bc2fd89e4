#include <doctest.h>

#include <random>

#include "mff/fusion.hpp"

using namespace mff;

namespace {

Tensor randn(Shape shape, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Tensor t(std::move(shape), 0.0);
    for (auto& v : t.raw()) v = dist(rng);
    return t;
}

} // namespace

TEST_CASE("tensor fusion outer product") {
    Tensor x({2}, {1.0, 2.0});
    Tensor y({1}, {3.0});
    Tensor outer = tfn_raw(x, y);  // [1,2,1] x [3,1]
    CHECK(outer.shape() == Shape{3, 2});
    CHECK(outer.data() == std::vector<double>{3, 1, 6, 2, 3, 1});

    // zero inputs still carry the bias corner: only the (last,last) entry is 1
    Tensor zx({2}, 0.0), zy({2}, 0.0);
    Tensor z = tfn_raw(zx, zy);
    CHECK(z.shape() == Shape{3, 3});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(z.at(i, j) == ((i == 2 && j == 2) ? 1.0 : 0.0));
}

TEST_CASE("fusion parameter layout follows the flags") {
    std::mt19937_64 rng(1);
    auto full = FusionParams::init(8, 2, true, true, rng);
    CHECK(full.tfn_input_dim() == 16);
    CHECK(full.tfn_w.shape() == Shape{17 * 17, 8});
    CHECK(full.fuse_w.shape() == Shape{16, 8});

    auto plain = FusionParams::init(8, 2, false, true, rng);
    CHECK(plain.tfn_input_dim() == 8);
    CHECK(plain.tfn_w.shape() == Shape{9 * 9, 8});

    auto headless = FusionParams::init(8, 2, false, false, rng);
    CHECK_FALSE(headless.tfn_w.defined());
    CHECK_FALSE(headless.fuse_w.defined());

    std::size_t full_count = 0, headless_count = 0;
    full.visit("f", [&](const std::string&, Tensor&) { ++full_count; });
    headless.visit("f", [&](const std::string&, Tensor&) { ++headless_count; });
    CHECK(headless_count < full_count);
}

TEST_CASE("first fusion and enhancement output shapes") {
    std::mt19937_64 rng(2);
    auto params = FusionParams::init(8, 2, true, true, rng);
    Tensor text = randn({3, 8}, rng);
    Tensor image = randn({4, 8}, rng);

    FirstFusionOutput first = first_fusion(text, image, params);
    CHECK(first.fused.shape() == Shape{8});
    CHECK(first.text_seq.shape() == Shape{3, 8});
    CHECK(first.image_seq.shape() == Shape{4, 8});

    Tensor enhanced = enhance(first.fused, text, params.pair2);
    CHECK(enhanced.shape() == Shape{16});
}

TEST_CASE("full fusion output shapes") {
    std::mt19937_64 rng(3);
    auto params = FusionParams::init(8, 2, true, true, rng);
    Tensor text = randn({3, 8}, rng);
    Tensor image = randn({4, 8}, rng);
    FusionOutput out = fuse(text, image, params);
    CHECK(out.consistency.shape() == Shape{8});
    CHECK(out.fused.shape() == Shape{8});
    CHECK(out.text_seq.shape() == Shape{3, 8});
    CHECK(out.image_seq.shape() == Shape{4, 8});
}

TEST_CASE("fusion without the consistency head refuses to fuse") {
    std::mt19937_64 rng(4);
    auto params = FusionParams::init(8, 2, false, false, rng);
    Tensor text = randn({3, 8}, rng);
    Tensor image = randn({4, 8}, rng);
    CHECK_THROWS_AS(fuse(text, image, params), DimensionError);
    CHECK_THROWS_AS(first_fusion(text, image, params), DimensionError);
    // but the first pair still works for the filter branches
    auto [t_out, i_out] = co_attention_pair(text, image, params.pair1);
    CHECK(t_out.seq.shape() == Shape{3, 8});
    CHECK(i_out.seq.shape() == Shape{4, 8});
}

TEST_CASE("unenhanced fusion feeds the first fused vector to both arms") {
    std::mt19937_64 rng(5);
    auto params = FusionParams::init(8, 2, false, true, rng);
    Tensor text = randn({3, 8}, rng);
    Tensor image = randn({4, 8}, rng);
    FusionOutput out = fuse(text, image, params);
    FirstFusionOutput first = first_fusion(text, image, params);
    Tensor expected = tfn_fuse(first.fused, first.fused, params);
    for (std::size_t j = 0; j < 8; ++j)
        CHECK(out.consistency.at(j) == doctest::Approx(expected.at(j)).epsilon(1e-12));
}

TEST_CASE("fusion module gradients match finite differences") {
    std::mt19937_64 rng(6);
    auto params = FusionParams::init(6, 2, true, true, rng);
    Tensor text = randn({2, 6}, rng);
    Tensor image = randn({3, 6}, rng);
    std::vector<Tensor> leaves{text, image};
    params.visit("", [&](const std::string&, Tensor& t) { leaves.push_back(t); });
    auto f = [&] {
        FusionOutput out = fuse(text, image, params);
        return sum_all(sigmoid(out.consistency)) + sum_all(sigmoid(out.fused));
    };
    CHECK(grad_check(f, leaves, 1e-5, 4, 99) < 1e-4);
}
