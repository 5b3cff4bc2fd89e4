#include <doctest.h>

#include <cmath>
#include <random>

#include "mff/tensor.hpp"

using namespace mff;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Tensor t(std::move(shape), 0.0);
    for (auto& v : t.raw()) v = dist(rng);
    return t;
}

} // namespace

TEST_CASE("matmul basics") {
    Tensor eye({2, 2}, {1, 0, 0, 1});
    Tensor a({2, 2}, {1, 2, 3, 4});
    CHECK(matmul(eye, a).data() == a.data());

    Tensor row({1, 2}, {1, 2});
    Tensor col({2, 1}, {3, 4});
    CHECK(matmul(row, col).item() == doctest::Approx(11.0));

    Tensor zero({2, 2}, 0.0);
    Tensor za = matmul(zero, a);
    for (double v : za.data()) CHECK(v == 0.0);

    CHECK_THROWS_AS(matmul(Tensor({2, 3}, 0.0), Tensor({2, 3}, 0.0)), DimensionError);
}

TEST_CASE("matmul associativity on random 3-chains") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor a = random_tensor({3, 4}, rng);
        Tensor b = random_tensor({4, 5}, rng);
        Tensor c = random_tensor({5, 2}, rng);
        Tensor left = matmul(matmul(a, b), c);
        Tensor right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.size(); ++i)
            CHECK(left.data()[i] == doctest::Approx(right.data()[i]).epsilon(1e-8));
    }
}

TEST_CASE("softmax values and normalization") {
    Tensor two({2}, {0, 0});
    CHECK(softmax(two, 0).data()[0] == doctest::Approx(0.5));

    Tensor three({3}, {1, 1, 1});
    Tensor uniform = softmax(three, 0);
    for (double v : uniform.data()) CHECK(v == doctest::Approx(1.0 / 3.0));

    Tensor pair({2}, {0.0, std::log(3.0)});
    Tensor s = softmax(pair, 0);
    CHECK(s.data()[0] == doctest::Approx(0.25));
    CHECK(s.data()[1] == doctest::Approx(0.75));

    // every slice sums to 1, also for large inputs thanks to max-subtraction
    std::mt19937_64 rng(3);
    Tensor big = random_tensor({5, 7}, rng);
    for (auto& v : big.raw()) v *= 500.0;
    for (std::size_t axis : {std::size_t(0), std::size_t(1)}) {
        Tensor sm = softmax(big, axis);
        const std::size_t nslices = axis == 1 ? 5 : 7;
        const std::size_t len = axis == 1 ? 7 : 5;
        for (std::size_t s2 = 0; s2 < nslices; ++s2) {
            double sum = 0.0;
            for (std::size_t k = 0; k < len; ++k)
                sum += axis == 1 ? sm.at(s2, k) : sm.at(k, s2);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("layer_norm") {
    Tensor gamma({2}, {1, 1});
    Tensor beta({2}, {0, 0});
    Tensor x({1, 2}, {1, 3});
    Tensor out = layer_norm(x, gamma, beta, 1e-12);
    CHECK(out.data()[0] == doctest::Approx(-1.0));
    CHECK(out.data()[1] == doctest::Approx(1.0));

    Tensor g3({3}, {1, 1, 1});
    Tensor b3({3}, {0, 0, 0});
    Tensor constant({1, 3}, {5, 5, 5});
    Tensor flat = layer_norm(constant, g3, b3);
    for (double v : flat.data()) CHECK(v == doctest::Approx(0.0));

    Tensor g0({3}, {0, 0, 0});
    Tensor beta_val({3}, {2, -1, 0.5});
    Tensor any({1, 3}, {9, 1, 4});
    Tensor out2 = layer_norm(any, g0, beta_val);
    for (std::size_t j = 0; j < 3; ++j) CHECK(out2.data()[j] == beta_val.data()[j]);

    // normalized rows: near-zero mean, unit variance
    std::mt19937_64 rng(5);
    Tensor r = random_tensor({4, 6}, rng);
    Tensor g6({6}, 1.0), b6({6}, 0.0);
    Tensor n = layer_norm(r, g6, b6, 1e-9);
    for (std::size_t i = 0; i < 4; ++i) {
        double mu = 0.0, var = 0.0;
        for (std::size_t j = 0; j < 6; ++j) mu += n.at(i, j);
        mu /= 6.0;
        for (std::size_t j = 0; j < 6; ++j) var += (n.at(i, j) - mu) * (n.at(i, j) - mu);
        var /= 6.0;
        CHECK(std::abs(mu) < 1e-6);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("concat") {
    Tensor a({1, 1}, {1.0});
    Tensor b({1, 1}, {2.0});
    Tensor ab = concat({a, b}, 1);
    CHECK(ab.shape() == Shape{1, 2});
    CHECK(ab.data() == std::vector<double>{1.0, 2.0});

    Tensor empty({1, 0}, std::vector<double>{});
    Tensor with_empty = concat({ab, empty}, 1);
    CHECK(with_empty.data() == ab.data());

    Tensor b1({2, 2}, {1, 2, 3, 4});
    Tensor b2({2, 2}, {5, 6, 7, 8});
    Tensor b3({2, 2}, {9, 10, 11, 12});
    Tensor wide = concat({b1, b2, b3}, 1);
    CHECK(wide.shape() == Shape{2, 6});
    CHECK(wide.data() == std::vector<double>{1, 2, 5, 6, 9, 10, 3, 4, 7, 8, 11, 12});

    CHECK_THROWS_AS(concat({b1, Tensor({3, 2}, 0.0)}, 1), DimensionError);
}

TEST_CASE("concat then slice is the identity") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::uniform_int_distribution<std::size_t> dim(1, 5);
        const std::size_t rows = dim(rng), c1 = dim(rng), c2 = dim(rng);
        Tensor a = random_tensor({rows, c1}, rng);
        Tensor b = random_tensor({rows, c2}, rng);
        Tensor cat = concat({a, b}, 1);
        CHECK(slice(cat, 1, 0, c1).data() == a.data());
        CHECK(slice(cat, 1, c1, c2).data() == b.data());
    }
}

TEST_CASE("pointwise_scale") {
    Tensor x({2, 2}, {1, 1, 4, 4});
    Tensor ones({2}, {1, 1});
    CHECK(pointwise_scale(ones, x).data() == x.data());
    Tensor zeros({2}, {0, 0});
    Tensor wiped = pointwise_scale(zeros, x);
    for (double v : wiped.data()) CHECK(v == 0.0);
    Tensor s({2}, {2.0, 0.5});
    CHECK(pointwise_scale(s, x).data() == std::vector<double>{2, 2, 2, 2});
    CHECK_THROWS_AS(pointwise_scale(Tensor({3}, 0.0), x), DimensionError);
}

TEST_CASE("mean_pool") {
    Tensor single({1, 3}, {4, 5, 6});
    CHECK(mean_pool(single).data() == std::vector<double>{4, 5, 6});
    Tensor x({2, 2}, {1, 2, 3, 4});
    CHECK(mean_pool(x).data() == std::vector<double>{2, 3});
    Tensor equal({3, 2}, {7, 8, 7, 8, 7, 8});
    CHECK(mean_pool(equal).data() == std::vector<double>{7, 8});
}

TEST_CASE("relu sigmoid sum_axis") {
    Tensor v({2}, {-1.0, 2.0});
    CHECK(relu(v).data() == std::vector<double>{0.0, 2.0});
    CHECK(sigmoid(Tensor({1}, {0.0})).data()[0] == doctest::Approx(0.5));
    Tensor m({2, 2}, {1, 0, 2, 3});
    CHECK(sum_axis(m, 1).data() == std::vector<double>{1, 5});
    CHECK(sum_axis(m, 0).data() == std::vector<double>{3, 3});
}

TEST_CASE("backward basics") {
    Tensor x({2, 2}, {1, 2, 3, 4});
    x.set_requires_grad(true);
    backward(sum_all(x));
    for (double g : x.grad()) CHECK(g == 1.0);

    Tensor a = Tensor::scalar(3.0);
    Tensor b = Tensor::scalar(5.0);
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    backward(a * b);
    CHECK(a.grad()[0] == 5.0);
    CHECK(b.grad()[0] == 3.0);

    CHECK_THROWS_AS(backward(Tensor({2}, {1.0, 2.0})), DimensionError);
}

TEST_CASE("gradient accumulates over multiple uses") {
    Tensor x = Tensor::scalar(2.0);
    x.set_requires_grad(true);
    // f(x) = x*x + x, f'(2) = 5
    backward(x * x + x);
    CHECK(x.grad()[0] == doctest::Approx(5.0));
}

TEST_CASE("grad_check oracle cases") {
    Tensor p = Tensor::scalar(3.0);
    std::vector<Tensor> params{p};
    auto quadratic = [&] { return p * p; };
    CHECK(grad_check(quadratic, params) < 1e-8);

    auto constant = [&] { return Tensor::scalar(1.0) + scale(p, 0.0); };
    CHECK(grad_check(constant, params) < 1e-10);
}

TEST_CASE("bce_loss values") {
    CHECK(bce_loss(1.0, Tensor::scalar(1.0 - 1e-7)).item() == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(bce_loss(0.0, Tensor::scalar(0.5)).item() == doctest::Approx(std::log(2.0)));
    CHECK(bce_loss(1.0, Tensor::scalar(0.25)).item() == doctest::Approx(std::log(4.0)));
    CHECK_THROWS_AS(bce_loss(1.0, Tensor({2}, {0.5, 0.5})), DimensionError);
}

TEST_CASE("finite-difference agreement of composite ops") {
    std::mt19937_64 rng(23);
    Tensor x = random_tensor({3, 4}, rng);
    Tensor w = random_tensor({4, 4}, rng);
    Tensor gamma({4}, 1.0), beta({4}, 0.0);
    std::vector<Tensor> params{x, w, gamma, beta};
    auto f = [&] {
        Tensor h = layer_norm(matmul(softmax(x, 1), w), gamma, beta);
        return sum_all(sigmoid(relu(h)) * h);
    };
    CHECK(grad_check(f, params) < 1e-4);
}
