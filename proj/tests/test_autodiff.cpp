#include <doctest.h>

#include <cmath>

#include "csa/autodiff.hpp"

using namespace csa;
using namespace csa::ad;

namespace {

Tensor random_tensor(Rng& rng, Shape shape, double scl = 1.0) {
    std::vector<double> v(numel_of(shape));
    for (auto& x : v) x = rng.normal(0.0, scl);
    return Tensor::from(std::move(shape), std::move(v));
}

constexpr double kTol = 1e-4;

} // namespace

TEST_CASE("matmul identity and hand fixture") {
    Tensor eye = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Rng rng(1);
    Tensor m = random_tensor(rng, {3, 3});
    Tensor out = matmul(eye, m);
    for (int i = 0; i < 9; ++i) CHECK(out.value()[i] == doctest::Approx(m.value()[i]));

    Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor b = Tensor::from({2, 1}, {1, 1});
    Tensor c = matmul(a, b);
    CHECK(c.value() == std::vector<double>{3, 7});
    CHECK_THROWS_AS(matmul(a, Tensor::from({3, 1}, {1, 1, 1})), ShapeError);
}

TEST_CASE("matmul gradcheck") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        Tensor b = random_tensor(rng, {5, 3});
        double err = gradcheck([&](const Tensor& x) { return sum(matmul(x, b)); }, random_tensor(rng, {4, 5}));
        CHECK(err < kTol);
        Tensor a = random_tensor(rng, {4, 5});
        err = gradcheck([&](const Tensor& x) { return sum(matmul(a, x)); }, random_tensor(rng, {5, 3}));
        CHECK(err < kTol);
    }
}

TEST_CASE("softmax values") {
    Tensor flat = softmax(Tensor::from({1, 2}, {0, 0}));
    CHECK(flat.value()[0] == doctest::Approx(0.5));
    CHECK(flat.value()[1] == doctest::Approx(0.5));
    Tensor big = softmax(Tensor::from({1, 2}, {1000, 0}));
    CHECK(big.value()[0] == doctest::Approx(1.0));
    CHECK(big.value()[1] == doctest::Approx(0.0));
    CHECK(std::isfinite(big.value()[0]));

    Rng rng(3);
    Tensor random = softmax(random_tensor(rng, {6, 9}, 3.0));
    for (int i = 0; i < 6; ++i) {
        double total = 0;
        for (int j = 0; j < 9; ++j) total += random.value()[i * 9 + j];
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("softmax gradcheck") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed + 10);
        Tensor weights = random_tensor(rng, {3, 7});
        double err = gradcheck([&](const Tensor& x) { return sum(mul(softmax(x), weights)); },
                               random_tensor(rng, {3, 7}));
        CHECK(err < kTol);
    }
}

TEST_CASE("gather_rows lookup and scatter-add gradient") {
    Tensor table = Tensor::from({3, 2}, {0, 1, 10, 11, 20, 21});
    Tensor out = gather_rows(table, {2, 0});
    CHECK(out.value() == std::vector<double>{20, 21, 0, 1});
    CHECK_THROWS_AS(gather_rows(table, {3}), IndexError);

    // duplicate indices accumulate additively
    Tensor leaf = Tensor::param({3, 2}, {0, 1, 10, 11, 20, 21});
    {
        Tape tape;
        Tensor picked = gather_rows(leaf, {1, 1, 1});
        tape.backward(sum(picked));
    }
    CHECK(leaf.grad()[2] == doctest::Approx(3.0));
    CHECK(leaf.grad()[0] == doctest::Approx(0.0));

    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed + 20);
        double err = gradcheck([&](const Tensor& x) { return mean(gather_rows(x, {0, 2, 2, 1})); },
                               random_tensor(rng, {4, 3}));
        CHECK(err < kTol);
    }
}

TEST_CASE("concat and slice round trip") {
    Rng rng(4);
    Tensor a = random_tensor(rng, {3, 2});
    Tensor b = random_tensor(rng, {3, 5});
    Tensor joined = concat_cols(a, b);
    CHECK(joined.shape() == Shape{3, 7});
    Tensor a2 = slice_cols(joined, 0, 2);
    Tensor b2 = slice_cols(joined, 2, 7);
    CHECK(a2.value() == a.value());
    CHECK(b2.value() == b.value());
    CHECK_THROWS_AS(concat_cols(a, random_tensor(rng, {4, 2})), ShapeError);

    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng2(seed + 31);
        Tensor other = random_tensor(rng2, {3, 4});
        double err = gradcheck(
            [&](const Tensor& x) { return mean(slice_cols(concat_cols(x, other), 1, 6)); },
            random_tensor(rng2, {3, 2}));
        CHECK(err < kTol);
    }
}

TEST_CASE("elementwise op gradchecks") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed + 40);
        Tensor other = random_tensor(rng, {4, 3});
        CHECK(gradcheck([&](const Tensor& x) { return sum(add(x, other)); }, random_tensor(rng, {4, 3})) < kTol);
        CHECK(gradcheck([&](const Tensor& x) { return sum(mul(x, other)); }, random_tensor(rng, {4, 3})) < kTol);
        CHECK(gradcheck([&](const Tensor& x) { return sum(scale(x, -2.5)); }, random_tensor(rng, {4, 3})) < kTol);
        CHECK(gradcheck([&](const Tensor& x) { return sum(relu(x)); }, random_tensor(rng, {4, 3})) < kTol);
        CHECK(gradcheck([&](const Tensor& x) { return sum(sigmoid(x)); }, random_tensor(rng, {4, 3})) < kTol);
        CHECK(gradcheck([&](const Tensor& x) { return sum(transpose(x)); }, random_tensor(rng, {4, 3})) < kTol);
        CHECK(gradcheck([&](const Tensor& x) { return mean(x); }, random_tensor(rng, {4, 3})) < kTol);
        Tensor bias = random_tensor(rng, {3});
        CHECK(gradcheck([&](const Tensor& x) { return sum(add(x, bias)); }, random_tensor(rng, {4, 3})) < kTol);
        CHECK(gradcheck([&](const Tensor& x) { return sum(add(other, x)); }, random_tensor(rng, {3})) < kTol);
    }
}

TEST_CASE("layer_norm of a constant row is zero pre-affine") {
    Tensor gain = Tensor::from({4}, {1, 1, 1, 1});
    Tensor bias = Tensor::from({4}, {0, 0, 0, 0});
    Tensor out = layer_norm(Tensor::from({1, 4}, {3, 3, 3, 3}), gain, bias);
    for (double v : out.value()) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("layer_norm gradcheck over input, gain and bias") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed + 50);
        Tensor gain = random_tensor(rng, {6});
        Tensor bias = random_tensor(rng, {6});
        Tensor weights = random_tensor(rng, {3, 6});
        CHECK(gradcheck([&](const Tensor& x) { return sum(mul(layer_norm(x, gain, bias), weights)); },
                        random_tensor(rng, {3, 6})) < kTol);
        Tensor input = random_tensor(rng, {3, 6});
        CHECK(gradcheck([&](const Tensor& g) { return sum(mul(layer_norm(input, g, bias), weights)); },
                        random_tensor(rng, {6})) < kTol);
        CHECK(gradcheck([&](const Tensor& b) { return sum(mul(layer_norm(input, gain, b), weights)); },
                        random_tensor(rng, {6})) < kTol);
    }
}

TEST_CASE("dropout semantics") {
    Rng rng(60);
    Tensor x = random_tensor(rng, {20, 20});
    Rng eval_rng(1);
    Tensor eval_out = dropout(x, 0.5, eval_rng, false);
    CHECK(eval_out.value() == x.value()); // identity in eval mode

    Rng d1(7), d2(7);
    Tensor t1 = dropout(x, 0.4, d1, true);
    Tensor t2 = dropout(x, 0.4, d2, true);
    CHECK(t1.value() == t2.value()); // same stream, same mask
    int zeros = 0;
    for (size_t i = 0; i < t1.value().size(); ++i) {
        if (t1.value()[i] == 0.0) ++zeros;
        else CHECK(t1.value()[i] == doctest::Approx(x.value()[i] / 0.6));
    }
    CHECK(zeros > 60);
    CHECK(zeros < 260);

    // gradcheck against a frozen mask (stream reset per evaluation)
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng2(seed + 70);
        double err = gradcheck(
            [&](const Tensor& t) {
                Rng frozen(99);
                return sum(dropout(t, 0.3, frozen, true));
            },
            random_tensor(rng2, {5, 4}));
        CHECK(err < kTol);
    }
}

TEST_CASE("cross_entropy approaches zero with a growing correct margin") {
    std::vector<int> targets{1};
    double margin10 = cross_entropy(Tensor::from({1, 3}, {0, 10, 0}), targets, 0).item();
    double margin40 = cross_entropy(Tensor::from({1, 3}, {0, 40, 0}), targets, 0).item();
    CHECK(margin10 > margin40);
    CHECK(margin40 < 1e-15);
    CHECK_THROWS_AS(cross_entropy(Tensor::from({1, 3}, {0, 1, 0}), {0}, 0), ShapeError); // everything padded
}

TEST_CASE("cross_entropy gradcheck with pad rows") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed + 80);
        std::vector<int> targets{2, 0, 1}; // middle row padded out
        CHECK(gradcheck([&](const Tensor& x) { return cross_entropy(x, targets, 0); },
                        random_tensor(rng, {3, 4})) < kTol);
    }
}

TEST_CASE("masked_fill and pick_rel gradchecks") {
    std::vector<uint8_t> mask{1, 0, 1, 1, 1, 0};
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed + 90);
        CHECK(gradcheck([&](const Tensor& x) { return sum(masked_fill(x, mask, -5.0)); },
                        random_tensor(rng, {2, 3})) < kTol);
        std::vector<uint32_t> idx{0, 2, 1, 3}; // 2x2 picks into 4 columns
        CHECK(gradcheck([&](const Tensor& x) { return sum(pick_rel(x, idx, 2, PickAxis::row_i)); },
                        random_tensor(rng, {2, 4})) < kTol);
        CHECK(gradcheck([&](const Tensor& x) { return sum(pick_rel(x, idx, 2, PickAxis::row_j)); },
                        random_tensor(rng, {2, 4})) < kTol);
    }
}

TEST_CASE("pick_rel axis semantics") {
    Tensor m = Tensor::from({2, 3}, {0, 1, 2, 10, 11, 12});
    std::vector<uint32_t> idx{0, 2, 1, 0};
    Tensor by_row = pick_rel(m, idx, 2, PickAxis::row_i);
    CHECK(by_row.value() == std::vector<double>{0, 2, 11, 10});
    Tensor by_col = pick_rel(m, idx, 2, PickAxis::row_j);
    CHECK(by_col.value() == std::vector<double>{0, 12, 1, 10});
}

TEST_CASE("backward composes through a small MLP") {
    // d(x . c)/dx = c
    Tensor c = Tensor::from({1, 3}, {2, -1, 0.5});
    Tensor x = Tensor::param({1, 3}, {1, 1, 1});
    {
        Tape tape;
        tape.backward(sum(mul(x, c)));
    }
    CHECK(x.grad() == c.value());

    for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed + 100);
        Tensor w1 = random_tensor(rng, {4, 6});
        Tensor b1 = random_tensor(rng, {6});
        Tensor w2 = random_tensor(rng, {6, 2});
        auto mlp = [&](const Tensor& in) { return mean(matmul(relu(add(matmul(in, w1), b1)), w2)); };
        CHECK(gradcheck(mlp, random_tensor(rng, {3, 4})) < kTol);
    }
}

TEST_CASE("backward accumulates until zero_grad") {
    Tensor x = Tensor::param({1, 2}, {3, 4});
    Tape tape;
    Tensor loss = sum(mul(x, x));
    tape.backward(loss);
    std::vector<double> once = x.grad();
    tape.backward(loss);
    CHECK(x.grad()[0] == doctest::Approx(2 * once[0]));
    CHECK(x.grad()[1] == doctest::Approx(2 * once[1]));
    x.zero_grad();
    CHECK(x.grad() == std::vector<double>{0, 0});
}

TEST_CASE("backward requires a scalar loss") {
    Tensor x = Tensor::param({2, 2}, {1, 2, 3, 4});
    Tape tape;
    Tensor y = scale(x, 2.0);
    CHECK_THROWS_AS(tape.backward(y), NotScalar);
}

TEST_CASE("backward is deterministic across identical runs") {
    auto run = [] {
        Rng rng(123);
        Tensor w = Tensor::param({5, 5}, [&] {
            std::vector<double> v(25);
            for (auto& x : v) x = rng.normal();
            return v;
        }());
        Tensor in = Tensor::from({2, 5}, {1, 2, 3, 4, 5, -1, -2, -3, -4, -5});
        Tape tape;
        tape.backward(mean(softmax(matmul(in, w))));
        return w.grad();
    };
    CHECK(run() == run());
}

TEST_CASE("ops do not mutate their inputs") {
    Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
    std::vector<double> before = a.value();
    (void)softmax(a);
    (void)relu(a);
    (void)scale(a, 3.0);
    (void)transpose(a);
    CHECK(a.value() == before);
}

namespace {
// op with a deliberately wrong backward rule: forward 2x, claimed gradient 1
Tensor buggy_double(const Tensor& x) {
    std::vector<double> out(x.value().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * x.value()[i];
    Tensor r = Tensor::from(x.shape(), std::move(out));
    if (Tape::active()) {
        r.impl->tracked = true;
        auto xi = x.impl;
        auto oi = r.impl;
        Tape::active()->record(oi, [xi, oi] {
            xi->ensure_grad();
            for (size_t i = 0; i < oi->grad.size(); ++i) xi->grad[i] += oi->grad[i];
        });
    }
    return r;
}
} // namespace

TEST_CASE("gradcheck flags an intentionally wrong derivative") {
    Rng rng(7);
    double err = gradcheck([](const Tensor& x) { return sum(buggy_double(x)); }, random_tensor(rng, {3, 4}));
    CHECK(err > 1e-2); // negative control: the injected bug must be caught
}
