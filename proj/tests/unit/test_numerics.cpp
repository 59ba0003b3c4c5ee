#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "amga/numerics/autograd.hpp"
#include "amga/numerics/errors.hpp"
#include "amga/numerics/kernels.hpp"
#include "amga/util/parallel.hpp"
#include "amga/util/tensor_file.hpp"
#include "support/fixtures.hpp"
#include "support/random_net.hpp"

using namespace amga;

TEST_CASE("tensor construction checks the value count")
{
    CHECK_THROWS_AS(Tensor({2, 3}, std::vector<float>(5)), DimensionError);
    const Tensor t({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    CHECK(max_abs(t) == 0.0);
    CHECK(Tensor::from({2}, {1.0f, -3.0f}).data()[1] == -3.0f);
}

TEST_CASE("reshape keeps data and rejects a wrong element count")
{
    const Tensor t = Tensor::from({2, 2}, {1, 2, 3, 4});
    const Tensor r = t.reshaped({4});
    CHECK(r[3] == 4.0f);
    CHECK_THROWS_AS(t.reshaped({3}), DimensionError);
}

TEST_CASE("error hierarchy groups into three exit-code families")
{
    CHECK_THROWS_AS(throw DimensionError("x"), ConfigError);
    CHECK_THROWS_AS(throw ContractError("x"), ConfigError);
    CHECK_THROWS_AS(throw IndexError("x"), ConfigError);
    CHECK_THROWS_AS(throw ParseError("x"), IoError);
    CHECK_THROWS_AS(throw TrainingError("x"), NumericError);
    CHECK_THROWS_AS(throw AttackError("x"), NumericError);
}

TEST_CASE("rng streams are reproducible and distributions stay in range")
{
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng a2(42);
    CHECK(a2.next_u64() != c.next_u64());

    Rng r(7);
    double mean = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const auto k = r.below(7);
        CHECK(k < 7);
        const auto j = r.between(-3, 3);
        CHECK(j >= -3);
        CHECK(j <= 3);
        const double z = r.normal();
        mean += z;
        sq += z * z;
    }
    mean /= n;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
    CHECK(Rng::derive(5, 1) == Rng::derive(5, 1));
    CHECK(Rng::derive(5, 1) != Rng::derive(5, 2));
}

TEST_CASE("shuffle is a permutation")
{
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    Rng r(3);
    shuffle(v, r);
    CHECK(std::set<int>(v.begin(), v.end()).size() == 50);
    bool moved = false;
    for (int i = 0; i < 50; ++i) moved = moved || v[i] != i;
    CHECK(moved);
}

TEST_CASE("dense forward matches a hand computation")
{
    const Tensor x = Tensor::from({1, 2}, {1, 2});
    const Tensor w = Tensor::from({2, 3}, {1, 0, -1, 2, 1, 0});
    const Tensor b = Tensor::from({3}, {0.5f, 0, 0});
    const Tensor y = kernels::dense_forward(x, w, b);
    CHECK(y[0] == doctest::Approx(5.5));
    CHECK(y[1] == doctest::Approx(2.0));
    CHECK(y[2] == doctest::Approx(-1.0));
    CHECK_THROWS_AS(kernels::dense_forward(Tensor({1, 3}), w, b), DimensionError);
}

TEST_CASE("conv2d forward matches nested loops with stride and padding")
{
    Rng rng(11);
    for (std::size_t stride : {1u, 2u}) {
        for (std::size_t pad : {0u, 1u, 2u}) {
            const Tensor x = testing::random_tensor({2, 2, 7, 6}, rng, -1, 1);
            const Tensor k = testing::random_tensor({3, 2, 3, 3}, rng, -1, 1);
            const Tensor b = testing::random_tensor({3}, rng, -1, 1);
            const Tensor y = kernels::conv2d_forward(x, k, &b, {stride, pad});
            const std::size_t OH = (7 + 2 * pad - 3) / stride + 1, OW = (6 + 2 * pad - 3) / stride + 1;
            REQUIRE(y.shape() == Shape{2, 3, OH, OW});
            double worst = 0.0;
            for (std::size_t n = 0; n < 2; ++n)
                for (std::size_t o = 0; o < 3; ++o)
                    for (std::size_t oy = 0; oy < OH; ++oy)
                        for (std::size_t ox = 0; ox < OW; ++ox) {
                            double s = b[o];
                            for (std::size_t c = 0; c < 2; ++c)
                                for (std::size_t ky = 0; ky < 3; ++ky)
                                    for (std::size_t kx = 0; kx < 3; ++kx) {
                                        const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
                                        const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                                        if (iy < 0 || ix < 0 || iy >= 7 || ix >= 6) continue;
                                        s += static_cast<double>(x.at4(n, c, iy, ix)) * k.at4(o, c, ky, kx);
                                    }
                            worst = std::max(worst, std::abs(s - y.at4(n, o, oy, ox)));
                        }
            CHECK(worst < 1e-5);
        }
    }
}

TEST_CASE("pooling on a known 4x4 plane")
{
    const Tensor x = Tensor::from({1, 1, 4, 4}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
    const Tensor mx = kernels::maxpool_forward(x, 2);
    const Tensor av = kernels::avgpool_forward(x, 2);
    CHECK(mx.storage() == std::vector<float>{6, 8, 14, 16});
    CHECK(av.storage() == std::vector<float>{3.5f, 5.5f, 11.5f, 13.5f});
}

TEST_CASE("softmax rows sum to one and uniform cross-entropy is ln C")
{
    for (std::size_t C : {2u, 5u, 10u}) {
        const Tensor p = kernels::softmax_forward(Tensor({3, C}));
        for (std::size_t i = 0; i < p.numel(); ++i) CHECK(p[i] == doctest::Approx(1.0 / C));
        const std::vector<std::size_t> y{0, 1, 1};
        CHECK(kernels::cross_entropy_value(p, y) == doctest::Approx(std::log(static_cast<double>(C))).epsilon(1e-6));
    }
    const Tensor big = kernels::softmax_forward(Tensor::from({1, 2}, {1000.0f, 0.0f}));
    CHECK(big.all_finite());
    CHECK(big[0] == doctest::Approx(1.0));
}

TEST_CASE("backward requires a scalar on the same tape")
{
    Tape tape;
    const Var v = tape.variable(Tensor({2}));
    CHECK_THROWS_AS(tape.backward(v), ContractError);
    CHECK_THROWS_AS(tape.backward(Var{99}), ContractError);
}

TEST_CASE("shared subexpressions accumulate gradients")
{
    TapeD tape;
    const Var x = tape.variable(TensorD::from({2}, {3.0, -2.0}));
    const Var y = ag::sum(tape, ag::add(tape, ag::mul(tape, x, x), ag::scale(tape, x, 4.0)));
    const TensorD g = tape.backward(y).of(x);
    CHECK(g[0] == doctest::Approx(2 * 3.0 + 4.0));
    CHECK(g[1] == doctest::Approx(2 * -2.0 + 4.0));
}

TEST_CASE("gather routes gradients back to their sources and ignores padding")
{
    TapeD tape;
    const Var x = tape.variable(TensorD::from({3}, {1.0, 2.0, 3.0}));
    const Var g = ag::gather(tape, x, {2, -1, 2, 0}, Shape{4});
    CHECK(tape.value(g).storage() == std::vector<double>{3, 0, 3, 1});
    const TensorD gx = tape.backward(ag::sum(tape, g)).of(x);
    CHECK(gx.storage() == std::vector<double>{1, 0, 2});
    CHECK_THROWS_AS(ag::gather(tape, x, {0}, Shape{2}), DimensionError);
}

TEST_CASE("softmax_mix with equal logits is the plain average")
{
    TapeD tape;
    const Var a = tape.constant(TensorD::from({1, 2}, {0.2, 0.8}));
    const Var b = tape.constant(TensorD::from({1, 2}, {0.6, 0.4}));
    const Var l = tape.variable(TensorD({2}));
    const Var m = ag::softmax_mix(tape, {a, b}, l);
    CHECK(tape.value(m)[0] == doctest::Approx(0.4));
    CHECK(tape.value(m)[1] == doctest::Approx(0.6));
    CHECK_THROWS_AS(ag::softmax_mix(tape, {a}, l), DimensionError);
}

TEST_CASE("random networks: reverse mode agrees with central differences")
{
    Rng rng(2024);
    for (int i = 0; i < 10; ++i) {
        const auto net = testing::RandomNet::draw(rng);
        const auto m = net.check(1e-6, 1e-6);
        CAPTURE(i);
        CHECK(m.within(1e-4, 1e-6));
    }
}

TEST_CASE("tensor files round-trip and reject corruption")
{
    Rng rng(1);
    const std::vector<Tensor> ts{testing::random_tensor({2, 3}, rng), testing::random_tensor({4}, rng)};
    const nlohmann::json header{{"k", 1}};
    const std::string bytes = util::encode_tensor_file("TESTMAG1", header, ts);
    const auto back = util::decode_tensor_file("TESTMAG1", bytes);
    CHECK(back.header == header);
    REQUIRE(back.tensors.size() == 2);
    CHECK(back.tensors[0].storage() == ts[0].storage());
    CHECK(back.tensors[1].shape() == ts[1].shape());

    CHECK_THROWS_AS(util::decode_tensor_file("OTHERMAG", bytes), ParseError);
    CHECK_THROWS_AS(util::decode_tensor_file("TESTMAG1", bytes.substr(0, bytes.size() / 2)), ParseError);
    std::string flipped = bytes;
    flipped[bytes.size() - 10] ^= 0x01;
    CHECK_THROWS_AS(util::decode_tensor_file("TESTMAG1", flipped), ParseError);
    CHECK(util::crc32_hex("123456789") == "cbf43926");
}

TEST_CASE("parallel_for runs every index exactly once")
{
    std::vector<int> hits(1000, 0);
    util::parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(util::parallel_for(10, [](std::size_t i) { if (i == 3) throw IoError("boom"); }), IoError);
    CHECK(util::thread_count() >= 1);
}
