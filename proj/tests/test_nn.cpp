#include "editsum/error.hpp"
#include "editsum/nn.hpp"
#include "gradcheck.hpp"

#include <doctest.h>

#include <cmath>

using namespace editsum::nn;
using editsum::IndexOutOfVocab;
using editsum::NotScalar;
using editsum::ShapeMismatch;

namespace {

Matrix<double> random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Matrix<double> m(r, c);
    uniform_fill(m, scale, rng);
    return m;
}

Parameter<double> random_param(const std::string& name, std::size_t r, std::size_t c, Rng& rng,
                               double scale = 1.0) {
    Parameter<double> p(name, r, c);
    p.value = random_matrix(r, c, rng, scale);
    return p;
}

// sum(out * weights) with fixed random weights so every output entry matters.
Var<double> weighted_sum(Var<double> out, const Matrix<double>& weights) {
    return sum(mul(out, out.tape->constant(weights)));
}

} // namespace

TEST_CASE("primitive examples") {
    Tape<double> tape;
    auto s = softmax(tape.constant(Matrix<double>(1, 3, 0.0)));
    for (double v : s.value().values()) CHECK(v == doctest::Approx(1.0 / 3));

    auto z = tanh(tape.constant(Matrix<double>(2, 2, 0.0)));
    for (double v : z.value().values()) CHECK(v == 0.0);

    Rng rng(1);
    Matrix<double> eye(3, 3);
    for (int i = 0; i < 3; ++i) eye(i, i) = 1;
    auto m = random_matrix(3, 3, rng);
    CHECK(matmul(tape.constant(eye), tape.constant(m)).value() == m);
}

TEST_CASE("shape errors name both shapes") {
    Tape<double> tape;
    auto a = tape.constant(Matrix<double>(2, 3));
    auto b = tape.constant(Matrix<double>(2, 3));
    CHECK_THROWS_AS(matmul(a, b), ShapeMismatch);
    try {
        matmul(a, b);
    } catch (const ShapeMismatch& e) {
        CHECK(std::string(e.what()).find("[2x3] x [2x3]") != std::string::npos);
    }
    CHECK_THROWS_AS(add(a, tape.constant(Matrix<double>(3, 2))), ShapeMismatch);
    CHECK_THROWS_AS(slice_cols(a, 2, 4), ShapeMismatch);
    CHECK_THROWS_AS(slice_rows(a, 1, 3), ShapeMismatch);
    CHECK_THROWS_AS(reshape(a, 4, 2), ShapeMismatch);
    CHECK_THROWS_AS(group_sum_rows(a, 4), ShapeMismatch);
    CHECK_THROWS_AS(tape.backward(a), NotScalar);
}

TEST_CASE("softmax rows and columns are distributions") {
    Rng rng(2);
    Tape<double> tape;
    auto x = tape.constant(random_matrix(5, 7, rng, 30.0));
    auto r = softmax(x, 1).value();
    for (std::size_t i = 0; i < 5; ++i) {
        double total = 0;
        for (double v : r.row(i)) {
            CHECK(v >= 0);
            total += v;
        }
        CHECK(std::abs(total - 1) <= 1e-12);
    }
    auto c = softmax(x, 0).value();
    for (std::size_t j = 0; j < 7; ++j) {
        double total = 0;
        for (std::size_t i = 0; i < 5; ++i) total += c(i, j);
        CHECK(std::abs(total - 1) <= 1e-12);
    }
}

TEST_CASE("masked softmax zeroes masked entries and empty rows") {
    Tape<double> tape;
    auto x = tape.constant(Matrix<double>(2, 3, {1, 2, 3, 4, 5, 6}));
    std::vector<std::uint8_t> mask = {1, 0, 1, 0, 0, 0};
    auto y = masked_softmax_rows(x, mask).value();
    CHECK(y(0, 1) == 0);
    CHECK(y(0, 0) + y(0, 2) == doctest::Approx(1.0));
    for (double v : y.row(1)) CHECK(v == 0);
}

TEST_CASE("dropout identities") {
    Rng rng(3);
    Tape<double> tape;
    auto x = tape.constant(random_matrix(4, 5, rng));
    CHECK(dropout(x, 0.5, false, 9ull).value() == x.value());
    CHECK(dropout(x, 0.0, true, 9ull).value() == x.value());
    CHECK(dropout(x, 0.0, false, 9ull).value() == x.value());
    auto d = dropout(x, 0.5, true, 9ull).value();
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK((d[i] == 0 || d[i] == doctest::Approx(2 * x.value()[i])));
    CHECK(dropout(x, 0.5, true, 9ull).value() == d);
}

TEST_CASE("backward basics") {
    Tape<double> tape;
    auto x = tape.variable(Matrix<double>(2, 3, 1.5));
    tape.backward(sum(x));
    for (double g : x.grad().values()) CHECK(g == 1.0);

    Tape<double> t2;
    auto y = t2.variable(Matrix<double>(1, 1, 3.0));
    auto loss = mul(y, y);
    t2.backward(loss);
    CHECK(y.grad()[0] == 6.0);
    // leaf gradients accumulate across calls until zeroed
    t2.backward(loss);
    CHECK(y.grad()[0] == 12.0);
}

TEST_CASE("cross entropy values") {
    Tape<double> tape;
    const std::size_t vocab = 7;
    auto uniform = tape.constant(Matrix<double>(3, vocab, 0.25));
    std::vector<std::int32_t> tgt = {0, 3, 6};
    std::vector<std::uint8_t> all = {1, 1, 1};
    CHECK(cross_entropy(uniform, tgt, all).value()[0] == doctest::Approx(std::log(7.0)));

    Matrix<double> peaked(1, vocab, 0.0);
    peaked(0, 2) = 60.0;
    std::vector<std::int32_t> t1 = {2};
    std::vector<std::uint8_t> m1 = {1};
    CHECK(cross_entropy(tape.constant(peaked), t1, m1).value()[0] < 1e-20);

    // independent log-sum-exp evaluation, padded row ignored
    Rng rng(4);
    auto logits = random_matrix(4, vocab, rng, 3.0);
    std::vector<std::int32_t> t4 = {1, 5, 0, 2};
    std::vector<std::uint8_t> m4 = {1, 1, 0, 1};
    double expected = 0;
    for (std::size_t r : {0u, 1u, 3u}) {
        double lse = 0;
        for (std::size_t c = 0; c < vocab; ++c) lse += std::exp(logits(r, c));
        expected += std::log(lse) - logits(r, static_cast<std::size_t>(t4[r]));
    }
    expected /= 3;
    CHECK(cross_entropy(tape.constant(logits), t4, m4).value()[0] ==
          doctest::Approx(expected).epsilon(1e-12));

    std::vector<std::int32_t> bad = {9};
    CHECK_THROWS_AS(cross_entropy(tape.constant(peaked), bad, m1), IndexOutOfVocab);
}

TEST_CASE("primitive gradients match finite differences") {
    Rng rng(5);
    auto a = random_param("a", 3, 4, rng);
    auto b = random_param("b", 4, 5, rng);
    auto c = random_param("c", 3, 4, rng);
    auto row = random_param("row", 1, 4, rng);
    auto col = random_param("col", 3, 1, rng);
    const auto w34 = random_matrix(3, 4, rng);
    const auto w35 = random_matrix(3, 5, rng);

    struct Case {
        const char* name;
        gradcheck::LossFn fn;
        std::vector<Parameter<double>*> params;
        double tol;
    };
    std::vector<std::int32_t> idx = {2, 0, 2, 1};
    std::vector<std::uint8_t> mask = {1, 1, 0, 1, 0, 0, 0, 0, 1, 1, 1, 1};
    std::vector<std::int32_t> targets = {1, 3, 0};
    std::vector<std::uint8_t> tmask = {1, 0, 1};
    const auto w44 = random_matrix(4, 4, rng);
    const auto w68 = random_matrix(6, 2, rng);
    const auto w42 = random_matrix(4, 2, rng);
    const auto w25 = random_matrix(2, 5, rng);
    std::vector<Case> cases = {
        {"matmul", [&](Tape<double>& t) { return weighted_sum(matmul(t.param(a), t.param(b)), w35); },
         {&a, &b}, 1e-6},
        {"add", [&](Tape<double>& t) { return weighted_sum(add(t.param(a), t.param(c)), w34); },
         {&a, &c}, 1e-6},
        {"sub", [&](Tape<double>& t) { return weighted_sum(sub(t.param(a), t.param(c)), w34); },
         {&a, &c}, 1e-6},
        {"mul", [&](Tape<double>& t) { return weighted_sum(mul(t.param(a), t.param(c)), w34); },
         {&a, &c}, 1e-3},
        {"add_row", [&](Tape<double>& t) { return weighted_sum(add_row(t.param(a), t.param(row)), w34); },
         {&a, &row}, 1e-6},
        {"mul_col", [&](Tape<double>& t) { return weighted_sum(mul_col(t.param(a), t.param(col)), w34); },
         {&a, &col}, 1e-3},
        {"tanh", [&](Tape<double>& t) { return weighted_sum(tanh(t.param(a)), w34); }, {&a}, 1e-3},
        {"sigmoid", [&](Tape<double>& t) { return weighted_sum(sigmoid(t.param(a)), w34); }, {&a}, 1e-3},
        {"softmax1", [&](Tape<double>& t) { return weighted_sum(softmax(t.param(a), 1), w34); }, {&a}, 1e-3},
        {"softmax0", [&](Tape<double>& t) { return weighted_sum(softmax(t.param(a), 0), w34); }, {&a}, 1e-3},
        {"masked_softmax", [&](Tape<double>& t) { return weighted_sum(masked_softmax_rows(t.param(a), mask), w34); },
         {&a}, 1e-3},
        {"concat_cols", [&](Tape<double>& t) {
             auto x = concat_cols<double>({t.param(a), t.param(c)});
             return sum(mul(x, t.constant(Matrix<double>(3, 8, 0.7))));
         }, {&a, &c}, 1e-6},
        {"concat_rows", [&](Tape<double>& t) {
             auto x = concat_rows<double>({t.param(a), t.param(row)});
             return weighted_sum(x, w44);
         }, {&a, &row}, 1e-6},
        {"slice_cols", [&](Tape<double>& t) { return weighted_sum(slice_cols(t.param(b), 1, 3), w42); },
         {&b}, 1e-6},
        {"slice_rows", [&](Tape<double>& t) { return weighted_sum(slice_rows(t.param(b), 1, 3), w25); },
         {&b}, 1e-6},
        {"gather_rows", [&](Tape<double>& t) { return weighted_sum(gather_rows(t.param(c), idx), w44); },
         {&c}, 1e-6},
        {"reshape", [&](Tape<double>& t) { return weighted_sum(reshape(t.param(a), 6, 2), w68); }, {&a}, 1e-6},
        {"group_sum_rows", [&](Tape<double>& t) {
             return weighted_sum(group_sum_rows(reshape(t.param(a), 6, 2), 3), Matrix<double>(2, 2, {0.3, -1.1, 0.5, 2.0}));
         }, {&a}, 1e-6},
        {"cross_entropy", [&](Tape<double>& t) { return cross_entropy(t.param(a), targets, tmask); }, {&a}, 1e-3},
        {"dropout", [&](Tape<double>& t) { return weighted_sum(dropout(t.param(a), 0.5, true, 17ull), w34); },
         {&a}, 1e-6},
    };
    for (auto& cs : cases) {
        CAPTURE(cs.name);
        const auto entries = gradcheck::check_all(cs.fn, cs.params);
        CHECK(gradcheck::max_rel_error(entries) <= cs.tol);
    }
}

TEST_CASE("lstm cell") {
    Rng rng(6);
    const std::size_t in = 3, hid = 4, batch = 2;
    SUBCASE("zero weights and inputs give zero state") {
        Tape<double> t;
        LstmWeights<double> w{t.constant(Matrix<double>(in + hid, 4 * hid)),
                              t.constant(Matrix<double>(1, 4 * hid))};
        auto s = lstm_cell(t.constant(Matrix<double>(batch, in)), t.constant(Matrix<double>(batch, hid)),
                           t.constant(Matrix<double>(batch, hid)), w);
        for (double v : s.h.value().values()) CHECK(v == 0);
        for (double v : s.c.value().values()) CHECK(v == 0);
    }
    SUBCASE("saturated forget gate carries memory") {
        Tape<double> t;
        Matrix<double> bias(1, 4 * hid, 0.0);
        for (std::size_t j = hid; j < 2 * hid; ++j) bias[j] = 40.0;     // forget
        for (std::size_t j = 0; j < hid; ++j) bias[j] = -40.0;          // input
        auto c_prev = random_matrix(batch, hid, rng);
        LstmWeights<double> w{t.constant(random_matrix(in + hid, 4 * hid, rng, 0.1)), t.constant(bias)};
        auto s = lstm_cell(t.constant(random_matrix(batch, in, rng)),
                           t.constant(random_matrix(batch, hid, rng)), t.constant(c_prev), w);
        for (std::size_t i = 0; i < c_prev.size(); ++i)
            CHECK(s.c.value()[i] == doctest::Approx(c_prev[i]).epsilon(1e-9));
    }
    SUBCASE("gradients match finite differences") {
        auto W = random_param("W", in + hid, 4 * hid, rng, 0.5);
        auto b = random_param("b", 1, 4 * hid, rng, 0.5);
        auto x = random_param("x", batch, in, rng);
        auto h = random_param("h", batch, hid, rng);
        auto c = random_param("c", batch, hid, rng);
        const auto wh = random_matrix(batch, hid, rng);
        const auto wc = random_matrix(batch, hid, rng);
        gradcheck::LossFn f = [&](Tape<double>& t) {
            auto s = lstm_cell(t.param(x), t.param(h), t.param(c), {t.param(W), t.param(b)});
            return add(weighted_sum(s.h, wh), weighted_sum(s.c, wc));
        };
        const auto entries = gradcheck::check_all(f, {&W, &b, &x, &h, &c});
        CHECK(gradcheck::max_rel_error(entries) <= 1e-3);
    }
    SUBCASE("shape mismatch") {
        Tape<double> t;
        LstmWeights<double> w{t.constant(Matrix<double>(in + hid + 1, 4 * hid)),
                              t.constant(Matrix<double>(1, 4 * hid))};
        CHECK_THROWS_AS(lstm_cell(t.constant(Matrix<double>(batch, in)), t.constant(Matrix<double>(batch, hid)),
                                  t.constant(Matrix<double>(batch, hid)), w),
                        ShapeMismatch);
    }
}

TEST_CASE("clip_grad_norm") {
    Parameter<double> p("p", 1, 2);
    std::vector<Parameter<double>*> ps = {&p};
    p.grad = Matrix<double>(1, 2, {3, 4});
    CHECK(clip_grad_norm<double>(ps, 5.0) == doctest::Approx(5.0));
    CHECK(p.grad[0] == 3);
    CHECK(p.grad[1] == 4);

    p.grad = Matrix<double>(1, 2, {0, 2});
    CHECK(clip_grad_norm<double>(ps, 5.0) == doctest::Approx(2.0));
    CHECK(p.grad[1] == 2);

    Parameter<double> q("q", 2, 1);
    p.grad = Matrix<double>(1, 2, {6, 0});
    q.grad = Matrix<double>(2, 1, {0, 8});
    std::vector<Parameter<double>*> pq = {&p, &q};
    CHECK(clip_grad_norm<double>(pq, 5.0) == doctest::Approx(10.0));
    CHECK(std::abs(grad_norm<double>(pq) - 5.0) <= 1e-9);
}

TEST_CASE("adam") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        Parameter<double> p("p", 2, 2);
        p.value = Matrix<double>(2, 2, {1, 2, 3, 4});
        std::vector<Parameter<double>*> ps = {&p};
        Adam<double> opt(ps, {});
        opt.step(ps);
        CHECK(p.value == Matrix<double>(2, 2, {1, 2, 3, 4}));
        CHECK(opt.steps() == 1);
    }
    SUBCASE("first step with constant gradient moves by the learning rate") {
        Parameter<double> p("p", 1, 1);
        p.grad[0] = 1.0;
        std::vector<Parameter<double>*> ps = {&p};
        Adam<double> opt(ps, {.learning_rate = 0.001});
        opt.step(ps);
        // m_hat = 1, v_hat = 1, update = 0.001 / (1 + 1e-8)
        CHECK(p.value[0] == doctest::Approx(-0.001 / (1 + 1e-8)).epsilon(1e-12));
    }
    SUBCASE("identical runs are bit-identical") {
        auto run = [] {
            Rng rng(42);
            auto p = random_param("p", 3, 3, rng);
            std::vector<Parameter<double>*> ps = {&p};
            Adam<double> opt(ps, {});
            for (int i = 0; i < 20; ++i) {
                p.zero_grad();
                Tape<double> t;
                auto v = t.param(p);
                t.backward(sum(mul(tanh(v), v)));
                opt.step(ps);
            }
            return p.value;
        };
        CHECK(run() == run());
    }
}
