#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "wf/classifier.hpp"

using namespace wf;

TEST_CASE("vectorize scales, pads, truncates") {
    Trace t{{1514, -757}, Label::monitored(0)};
    std::vector<double> v = vectorize(t, 4);
    CHECK(v == std::vector<double>{1.0, -0.5, 0.0, 0.0});

    Trace longer{{100, 200, 300, 400, 500}, Label::monitored(0)};
    std::vector<double> v3 = vectorize(longer, 3);
    REQUIRE(v3.size() == 3);
    CHECK(v3[2] == doctest::Approx(300.0 / 1514.0));

    Trace empty;
    std::vector<double> z = vectorize(empty, 5);
    for (double x : z) CHECK(x == 0.0);
}

TEST_CASE("knn basics and tie-breaks") {
    Dataset train;
    train.class_count = 2;
    train.traces.push_back(Trace{{100, 100}, Label::monitored(0)});
    train.traces.push_back(Trace{{100, 100}, Label::monitored(0)});
    KnnModel m = knn_fit(train, 4, 1);
    auto [label, score] = m.predict(vectorize(train.traces[0], 4));
    CHECK(label == 0);
    CHECK(score == 1.0);

    // query exactly between single exemplars of class 0 and 1 (distances
    // bitwise equal by symmetry)
    Dataset pair;
    pair.class_count = 2;
    pair.traces.push_back(Trace{{1514, 1514}, Label::monitored(0)});
    pair.traces.push_back(Trace{{-1514, -1514}, Label::monitored(1)});
    KnnModel m2 = knn_fit(pair, 2, 2);
    auto [lab2, score2] = m2.predict(std::vector<double>(2, 0.0));
    CHECK(lab2 == 0);  // equal votes, equal mean distance -> smaller index
    CHECK(score2 == doctest::Approx(0.5));

    CHECK_THROWS_AS(knn_fit(Dataset{}, 4, 1), EmptyTrainingSet);
    CHECK_THROWS_AS(knn_fit(pair, 4, 3), std::invalid_argument);
}

TEST_CASE("knn k=1 perfect on distinct training set") {
    Dataset train;
    train.class_count = 5;
    SeededRng rng(9);
    for (int c = 0; c < 5; ++c)
        for (int r = 0; r < 4; ++r) {
            Trace t;
            for (int i = 0; i < 10; ++i) t.sizes.push_back(rng.randi(1, 1514) * (c % 2 ? 1 : -1));
            t.label = Label::monitored(c);
            train.traces.push_back(t);
        }
    KnnModel m = knn_fit(train, 10, 1);
    for (const Trace& t : train.traces)
        CHECK(m.predict(vectorize(t, 10)).first == t.label.site_index);
}

TEST_CASE("architecture shape calculator") {
    CnnArchitecture arch;
    arch.input_len = 1000;
    arch.num_classes = 100;
    // 1000 -> 992/2=496 -> 488/2=244 -> 236/2=118 -> 110/2=55
    CHECK(arch.flat_len() == 55 * 256);

    CnnArchitecture tiny;
    tiny.input_len = 10;
    tiny.num_classes = 2;
    CHECK_THROWS_AS(tiny.flat_len(), ShapeMismatch);
}

TEST_CASE("softmax output sums to one and prediction is pure") {
    CnnArchitecture arch;
    arch.input_len = 40;
    arch.num_classes = 7;
    arch.channels = {4};
    CnnModel m(arch, 123);
    SeededRng rng(5);
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<double> x(40);
        for (double& v : x) v = 2.0 * rng.randr() - 1.0;
        std::vector<double> p = m.predict_proba(x);
        REQUIRE(p.size() == 7);
        double sum = 0;
        for (double v : p) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-6);
        CHECK(m.predict_proba(x) == p);
    }
    CHECK_THROWS_AS(m.predict_proba(std::vector<double>(39, 0.0)), ShapeMismatch);
}

TEST_CASE("untrained model is near-uniform on random inputs") {
    CnnArchitecture arch;
    arch.input_len = 60;
    arch.num_classes = 10;
    arch.channels = {4};
    CnnModel m(arch, 77);  // zero epochs: initialization only
    SeededRng rng(8);
    double worst = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> x(60);
        for (double& v : x) v = 2.0 * rng.randr() - 1.0;
        worst = std::max(worst, monitored_score(m.predict_proba(x)));
    }
    CHECK(worst < 2.0 / 10.0);
}

TEST_CASE("gradient matches central finite differences") {
    CnnArchitecture arch;
    arch.input_len = 20;
    arch.num_classes = 3;
    arch.channels = {4};
    CnnModel m(arch, 2024);

    SeededRng rng(14);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys = {0, 2};
    for (int s = 0; s < 2; ++s) {
        std::vector<double> x(20);
        for (double& v : x) v = 2.0 * rng.randr() - 1.0;
        xs.push_back(x);
    }

    std::vector<double> analytic = m.batch_gradient(xs, ys);
    std::vector<double*> params = m.parameters();
    REQUIRE(analytic.size() == params.size());

    const double h = 1e-4;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double orig = *params[i];
        *params[i] = orig + h;
        double up = m.batch_loss(xs, ys);
        *params[i] = orig - h;
        double down = m.batch_loss(xs, ys);
        *params[i] = orig;
        double numeric = (up - down) / (2.0 * h);
        double rel = std::abs(numeric - analytic[i]) /
                     std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
        max_rel = std::max(max_rel, rel);
    }
    CHECK(max_rel < 1e-4);
}

TEST_CASE("training fits linearly separable data") {
    CnnArchitecture arch;
    arch.input_len = 16;
    arch.num_classes = 2;
    arch.channels = {4};
    CnnModel m(arch, 31);

    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (int i = 0; i < 8; ++i) {
        std::vector<double> x(16, 0.0);
        int cls = i % 2;
        for (int j = 0; j < 16; ++j) x[j] = cls ? 0.5 + 0.01 * i : -0.5 - 0.01 * i;
        xs.push_back(x);
        ys.push_back(cls);
    }
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch_size = 4;
    std::vector<double> losses = m.train(xs, ys, cfg);
    CHECK(losses.back() < losses.front());
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(argmax_class(m.predict_proba(xs[i])) == ys[i]);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
    CnnArchitecture arch;
    arch.input_len = 20;
    arch.num_classes = 3;
    arch.channels = {4};

    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    SeededRng rng(55);
    for (int i = 0; i < 12; ++i) {
        std::vector<double> x(20);
        for (double& v : x) v = 2.0 * rng.randr() - 1.0;
        xs.push_back(x);
        ys.push_back(i % 3);
    }
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 4;
    cfg.seed = 9;

    CnnModel a(arch, cfg.seed), b(arch, cfg.seed);
    a.train(xs, ys, cfg);
    b.train(xs, ys, cfg);
    std::vector<double*> pa = a.parameters(), pb = b.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i] == *pb[i]);
}

TEST_CASE("model save/load round trip") {
    CnnArchitecture arch;
    arch.input_len = 20;
    arch.num_classes = 3;
    arch.channels = {4};
    CnnModel m(arch, 404);
    const char* path = "test_model.txt";
    m.save(path);
    CnnModel back = CnnModel::load(path);
    std::vector<double*> pa = m.parameters(), pb = back.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i] == *pb[i]);
    std::remove(path);
}

TEST_CASE("closed-world evaluation") {
    // deterministic stub classifier: argmax of first C inputs
    struct Stub : Classifier {
        std::vector<double> predict_proba(const std::vector<double>& v) const override {
            std::vector<double> p(3, 0.0);
            int best = 0;
            for (int i = 1; i < 3; ++i)
                if (v[i] > v[best]) best = i;
            p[best] = 1.0;
            return p;
        }
        int num_classes() const override { return 3; }
        int feature_len() const override { return 4; }
    } stub;

    Dataset test;
    test.class_count = 3;
    test.traces.push_back(Trace{{1514, 52, 52}, Label::monitored(0)});   // pred 0: correct
    test.traces.push_back(Trace{{52, 1514, 52}, Label::monitored(1)});   // pred 1: correct
    test.traces.push_back(Trace{{52, 1514, 52}, Label::monitored(2)});   // pred 1: wrong
    EvalResult r = evaluate_closed(stub, test, 4);
    CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(r.confusion[0][0] == 1);
    CHECK(r.confusion[1][1] == 1);
    CHECK(r.confusion[2][1] == 1);
    int row2 = 0;
    for (int v : r.confusion[2]) row2 += v;
    CHECK(row2 == 1);
}

TEST_CASE("stratified split respects the ratio and open-world routing") {
    Dataset ds;
    ds.class_count = 2;
    ds.open_world = true;
    for (int c = 0; c < 2; ++c)
        for (int r = 0; r < 10; ++r) ds.traces.push_back(Trace{{100 + r}, Label::monitored(c)});
    for (int u = 0; u < 5; ++u) ds.traces.push_back(Trace{{-50}, Label::unmonitored()});

    Dataset train, test;
    split_train_test(ds, 0.8, 1, train, test);
    CHECK(train.traces.size() == 16);
    CHECK(test.traces.size() == 9);  // 4 held-out + 5 unmonitored
    for (const Trace& t : train.traces) CHECK(t.label.is_monitored());
}
