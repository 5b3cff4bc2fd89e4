#include <doctest.h>

#include <random>

#include <json.hpp>

#include "mff/metrics.hpp"

using namespace mff;

TEST_CASE("confusion counts and per-class scores") {
    // tp=2 fp=1 tn=3 fn=1
    std::vector<std::pair<int, double>> cases{
        {1, 0.9}, {1, 0.8}, {1, 0.2},  // two fakes caught, one missed
        {0, 0.7},                      // one real flagged
        {0, 0.1}, {0, 0.3}, {0, 0.4},  // three reals passed
    };
    MetricsReport r = compute_metrics(cases, 0.5, "unit");
    CHECK(r.tp == 2);
    CHECK(r.fp == 1);
    CHECK(r.tn == 3);
    CHECK(r.fn == 1);
    CHECK(r.accuracy == doctest::Approx(5.0 / 7.0));
    CHECK(r.fake.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.fake.recall == doctest::Approx(2.0 / 3.0));
    CHECK(r.fake.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(r.real.precision == doctest::Approx(3.0 / 4.0));
    CHECK(r.real.recall == doctest::Approx(3.0 / 4.0));
    CHECK(r.real.f1 == doctest::Approx(3.0 / 4.0));
    CHECK(r.name == "unit");
}

TEST_CASE("threshold boundary counts as fake") {
    MetricsReport r = compute_metrics({{1, 0.5}, {0, 0.5}}, 0.5);
    CHECK(r.tp == 1);
    CHECK(r.fp == 1);
    CHECK(r.accuracy == doctest::Approx(0.5));
}

TEST_CASE("zero-denominator scores are defined as zero") {
    // everything real and predicted real: no positives anywhere
    MetricsReport r = compute_metrics({{0, 0.1}, {0, 0.2}});
    CHECK(r.accuracy == doctest::Approx(1.0));
    CHECK(r.fake.precision == 0.0);
    CHECK(r.fake.recall == 0.0);
    CHECK(r.fake.f1 == 0.0);
    CHECK(r.real.f1 == doctest::Approx(1.0));

    CHECK_THROWS_AS(compute_metrics({}), DataError);
}

TEST_CASE("metrics agree with an independent recount") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> pred(0.0, 1.0);
    std::bernoulli_distribution lab(0.4);
    std::vector<std::pair<int, double>> cases;
    for (int i = 0; i < 500; ++i) cases.emplace_back(lab(rng) ? 1 : 0, pred(rng));

    MetricsReport r = compute_metrics(cases, 0.5);
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (auto [label, y] : cases) {
        const bool flagged = y >= 0.5;
        if (label == 1 && flagged) ++tp;
        else if (label == 0 && flagged) ++fp;
        else if (label == 0) ++tn;
        else ++fn;
    }
    CHECK(r.tp == tp);
    CHECK(r.fp == fp);
    CHECK(r.tn == tn);
    CHECK(r.fn == fn);
    CHECK(r.accuracy == doctest::Approx(double(tp + tn) / 500.0));
    const double prec = double(tp) / double(tp + fp);
    const double rec = double(tp) / double(tp + fn);
    CHECK(r.fake.precision == doctest::Approx(prec));
    CHECK(r.fake.recall == doctest::Approx(rec));
    CHECK(r.fake.f1 == doctest::Approx(2.0 * prec * rec / (prec + rec)));
    const double rprec = double(tn) / double(tn + fn);
    const double rrec = double(tn) / double(tn + fp);
    CHECK(r.real.precision == doctest::Approx(rprec));
    CHECK(r.real.recall == doctest::Approx(rrec));
}

TEST_CASE("report rendering uses three decimals") {
    MetricsReport r = compute_metrics({{1, 0.9}, {0, 0.1}}, 0.5, "demo");
    std::string table = render_report({r});
    CHECK(table.find("demo") != std::string::npos);
    CHECK(table.find("1.000") != std::string::npos);
    CHECK(table.find("Accuracy") != std::string::npos);

    MetricsReport half = compute_metrics({{1, 0.4}, {0, 0.6}}, 0.5, "worst");
    std::string t2 = render_report({half});
    CHECK(t2.find("0.000") != std::string::npos);
}

TEST_CASE("json report round trips through a parser") {
    MetricsReport r = compute_metrics({{1, 0.9}, {1, 0.2}, {0, 0.1}}, 0.5, "json");
    auto j = nlohmann::json::parse(report_to_json(r));
    CHECK(j.at("name").get<std::string>() == "json");
    CHECK(j.at("accuracy").get<double>() == doctest::Approx(r.accuracy));
    CHECK(j.at("counts").at("tp").get<std::size_t>() == r.tp);
    CHECK(j.at("counts").at("fn").get<std::size_t>() == r.fn);
    CHECK(j.at("fake").at("f1").get<double>() == doctest::Approx(r.fake.f1));
    CHECK(j.at("real").at("precision").get<double>() == doctest::Approx(r.real.precision));
    CHECK(j.at("threshold").get<double>() == 0.5);
}

TEST_CASE("evaluate runs the model over a dataset") {
    SynthConfig sc;
    sc.train_count = 8;
    sc.test_count = 8;
    sc.dims = DatasetDims{4, 4, 8, 8, 8};
    SynthResult data = generate_synth(sc);
    ModelConfig mc;
    mc.dims = sc.dims;
    mc.d_m = 8;
    mc.heads = 2;
    ModelParams model = ModelParams::init(mc, 3);
    MetricsReport r = evaluate(model, data.test, 0.5, "untrained");
    CHECK(r.tp + r.fp + r.tn + r.fn == 8);
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
}
