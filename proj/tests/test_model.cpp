#include <doctest.h>

#include <cmath>
#include <set>

#include "mff/checks.hpp"
#include "mff/model.hpp"

using namespace mff;

TEST_CASE("cosine similarity oracle values") {
    Tensor a({3}, {1, 2, 2});
    Tensor b({3}, {2, 4, 4});
    CHECK(cosine_sim(a, b) == doctest::Approx(1.0));
    Tensor c({3}, {-1, -2, -2});
    CHECK(cosine_sim(a, c) == doctest::Approx(-1.0));
    Tensor x({2}, {1, 0});
    Tensor y({2}, {0, 1});
    CHECK(cosine_sim(x, y) == doctest::Approx(0.0));

    Tensor zero({2}, {0, 0});
    CHECK_THROWS_AS(cosine_sim(zero, x, /*strict=*/true), NumericalError);
    CHECK(cosine_sim(zero, x, /*strict=*/false) == 0.0);
}

TEST_CASE("similarity normalization") {
    CHECK(normalize_sim(1.0) == doctest::Approx(1.0));
    CHECK(normalize_sim(-1.0) == doctest::Approx(0.0));
    CHECK(normalize_sim(0.0) == doctest::Approx(0.5));
}

TEST_CASE("feature count per ablation") {
    ModelConfig c = gradcheck_config();
    CHECK(c.feature_count() == 3);
    CHECK(c.classifier_input_dim() == 3 * c.d_m);

    ModelConfig no_img = c;
    no_img.ablation.no_image_branch = true;
    CHECK(no_img.feature_count() == 2);

    ModelConfig no_fusion = c;
    no_fusion.ablation.no_fusion = true;
    CHECK(no_fusion.feature_count() == 2);

    ModelConfig only_fusion = c;
    only_fusion.ablation.no_image_branch = true;
    only_fusion.ablation.no_text_branch = true;
    CHECK(only_fusion.feature_count() == 1);

    ModelConfig nothing = only_fusion;
    nothing.ablation.no_fusion = true;
    CHECK(nothing.feature_count() == 0);
    CHECK_THROWS_AS(ModelParams::init(nothing, 1), DimensionError);
}

TEST_CASE("parameter names are unique and the count is stable") {
    ModelParams model = ModelParams::init(gradcheck_config(), 5);
    std::set<std::string> names;
    std::size_t total = 0;
    model.visit([&](const std::string& name, Tensor& t) {
        CHECK(names.insert(name).second);
        total += t.size();
    });
    CHECK(total == model.param_count());
    CHECK(model.all_params().size() == names.size());
}

TEST_CASE("initialization is deterministic per seed") {
    ModelConfig cfg = gradcheck_config();
    ModelParams a = ModelParams::init(cfg, 7);
    ModelParams b = ModelParams::init(cfg, 7);
    ModelParams c = ModelParams::init(cfg, 8);
    CHECK(a.proj_text_w.data() == b.proj_text_w.data());
    CHECK(a.classifier.w1.data() == b.classifier.w1.data());
    CHECK(a.proj_text_w.data() != c.proj_text_w.data());
}

TEST_CASE("forward pass yields a probability and diagnostics") {
    ModelConfig cfg = gradcheck_config();
    ModelParams model = ModelParams::init(cfg, 3);
    NewsSample sample = random_sample(cfg.dims, 11, 1);

    Diagnostics diag;
    Tensor pred = model_forward(sample, model, &diag);
    CHECK(pred.rank() == 0);
    CHECK(pred.size() == 1);
    CHECK(pred.item() > 0.0);
    CHECK(pred.item() < 1.0);
    CHECK(diag.prediction == doctest::Approx(pred.item()));
    CHECK(diag.sim >= 0.0);
    CHECK(diag.sim <= 1.0);

    CHECK(diag.r_is_text.size() == cfg.dims.n);
    CHECK(diag.r_is_image.size() == cfg.dims.p);
    double sum_t = 0.0, sum_i = 0.0;
    for (std::size_t k = 0; k < cfg.dims.n; ++k) {
        sum_t += diag.r_is_text[k];
        CHECK(diag.r_incon_text[k] == doctest::Approx(1.0 - diag.r_is_text[k]));
    }
    for (double v : diag.r_is_image) sum_i += v;
    CHECK(sum_t == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sum_i == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("forward pass is deterministic") {
    ModelConfig cfg = gradcheck_config();
    ModelParams model = ModelParams::init(cfg, 3);
    NewsSample sample = random_sample(cfg.dims, 11, 0);
    CHECK(model_forward(sample, model).item() == model_forward(sample, model).item());
}

TEST_CASE("forced and ablated similarity weights") {
    ModelConfig cfg = gradcheck_config();
    cfg.force_sim = 0.25;
    ModelParams model = ModelParams::init(cfg, 3);
    NewsSample sample = random_sample(cfg.dims, 4, 1);
    Diagnostics diag;
    model_forward(sample, model, &diag);
    CHECK(diag.sim == 0.25);

    ModelConfig fixed = gradcheck_config();
    fixed.ablation.no_similarity = true;
    ModelParams model2 = ModelParams::init(fixed, 3);
    Diagnostics diag2;
    model_forward(sample, model2, &diag2);
    CHECK(diag2.sim == 0.5);
}

TEST_CASE("ablated branches run end to end") {
    NewsSample sample = random_sample(gradcheck_config().dims, 9, 1);
    for (int variant = 0; variant < 5; ++variant) {
        ModelConfig cfg = gradcheck_config();
        switch (variant) {
            case 0: cfg.ablation.no_image_branch = true; break;
            case 1: cfg.ablation.no_text_branch = true; break;
            case 2: cfg.ablation.no_fusion = true; break;
            case 3: cfg.ablation.no_enhance = true; break;
            case 4: cfg.ablation.no_similarity = true; break;
        }
        ModelParams model = ModelParams::init(cfg, 3);
        Tensor pred = model_forward(sample, model);
        CHECK(std::isfinite(pred.item()));
        CHECK(pred.item() > 0.0);
        CHECK(pred.item() < 1.0);
    }
}

TEST_CASE("config hash separates shape-relevant settings") {
    ModelConfig a = gradcheck_config();
    ModelConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    b.d_m *= 2;
    CHECK(config_hash(a) != config_hash(b));
    ModelConfig c = a;
    c.ablation.no_enhance = true;
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash_hex(a).size() == 16);
}

TEST_CASE("full model gradients match finite differences") {
    CHECK(full_model_gradcheck(gradcheck_config(), 13, 6) < 1e-4);
}
