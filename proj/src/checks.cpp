#include "mff/checks.hpp"

#include <random>

namespace mff {

NewsSample random_sample(const DatasetDims& dims, std::uint64_t seed, int label) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    auto fill = [&](Shape shape) {
        Tensor t(std::move(shape), 0.0);
        for (auto& v : t.raw()) v = dist(rng);
        return t;
    };
    NewsSample s;
    s.id = "gradcheck_" + std::to_string(seed);
    s.label = label;
    s.r_t = fill({dims.n, dims.d_t});
    s.r_i = fill({dims.p, dims.d_i});
    s.c_t = fill({dims.d_g});
    s.c_i = fill({dims.d_g});
    return s;
}

ModelConfig gradcheck_config() {
    ModelConfig cfg;
    cfg.dims = {3, 3, 6, 6, 8};
    cfg.d_m = 8;
    cfg.heads = 2;
    return cfg;
}

double full_model_gradcheck(const ModelConfig& config, std::uint64_t seed,
                            std::size_t coords_per_param) {
    ModelParams model = ModelParams::init(config, seed);
    const NewsSample sample = random_sample(config.dims, seed ^ 0xBEEFULL);
    std::vector<Tensor> params = model.all_params();
    auto f = [&] { return bce_loss(double(sample.label), model_forward(sample, model)); };
    // h = 1e-4 keeps the difference quotient above the double rounding floor
    // for the many near-zero gradient entries of a freshly initialized model
    return grad_check(f, params, 1e-4, coords_per_param, seed);
}

std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed) {
    std::vector<GradCheckResult> results;
    const ModelConfig cfg = gradcheck_config();
    const std::size_t d_m = cfg.d_m;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    auto input = [&](Shape shape) {
        Tensor t(std::move(shape), 0.0);
        for (auto& v : t.raw()) v = dist(rng);
        return t;
    };

    {
        auto mha = MultiHeadAttentionParams::init(d_m, d_m, cfg.heads, rng);
        Tensor q = input({3, d_m}), kv = input({4, d_m});
        std::vector<Tensor> params;
        mha.visit("mha", [&](const std::string&, Tensor& t) { params.push_back(t); });
        auto f = [&] { return sum_all(multi_head_cross_attention(q, kv, mha)); };
        results.push_back({"multi_head_cross_attention", grad_check(f, params, 1e-4, 0, seed)});
    }
    {
        auto block = CoAttentionBlockParams::init(d_m, cfg.heads, rng);
        Tensor a = input({3, d_m}), b = input({4, d_m});
        std::vector<Tensor> params;
        block.visit("block", [&](const std::string&, Tensor& t) { params.push_back(t); });
        // squash before summing: the plain sum of a layer-normed sequence
        // collapses to its beta parameter and checks nothing
        auto f = [&] {
            auto [out_a, out_b] = co_attention_pair(a, b, block);
            return sum_all(sigmoid(out_a.pooled)) + sum_all(sigmoid(out_b.seq));
        };
        results.push_back({"co_attention_pair", grad_check(f, params, 1e-4, 0, seed)});
    }
    {
        auto fusion = FusionParams::init(d_m, cfg.heads, true, true, rng);
        Tensor text = input({3, d_m}), image = input({4, d_m});
        std::vector<Tensor> params;
        fusion.visit("fusion", [&](const std::string&, Tensor& t) { params.push_back(t); });
        auto f = [&] { return sum_all(sigmoid(fuse(text, image, fusion).consistency)); };
        results.push_back({"fusion_module", grad_check(f, params, 1e-4, 4, seed)});
    }
    {
        auto sa = SelfAttentionParams::init(d_m, cfg.heads, rng);
        Tensor modal = input({3, d_m}), strengthened = input({3, d_m});
        std::vector<Tensor> params;
        sa.visit("sa", [&](const std::string&, Tensor& t) { params.push_back(t); });
        params.push_back(modal);
        auto f = [&] {
            return sum_all(sigmoid(run_branch(modal, strengthened, sa).inconsistency));
        };
        results.push_back({"inconsistency_filter", grad_check(f, params, 1e-4, 0, seed)});
    }
    {
        auto clf = ClassifierParams::init(3 * d_m, d_m, rng);
        Tensor f1 = input({d_m}), f2 = input({d_m}), f3 = input({d_m});
        std::vector<Tensor> params{clf.w1, clf.b1, clf.w2, clf.b2, f1, f2, f3};
        auto f = [&] { return bce_loss(1.0, classify({f1, f2, f3}, clf)); };
        results.push_back({"classifier_bce", grad_check(f, params, 1e-4, 0, seed)});
    }
    results.push_back({"full_model", full_model_gradcheck(cfg, seed)});
    return results;
}

} // namespace mff
