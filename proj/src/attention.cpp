#include "mff/attention.hpp"

#include <cmath>

namespace mff {

Tensor uniform_param(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(double(std::max<std::size_t>(fan_in, 1)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::size_t count = 1;
    for (auto d : shape) count *= d;
    std::vector<double> data(count);
    for (auto& v : data) v = dist(rng);
    Tensor t(std::move(shape), std::move(data));
    t.set_requires_grad(true);
    return t;
}

Tensor const_param(Shape shape, double value) {
    Tensor t(std::move(shape), value);
    t.set_requires_grad(true);
    return t;
}

MultiHeadAttentionParams MultiHeadAttentionParams::init(std::size_t d_in, std::size_t d_out,
                                                        std::size_t heads,
                                                        std::mt19937_64& rng) {
    if (heads < 1) throw DimensionError("attention: head count must be >= 1");
    if (d_in % heads != 0)
        throw DimensionError("attention: model dim " + std::to_string(d_in) +
                             " not divisible by " + std::to_string(heads) + " heads");
    MultiHeadAttentionParams p;
    p.heads = heads;
    p.d_k = d_in / heads;
    for (std::size_t h = 0; h < heads; ++h) {
        p.w_q.push_back(uniform_param({d_in, p.d_k}, d_in, rng));
        p.w_k.push_back(uniform_param({d_in, p.d_k}, d_in, rng));
        p.w_v.push_back(uniform_param({d_in, p.d_k}, d_in, rng));
    }
    p.w_o = uniform_param({heads * p.d_k, d_out}, heads * p.d_k, rng);
    return p;
}

void MultiHeadAttentionParams::visit(const std::string& prefix, const ParamVisitor& fn) {
    for (std::size_t h = 0; h < heads; ++h) {
        const std::string hs = std::to_string(h);
        fn(prefix + ".w_q." + hs, w_q[h]);
        fn(prefix + ".w_k." + hs, w_k[h]);
        fn(prefix + ".w_v." + hs, w_v[h]);
    }
    fn(prefix + ".w_o", w_o);
}

CoAttentionBlockParams CoAttentionBlockParams::init(std::size_t d_m, std::size_t heads,
                                                    std::mt19937_64& rng) {
    CoAttentionBlockParams p;
    p.mha = MultiHeadAttentionParams::init(d_m, d_m, heads, rng);
    const std::size_t d_h = 4 * d_m;
    p.ffn_w1 = uniform_param({d_m, d_h}, d_m, rng);
    p.ffn_b1 = const_param({d_h}, 0.0);
    p.ffn_w2 = uniform_param({d_h, d_m}, d_h, rng);
    p.ffn_b2 = const_param({d_m}, 0.0);
    p.ln1_gamma = const_param({d_m}, 1.0);
    p.ln1_beta = const_param({d_m}, 0.0);
    p.ln2_gamma = const_param({d_m}, 1.0);
    p.ln2_beta = const_param({d_m}, 0.0);
    return p;
}

void CoAttentionBlockParams::visit(const std::string& prefix, const ParamVisitor& fn) {
    mha.visit(prefix + ".mha", fn);
    fn(prefix + ".ffn_w1", ffn_w1);
    fn(prefix + ".ffn_b1", ffn_b1);
    fn(prefix + ".ffn_w2", ffn_w2);
    fn(prefix + ".ffn_b2", ffn_b2);
    fn(prefix + ".ln1_gamma", ln1_gamma);
    fn(prefix + ".ln1_beta", ln1_beta);
    fn(prefix + ".ln2_gamma", ln2_gamma);
    fn(prefix + ".ln2_beta", ln2_beta);
}

SelfAttentionParams SelfAttentionParams::init(std::size_t d_m, std::size_t heads,
                                              std::mt19937_64& rng) {
    SelfAttentionParams p;
    p.mha = MultiHeadAttentionParams::init(d_m, d_m, heads, rng);
    p.ln_gamma = const_param({d_m}, 1.0);
    p.ln_beta = const_param({d_m}, 0.0);
    return p;
}

void SelfAttentionParams::visit(const std::string& prefix, const ParamVisitor& fn) {
    mha.visit(prefix + ".mha", fn);
    fn(prefix + ".ln_gamma", ln_gamma);
    fn(prefix + ".ln_beta", ln_beta);
}

std::vector<Tensor> attention_weights(const Tensor& query_seq, const Tensor& kv_seq,
                                      const MultiHeadAttentionParams& params) {
    const double inv_sqrt_dk = 1.0 / std::sqrt(double(params.d_k));
    std::vector<Tensor> weights;
    weights.reserve(params.heads);
    for (std::size_t h = 0; h < params.heads; ++h) {
        Tensor q = matmul(query_seq, params.w_q[h]);
        Tensor k = matmul(kv_seq, params.w_k[h]);
        weights.push_back(softmax(scale(matmul(q, transpose(k)), inv_sqrt_dk), 1));
    }
    return weights;
}

Tensor multi_head_cross_attention(const Tensor& query_seq, const Tensor& kv_seq,
                                  const MultiHeadAttentionParams& params) {
    const double inv_sqrt_dk = 1.0 / std::sqrt(double(params.d_k));
    std::vector<Tensor> heads;
    heads.reserve(params.heads);
    for (std::size_t h = 0; h < params.heads; ++h) {
        Tensor q = matmul(query_seq, params.w_q[h]);
        Tensor k = matmul(kv_seq, params.w_k[h]);
        Tensor v = matmul(kv_seq, params.w_v[h]);
        Tensor a = softmax(scale(matmul(q, transpose(k)), inv_sqrt_dk), 1);
        heads.push_back(matmul(a, v));
    }
    return matmul(concat(heads, 1), params.w_o);
}

CoAttentionOutput co_attention_block(const Tensor& primary_seq, const Tensor& context_seq,
                                     const CoAttentionBlockParams& params) {
    Tensor attended = multi_head_cross_attention(primary_seq, context_seq, params.mha);
    Tensor x = layer_norm(primary_seq + attended, params.ln1_gamma, params.ln1_beta);
    Tensor hidden = relu(matmul(x, params.ffn_w1) + params.ffn_b1);
    Tensor ffn = matmul(hidden, params.ffn_w2) + params.ffn_b2;
    Tensor seq = layer_norm(x + ffn, params.ln2_gamma, params.ln2_beta);
    return {seq, mean_pool(seq)};
}

std::pair<CoAttentionOutput, CoAttentionOutput> co_attention_pair(
    const Tensor& seq_a, const Tensor& seq_b, const CoAttentionBlockParams& shared) {
    return {co_attention_block(seq_a, seq_b, shared),
            co_attention_block(seq_b, seq_a, shared)};
}

Tensor self_attention(const Tensor& seq, const SelfAttentionParams& params) {
    Tensor attended = multi_head_cross_attention(seq, seq, params.mha);
    return layer_norm(seq + attended, params.ln_gamma, params.ln_beta);
}

} // namespace mff
