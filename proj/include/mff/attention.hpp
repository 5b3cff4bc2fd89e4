#ifndef MFF_ATTENTION_HPP
#define MFF_ATTENTION_HPP

#include <random>
#include <utility>

#include "mff/tensor.hpp"

namespace mff {

using ParamVisitor = std::function<void(const std::string&, Tensor&)>;

/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), tracked for gradients
Tensor uniform_param(Shape shape, std::size_t fan_in, std::mt19937_64& rng);
Tensor const_param(Shape shape, double value);

/// Per-head Q/K/V projections plus the output projection. The query side and
/// the key/value side may come from different sequences but share the model
/// dim, so a single d_in covers both.
struct MultiHeadAttentionParams {
    std::size_t heads = 0;
    std::size_t d_k = 0;
    std::vector<Tensor> w_q, w_k, w_v;  // each [d_in, d_k]
    Tensor w_o;                         // [heads*d_k, d_out]

    static MultiHeadAttentionParams init(std::size_t d_in, std::size_t d_out,
                                         std::size_t heads, std::mt19937_64& rng);
    void visit(const std::string& prefix, const ParamVisitor& fn);
};

struct CoAttentionBlockParams {
    MultiHeadAttentionParams mha;
    Tensor ffn_w1, ffn_b1;  // [d_m, 4*d_m], [4*d_m]
    Tensor ffn_w2, ffn_b2;  // [4*d_m, d_m], [d_m]
    Tensor ln1_gamma, ln1_beta;
    Tensor ln2_gamma, ln2_beta;

    static CoAttentionBlockParams init(std::size_t d_m, std::size_t heads,
                                       std::mt19937_64& rng);
    void visit(const std::string& prefix, const ParamVisitor& fn);
};

/// Self-attention with residual + layer norm; query and key/value coincide.
struct SelfAttentionParams {
    MultiHeadAttentionParams mha;
    Tensor ln_gamma, ln_beta;

    static SelfAttentionParams init(std::size_t d_m, std::size_t heads,
                                    std::mt19937_64& rng);
    void visit(const std::string& prefix, const ParamVisitor& fn);
};

/// Scaled dot-product cross attention: per head A = softmax(Q K^T / sqrt(d_k)),
/// head outputs concatenated and projected by w_o.
Tensor multi_head_cross_attention(const Tensor& query_seq, const Tensor& kv_seq,
                                  const MultiHeadAttentionParams& params);

/// The per-head row-stochastic attention matrices, for inspection and tests.
std::vector<Tensor> attention_weights(const Tensor& query_seq, const Tensor& kv_seq,
                                      const MultiHeadAttentionParams& params);

struct CoAttentionOutput {
    Tensor seq;     // [a, d_m]
    Tensor pooled;  // [d_m]
};

/// x = LN(primary + MHA(primary, context)); seq = LN(x + FFN(x)); pooled = mean.
CoAttentionOutput co_attention_block(const Tensor& primary_seq, const Tensor& context_seq,
                                     const CoAttentionBlockParams& params);

/// Runs the block in both directions with the same parameter set; gradients
/// from the two directions accumulate into the shared weights.
std::pair<CoAttentionOutput, CoAttentionOutput> co_attention_pair(
    const Tensor& seq_a, const Tensor& seq_b, const CoAttentionBlockParams& shared);

Tensor self_attention(const Tensor& seq, const SelfAttentionParams& params);

} // namespace mff

#endif
