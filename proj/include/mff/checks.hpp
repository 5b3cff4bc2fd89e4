#ifndef MFF_CHECKS_HPP
#define MFF_CHECKS_HPP

#include <utility>

#include "mff/model.hpp"

namespace mff {

struct GradCheckResult {
    std::string name;
    double max_rel_error = 0.0;
};

/// Random sample at the given dims, deterministic per seed.
NewsSample random_sample(const DatasetDims& dims, std::uint64_t seed, int label = 1);

/// Finite-difference check of BCE through the full pipeline at the given
/// config. Coordinates are subsampled per parameter tensor.
double full_model_gradcheck(const ModelConfig& config, std::uint64_t seed,
                            std::size_t coords_per_param = 8);

/// Per-module finite-difference checks at toy dims, one entry per module.
std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed);

/// Toy configuration used by the verification commands: n=p=3, d_m=8, H=2.
ModelConfig gradcheck_config();

} // namespace mff

#endif
