#ifndef MFF_PROVIDERS_HPP
#define MFF_PROVIDERS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mff/mfft.hpp"
#include "mff/tensor.hpp"

namespace mff {

struct NewsSample {
    std::string id;
    int label = 0;  // 0 real, 1 fake
    Tensor r_t;     // [n, d_t] token-level text feature
    Tensor r_i;     // [p, d_i] patch-level image feature
    Tensor c_t;     // [d_g] joint-space global text vector
    Tensor c_i;     // [d_g] joint-space global image vector
};

struct DatasetDims {
    std::size_t n = 16, p = 16, d_t = 32, d_i = 32, d_g = 16;
    bool operator==(const DatasetDims&) const = default;
};

struct Dataset {
    DatasetDims dims;
    std::string split;
    std::vector<NewsSample> samples;
};

/// Ground truth for synthetic fakes with localized inconsistency.
struct SidecarEntry {
    std::string id;
    std::vector<std::size_t> perturbed_patches;
};

/// Manifest: JSON-lines, first a header {"dims": {...}, "split": "..."},
/// then one record per sample pointing at four MFFT files.
Dataset load_dataset(const std::string& manifest_path);
void write_dataset(const std::string& dir, const Dataset& ds,
                   MfftDtype dtype = MfftDtype::f64);

void write_sidecar(const std::string& path, const std::vector<SidecarEntry>& entries);
std::vector<SidecarEntry> load_sidecar(const std::string& path);

// -- deterministic toy encoders ----------------------------------------------

/// Hash-based token embedding into a frozen random table plus a fixed mixing
/// layer; positions past the token list are zero padding.
Tensor toy_encode_text(const std::vector<std::string>& tokens, std::size_t n,
                       std::size_t d_t, std::uint64_t seed);

/// Same construction over flattened image patches (one numeric cell per patch).
Tensor toy_encode_image(const std::vector<double>& patches, std::size_t p,
                        std::size_t d_i, std::uint64_t seed);

struct GlobalFeatures {
    Tensor c_t, c_i;
};

/// Frozen random projections of pooled semantics plus a shared latent
/// component scaled by the sample's consistency level. Consistency 1 with no
/// noise yields near-parallel global vectors; consistency 0 leaves only the
/// (independent) semantic projections.
GlobalFeatures toy_global_encode(const Tensor& r_t, const Tensor& r_i,
                                 const std::vector<double>& shared_latent,
                                 double consistency, std::size_t d_g,
                                 std::uint64_t table_seed, double noise_sigma,
                                 std::mt19937_64& noise_rng);

// -- synthetic corpus ---------------------------------------------------------

struct SynthConfig {
    std::size_t train_count = 400;
    std::size_t test_count = 100;
    DatasetDims dims;
    double gamma = 3.0;           // consistency gap between classes
    double patch_fraction = 0.25; // perturbed patches per local-inconsistency fake
    double local_fraction = 0.5;  // share of fakes with localized inconsistency
    double noise_sigma = 0.05;
    std::uint64_t seed = 7;
};

struct SynthResult {
    Dataset train, test;
    std::vector<SidecarEntry> sidecar;
};

/// Real samples share one latent across modalities; fakes either carry a few
/// off-latent image patches (localized, indices recorded in the sidecar) or a
/// globally mismatched image latent. gamma = 0 collapses both fake regimes
/// onto the real distribution.
SynthResult generate_synth(const SynthConfig& config);

} // namespace mff

#endif
