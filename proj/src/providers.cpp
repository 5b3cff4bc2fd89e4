#include "mff/providers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

namespace mff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kLatentDim = 8;

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ULL) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a_str(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
    return fnv1a(s.data(), s.size(), h);
}

std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<double> random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> m(rows * cols);
    for (auto& v : m) v = dist(rng) / std::sqrt(double(cols));
    return m;
}

// y[rows] = M[rows x cols] . x[cols]
std::vector<double> matvec(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                           const std::vector<double>& x) {
    std::vector<double> y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) y[i] += m[i * cols + j] * x[j];
    return y;
}

json dims_to_json(const DatasetDims& d) {
    return json{{"n", d.n}, {"p", d.p}, {"d_t", d.d_t}, {"d_i", d.d_i}, {"d_g", d.d_g}};
}

DatasetDims dims_from_json(const json& j) {
    DatasetDims d;
    d.n = j.at("n").get<std::size_t>();
    d.p = j.at("p").get<std::size_t>();
    d.d_t = j.at("d_t").get<std::size_t>();
    d.d_i = j.at("d_i").get<std::size_t>();
    d.d_g = j.at("d_g").get<std::size_t>();
    return d;
}

void check_shape(const Tensor& t, const Shape& want, const std::string& id,
                 const std::string& field) {
    if (t.shape() != want)
        throw DataError("sample '" + id + "': " + field + " has shape " +
                        shape_str(t.shape()) + ", manifest header requires " + shape_str(want));
}

} // namespace

Dataset load_dataset(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("manifest not found: " + manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();

    std::string line;
    if (!std::getline(in, line)) return {};  // empty manifest, empty stream
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError("manifest header is not valid JSON: " + std::string(e.what()));
    }
    Dataset ds;
    ds.dims = dims_from_json(header.at("dims"));
    ds.split = header.value("split", "");

    std::set<std::string> seen_ids;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("manifest line " + std::to_string(lineno) + ": " + e.what());
        }
        NewsSample s;
        s.id = rec.at("id").get<std::string>();
        s.label = rec.at("label").get<int>();
        if (s.label != 0 && s.label != 1)
            throw DataError("sample '" + s.id + "': label must be 0 or 1");
        if (!seen_ids.insert(s.id).second)
            throw DataError("duplicate sample id '" + s.id + "' in manifest");
        const json& files = rec.at("files");
        auto load = [&](const char* key) {
            const std::string rel = files.at(key).get<std::string>();
            const fs::path path = base / rel;
            if (!fs::exists(path))
                throw DataError("sample '" + s.id + "': missing feature file " + path.string());
            return read_mfft_file(path.string());
        };
        s.r_t = load("r_t");
        s.r_i = load("r_i");
        s.c_t = load("c_t");
        s.c_i = load("c_i");
        check_shape(s.r_t, {ds.dims.n, ds.dims.d_t}, s.id, "r_t");
        check_shape(s.r_i, {ds.dims.p, ds.dims.d_i}, s.id, "r_i");
        check_shape(s.c_t, {ds.dims.d_g}, s.id, "c_t");
        check_shape(s.c_i, {ds.dims.d_g}, s.id, "c_i");
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

void write_dataset(const std::string& dir, const Dataset& ds, MfftDtype dtype) {
    const fs::path root(dir);
    fs::create_directories(root / "features");
    const fs::path manifest = root / (ds.split + "_manifest.jsonl");
    std::ofstream out(manifest);
    if (!out) throw DataError("cannot write manifest: " + manifest.string());
    out << json{{"dims", dims_to_json(ds.dims)}, {"split", ds.split}}.dump() << '\n';
    for (const auto& s : ds.samples) {
        json files;
        const std::array<std::pair<const char*, const Tensor*>, 4> parts{
            {{"r_t", &s.r_t}, {"r_i", &s.r_i}, {"c_t", &s.c_t}, {"c_i", &s.c_i}}};
        for (auto [key, tensor] : parts) {
            const std::string rel = "features/" + s.id + "_" + key + ".mfft";
            write_mfft_file((root / rel).string(), *tensor, dtype);
            files[key] = rel;
        }
        out << json{{"id", s.id}, {"label", s.label}, {"files", files}}.dump() << '\n';
    }
}

void write_sidecar(const std::string& path, const std::vector<SidecarEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write sidecar: " + path);
    for (const auto& e : entries)
        out << json{{"id", e.id}, {"perturbed_patches", e.perturbed_patches}}.dump() << '\n';
}

std::vector<SidecarEntry> load_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("sidecar not found: " + path);
    std::vector<SidecarEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        entries.push_back({rec.at("id").get<std::string>(),
                           rec.at("perturbed_patches").get<std::vector<std::size_t>>()});
    }
    return entries;
}

// -- toy encoders -------------------------------------------------------------

namespace {

Tensor encode_rows(const std::vector<std::uint64_t>& row_hashes, std::size_t rows_used,
                   std::size_t rows_total, std::size_t d, std::uint64_t seed) {
    // frozen mixing matrix shared by all rows of this encoder/seed
    std::mt19937_64 mix_rng(mix(seed ^ 0xC0FFEEULL));
    const std::vector<double> mixer = random_matrix(d, d, mix_rng);

    Tensor out({rows_total, d}, 0.0);
    for (std::size_t r = 0; r < rows_used; ++r) {
        std::mt19937_64 rng(mix(seed ^ row_hashes[r]));
        std::normal_distribution<double> dist(0.0, 1.0);
        std::vector<double> emb(d);
        for (auto& v : emb) v = dist(rng);
        std::vector<double> mixed = matvec(mixer, d, d, emb);
        for (std::size_t j = 0; j < d; ++j) out.raw()[r * d + j] = std::tanh(mixed[j]);
    }
    return out;
}

} // namespace

Tensor toy_encode_text(const std::vector<std::string>& tokens, std::size_t n,
                       std::size_t d_t, std::uint64_t seed) {
    std::vector<std::uint64_t> hashes;
    for (const auto& t : tokens) hashes.push_back(fnv1a_str(t));
    return encode_rows(hashes, std::min(tokens.size(), n), n, d_t, seed);
}

Tensor toy_encode_image(const std::vector<double>& patches, std::size_t p,
                        std::size_t d_i, std::uint64_t seed) {
    std::vector<std::uint64_t> hashes;
    for (double v : patches) hashes.push_back(fnv1a(&v, sizeof(v)));
    return encode_rows(hashes, std::min(patches.size(), p), p, d_i, seed);
}

GlobalFeatures toy_global_encode(const Tensor& r_t, const Tensor& r_i,
                                 const std::vector<double>& shared_latent,
                                 double consistency, std::size_t d_g,
                                 std::uint64_t table_seed, double noise_sigma,
                                 std::mt19937_64& noise_rng) {
    std::mt19937_64 frozen(mix(table_seed ^ 0x61B0ULL));
    const std::size_t d_t = r_t.dim(1), d_i = r_i.dim(1), d_z = shared_latent.size();
    const std::vector<double> a_t = random_matrix(d_g, d_t, frozen);
    const std::vector<double> a_i = random_matrix(d_g, d_i, frozen);
    const std::vector<double> g = random_matrix(d_g, d_z, frozen);

    auto pool = [](const Tensor& x) {
        std::vector<double> out(x.dim(1), 0.0);
        for (std::size_t i = 0; i < x.dim(0); ++i)
            for (std::size_t j = 0; j < x.dim(1); ++j) out[j] += x.at(i, j);
        for (auto& v : out) v /= double(x.dim(0));
        return out;
    };
    const std::vector<double> latent_term = matvec(g, d_g, d_z, shared_latent);
    std::normal_distribution<double> noise(0.0, 1.0);

    auto make = [&](const std::vector<double>& semantic_proj) {
        Tensor c({d_g}, 0.0);
        // the shared latent dominates at full consistency
        constexpr double kSemanticWeight = 0.3;
        constexpr double kLatentWeight = 3.0;
        for (std::size_t j = 0; j < d_g; ++j)
            c.raw()[j] = kSemanticWeight * semantic_proj[j] +
                         kLatentWeight * consistency * latent_term[j] +
                         noise_sigma * noise(noise_rng);
        return c;
    };
    GlobalFeatures out;
    out.c_t = make(matvec(a_t, d_g, d_t, pool(r_t)));
    out.c_i = make(matvec(a_i, d_g, d_i, pool(r_i)));
    return out;
}

// -- synthetic corpus ----------------------------------------------------------

namespace {

// One content projection per modality shared by every position, plus a frozen
// per-position offset. The attention stack is permutation-equivariant and the
// modal projections are position-agnostic, so the latent must be recoverable
// from patch/token content alone; per-position projections would scramble it
// beyond what any shared linear map can realign.
struct FrozenProjections {
    std::vector<double> text_content;   // [d_t x d_z]
    std::vector<double> image_content;  // [d_i x d_z]
    std::vector<std::vector<double>> text_offset;   // n vectors [d_t]
    std::vector<std::vector<double>> image_offset;  // p vectors [d_i]
    std::vector<double> latent_marker;  // [d_z] anchor of the off-latent region
};

constexpr double kOffsetScale = 0.5;
// Off latents are drawn around a frozen marker direction with per-sample
// jitter; a fully random off latent per sample gives fakes no signature that
// generalizes from train to test.
constexpr double kOffJitter = 0.5;

FrozenProjections make_projections(const DatasetDims& dims, std::uint64_t seed) {
    std::mt19937_64 rng(mix(seed ^ 0xF802ULL));
    std::normal_distribution<double> dist(0.0, 1.0);
    FrozenProjections fp;
    fp.text_content = random_matrix(dims.d_t, kLatentDim, rng);
    fp.image_content = random_matrix(dims.d_i, kLatentDim, rng);
    auto offset = [&](std::size_t d) {
        std::vector<double> b(d);
        for (auto& v : b) v = kOffsetScale * dist(rng);
        return b;
    };
    for (std::size_t j = 0; j < dims.n; ++j) fp.text_offset.push_back(offset(dims.d_t));
    for (std::size_t j = 0; j < dims.p; ++j) fp.image_offset.push_back(offset(dims.d_i));
    fp.latent_marker.resize(kLatentDim);
    for (auto& v : fp.latent_marker) v = dist(rng);
    return fp;
}

std::vector<double> draw_latent(std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> z(kLatentDim);
    for (auto& v : z) v = dist(rng);
    return z;
}

} // namespace

SynthResult generate_synth(const SynthConfig& config) {
    if (config.gamma < 0.0) throw DataError("synth: gamma must be >= 0");
    if (config.patch_fraction < 0.0 || config.patch_fraction > 1.0 ||
        config.local_fraction < 0.0 || config.local_fraction > 1.0)
        throw DataError("synth: fractions must lie in [0,1]");

    const FrozenProjections fp = make_projections(config.dims, config.seed);
    const std::uint64_t global_table_seed = mix(config.seed ^ 0x91E5ULL);
    SynthResult result;

    auto gen_split = [&](const std::string& split, std::size_t count, Dataset& out) {
        out.dims = config.dims;
        out.split = split;
        std::mt19937_64 rng(mix(config.seed ^ fnv1a_str(split)));
        std::normal_distribution<double> noise(0.0, 1.0);
        const DatasetDims& d = config.dims;

        for (std::size_t idx = 0; idx < count; ++idx) {
            NewsSample s;
            s.id = split + "_" + std::to_string(idx);
            s.label = int(idx % 2);  // interleave real/fake for balanced batches

            const std::vector<double> z = draw_latent(rng);
            std::vector<double> z_image = z;
            bool local = false;
            std::vector<std::size_t> perturbed;
            double consistency = 1.0;

            if (s.label == 1) {
                std::uniform_real_distribution<double> coin(0.0, 1.0);
                local = coin(rng) < config.local_fraction;
                std::vector<double> z_off = draw_latent(rng);
                for (std::size_t i = 0; i < kLatentDim; ++i)
                    z_off[i] = fp.latent_marker[i] + kOffJitter * z_off[i];
                if (local) {
                    const std::size_t k = std::max<std::size_t>(
                        1, std::size_t(std::llround(config.patch_fraction * double(d.p))));
                    std::vector<std::size_t> all(d.p);
                    std::iota(all.begin(), all.end(), 0);
                    std::shuffle(all.begin(), all.end(), rng);
                    perturbed.assign(all.begin(), all.begin() + std::ptrdiff_t(k));
                    std::sort(perturbed.begin(), perturbed.end());
                } else {
                    for (std::size_t i = 0; i < kLatentDim; ++i)
                        z_image[i] = z[i] + config.gamma * (z_off[i] - z[i]);
                    consistency = std::clamp(1.0 - config.gamma, 0.0, 1.0);
                }
                if (local) {
                    // perturbed patches drawn off the shared latent by gamma,
                    // the remaining patches stay on it
                    s.r_i = Tensor({d.p, d.d_i}, 0.0);
                    std::size_t pi = 0;
                    for (std::size_t j = 0; j < d.p; ++j) {
                        std::vector<double> zj = z;
                        if (pi < perturbed.size() && perturbed[pi] == j) {
                            for (std::size_t i = 0; i < kLatentDim; ++i)
                                zj[i] = z[i] + config.gamma * (z_off[i] - z[i]);
                            ++pi;
                        }
                        const std::vector<double> row =
                            matvec(fp.image_content, d.d_i, kLatentDim, zj);
                        for (std::size_t c = 0; c < d.d_i; ++c)
                            s.r_i.raw()[j * d.d_i + c] = row[c] + fp.image_offset[j][c] +
                                                         config.noise_sigma * noise(rng);
                    }
                }
            }

            if (!s.r_i.defined()) {
                s.r_i = Tensor({d.p, d.d_i}, 0.0);
                const std::vector<double> row =
                    matvec(fp.image_content, d.d_i, kLatentDim, z_image);
                for (std::size_t j = 0; j < d.p; ++j)
                    for (std::size_t c = 0; c < d.d_i; ++c)
                        s.r_i.raw()[j * d.d_i + c] = row[c] + fp.image_offset[j][c] +
                                                     config.noise_sigma * noise(rng);
            }
            s.r_t = Tensor({d.n, d.d_t}, 0.0);
            const std::vector<double> text_row =
                matvec(fp.text_content, d.d_t, kLatentDim, z);
            for (std::size_t j = 0; j < d.n; ++j)
                for (std::size_t c = 0; c < d.d_t; ++c)
                    s.r_t.raw()[j * d.d_t + c] = text_row[c] + fp.text_offset[j][c] +
                                                 config.noise_sigma * noise(rng);

            GlobalFeatures gf = toy_global_encode(s.r_t, s.r_i, z, consistency, d.d_g,
                                                  global_table_seed, config.noise_sigma, rng);
            s.c_t = gf.c_t;
            s.c_i = gf.c_i;

            if (local) result.sidecar.push_back({s.id, perturbed});
            out.samples.push_back(std::move(s));
        }
    };

    gen_split("train", config.train_count, result.train);
    gen_split("test", config.test_count, result.test);
    return result;
}

} // namespace mff
