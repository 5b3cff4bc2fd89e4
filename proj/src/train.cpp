#include "mff/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mff/mfft.hpp"

namespace mff {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

void AdamState::init_like(std::vector<Tensor>& params) {
    m.clear();
    v.clear();
    for (auto& p : params) {
        m.emplace_back(p.size(), 0.0);
        v.emplace_back(p.size(), 0.0);
    }
    t = 0;
}

void adam_step(std::vector<Tensor>& params, AdamState& state, const TrainConfig& config) {
    if (state.m.size() != params.size())
        throw DimensionError("adam_step: state does not match parameter list");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, double(state.t));
    const double bc2 = 1.0 - std::pow(config.beta2, double(state.t));

    double clip_scale = 1.0;
    if (config.grad_clip > 0.0) {
        double norm_sq = 0.0;
        for (auto& p : params)
            for (double g : p.grad()) norm_sq += g * g;
        const double norm = std::sqrt(norm_sq);
        if (norm > config.grad_clip) clip_scale = config.grad_clip / norm;
    }

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        if (state.m[i].size() != p.size())
            throw DimensionError("adam_step: moment shape mismatch at parameter " +
                                 std::to_string(i));
        const auto& grad = p.grad();
        auto& val = p.raw();
        for (std::size_t j = 0; j < val.size(); ++j) {
            const double g = grad[j] * clip_scale;
            state.m[i][j] = config.beta1 * state.m[i][j] + (1.0 - config.beta1) * g;
            state.v[i][j] = config.beta2 * state.v[i][j] + (1.0 - config.beta2) * g * g;
            const double m_hat = state.m[i][j] / bc1;
            const double v_hat = state.v[i][j] / bc2;
            val[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
        }
    }
}

std::vector<EpochLog> train(ModelParams& model, const Dataset& trainset,
                            const TrainConfig& config, AdamState& state,
                            std::size_t start_epoch, std::ostream* log_out) {
    if (trainset.samples.empty()) throw DataError("train: empty dataset");
    if (config.batch_size < 1) throw DataError("train: batch_size must be >= 1");
    if (config.learning_rate < 0.0) throw DataError("train: learning rate must be >= 0");

    std::vector<Tensor> params = model.all_params();
    if (!state.initialized()) state.init_like(params);

    std::vector<EpochLog> logs;
    const std::size_t count = trainset.samples.size();

    for (std::size_t epoch = start_epoch; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::size_t> order(count);
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 shuffle_rng(mix(config.seed) ^ mix(epoch + 1));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        std::size_t correct = 0, batches = 0;

        for (std::size_t start = 0; start < count; start += config.batch_size) {
            const std::size_t end = std::min(count, start + config.batch_size);
            model.zero_grads();
            Tensor batch_loss;
            std::vector<std::string> batch_ids;
            for (std::size_t k = start; k < end; ++k) {
                const NewsSample& s = trainset.samples[order[k]];
                batch_ids.push_back(s.id);
                Tensor y = model_forward(s, model);
                if ((y.item() >= 0.5) == (s.label == 1)) ++correct;
                Tensor sample_loss = bce_loss(double(s.label), y);
                batch_loss = batch_loss.defined() ? batch_loss + sample_loss : sample_loss;
            }
            batch_loss = scale(batch_loss, 1.0 / double(end - start));
            const double loss_val = batch_loss.item();
            if (!std::isfinite(loss_val)) {
                std::ostringstream os;
                os << "non-finite loss at epoch " << epoch << ", batch " << batches
                   << ", samples:";
                for (const auto& id : batch_ids) os << ' ' << id;
                throw NumericalError(os.str());
            }
            loss_sum += loss_val * double(end - start);
            backward(batch_loss);
            adam_step(params, state, config);
            ++batches;
        }

        const auto t1 = std::chrono::steady_clock::now();
        EpochLog log;
        log.epoch = epoch;
        log.mean_loss = loss_sum / double(count);
        log.train_acc = double(correct) / double(count);
        log.wall_ms =
            long(std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count());
        if (log_out) {
            *log_out << nlohmann::json{{"epoch", log.epoch},
                                       {"mean_loss", log.mean_loss},
                                       {"train_acc", log.train_acc},
                                       {"wall_ms", log.wall_ms}}
                            .dump()
                     << '\n';
            log_out->flush();
        }
        logs.push_back(log);
    }
    return logs;
}

std::uint64_t run_hash(const ModelConfig& model_config, const TrainConfig& t) {
    std::ostringstream os;
    os << std::hex << config_hash(model_config) << ";bs=" << t.batch_size
       << ";lr=" << t.learning_rate << ";b1=" << t.beta1 << ";b2=" << t.beta2
       << ";eps=" << t.eps << ";clip=" << t.grad_clip << ";seed=" << t.seed;
    const std::string s = os.str();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

constexpr char kCkptMagic[4] = {'M', 'F', 'F', 'C'};

void put_u16(std::ostream& out, std::uint16_t v) {
    char b[2] = {char(v & 0xff), char((v >> 8) & 0xff)};
    out.write(b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

template <typename T>
T get_uint(std::istream& in) {
    unsigned char b[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(b), sizeof(T)))
        throw DataError("checkpoint: truncated file");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= T(b[i]) << (8 * i);
    return v;
}

} // namespace

void checkpoint_save(const std::string& path, ModelParams& model, const AdamState& state,
                     std::size_t epochs_done, std::uint64_t hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("checkpoint: cannot open for writing: " + path);
    out.write(kCkptMagic, 4);
    const std::uint8_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), 1);
    put_u64(out, hash);
    put_u32(out, std::uint32_t(epochs_done));
    put_u64(out, state.t);

    std::vector<std::pair<std::string, Tensor>> entries;
    model.visit([&](const std::string& name, Tensor& t) { entries.emplace_back(name, t); });
    put_u32(out, std::uint32_t(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& [name, tensor] = entries[i];
        put_u16(out, std::uint16_t(name.size()));
        out.write(name.data(), std::streamsize(name.size()));
        write_mfft(out, tensor, MfftDtype::f64);
        write_mfft(out, Tensor(tensor.shape(), state.m[i]), MfftDtype::f64);
        write_mfft(out, Tensor(tensor.shape(), state.v[i]), MfftDtype::f64);
    }
    if (!out) throw DataError("checkpoint: write failed: " + path);
}

std::size_t checkpoint_load(const std::string& path, ModelParams& model, AdamState& state,
                            std::uint64_t expected_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kCkptMagic, 4) != 0)
        throw DataError("checkpoint: bad magic bytes in " + path);
    std::uint8_t version;
    if (!in.read(reinterpret_cast<char*>(&version), 1) || version != 1)
        throw DataError("checkpoint: unsupported version in " + path);
    const std::uint64_t hash = get_uint<std::uint64_t>(in);
    if (hash != expected_hash) {
        std::ostringstream os;
        os << "checkpoint: configuration hash mismatch (file " << std::hex << hash
           << ", current config " << expected_hash
           << "); the checkpoint was written under different model or training settings";
        throw DataError(os.str());
    }
    const std::size_t epochs_done = get_uint<std::uint32_t>(in);
    const std::uint64_t adam_t = get_uint<std::uint64_t>(in);
    const std::size_t entry_count = get_uint<std::uint32_t>(in);

    std::vector<std::pair<std::string, Tensor>> entries;
    model.visit([&](const std::string& name, Tensor& t) { entries.emplace_back(name, t); });
    if (entries.size() != entry_count)
        throw DataError("checkpoint: expected " + std::to_string(entries.size()) +
                        " entries, file has " + std::to_string(entry_count));

    std::vector<Tensor> params = model.all_params();
    state.init_like(params);
    state.t = adam_t;
    for (std::size_t i = 0; i < entry_count; ++i) {
        const std::uint16_t len = get_uint<std::uint16_t>(in);
        std::string name(len, '\0');
        if (!in.read(name.data(), len)) throw DataError("checkpoint: truncated entry name");
        if (name != entries[i].first)
            throw DataError("checkpoint: entry '" + name + "' does not match expected '" +
                            entries[i].first + "'");
        Tensor value = read_mfft(in, name);
        Tensor m = read_mfft(in, name + ".m");
        Tensor v = read_mfft(in, name + ".v");
        if (value.shape() != entries[i].second.shape())
            throw DataError("checkpoint: shape mismatch for '" + name + "'");
        entries[i].second.raw() = value.data();
        state.m[i] = m.data();
        state.v[i] = v.data();
    }
    return epochs_done;
}

} // namespace mff
