#include "csa/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace csa::nn {

ad::Tensor ParamStore::create(const std::string& name, ad::Shape shape, Init init, Rng& rng) {
    if (params_.count(name)) throw ConfigError("duplicate parameter name: " + name);
    long n = ad::numel_of(shape);
    std::vector<double> value(n);
    switch (init) {
        case Init::zeros:
            break;
        case Init::ones:
            std::fill(value.begin(), value.end(), 1.0);
            break;
        case Init::normal02:
            for (auto& x : value) x = rng.normal(0.0, 0.02);
            break;
        case Init::glorot: {
            if (shape.size() != 2) throw ConfigError("glorot init needs a 2-d shape");
            double bound = std::sqrt(6.0 / (shape[0] + shape[1]));
            for (auto& x : value) x = rng.uniform(-bound, bound);
            break;
        }
    }
    ad::Tensor t = ad::Tensor::param(std::move(shape), std::move(value));
    params_[name] = t;
    order_.push_back(name);
    return t;
}

ad::Tensor ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter: " + name);
    return it->second;
}

long ParamStore::total_scalars() const {
    long total = 0;
    for (const auto& [name, t] : params_) total += t.numel();
    return total;
}

void ParamStore::zero_grads() {
    for (auto& [name, t] : params_) t.zero_grad();
}

Linear::Linear(ParamStore& store, const std::string& name, int in, int out, Rng& rng) {
    w = store.create(name + ".weight", {in, out}, Init::glorot, rng);
    b = store.create(name + ".bias", {out}, Init::zeros, rng);
}

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, int dim, Rng& rng) {
    gain = store.create(name + ".gain", {dim}, Init::ones, rng);
    bias = store.create(name + ".bias", {dim}, Init::zeros, rng);
}

void AdamW::step(ParamStore& store) {
    ++step_count;
    double bc1 = 1.0 - std::pow(beta1, step_count);
    double bc2 = 1.0 - std::pow(beta2, step_count);
    for (const auto& name : store.names()) {
        ad::Tensor p = store.get(name);
        p.impl->ensure_grad();
        auto& mv = m[name];
        auto& vv = v[name];
        if (mv.size() != p.impl->value.size()) mv.assign(p.impl->value.size(), 0.0);
        if (vv.size() != p.impl->value.size()) vv.assign(p.impl->value.size(), 0.0);
        for (size_t i = 0; i < p.impl->value.size(); ++i) {
            double g = p.impl->grad[i];
            mv[i] = beta1 * mv[i] + (1.0 - beta1) * g;
            vv[i] = beta2 * vv[i] + (1.0 - beta2) * g * g;
            double mhat = mv[i] / bc1;
            double vhat = vv[i] / bc2;
            p.impl->value[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * p.impl->value[i]);
        }
    }
}

const ad::Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : arrays)
        if (n == name) return &t;
    return nullptr;
}

namespace {
constexpr char kMagic[8] = {'C', 'S', 'A', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw CorruptCheckpoint("unexpected end of checkpoint");
    return v;
}
} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(kMagic, 8);
    write_pod(out, kVersion);
    write_pod(out, static_cast<uint64_t>(ckpt.meta_json.size()));
    out.write(ckpt.meta_json.data(), static_cast<std::streamsize>(ckpt.meta_json.size()));
    write_pod(out, static_cast<uint64_t>(ckpt.arrays.size()));
    for (const auto& [name, t] : ckpt.arrays) {
        write_pod(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod(out, static_cast<uint32_t>(t.shape().size()));
        for (int d : t.shape()) write_pod(out, static_cast<int64_t>(d));
        out.write(reinterpret_cast<const char*>(t.value().data()),
                  static_cast<std::streamsize>(t.value().size() * sizeof(double)));
    }
    if (!out) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw CorruptCheckpoint("bad checkpoint magic");
    uint32_t version = read_pod<uint32_t>(in);
    if (version != kVersion)
        throw CorruptCheckpoint("checkpoint version " + std::to_string(version) + " unsupported");
    Checkpoint ckpt;
    uint64_t meta_len = read_pod<uint64_t>(in);
    ckpt.meta_json.resize(meta_len);
    in.read(ckpt.meta_json.data(), static_cast<std::streamsize>(meta_len));
    uint64_t count = read_pod<uint64_t>(in);
    for (uint64_t i = 0; i < count; ++i) {
        uint32_t name_len = read_pod<uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        uint32_t ndim = read_pod<uint32_t>(in);
        ad::Shape shape(ndim);
        for (uint32_t d = 0; d < ndim; ++d) shape[d] = static_cast<int>(read_pod<int64_t>(in));
        long n = ad::numel_of(shape);
        std::vector<double> value(n);
        in.read(reinterpret_cast<char*>(value.data()), static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw CorruptCheckpoint("truncated checkpoint array: " + name);
        ckpt.add(name, ad::Tensor::from(std::move(shape), std::move(value)));
    }
    return ckpt;
}

} // namespace csa::nn
