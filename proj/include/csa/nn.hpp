#pragma once

#include <map>
#include <string>
#include <vector>

#include "csa/autodiff.hpp"
#include "csa/rng.hpp"

namespace csa::nn {

enum class Init { zeros, ones, normal02, glorot };

// Named trainable tensors. Names are stable dotted paths so checkpoints
// survive refactors of the module objects that hold the handles.
class ParamStore {
  public:
    ad::Tensor create(const std::string& name, ad::Shape shape, Init init, Rng& rng);
    ad::Tensor get(const std::string& name) const;
    bool has(const std::string& name) const { return params_.count(name) > 0; }
    const std::vector<std::string>& names() const { return order_; }
    long total_scalars() const;
    void zero_grads();

  private:
    std::map<std::string, ad::Tensor> params_;
    std::vector<std::string> order_;
};

struct Linear {
    ad::Tensor w, b;
    Linear() = default;
    Linear(ParamStore& store, const std::string& name, int in, int out, Rng& rng);
    ad::Tensor operator()(const ad::Tensor& x) const { return ad::add(ad::matmul(x, w), b); }
};

struct LayerNorm {
    ad::Tensor gain, bias;
    LayerNorm() = default;
    LayerNorm(ParamStore& store, const std::string& name, int dim, Rng& rng);
    ad::Tensor operator()(const ad::Tensor& x) const { return ad::layer_norm(x, gain, bias); }
};

struct AdamW {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
    long step_count = 0;
    std::map<std::string, std::vector<double>> m, v;

    void step(ParamStore& store);
};

// Flat binary container: named float64 arrays plus a JSON metadata blob.
struct Checkpoint {
    std::string meta_json;
    std::vector<std::pair<std::string, ad::Tensor>> arrays;

    void add(const std::string& name, const ad::Tensor& t) { arrays.emplace_back(name, t); }
    const ad::Tensor* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace csa::nn
