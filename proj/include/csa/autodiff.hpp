#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "csa/errors.hpp"
#include "csa/rng.hpp"

namespace csa::ad {

using Shape = std::vector<int>;

long numel_of(const Shape& shape);

struct TensorImpl {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad; // lazily allocated, same length as value
    bool requires_grad = false;
    bool tracked = false; // participates in the active tape's graph
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

// Value-semantic handle onto a shared payload. Ops never mutate inputs;
// they allocate fresh outputs.
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double fill);
    static Tensor from(Shape shape, std::vector<double> value);
    static Tensor scalar(double v) { return from({1}, {v}); }
    // trainable leaf
    static Tensor param(Shape shape, std::vector<double> value);

    bool defined() const { return impl != nullptr; }
    const Shape& shape() const { return impl->shape; }
    int dim(int i) const { return impl->shape.at(i); }
    long numel() const { return static_cast<long>(impl->value.size()); }
    const std::vector<double>& value() const { return impl->value; }
    std::vector<double>& raw_value() { return impl->value; } // construction/testing only
    bool requires_grad() const { return impl->requires_grad; }
    const std::vector<double>& grad() const;
    void zero_grad() {
        if (impl) impl->grad.assign(impl->value.size(), 0.0);
    }
    double item() const;

    std::shared_ptr<TensorImpl> impl;
};

// Define-by-run tape. Constructing one makes it the active tape for this
// thread; ops record backward closures onto it while any input is tracked.
class Tape {
  public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Seeds d(loss)=1 and replays recorded closures in reverse. Gradients of
    // leaf tensors accumulate across calls; intermediate gradients are reset
    // per call.
    void backward(const Tensor& loss);

    size_t size() const { return nodes_.size(); }

    static Tape* active();
    void record(std::shared_ptr<TensorImpl> output, std::function<void()> backward_fn);

  private:
    struct Node {
        std::shared_ptr<TensorImpl> output;
        std::function<void()> backward_fn;
    };
    std::vector<Node> nodes_;
    Tape* prev_ = nullptr;
};

// When true, every op output is scanned for NaN/Inf and NumericError is
// thrown on the first hit.
bool& checked_mode();

// ---- differentiable ops ----
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b); // same shape, or b is a [d] row vector
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor softmax(const Tensor& a); // last axis of a 2-d tensor
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool train);
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets, int pad_id);
Tensor mean(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor concat_cols(const std::vector<Tensor>& parts);
inline Tensor concat_cols(const Tensor& a, const Tensor& b) { return concat_cols(std::vector<Tensor>{a, b}); }
Tensor slice_cols(const Tensor& a, int c0, int c1);
Tensor gather_rows(const Tensor& table, const std::vector<int>& indices);

// out = where(mask, a, fill); mask is row-major n*m bytes
Tensor masked_fill(const Tensor& a, const std::vector<uint8_t>& mask, double fill);

enum class PickAxis { row_i, row_j };
// out[i][j] = mat[i][idx[i*n+j]] (row_i) or mat[j][idx[i*n+j]] (row_j)
Tensor pick_rel(const Tensor& mat, const std::vector<uint32_t>& idx, int n, PickAxis axis);

// Straight-through mask application: forward drops masked scores to a
// -inf surrogate; backward sends g*raw into link_prob at unmasked entries
// and exactly zero elsewhere.
Tensor sbm_mask_apply(const Tensor& raw_scores, const Tensor& link_prob, const std::vector<uint8_t>& mask);

// max over coordinates of |analytic - central difference| / max(1e-8, |a|+|n|)
double gradcheck(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps = 1e-5);

} // namespace csa::ad
