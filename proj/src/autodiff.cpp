#include "csa/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef CSA_USE_CBLAS
#include <cblas.h>
#endif

namespace csa::ad {

namespace {

constexpr double kNegFill = -1e30; // exp(x - max) underflows to exactly 0

thread_local Tape* g_active_tape = nullptr;

void check_values(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) throw NumericError("non-finite value produced");
}

void maybe_check(const Tensor& t) {
    if (checked_mode()) check_values(t.value());
}

bool should_track(std::initializer_list<const Tensor*> inputs) {
    if (!Tape::active()) return false;
    for (const Tensor* t : inputs)
        if ((*t).impl->tracked || (*t).impl->requires_grad) return true;
    return false;
}

// C[m,n] (+)= A[m,k] * B[k,n], with optional transposes on the logical A/B
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b, double* c,
          bool accumulate) {
#ifdef CSA_USE_CBLAS
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans, m, n, k,
                1.0, a, trans_a ? m : k, b, trans_b ? k : n, accumulate ? 1.0 : 0.0, c, n);
#else
    if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
    for (int i = 0; i < m; ++i) {
        for (int l = 0; l < k; ++l) {
            double av = trans_a ? a[l * m + i] : a[i * k + l];
            if (av == 0.0) continue;
            const double* brow = trans_b ? nullptr : b + static_cast<size_t>(l) * n;
            for (int j = 0; j < n; ++j) c[i * n + j] += av * (trans_b ? b[j * k + l] : brow[j]);
        }
    }
#endif
}

} // namespace

long numel_of(const Shape& shape) {
    long n = 1;
    for (int d : shape) n *= d;
    return n;
}

bool& checked_mode() {
    static bool flag = false;
    return flag;
}

Tensor Tensor::zeros(Shape shape) {
    Tensor t;
    t.impl = std::make_shared<TensorImpl>();
    long n = numel_of(shape);
    t.impl->shape = std::move(shape);
    t.impl->value.assign(n, 0.0);
    return t;
}

Tensor Tensor::full(Shape shape, double fill) {
    Tensor t = zeros(std::move(shape));
    std::fill(t.impl->value.begin(), t.impl->value.end(), fill);
    return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> value) {
    if (numel_of(shape) != static_cast<long>(value.size())) throw ShapeError("from: value length != shape product");
    Tensor t;
    t.impl = std::make_shared<TensorImpl>();
    t.impl->shape = std::move(shape);
    t.impl->value = std::move(value);
    return t;
}

Tensor Tensor::param(Shape shape, std::vector<double> value) {
    Tensor t = from(std::move(shape), std::move(value));
    t.impl->requires_grad = true;
    return t;
}

const std::vector<double>& Tensor::grad() const {
    impl->ensure_grad();
    return impl->grad;
}

double Tensor::item() const {
    if (numel() != 1) throw NotScalar("item() on non-scalar tensor");
    return impl->value[0];
}

Tape::Tape() {
    prev_ = g_active_tape;
    g_active_tape = this;
}

Tape::~Tape() { g_active_tape = prev_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::shared_ptr<TensorImpl> output, std::function<void()> backward_fn) {
    nodes_.push_back({std::move(output), std::move(backward_fn)});
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) throw NotScalar("backward: loss must be scalar");
    // intermediates restart from zero each call; leaves keep accumulating
    for (auto& node : nodes_) node.output->grad.assign(node.output->value.size(), 0.0);
    loss.impl->ensure_grad();
    loss.impl->grad[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward_fn();
}

namespace {

Tensor make_output(Shape shape, std::vector<double> value, bool tracked) {
    Tensor out = Tensor::from(std::move(shape), std::move(value));
    out.impl->tracked = tracked;
    maybe_check(out);
    return out;
}

// common capture pattern: pull impls, accumulate into inputs that take grads
bool wants_grad(const std::shared_ptr<TensorImpl>& impl) { return impl->tracked || impl->requires_grad; }

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2) throw ShapeError("matmul: 2-d tensors required");
    int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
    if (k != k2) throw ShapeError("matmul: inner dimensions disagree");
    std::vector<double> out(static_cast<size_t>(m) * n);
    gemm(false, false, m, n, k, a.value().data(), b.value().data(), out.data(), false);
    bool tracked = should_track({&a, &b});
    Tensor result = make_output({m, n}, std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, bi = b.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, bi, oi, m, n, k] {
            const double* g = oi->grad.data();
            if (wants_grad(ai)) {
                ai->ensure_grad();
                gemm(false, true, m, k, n, g, bi->value.data(), ai->grad.data(), true); // dA = G * B^T
            }
            if (wants_grad(bi)) {
                bi->ensure_grad();
                gemm(true, false, k, n, m, ai->value.data(), g, bi->grad.data(), true); // dB = A^T * G
            }
        });
    }
    return result;
}

Tensor transpose(const Tensor& a) {
    if (a.shape().size() != 2) throw ShapeError("transpose: 2-d tensor required");
    int m = a.dim(0), n = a.dim(1);
    std::vector<double> out(a.value().size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(j) * m + i] = a.value()[static_cast<size_t>(i) * n + j];
    bool tracked = should_track({&a});
    Tensor result = make_output({n, m}, std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, oi, m, n] {
            if (!wants_grad(ai)) return;
            ai->ensure_grad();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j)
                    ai->grad[static_cast<size_t>(i) * n + j] += oi->grad[static_cast<size_t>(j) * m + i];
        });
    }
    return result;
}

Tensor add(const Tensor& a, const Tensor& b) {
    bool row_broadcast = false;
    if (a.shape() != b.shape()) {
        if (a.shape().size() == 2 && b.shape().size() == 1 && a.dim(1) == b.dim(0)) row_broadcast = true;
        else throw ShapeError("add: shapes incompatible");
    }
    std::vector<double> out(a.value().size());
    if (row_broadcast) {
        int n = a.dim(0), d = a.dim(1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j)
                out[static_cast<size_t>(i) * d + j] = a.value()[static_cast<size_t>(i) * d + j] + b.value()[j];
    } else {
        for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
    }
    bool tracked = should_track({&a, &b});
    Tensor result = make_output(a.shape(), std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, bi = b.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, bi, oi, row_broadcast] {
            if (wants_grad(ai)) {
                ai->ensure_grad();
                for (size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += oi->grad[i];
            }
            if (wants_grad(bi)) {
                bi->ensure_grad();
                if (row_broadcast) {
                    int d = static_cast<int>(bi->value.size());
                    int n = static_cast<int>(oi->value.size()) / d;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < d; ++j) bi->grad[j] += oi->grad[static_cast<size_t>(i) * d + j];
                } else {
                    for (size_t i = 0; i < oi->grad.size(); ++i) bi->grad[i] += oi->grad[i];
                }
            }
        });
    }
    return result;
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw ShapeError("mul: shapes must match");
    std::vector<double> out(a.value().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
    bool tracked = should_track({&a, &b});
    Tensor result = make_output(a.shape(), std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, bi = b.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, bi, oi] {
            if (wants_grad(ai)) {
                ai->ensure_grad();
                for (size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += oi->grad[i] * bi->value[i];
            }
            if (wants_grad(bi)) {
                bi->ensure_grad();
                for (size_t i = 0; i < oi->grad.size(); ++i) bi->grad[i] += oi->grad[i] * ai->value[i];
            }
        });
    }
    return result;
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.value().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * c;
    bool tracked = should_track({&a});
    Tensor result = make_output(a.shape(), std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, oi, c] {
            if (!wants_grad(ai)) return;
            ai->ensure_grad();
            for (size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += oi->grad[i] * c;
        });
    }
    return result;
}

Tensor relu(const Tensor& a) {
    std::vector<double> out(a.value().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] > 0.0 ? a.value()[i] : 0.0;
    bool tracked = should_track({&a});
    Tensor result = make_output(a.shape(), std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, oi] {
            if (!wants_grad(ai)) return;
            ai->ensure_grad();
            for (size_t i = 0; i < oi->grad.size(); ++i)
                if (ai->value[i] > 0.0) ai->grad[i] += oi->grad[i];
        });
    }
    return result;
}

Tensor sigmoid(const Tensor& a) {
    std::vector<double> out(a.value().size());
    for (size_t i = 0; i < out.size(); ++i) {
        double x = a.value()[i];
        out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    bool tracked = should_track({&a});
    Tensor result = make_output(a.shape(), std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, oi] {
            if (!wants_grad(ai)) return;
            ai->ensure_grad();
            for (size_t i = 0; i < oi->grad.size(); ++i) {
                double y = oi->value[i];
                ai->grad[i] += oi->grad[i] * y * (1.0 - y);
            }
        });
    }
    return result;
}

Tensor softmax(const Tensor& a) {
    if (a.shape().size() != 2) throw ShapeError("softmax: 2-d tensor required");
    int n = a.dim(0), d = a.dim(1);
    std::vector<double> out(a.value().size());
    for (int i = 0; i < n; ++i) {
        const double* row = a.value().data() + static_cast<size_t>(i) * d;
        double* orow = out.data() + static_cast<size_t>(i) * d;
        double mx = row[0];
        for (int j = 1; j < d; ++j) mx = std::max(mx, row[j]);
        double total = 0.0;
        for (int j = 0; j < d; ++j) {
            orow[j] = std::exp(row[j] - mx);
            total += orow[j];
        }
        for (int j = 0; j < d; ++j) orow[j] /= total;
    }
    bool tracked = should_track({&a});
    Tensor result = make_output(a.shape(), std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, oi, n, d] {
            if (!wants_grad(ai)) return;
            ai->ensure_grad();
            for (int i = 0; i < n; ++i) {
                const double* y = oi->value.data() + static_cast<size_t>(i) * d;
                const double* g = oi->grad.data() + static_cast<size_t>(i) * d;
                double* da = ai->grad.data() + static_cast<size_t>(i) * d;
                double dot = 0.0;
                for (int j = 0; j < d; ++j) dot += g[j] * y[j];
                for (int j = 0; j < d; ++j) da[j] += y[j] * (g[j] - dot);
            }
        });
    }
    return result;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    if (x.shape().size() != 2) throw ShapeError("layer_norm: 2-d tensor required");
    int n = x.dim(0), d = x.dim(1);
    if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) throw ShapeError("layer_norm: gain/bias must be [d]");
    std::vector<double> out(x.value().size());
    std::vector<double> inv_sigma(n), xhat(x.value().size());
    for (int i = 0; i < n; ++i) {
        const double* row = x.value().data() + static_cast<size_t>(i) * d;
        double mu = 0.0;
        for (int j = 0; j < d; ++j) mu += row[j];
        mu /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= d;
        double inv = 1.0 / std::sqrt(var + eps);
        inv_sigma[i] = inv;
        for (int j = 0; j < d; ++j) {
            double xh = (row[j] - mu) * inv;
            xhat[static_cast<size_t>(i) * d + j] = xh;
            out[static_cast<size_t>(i) * d + j] = gain.value()[j] * xh + bias.value()[j];
        }
    }
    bool tracked = should_track({&x, &gain, &bias});
    Tensor result = make_output(x.shape(), std::move(out), tracked);
    if (tracked) {
        auto xi = x.impl, gi = gain.impl, bi = bias.impl, oi = result.impl;
        auto inv_s = std::make_shared<std::vector<double>>(std::move(inv_sigma));
        auto xh = std::make_shared<std::vector<double>>(std::move(xhat));
        Tape::active()->record(oi, [xi, gi, bi, oi, inv_s, xh, n, d] {
            if (wants_grad(gi)) {
                gi->ensure_grad();
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < d; ++j)
                        gi->grad[j] += oi->grad[static_cast<size_t>(i) * d + j] * (*xh)[static_cast<size_t>(i) * d + j];
            }
            if (wants_grad(bi)) {
                bi->ensure_grad();
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < d; ++j) bi->grad[j] += oi->grad[static_cast<size_t>(i) * d + j];
            }
            if (wants_grad(xi)) {
                xi->ensure_grad();
                for (int i = 0; i < n; ++i) {
                    const double* g = oi->grad.data() + static_cast<size_t>(i) * d;
                    const double* xhr = xh->data() + static_cast<size_t>(i) * d;
                    double* dx = xi->grad.data() + static_cast<size_t>(i) * d;
                    double m1 = 0.0, m2 = 0.0;
                    for (int j = 0; j < d; ++j) {
                        double dxh = g[j] * gi->value[j];
                        m1 += dxh;
                        m2 += dxh * xhr[j];
                    }
                    m1 /= d;
                    m2 /= d;
                    for (int j = 0; j < d; ++j) {
                        double dxh = g[j] * gi->value[j];
                        dx[j] += (*inv_s)[i] * (dxh - m1 - xhr[j] * m2);
                    }
                }
            }
        });
    }
    return result;
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool train) {
    if (!train || rate <= 0.0) return x;
    double keep = 1.0 - rate;
    std::vector<double> mask(x.value().size());
    for (auto& m : mask) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
    std::vector<double> out(x.value().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * mask[i];
    bool tracked = should_track({&x});
    Tensor result = make_output(x.shape(), std::move(out), tracked);
    if (tracked) {
        auto xi = x.impl, oi = result.impl;
        auto mk = std::make_shared<std::vector<double>>(std::move(mask));
        Tape::active()->record(oi, [xi, oi, mk] {
            if (!wants_grad(xi)) return;
            xi->ensure_grad();
            for (size_t i = 0; i < oi->grad.size(); ++i) xi->grad[i] += oi->grad[i] * (*mk)[i];
        });
    }
    return result;
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets, int pad_id) {
    if (logits.shape().size() != 2) throw ShapeError("cross_entropy: 2-d logits required");
    int n = logits.dim(0), v = logits.dim(1);
    if (static_cast<int>(targets.size()) != n) throw ShapeError("cross_entropy: targets length != rows");
    std::vector<double> probs(logits.value().size());
    double loss = 0.0;
    int counted = 0;
    for (int i = 0; i < n; ++i) {
        const double* row = logits.value().data() + static_cast<size_t>(i) * v;
        double* prow = probs.data() + static_cast<size_t>(i) * v;
        double mx = row[0];
        for (int j = 1; j < v; ++j) mx = std::max(mx, row[j]);
        double total = 0.0;
        for (int j = 0; j < v; ++j) {
            prow[j] = std::exp(row[j] - mx);
            total += prow[j];
        }
        for (int j = 0; j < v; ++j) prow[j] /= total;
        if (targets[i] != pad_id) {
            if (targets[i] < 0 || targets[i] >= v) throw IndexError("cross_entropy: target out of range");
            loss -= std::log(std::max(prow[targets[i]], 1e-300));
            ++counted;
        }
    }
    if (counted == 0) throw ShapeError("cross_entropy: no non-pad targets");
    loss /= counted;
    bool tracked = should_track({&logits});
    Tensor result = make_output({1}, {loss}, tracked);
    if (tracked) {
        auto li = logits.impl, oi = result.impl;
        auto pr = std::make_shared<std::vector<double>>(std::move(probs));
        auto tg = std::make_shared<std::vector<int>>(targets);
        Tape::active()->record(oi, [li, oi, pr, tg, n, v, pad_id, counted] {
            if (!wants_grad(li)) return;
            li->ensure_grad();
            double g = oi->grad[0] / counted;
            for (int i = 0; i < n; ++i) {
                if ((*tg)[i] == pad_id) continue;
                const double* prow = pr->data() + static_cast<size_t>(i) * v;
                double* drow = li->grad.data() + static_cast<size_t>(i) * v;
                for (int j = 0; j < v; ++j) drow[j] += g * prow[j];
                drow[(*tg)[i]] -= g;
            }
        });
    }
    return result;
}

Tensor mean(const Tensor& a) {
    double total = 0.0;
    for (double x : a.value()) total += x;
    long n = a.numel();
    bool tracked = should_track({&a});
    Tensor result = make_output({1}, {total / n}, tracked);
    if (tracked) {
        auto ai = a.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, oi, n] {
            if (!wants_grad(ai)) return;
            ai->ensure_grad();
            double g = oi->grad[0] / n;
            for (auto& d : ai->grad) d += g;
        });
    }
    return result;
}

Tensor sum(const Tensor& a) {
    double total = 0.0;
    for (double x : a.value()) total += x;
    bool tracked = should_track({&a});
    Tensor result = make_output({1}, {total}, tracked);
    if (tracked) {
        auto ai = a.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, oi] {
            if (!wants_grad(ai)) return;
            ai->ensure_grad();
            double g = oi->grad[0];
            for (auto& d : ai->grad) d += g;
        });
    }
    return result;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no parts");
    int n = parts[0].dim(0), total = 0;
    for (const auto& p : parts) {
        if (p.shape().size() != 2 || p.dim(0) != n) throw ShapeError("concat_cols: leading dims disagree");
        total += p.dim(1);
    }
    std::vector<double> out(static_cast<size_t>(n) * total);
    int off = 0;
    for (const auto& p : parts) {
        int d = p.dim(1);
        for (int i = 0; i < n; ++i)
            std::memcpy(out.data() + static_cast<size_t>(i) * total + off,
                        p.value().data() + static_cast<size_t>(i) * d, sizeof(double) * d);
        off += d;
    }
    bool tracked = false;
    for (const auto& p : parts)
        if (should_track({&p})) tracked = true;
    Tensor result = make_output({n, total}, std::move(out), tracked);
    if (tracked) {
        std::vector<std::shared_ptr<TensorImpl>> impls;
        for (const auto& p : parts) impls.push_back(p.impl);
        auto oi = result.impl;
        Tape::active()->record(oi, [impls, oi, n, total] {
            int off2 = 0;
            for (const auto& pi : impls) {
                int d = pi->shape[1];
                if (wants_grad(pi)) {
                    pi->ensure_grad();
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < d; ++j)
                            pi->grad[static_cast<size_t>(i) * d + j] +=
                                oi->grad[static_cast<size_t>(i) * total + off2 + j];
                }
                off2 += d;
            }
        });
    }
    return result;
}

Tensor slice_cols(const Tensor& a, int c0, int c1) {
    if (a.shape().size() != 2) throw ShapeError("slice_cols: 2-d tensor required");
    int n = a.dim(0), d = a.dim(1);
    if (c0 < 0 || c1 > d || c0 >= c1) throw ShapeError("slice_cols: bad column range");
    int w = c1 - c0;
    std::vector<double> out(static_cast<size_t>(n) * w);
    for (int i = 0; i < n; ++i)
        std::memcpy(out.data() + static_cast<size_t>(i) * w, a.value().data() + static_cast<size_t>(i) * d + c0,
                    sizeof(double) * w);
    bool tracked = should_track({&a});
    Tensor result = make_output({n, w}, std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, oi = result.impl;
        Tape::active()->record(oi, [ai, oi, n, d, c0, w] {
            if (!wants_grad(ai)) return;
            ai->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < w; ++j)
                    ai->grad[static_cast<size_t>(i) * d + c0 + j] += oi->grad[static_cast<size_t>(i) * w + j];
        });
    }
    return result;
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& indices) {
    if (table.shape().size() != 2) throw ShapeError("gather_rows: 2-d table required");
    int v = table.dim(0), d = table.dim(1);
    std::vector<double> out(indices.size() * static_cast<size_t>(d));
    for (size_t r = 0; r < indices.size(); ++r) {
        int idx = indices[r];
        if (idx < 0 || idx >= v) throw IndexError("gather_rows: index out of range");
        std::memcpy(out.data() + r * d, table.value().data() + static_cast<size_t>(idx) * d, sizeof(double) * d);
    }
    bool tracked = should_track({&table});
    Tensor result = make_output({static_cast<int>(indices.size()), d}, std::move(out), tracked);
    if (tracked) {
        auto ti = table.impl, oi = result.impl;
        auto idxs = std::make_shared<std::vector<int>>(indices);
        Tape::active()->record(oi, [ti, oi, idxs, d] {
            if (!wants_grad(ti)) return;
            ti->ensure_grad();
            for (size_t r = 0; r < idxs->size(); ++r)
                for (int j = 0; j < d; ++j)
                    ti->grad[static_cast<size_t>((*idxs)[r]) * d + j] += oi->grad[r * d + j];
        });
    }
    return result;
}

Tensor masked_fill(const Tensor& a, const std::vector<uint8_t>& mask, double fill) {
    if (mask.size() != a.value().size()) throw ShapeError("masked_fill: mask size mismatch");
    std::vector<double> out(a.value().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? a.value()[i] : fill;
    bool tracked = should_track({&a});
    Tensor result = make_output(a.shape(), std::move(out), tracked);
    if (tracked) {
        auto ai = a.impl, oi = result.impl;
        auto mk = std::make_shared<std::vector<uint8_t>>(mask);
        Tape::active()->record(oi, [ai, oi, mk] {
            if (!wants_grad(ai)) return;
            ai->ensure_grad();
            for (size_t i = 0; i < oi->grad.size(); ++i)
                if ((*mk)[i]) ai->grad[i] += oi->grad[i];
        });
    }
    return result;
}

Tensor pick_rel(const Tensor& mat, const std::vector<uint32_t>& idx, int n, PickAxis axis) {
    if (mat.shape().size() != 2) throw ShapeError("pick_rel: 2-d tensor required");
    int rows = mat.dim(0), cols = mat.dim(1);
    if (rows != n) throw ShapeError("pick_rel: matrix rows must equal n");
    if (idx.size() != static_cast<size_t>(n) * n) throw ShapeError("pick_rel: index size must be n*n");
    std::vector<double> out(idx.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            uint32_t c = idx[static_cast<size_t>(i) * n + j];
            if (c >= static_cast<uint32_t>(cols)) throw IndexError("pick_rel: index out of range");
            int r = axis == PickAxis::row_i ? i : j;
            out[static_cast<size_t>(i) * n + j] = mat.value()[static_cast<size_t>(r) * cols + c];
        }
    }
    bool tracked = should_track({&mat});
    Tensor result = make_output({n, n}, std::move(out), tracked);
    if (tracked) {
        auto mi = mat.impl, oi = result.impl;
        auto ix = std::make_shared<std::vector<uint32_t>>(idx);
        Tape::active()->record(oi, [mi, oi, ix, n, cols, axis] {
            if (!wants_grad(mi)) return;
            mi->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    uint32_t c = (*ix)[static_cast<size_t>(i) * n + j];
                    int r = axis == PickAxis::row_i ? i : j;
                    mi->grad[static_cast<size_t>(r) * cols + c] += oi->grad[static_cast<size_t>(i) * n + j];
                }
        });
    }
    return result;
}

Tensor sbm_mask_apply(const Tensor& raw_scores, const Tensor& link_prob, const std::vector<uint8_t>& mask) {
    if (raw_scores.shape() != link_prob.shape()) throw ShapeError("sbm_mask_apply: shapes must match");
    if (mask.size() != raw_scores.value().size()) throw ShapeError("sbm_mask_apply: mask size mismatch");
    std::vector<double> out(raw_scores.value().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? raw_scores.value()[i] : kNegFill;
    bool tracked = should_track({&raw_scores, &link_prob});
    Tensor result = make_output(raw_scores.shape(), std::move(out), tracked);
    if (tracked) {
        auto ri = raw_scores.impl, pi = link_prob.impl, oi = result.impl;
        auto mk = std::make_shared<std::vector<uint8_t>>(mask);
        Tape::active()->record(oi, [ri, pi, oi, mk] {
            if (wants_grad(ri)) {
                ri->ensure_grad();
                for (size_t i = 0; i < oi->grad.size(); ++i)
                    if ((*mk)[i]) ri->grad[i] += oi->grad[i];
            }
            // straight-through: dL/dP = dL/dA * raw where the mask kept the
            // entry, exactly zero where it did not
            if (wants_grad(pi)) {
                pi->ensure_grad();
                for (size_t i = 0; i < oi->grad.size(); ++i)
                    if ((*mk)[i]) pi->grad[i] += oi->grad[i] * ri->value[i];
            }
        });
    }
    return result;
}

double gradcheck(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps) {
    x.impl->requires_grad = true;
    x.zero_grad();
    std::vector<double> analytic;
    {
        Tape tape;
        Tensor loss = f(x);
        if (loss.numel() != 1) throw NotScalar("gradcheck: f must be scalar-valued");
        tape.backward(loss);
        analytic = x.grad();
    }
    double worst = 0.0;
    for (size_t i = 0; i < x.impl->value.size(); ++i) {
        double saved = x.impl->value[i];
        x.impl->value[i] = saved + eps;
        double up = f(x).item();
        x.impl->value[i] = saved - eps;
        double down = f(x).item();
        x.impl->value[i] = saved;
        double numeric = (up - down) / (2.0 * eps);
        double rel = std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
        worst = std::max(worst, rel);
    }
    return worst;
}

} // namespace csa::ad
