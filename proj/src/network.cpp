#include "tmplgraph/network.hpp"

#include "tmplgraph/errors.hpp"

#include <cmath>
#include <random>

namespace tmplgraph {

std::string to_string(EncoderKind k) { return k == EncoderKind::cnn ? "cnn" : "mlp"; }

EncoderKind parse_encoder_kind(const std::string& s) {
    if (s == "cnn") {
        return EncoderKind::cnn;
    }
    if (s == "mlp") {
        return EncoderKind::mlp;
    }
    throw UsageError("encoder must be 'cnn' or 'mlp', got '" + s + "'");
}

void NetworkHyperParams::validate() const {
    if (f1 < 1 || f2 < 1 || f3 < 1 || batch_size < 1 || epochs < 1) {
        throw InvalidSpec("layer widths, batch size and epochs must be positive");
    }
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) {
        throw InvalidSpec("leaky slope must lie in (0, 1)");
    }
    if (!std::isfinite(learning_rate) || learning_rate <= 0.0 || !std::isfinite(momentum) || momentum < 0.0 ||
        momentum >= 1.0) {
        throw InvalidSpec("learning rate must be positive and momentum in [0, 1)");
    }
}

namespace {

template <typename P>
auto collect(P& p) {
    using Span = std::conditional_t<std::is_const_v<P>, std::span<const double>, std::span<double>>;
    using Ref = std::conditional_t<std::is_const_v<P>, ConstTensorRef, TensorRef>;
    std::vector<Ref> out;
    const auto M = static_cast<std::size_t>(p.m);
    auto add = [&](const char* name, std::vector<std::size_t> shape, auto& t) {
        out.push_back(Ref{name, std::move(shape), Span(t.data(), static_cast<std::size_t>(t.size()))});
    };
    const auto f1 = static_cast<std::size_t>(p.e2e_row.rows());
    const auto f2 = static_cast<std::size_t>(p.e2n_weight.rows());
    const auto f3 = static_cast<std::size_t>(p.out_weight.cols());
    const auto c = static_cast<std::size_t>(p.c);
    if (p.kind == EncoderKind::cnn) {
        add("e2e.row", {f1, M}, p.e2e_row);
        add("e2e.col", {f1, M}, p.e2e_col);
        add("e2e.bias", {f1}, p.e2e_bias);
        add("e2n.weight", {f2, f1, M}, p.e2n_weight);
        add("e2n.bias", {f2}, p.e2n_bias);
        add("n2g.weight", {f3, f2, M}, p.n2g_weight);
        add("n2g.bias", {f3}, p.n2g_bias);
    } else {
        add("mlp.weight", {f3, M * (M - 1) / 2}, p.mlp_weight);
        add("mlp.bias", {f3}, p.mlp_bias);
    }
    add("out.weight", {c, f3}, p.out_weight);
    add("out.bias", {c}, p.out_bias);
    return out;
}

/// Uniform in [-1, 1) from the top 53 bits, so draws do not depend on the
/// standard library's distribution implementation.
double symmetric_unit(std::mt19937_64& gen) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

void glorot(std::mt19937_64& gen, std::span<double> data, double fan_in, double fan_out) {
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : data) {
        v = s * symmetric_unit(gen);
    }
}

double leaky(double z, double slope) { return z > 0.0 ? z : slope * z; }
double leaky_grad(double z, double slope) { return z > 0.0 ? 1.0 : slope; }

Matrix leaky(const Matrix& z, double slope) {
    return z.unaryExpr([slope](double v) { return leaky(v, slope); });
}

Matrix leaky_grad(const Matrix& z, double slope) {
    return z.unaryExpr([slope](double v) { return leaky_grad(v, slope); });
}

/// f2 x M row-major flatten of the node maps, index g*M + i.
Vector flatten_rows(const Matrix& n) {
    Vector out(n.size());
    for (Eigen::Index g = 0; g < n.rows(); ++g) {
        out.segment(g * n.cols(), n.cols()) = n.row(g).transpose();
    }
    return out;
}

}  // namespace

std::vector<TensorRef> tensors(NetworkParameters& p) { return collect(p); }
std::vector<ConstTensorRef> tensors(const NetworkParameters& p) { return collect(p); }

NetworkParameters NetworkParameters::zeros_like() const {
    NetworkParameters z = *this;
    for (auto& t : tensors(z)) {
        std::fill(t.data.begin(), t.data.end(), 0.0);
    }
    return z;
}

std::size_t NetworkParameters::scalar_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors(*this)) {
        n += t.data.size();
    }
    return n;
}

Vector upper_triangle(const Matrix& x) {
    const Eigen::Index m = x.rows();
    Vector u(m * (m - 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            u(k++) = x(i, j);
        }
    }
    return u;
}

NetworkParameters init_network(int m, int c, const NetworkHyperParams& hyper) {
    hyper.validate();
    if (m < 2 || c < 2) {
        throw InvalidSpec("network needs at least 2 ROIs and 2 classes");
    }
    NetworkParameters p;
    p.kind = hyper.encoder_kind;
    p.m = m;
    p.c = c;
    const int f1 = hyper.f1, f2 = hyper.f2, f3 = hyper.f3;
    std::mt19937_64 gen(hyper.seed);
    auto span_of = [](auto& t) { return std::span<double>(t.data(), static_cast<std::size_t>(t.size())); };

    if (p.kind == EncoderKind::cnn) {
        p.e2e_row.resize(f1, m);
        p.e2e_col.resize(f1, m);
        p.e2e_bias = Vector::Zero(f1);
        p.e2n_weight.resize(f2, f1 * m);
        p.e2n_bias = Vector::Zero(f2);
        p.n2g_weight.resize(f3, f2 * m);
        p.n2g_bias = Vector::Zero(f3);
        // conv-style fans: channels times kernel length
        glorot(gen, span_of(p.e2e_row), 2.0 * m, 2.0 * m * f1);
        glorot(gen, span_of(p.e2e_col), 2.0 * m, 2.0 * m * f1);
        glorot(gen, span_of(p.e2n_weight), static_cast<double>(f1) * m, static_cast<double>(f2) * m);
        glorot(gen, span_of(p.n2g_weight), static_cast<double>(f2) * m, static_cast<double>(f3) * m);
    } else {
        const int pairs = m * (m - 1) / 2;
        p.mlp_weight.resize(f3, pairs);
        p.mlp_bias = Vector::Zero(f3);
        glorot(gen, span_of(p.mlp_weight), pairs, f3);
    }
    p.out_weight.resize(c, f3);
    p.out_bias = Vector::Zero(c);
    glorot(gen, span_of(p.out_weight), f3, c);
    return p;
}

ForwardResult forward(const NetworkParameters& p, const Matrix& x, double slope) {
    if (x.rows() != p.m || x.cols() != p.m) {
        throw DimensionMismatch("network expects " + std::to_string(p.m) + "x" + std::to_string(p.m) +
                                " input, got " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    }
    ForwardCache cache;
    cache.kind = p.kind;
    cache.m = p.m;
    cache.c = p.c;
    cache.f3 = p.f3();
    cache.x = x;
    const Eigen::Index m = p.m;

    if (p.kind == EncoderKind::cnn) {
        const int f1 = p.f1(), f2 = p.f2();
        cache.f1 = f1;
        cache.f2 = f2;
        cache.e2e_pre.resize(static_cast<std::size_t>(f1));
        cache.e2e_act.resize(static_cast<std::size_t>(f1));
        for (int f = 0; f < f1; ++f) {
            const Vector row_part = x * p.e2e_row.row(f).transpose();
            const Vector col_part = x.transpose() * p.e2e_col.row(f).transpose();
            Matrix z = row_part.replicate(1, m) + col_part.transpose().replicate(m, 1);
            z.array() += p.e2e_bias(f);
            cache.e2e_act[static_cast<std::size_t>(f)] = leaky(z, slope);
            cache.e2e_pre[static_cast<std::size_t>(f)] = std::move(z);
        }
        Matrix u(f2, m);
        for (int g = 0; g < f2; ++g) {
            Vector acc = Vector::Constant(m, p.e2n_bias(g));
            for (int f = 0; f < f1; ++f) {
                acc += cache.e2e_act[static_cast<std::size_t>(f)] * p.e2n_weight.row(g).segment(f * m, m).transpose();
            }
            u.row(g) = acc.transpose();
        }
        cache.e2n_act = leaky(u, slope);
        cache.e2n_pre = std::move(u);
        cache.hidden_pre = p.n2g_weight * flatten_rows(cache.e2n_act) + p.n2g_bias;
    } else {
        cache.flat = upper_triangle(x);
        cache.hidden_pre = p.mlp_weight * cache.flat + p.mlp_bias;
    }
    cache.hidden_act = leaky(cache.hidden_pre, slope);
    cache.logits = p.out_weight * cache.hidden_act + p.out_bias;
    Vector logits = cache.logits;
    return {std::move(logits), std::move(cache)};
}

Vector infer(const NetworkParameters& params, const Matrix& x, double leaky_slope) {
    return forward(params, x, leaky_slope).logits;
}

Vector softmax(const Vector& logits) {
    const double mx = logits.maxCoeff();
    Vector e = (logits.array() - mx).exp();
    return e / e.sum();
}

double cross_entropy(const Vector& logits, int label) {
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    return lse - logits(label);
}

NetworkParameters backward(const NetworkParameters& p, const ForwardCache& cache, int label, double slope) {
    const bool shapes_match = cache.kind == p.kind && cache.m == p.m && cache.c == p.c && cache.f3 == p.f3() &&
                              cache.logits.size() == p.c &&
                              (p.kind == EncoderKind::mlp || (cache.f1 == p.f1() && cache.f2 == p.f2()));
    if (!shapes_match) {
        throw StaleCache("forward cache does not match the network's shapes");
    }
    if (label < 0 || label >= p.c) {
        throw IndexOutOfRange("label " + std::to_string(label) + " outside 0.." + std::to_string(p.c - 1));
    }
    NetworkParameters g = p.zeros_like();
    const Eigen::Index m = p.m;

    Vector dlogits = softmax(cache.logits);
    dlogits(label) -= 1.0;
    g.out_weight = dlogits * cache.hidden_act.transpose();
    g.out_bias = dlogits;

    const Vector dh = p.out_weight.transpose() * dlogits;
    const Vector dv = dh.cwiseProduct(leaky_grad(cache.hidden_pre, slope));

    if (p.kind == EncoderKind::mlp) {
        g.mlp_weight = dv * cache.flat.transpose();
        g.mlp_bias = dv;
        return g;
    }

    const int f1 = p.f1(), f2 = p.f2();
    g.n2g_weight = dv * flatten_rows(cache.e2n_act).transpose();
    g.n2g_bias = dv;

    const Vector dn_flat = p.n2g_weight.transpose() * dv;
    Matrix du(f2, m);
    for (int gi = 0; gi < f2; ++gi) {
        du.row(gi) = dn_flat.segment(gi * m, m).transpose();
    }
    du = du.cwiseProduct(leaky_grad(cache.e2n_pre, slope));
    g.e2n_bias = du.rowwise().sum();

    for (int f = 0; f < f1; ++f) {
        const Matrix& act = cache.e2e_act[static_cast<std::size_t>(f)];
        // weights feeding E2N from this filter, f2 x M
        Matrix w_f(f2, m);
        for (int gi = 0; gi < f2; ++gi) {
            w_f.row(gi) = p.e2n_weight.row(gi).segment(f * m, m);
            g.e2n_weight.row(gi).segment(f * m, m) = (act.transpose() * du.row(gi).transpose()).transpose();
        }
        Matrix dz = (du.transpose() * w_f).cwiseProduct(leaky_grad(cache.e2e_pre[static_cast<std::size_t>(f)], slope));
        g.e2e_bias(f) = dz.sum();
        const Vector row_sums = dz.rowwise().sum();
        const Vector col_sums = dz.colwise().sum().transpose();
        g.e2e_row.row(f) = (cache.x.transpose() * row_sums).transpose();
        g.e2e_col.row(f) = (cache.x * col_sums).transpose();
    }
    return g;
}

void sgd_step(NetworkParameters& params, const NetworkParameters& grads, NetworkParameters& velocity, double lr,
              double momentum) {
    auto pt = tensors(params);
    const auto gt = tensors(grads);
    auto vt = tensors(velocity);
    if (pt.size() != gt.size() || pt.size() != vt.size()) {
        throw DimensionMismatch("sgd_step: parameter, gradient and velocity layouts differ");
    }
    for (std::size_t t = 0; t < pt.size(); ++t) {
        if (pt[t].data.size() != gt[t].data.size() || pt[t].data.size() != vt[t].data.size()) {
            throw DimensionMismatch("sgd_step: tensor " + pt[t].name + " has mismatched sizes");
        }
        for (std::size_t i = 0; i < pt[t].data.size(); ++i) {
            vt[t].data[i] = momentum * vt[t].data[i] - lr * gt[t].data[i];
            pt[t].data[i] += vt[t].data[i];
        }
    }
}

}  // namespace tmplgraph
