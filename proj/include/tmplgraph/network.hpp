/**
 * @file network.hpp
 * @brief Structured classifier over template-augmented connectivity matrices.
 *
 * cnn encoder, for an M x M input x:
 *
 *   E2E   Z_f(i,j) = sum_m row_f(m) x(i,m) + sum_m col_f(m) x(m,j) + b_f      A_f = leaky(Z_f)
 *   E2N   U_g(i)   = sum_f sum_j w_gf(j) A_f(i,j) + b_g                         N_g = leaky(U_g)
 *   N2G   V_u      = sum_g sum_i v_ug(i) N_g(i) + b_u                           h_u = leaky(V_u)
 *   head  logits   = O h + b_O
 *
 * mlp encoder: h = leaky(W u + b) over the flattened strict upper triangle u of x,
 * followed by the same head. Gradients are derived by hand in backward().
 */
#pragma once

#include "tmplgraph/connectivity.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tmplgraph {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class EncoderKind { cnn, mlp };

std::string to_string(EncoderKind k);
EncoderKind parse_encoder_kind(const std::string& s);

struct NetworkHyperParams {
    int f1 = 8;
    int f2 = 16;
    int f3 = 32;
    double leaky_slope = 0.33;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 16;
    int epochs = 100;
    std::uint64_t seed = 0;
    EncoderKind encoder_kind = EncoderKind::cnn;

    void validate() const;
};

/// Weights of the classifier. Tensors not used by the chosen encoder are empty.
/// Layer tensors are row-major so their flat storage matches the model file layout.
struct NetworkParameters {
    EncoderKind kind = EncoderKind::cnn;
    int m = 0;
    int c = 0;

    RowMatrix e2e_row;   ///< f1 x M
    RowMatrix e2e_col;   ///< f1 x M
    Vector e2e_bias;     ///< f1
    RowMatrix e2n_weight;  ///< f2 x (f1*M), entry (g, f*M + j)
    Vector e2n_bias;       ///< f2
    RowMatrix n2g_weight;  ///< f3 x (f2*M), entry (u, g*M + i)
    Vector n2g_bias;       ///< f3
    RowMatrix mlp_weight;  ///< f3 x M(M-1)/2
    Vector mlp_bias;       ///< f3
    RowMatrix out_weight;  ///< C x f3
    Vector out_bias;       ///< C

    int f1() const { return static_cast<int>(e2e_row.rows()); }
    int f2() const { return static_cast<int>(e2n_weight.rows()); }
    int f3() const { return static_cast<int>(out_weight.cols()); }

    /// Same shapes, every entry zero.
    NetworkParameters zeros_like() const;

    /// Number of scalars over all active tensors.
    std::size_t scalar_count() const;
};

/// A named view onto one active tensor's storage.
struct TensorRef {
    std::string name;
    std::vector<std::size_t> shape;
    std::span<double> data;
};

struct ConstTensorRef {
    std::string name;
    std::vector<std::size_t> shape;
    std::span<const double> data;
};

/// Active tensors in a fixed order (the order used for serialization and checks).
std::vector<TensorRef> tensors(NetworkParameters& p);
std::vector<ConstTensorRef> tensors(const NetworkParameters& p);

/// Glorot-uniform weights, zero biases. Fully determined by hyper.seed.
NetworkParameters init_network(int m, int c, const NetworkHyperParams& hyper);

struct ForwardCache {
    EncoderKind kind = EncoderKind::cnn;
    int m = 0, c = 0, f1 = 0, f2 = 0, f3 = 0;
    Matrix x;
    std::vector<Matrix> e2e_pre;  ///< f1 maps, M x M
    std::vector<Matrix> e2e_act;
    Matrix e2n_pre;  ///< f2 x M
    Matrix e2n_act;
    Vector flat;     ///< mlp input
    Vector hidden_pre;
    Vector hidden_act;
    Vector logits;
};

struct ForwardResult {
    Vector logits;
    ForwardCache cache;
};

ForwardResult forward(const NetworkParameters& params, const Matrix& x, double leaky_slope);

/// Logits only.
Vector infer(const NetworkParameters& params, const Matrix& x, double leaky_slope);

Vector softmax(const Vector& logits);

/// -log softmax(logits)[label], with max subtraction.
double cross_entropy(const Vector& logits, int label);

/// Gradient of cross_entropy(forward(params, x), label) w.r.t. every parameter.
/// Throws StaleCache if `cache` was not produced for parameters of this shape.
NetworkParameters backward(const NetworkParameters& params, const ForwardCache& cache, int label,
                           double leaky_slope);

/// velocity <- momentum * velocity - lr * grads;  params <- params + velocity
void sgd_step(NetworkParameters& params, const NetworkParameters& grads, NetworkParameters& velocity,
              double lr, double momentum);

/// Flattened strict upper triangle, row-major over i<j.
Vector upper_triangle(const Matrix& x);

}  // namespace tmplgraph
