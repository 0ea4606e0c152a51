#pragma once

// Small dense reference implementations of the conditioning equations used by
// the generator backend: scaled dot-product cross-attention, decoupled
// text/image cross-attention, the ControlNet residual and forward noising.
// Single head, double precision; meant for property testing, not inference.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshtex::attnref {

using FeatureMatrix = Eigen::MatrixXd;  ///< rows = tokens, cols = feature dimension

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Projection weights. Text keys/values project from the text feature width,
/// image keys/values (the primed pair) from the image feature width; all
/// project into a common width d.
struct AttnWeights {
    Eigen::MatrixXd w_q;        ///< d_query x d
    Eigen::MatrixXd w_k;        ///< d_text x d
    Eigen::MatrixXd w_v;        ///< d_text x d_v
    Eigen::MatrixXd w_k_image;  ///< d_image x d
    Eigen::MatrixXd w_v_image;  ///< d_image x d_v
};

namespace detail {

inline std::string shape(const Eigen::MatrixXd& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ShapeError(what);
}

inline void require_finite(const Eigen::MatrixXd& m, const char* name) {
    require(m.allFinite(), std::string(name) + " has non-finite entries");
}

}  // namespace detail

/// Row-wise softmax of QK^T / sqrt(d), d = key width.
inline Eigen::MatrixXd attention_weights(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k) {
    detail::require(q.cols() == k.cols() && q.cols() > 0,
                    "query " + detail::shape(q) + " and key " + detail::shape(k) + " widths differ");
    Eigen::MatrixXd s = (q * k.transpose()) / std::sqrt(static_cast<double>(k.cols()));
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
        const double mx = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - mx).exp().matrix();
        s.row(r) /= s.row(r).sum();
    }
    return s;
}

inline Eigen::MatrixXd attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k, const Eigen::MatrixXd& v) {
    detail::require(k.rows() == v.rows(), "key and value token counts differ");
    return attention_weights(q, k) * v;
}

inline Eigen::MatrixXd project_query(const FeatureMatrix& z, const AttnWeights& w) {
    detail::require(z.cols() == w.w_q.rows(), "z " + detail::shape(z) + " incompatible with W_Q " + detail::shape(w.w_q));
    return z * w.w_q;
}

/// Softmax(Q K^T / sqrt(d)) V with Q = z W_Q, K = f W_K, V = f W_V.
inline FeatureMatrix cross_attention(const FeatureMatrix& z, const FeatureMatrix& f, const AttnWeights& w) {
    detail::require_finite(z, "z");
    detail::require_finite(f, "f");
    detail::require(f.rows() > 0, "context has no tokens");
    detail::require(f.cols() == w.w_k.rows() && f.cols() == w.w_v.rows(),
                    "context " + detail::shape(f) + " incompatible with W_K " + detail::shape(w.w_k));
    const Eigen::MatrixXd q = project_query(z, w);
    return attention(q, f * w.w_k, f * w.w_v);
}

/// Text branch plus lambda_ip times the image branch, sharing one query.
inline FeatureMatrix decoupled_cross_attention(const FeatureMatrix& z, const FeatureMatrix& f_txt,
                                               const FeatureMatrix& f_tex, const AttnWeights& w, double lambda_ip) {
    detail::require_finite(f_tex, "f_tex");
    detail::require(f_tex.rows() > 0, "image context has no tokens");
    detail::require(f_tex.cols() == w.w_k_image.rows() && f_tex.cols() == w.w_v_image.rows(),
                    "image context " + detail::shape(f_tex) + " incompatible with W'_K " + detail::shape(w.w_k_image));
    detail::require(w.w_k_image.cols() == w.w_k.cols() && w.w_v_image.cols() == w.w_v.cols(),
                    "image projections must match the text projection widths");
    const FeatureMatrix text = cross_attention(z, f_txt, w);
    if (lambda_ip == 0.0) return text;
    const Eigen::MatrixXd q = project_query(z, w);
    return text + lambda_ip * attention(q, f_tex * w.w_k_image, f_tex * w.w_v_image);
}

/// F_un + lambda_cn * F_cn.
inline FeatureMatrix controlnet_residual(const FeatureMatrix& f_un, const FeatureMatrix& f_cn, double lambda_cn) {
    detail::require(f_un.rows() == f_cn.rows() && f_un.cols() == f_cn.cols(),
                    "feature shapes differ: " + detail::shape(f_un) + " vs " + detail::shape(f_cn));
    return f_un + lambda_cn * f_cn;
}

struct NoiseSchedule {
    std::vector<double> beta;
    std::vector<double> alpha_bar;
    std::size_t steps() const { return beta.size(); }
};

/// Linear beta schedule from 1e-4 to 0.02 and its cumulative alpha product.
inline NoiseSchedule make_schedule(std::size_t steps) {
    if (steps < 1) throw std::invalid_argument("schedule needs at least one step");
    constexpr double kBetaStart = 1e-4;
    constexpr double kBetaEnd = 0.02;
    NoiseSchedule s;
    s.beta.resize(steps);
    s.alpha_bar.resize(steps);
    double prod = 1.0;
    for (std::size_t t = 0; t < steps; ++t) {
        s.beta[t] = steps == 1 ? kBetaStart
                               : kBetaStart + (kBetaEnd - kBetaStart) * static_cast<double>(t) / static_cast<double>(steps - 1);
        prod *= 1.0 - s.beta[t];
        s.alpha_bar[t] = prod;
    }
    return s;
}

/// sqrt(alpha_bar[t]) z0 + sqrt(1 - alpha_bar[t]) eps.
inline FeatureMatrix forward_noise(const FeatureMatrix& z0, std::size_t t, const NoiseSchedule& sched,
                                   const FeatureMatrix& eps) {
    if (t >= sched.steps())
        throw std::out_of_range("timestep " + std::to_string(t) + " outside schedule of " +
                                std::to_string(sched.steps()) + " steps");
    detail::require(z0.rows() == eps.rows() && z0.cols() == eps.cols(), "z0 and eps shapes differ");
    const double ab = sched.alpha_bar[t];
    return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * eps;
}

}  // namespace meshtex::attnref
