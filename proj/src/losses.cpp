#include "garment/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace garment {

namespace {

double mean_sq_minus(const std::vector<double>& v, double target) {
  if (v.empty()) throw std::invalid_argument("lsgan: empty response");
  double s = 0.0;
  for (double x : v) s += (x - target) * (x - target);
  return s / static_cast<double>(v.size());
}

Eigen::Matrix3d to_eigen(const Mat3& m) {
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = m[i][j];
  return out;
}

Eigen::Vector3d to_eigen(const Rgb& c) { return {c.r, c.g, c.b}; }

}  // namespace

double lsgan_d_loss(const DiscriminatorResponses& r) {
  if (r.empty()) throw std::invalid_argument("lsgan_d_loss: need at least one scale");
  double total = 0.0;
  for (const auto& s : r) total += 0.5 * mean_sq_minus(s.real, 1.0) + 0.5 * mean_sq_minus(s.fake, 0.0);
  return total;
}

double lsgan_g_loss_scale(const std::vector<double>& fake) { return mean_sq_minus(fake, 1.0); }

double lsgan_g_loss(const std::vector<std::vector<double>>& fake) {
  if (fake.empty()) throw std::invalid_argument("lsgan_g_loss: need at least one scale");
  double total = 0.0;
  for (const auto& s : fake) total += lsgan_g_loss_scale(s);
  return total;
}

double l1_loss(const RasterImage& y, const RasterImage& y_hat) {
  if (!y.same_size(y_hat)) throw std::invalid_argument("l1_loss: shape mismatch");
  double s = 0.0;
  const auto a = y.data();
  const auto b = y_hat.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double perceptual_loss(const FeatureStack& f) {
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& layer = f[i];
    if (layer.reference.size() != layer.candidate.size() || layer.reference.empty()) {
      throw std::invalid_argument("perceptual_loss: layer " + std::to_string(i) + " shape mismatch");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < layer.reference.size(); ++j) s += std::abs(layer.reference[j] - layer.candidate[j]);
    total += s / static_cast<double>(layer.reference.size());
  }
  return total;
}

double kl_color_loss(const ColorClusterStats& y_stats, const ColorClusterStats& y_hat_stats) {
  if (y_stats.k() != y_hat_stats.k()) {
    throw std::invalid_argument("kl_color_loss: cluster counts differ (" + std::to_string(y_stats.k()) + " vs " +
                                std::to_string(y_hat_stats.k()) + ")");
  }
  constexpr double n = 3.0;
  double total = 0.0;
  for (int i = 0; i < y_stats.k(); ++i) {
    const auto& cy = y_stats.clusters[static_cast<std::size_t>(i)];
    const auto& ch = y_hat_stats.clusters[static_cast<std::size_t>(i)];
    const Eigen::Matrix3d sy = to_eigen(cy.cov);
    const Eigen::Matrix3d sh = to_eigen(ch.cov);
    const Eigen::LLT<Eigen::Matrix3d> ly(sy);
    const Eigen::LLT<Eigen::Matrix3d> lh(sh);
    if (ly.info() != Eigen::Success || lh.info() != Eigen::Success) {
      throw std::invalid_argument("kl_color_loss: covariance of cluster " + std::to_string(i) +
                                  " is not positive definite");
    }
    const Eigen::Matrix3d Ly = ly.matrixL();
    const Eigen::Matrix3d Lh = lh.matrixL();
    const double logdet_y = 2.0 * Ly.diagonal().array().log().sum();
    const double logdet_h = 2.0 * Lh.diagonal().array().log().sum();
    const double trace = lh.solve(sy).trace();
    const Eigen::Vector3d d = to_eigen(ch.mean) - to_eigen(cy.mean);
    const double maha = d.dot(lh.solve(d));
    total += 0.5 * (logdet_h - logdet_y - n + trace + maha);
  }
  return total;
}

double total_generator_loss(const GeneratorLossParts& p, const LossWeights& w) {
  return w.adv * p.adv + w.l1 * p.l1 + w.perceptual * p.perceptual + w.kl * p.kl;
}

double shading_rec_loss(const RasterImage& image, const RasterImage& reflectance, const GrayImage& shading) {
  if (!image.same_size(reflectance) || !image.same_size(shading)) {
    throw std::invalid_argument("shading_rec_loss: size mismatch");
  }
  double s = 0.0;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c) s += std::abs(image.at(x, y, c) - shading.at(x, y) * reflectance.at(x, y, c));
  return s / static_cast<double>(image.data().size());
}

double shading_dense_loss(const GrayImage& shading) {
  double s = 0.0;
  for (double v : shading.data()) s += std::abs(v - 1.0);
  return s / static_cast<double>(shading.size());
}

double total_shading_loss(double rec, double dense, const LossWeights& w) { return w.rec * rec + w.dense * dense; }

double kl_color_metric(const RasterImage& reference, const RasterImage& candidate, const GrayImage& mask, int k,
                       std::uint64_t seed) {
  if (!reference.same_size(candidate)) throw std::invalid_argument("kl metric: reference and candidate differ in size");
  const ColorClusterStats ref = k > 0 ? kmeans_clusters(reference, mask, k, seed) : hierarchical_clusters(reference, mask);
  const ColorClusterStats cand = cluster_stats(candidate, ref.label_map, ref.k());
  return kl_color_loss(ref, cand);
}

}  // namespace garment
