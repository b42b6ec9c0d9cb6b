#pragma once

#include <vector>

#include "garment/palette.hpp"
#include "garment/raster.hpp"

namespace garment {

struct LossWeights {
  double adv = 1.0;
  double l1 = 10.0;
  double perceptual = 10.0;
  double kl = 0.01;
  double rec = 100.0;
  double dense = 1.0;
};

/// One discriminator scale: patch outputs on a real and on a generated pair.
struct ScaleResponse {
  std::vector<double> real;
  std::vector<double> fake;
};

using DiscriminatorResponses = std::vector<ScaleResponse>;

/// One feature layer evaluated on the reference and on the candidate image.
struct FeatureLayer {
  std::vector<double> reference;
  std::vector<double> candidate;
};

using FeatureStack = std::vector<FeatureLayer>;

struct GeneratorLossParts {
  double adv = 0.0;
  double l1 = 0.0;
  double perceptual = 0.0;
  double kl = 0.0;
};

/// sum_s 0.5 * mean((real_s - 1)^2) + 0.5 * mean(fake_s^2)
double lsgan_d_loss(const DiscriminatorResponses& r);
/// sum_s mean((fake_s - 1)^2) over every scale.
double lsgan_g_loss(const std::vector<std::vector<double>>& fake);
/// mean((fake - 1)^2) on one scale.
double lsgan_g_loss_scale(const std::vector<double>& fake);
double l1_loss(const RasterImage& y, const RasterImage& y_hat);
/// sum_i (1/M_i) * ||ref_i - cand_i||_1
double perceptual_loss(const FeatureStack& f);
/// Sum over matched clusters of the Gaussian KL divergence KL(y || y_hat) in 3-D.
double kl_color_loss(const ColorClusterStats& y_stats, const ColorClusterStats& y_hat_stats);
double total_generator_loss(const GeneratorLossParts& parts, const LossWeights& w);
/// mean |I - S * R|
double shading_rec_loss(const RasterImage& image, const RasterImage& reflectance, const GrayImage& shading);
/// mean |S - 1|
double shading_dense_loss(const GrayImage& shading);
double total_shading_loss(double rec, double dense, const LossWeights& w);

/// Clusters the reference, then measures the candidate over the same labels so clusters
/// are matched by construction.
double kl_color_metric(const RasterImage& reference, const RasterImage& candidate, const GrayImage& mask, int k = 0,
                       std::uint64_t seed = 0);

}  // namespace garment
