#include "posefit/losses.hpp"

#include <cmath>
#include <iostream>

#include "posefit/color.hpp"

namespace posefit {

namespace {

std::array<double, 7> grad_of(double) { return {}; }
std::array<double, 7> grad_of(const Jet& j) { return j.g; }

void check_same_dims(const ImageD& a, int h, int w, const char* what) {
  if (a.height() != h || a.width() != w)
    throw InvalidArgumentError(std::string(what) + ": dimension mismatch");
}

std::pair<int, int> mask_counts(const ImageD& mask) {
  int pos = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask.data()[i] > 0.5) ++pos;
  return {pos, static_cast<int>(mask.size()) - pos};
}

ImageD masked_rgb(const ImageD& rgb, const ImageD& mask) {
  ImageD out(rgb.height(), rgb.width(), 3);
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x) {
      const double m = mask(y, x) > 0.5 ? 1.0 : 0.0;
      for (int c = 0; c < 3; ++c) out(y, x, c) = rgb(y, x, c) * m;
    }
  return out;
}

// ---------------------------------------------------------------------------
// mask

template <class S>
S mask_loss_t(const ImageD& mask_obs, const Image<S>& sil, int n_pos,
              int n_neg) {
  if (sil.height() != mask_obs.height() || sil.width() != mask_obs.width() ||
      sil.channels() != 1)
    throw InvalidArgumentError("mask_loss: dimension mismatch");
  if (n_pos == 0 || n_neg == 0)
    throw DegenerateMaskError("mask has no foreground or no background");
  S pos_sum(0.0), neg_sum(0.0);
  for (int y = 0; y < sil.height(); ++y)
    for (int x = 0; x < sil.width(); ++x) {
      const S m = clamp(sil(y, x), kLogEps, 1.0 - kLogEps);
      if (mask_obs(y, x) > 0.5)
        pos_sum += log(m);
      else
        neg_sum += log(1.0 - m);
    }
  return -(pos_sum * (1.0 / n_pos)) - (neg_sum * (1.0 / n_neg));
}

// ---------------------------------------------------------------------------
// chroma

template <class S>
S ab_loss_t(const ImageD& obs_ab, const Image<S>& rgb_rendered, int n_pos) {
  if (n_pos == 0) throw DegenerateMaskError("mask has no foreground");
  if (obs_ab.height() != rgb_rendered.height() ||
      obs_ab.width() != rgb_rendered.width())
    throw InvalidArgumentError("ab_loss: dimension mismatch");
  const Image<S> rab = rgb_to_ab(rgb_rendered);
  S sum(0.0);
  for (int y = 0; y < rab.height(); ++y)
    for (int x = 0; x < rab.width(); ++x)
      sum += abs(obs_ab(y, x, 0) - rab(y, x, 0)) +
             abs(obs_ab(y, x, 1) - rab(y, x, 1));
  return sum * (1.0 / n_pos);
}

// ---------------------------------------------------------------------------
// ms-ssim

std::array<double, kSsimWindow> gauss_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - (kSsimWindow - 1) / 2.0;
    k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian filter, valid region only (output shrinks by window-1).
template <class S>
Image<S> gauss_valid(const Image<S>& img) {
  static const std::array<double, kSsimWindow> k = gauss_kernel();
  const int h = img.height(), w = img.width(), c = img.channels();
  const int ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  if (ow <= 0 || oh <= 0)
    throw InvalidArgumentError("image smaller than ssim window");
  Image<S> tmp(h, ow, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x)
      for (int ch = 0; ch < c; ++ch) {
        S acc(0.0);
        for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * img(y, x + i, ch);
        tmp(y, x, ch) = acc;
      }
  Image<S> out(oh, ow, c);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int ch = 0; ch < c; ++ch) {
        S acc(0.0);
        for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * tmp(y + i, x, ch);
        out(y, x, ch) = acc;
      }
  return out;
}

template <class S>
Image<S> mul_images(const ImageD& a, const Image<S>& b) {
  Image<S> out(b.height(), b.width(), b.channels());
  for (std::size_t i = 0; i < b.size(); ++i)
    out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

template <class S>
Image<S> square_image(const Image<S>& a) {
  Image<S> out(a.height(), a.width(), a.channels());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.data()[i] = a.data()[i] * a.data()[i];
  return out;
}

struct MsssimObs {
  std::vector<ImageD> x, mux, sigx2;
  int scales = 0;
};

MsssimObs msssim_prepare(const ImageD& obs_masked, int requested) {
  MsssimObs obs;
  obs.scales =
      ms_ssim_effective_scales(obs_masked.height(), obs_masked.width(),
                               requested);
  ImageD level = obs_masked;
  for (int s = 0; s < obs.scales; ++s) {
    if (s > 0) level = avg_pool2(level);
    ImageD mu = gauss_valid(level);
    ImageD ex2 = gauss_valid(square_image(level));
    ImageD sig(mu.height(), mu.width(), mu.channels());
    for (std::size_t i = 0; i < mu.size(); ++i)
      sig.data()[i] = ex2.data()[i] - mu.data()[i] * mu.data()[i];
    obs.x.push_back(level);
    obs.mux.push_back(std::move(mu));
    obs.sigx2.push_back(std::move(sig));
  }
  return obs;
}

// `Obs` is any holder with members x, mux, sigx2 (pyramids) and scales.
template <class S, class Obs>
S ms_ssim_loss_from(const Obs& obs, const Image<S>& rgb_rendered) {
  if (rgb_rendered.height() != obs.x[0].height() ||
      rgb_rendered.width() != obs.x[0].width())
    throw InvalidArgumentError("ms_ssim_loss: dimension mismatch");
  Image<S> y = rgb_rendered;
  S cs_prod(1.0);
  S lum_mean(0.0);
  for (int s = 0; s < obs.scales; ++s) {
    if (s > 0) y = avg_pool2(y);
    const ImageD& x = obs.x[s];
    const ImageD& mux = obs.mux[s];
    const ImageD& sigx2 = obs.sigx2[s];
    const Image<S> muy = gauss_valid(y);
    const Image<S> ey2 = gauss_valid(square_image(y));
    const Image<S> exy = gauss_valid(mul_images(x, y));
    S cs_sum(0.0);
    S l_sum(0.0);
    const std::size_t n = muy.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double mx = mux.data()[i];
      const S& my = muy.data()[i];
      const S sigy2 = ey2.data()[i] - my * my;
      const S sigxy = exy.data()[i] - mx * my;
      cs_sum += (2.0 * sigxy + kSsimC2) /
                (sigx2.data()[i] + sigy2 + kSsimC2);
      if (s == obs.scales - 1)
        l_sum += (2.0 * mx * my + kSsimC1) / (mx * mx + my * my + kSsimC1);
    }
    cs_prod *= cs_sum * (1.0 / static_cast<double>(n));
    if (s == obs.scales - 1) lum_mean = l_sum * (1.0 / static_cast<double>(n));
  }
  return 1.0 - lum_mean * cs_prod;
}

// ---------------------------------------------------------------------------
// perceptual

template <class S>
void normalize_channels(const Image<S>& feat, int y, int x, S* out) {
  const int c = feat.channels();
  S n2(0.0);
  for (int ch = 0; ch < c; ++ch) {
    const S& v = feat(y, x, ch);
    n2 += v * v;
  }
  if (value_of(n2) < 1e-24) {
    for (int ch = 0; ch < c; ++ch) out[ch] = S(0.0);
    return;
  }
  const S inv = 1.0 / sqrt(n2);
  for (int ch = 0; ch < c; ++ch) out[ch] = feat(y, x, ch) * inv;
}

template <class S>
S perceptual_from_feats(const std::vector<ImageD>& obs_feats,
                        const std::vector<Image<S>>& rend_feats) {
  if (obs_feats.size() != rend_feats.size())
    throw ConfigurationError("feature level count mismatch");
  S total(0.0);
  std::vector<double> ou;
  std::vector<S> ru;
  for (std::size_t l = 0; l < obs_feats.size(); ++l) {
    const ImageD& fo = obs_feats[l];
    const Image<S>& fr = rend_feats[l];
    if (fo.height() != fr.height() || fo.width() != fr.width() ||
        fo.channels() != fr.channels())
      throw InvalidArgumentError("perceptual_loss: feature shape mismatch");
    const int c = fo.channels();
    ou.resize(c);
    ru.resize(c);
    S level_sum(0.0);
    for (int y = 0; y < fo.height(); ++y)
      for (int x = 0; x < fo.width(); ++x) {
        normalize_channels(fo, y, x, ou.data());
        normalize_channels(fr, y, x, ru.data());
        for (int ch = 0; ch < c; ++ch) {
          const S d = ou[ch] - ru[ch];
          level_sum += d * d;
        }
      }
    total += level_sum *
             (1.0 / (static_cast<double>(fo.height()) * fo.width()));
  }
  return total;
}

// ---------------------------------------------------------------------------
// chamfer / geometric

template <class S>
std::vector<V3<S>> backproject_t(const Image<S>& depth, const Image<S>& mask,
                                 const CameraIntrinsics& K,
                                 double threshold) {
  std::vector<V3<S>> out;
  const double ifx = 1.0 / K.fx, ify = 1.0 / K.fy;
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x) {
      if (value_of(mask(y, x)) > threshold && value_of(depth(y, x)) > 0.0) {
        const S& d = depth(y, x);
        out.push_back({(x - K.cx) * ifx * d, (y - K.cy) * ify * d, d});
      }
    }
  return out;
}

template <class S>
std::vector<V3<S>> subsample_points(std::vector<V3<S>> pts, int cap) {
  const std::size_t n = pts.size();
  if (n <= static_cast<std::size_t>(cap)) return pts;
  std::vector<V3<S>> out;
  out.reserve(cap);
  for (int i = 0; i < cap; ++i)
    out.push_back(
        pts[static_cast<std::size_t>(static_cast<double>(i) * n / cap)]);
  return out;
}

// Chamfer whose second cloud may carry gradients. Nearest neighbors are
// found on scalar values; the distance to the winning point is then
// evaluated in S.
template <class S>
S chamfer_t(const PointCloud& sensed, const NnGrid& sensed_grid,
            const std::vector<V3<S>>& rendered) {
  if (sensed.empty() || rendered.empty())
    throw DegenerateGeometryError("chamfer on empty cloud");
  PointCloud rvals;
  rvals.reserve(rendered.size());
  for (const auto& p : rendered)
    rvals.push_back({value_of(p.x), value_of(p.y), value_of(p.z)});
  const NnGrid rgrid(rvals);

  S to_rendered(0.0);
  for (const Vec3d& p : sensed) {
    const int idx = rgrid.nearest(p).first;
    const V3<S> d{rendered[idx].x - p.x, rendered[idx].y - p.y,
                  rendered[idx].z - p.z};
    to_rendered += norm(d);
  }
  S to_sensed(0.0);
  for (const auto& q : rendered) {
    const int idx =
        sensed_grid.nearest({value_of(q.x), value_of(q.y), value_of(q.z)})
            .first;
    const V3<S> d{q.x - sensed[idx].x, q.y - sensed[idx].y,
                  q.z - sensed[idx].z};
    to_sensed += norm(d);
  }
  return to_rendered * (1.0 / static_cast<double>(sensed.size())) +
         to_sensed * (1.0 / static_cast<double>(rendered.size()));
}

template <class S>
S geom_loss_t(const Frame& frame, const Triplet<S>& triplet,
              const CameraIntrinsics& K, const PointCloud* cached_cloud,
              const NnGrid* cached_grid) {
  PointCloud obs_local;
  std::unique_ptr<NnGrid> grid_local;
  const PointCloud* obs = cached_cloud;
  const NnGrid* grid = cached_grid;
  if (!obs || !grid) {
    if (mask_counts(frame.mask).first == 0)
      throw DegenerateMaskError("observed mask empty");
    obs_local = subsample_cloud(backproject(frame.depth, frame.mask, K));
    if (obs_local.empty())
      throw DegenerateGeometryError("observed cloud empty");
    grid_local = std::make_unique<NnGrid>(obs_local);
    obs = &obs_local;
    grid = grid_local.get();
  }
  auto rend = subsample_points(
      backproject_t(triplet.depth, triplet.silhouette, K, 0.5), kChamferCap);
  if (rend.empty())
    throw DegenerateGeometryError("rendered cloud empty");
  return chamfer_t(*obs, *grid, rend);
}

}  // namespace

// ---------------------------------------------------------------------------
// public API

PointCloud subsample_cloud(const PointCloud& cloud, int cap) {
  PointCloud out = cloud;
  return subsample_points(std::move(out), cap);
}

int ms_ssim_effective_scales(int height, int width, int requested) {
  const int m = std::min(height, width);
  if (m < kSsimWindow)
    throw InvalidArgumentError("image smaller than ssim window");
  int s = 1;
  while (s < requested && kSsimWindow * (1 << s) <= m) ++s;
  if (s < requested)
    std::cerr << "posefit: ms-ssim scales reduced to " << s << " for "
              << width << "x" << height << " image\n";
  return s;
}

double mask_loss(const ImageD& mask_obs, const ImageD& sil) {
  const auto [pos, neg] = mask_counts(mask_obs);
  return mask_loss_t(mask_obs, sil, pos, neg);
}
LossValue mask_loss(const ImageD& mask_obs, const ImageJ& sil) {
  const auto [pos, neg] = mask_counts(mask_obs);
  const Jet r = mask_loss_t(mask_obs, sil, pos, neg);
  return {r.v, r.g};
}

double ab_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
               const ImageD& rgb_rendered) {
  check_same_dims(mask_obs, rgb_obs.height(), rgb_obs.width(), "ab_loss");
  const ImageD obs_ab = rgb_to_ab(masked_rgb(rgb_obs, mask_obs));
  return ab_loss_t(obs_ab, rgb_rendered, mask_counts(mask_obs).first);
}
LossValue ab_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                  const ImageJ& rgb_rendered) {
  check_same_dims(mask_obs, rgb_obs.height(), rgb_obs.width(), "ab_loss");
  const ImageD obs_ab = rgb_to_ab(masked_rgb(rgb_obs, mask_obs));
  const Jet r =
      ab_loss_t(obs_ab, rgb_rendered, mask_counts(mask_obs).first);
  return {r.v, r.g};
}

double ms_ssim_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                    const ImageD& rgb_rendered, int* scales_used) {
  check_same_dims(mask_obs, rgb_obs.height(), rgb_obs.width(), "ms_ssim");
  const MsssimObs obs =
      msssim_prepare(masked_rgb(rgb_obs, mask_obs), kMsssimScales);
  if (scales_used) *scales_used = obs.scales;
  return ms_ssim_loss_from(obs, rgb_rendered);
}
LossValue ms_ssim_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                       const ImageJ& rgb_rendered, int* scales_used) {
  check_same_dims(mask_obs, rgb_obs.height(), rgb_obs.width(), "ms_ssim");
  const MsssimObs obs =
      msssim_prepare(masked_rgb(rgb_obs, mask_obs), kMsssimScales);
  if (scales_used) *scales_used = obs.scales;
  const Jet r = ms_ssim_loss_from(obs, rgb_rendered);
  return {r.v, r.g};
}

double perceptual_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                       const ImageD& rgb_rendered,
                       const FeatureExtractor& fx) {
  if (fx.levels() != kPerceptualLevels)
    throw ConfigurationError("feature extractor must produce 5 levels");
  const auto obs = fx.extract(masked_rgb(rgb_obs, mask_obs));
  return perceptual_from_feats(obs, fx.extract(rgb_rendered));
}
LossValue perceptual_loss(const ImageD& rgb_obs, const ImageD& mask_obs,
                          const ImageJ& rgb_rendered,
                          const FeatureExtractor& fx) {
  if (fx.levels() != kPerceptualLevels)
    throw ConfigurationError("feature extractor must produce 5 levels");
  const auto obs = fx.extract(masked_rgb(rgb_obs, mask_obs));
  const Jet r = perceptual_from_feats(obs, fx.extract(rgb_rendered));
  return {r.v, r.g};
}

double chamfer_loss(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty())
    throw DegenerateGeometryError("chamfer on empty cloud");
  const PointCloud sa = subsample_cloud(a);
  const PointCloud sb = subsample_cloud(b);
  const NnGrid grid_a(sa);
  std::vector<V3<double>> bs(sb.begin(), sb.end());
  return chamfer_t<double>(sa, grid_a, bs);
}

double geom_loss(const Frame& frame, const TripletD& triplet,
                 const CameraIntrinsics& K) {
  return geom_loss_t(frame, triplet, K, nullptr, nullptr);
}
LossValue geom_loss(const Frame& frame, const TripletJ& triplet,
                    const CameraIntrinsics& K) {
  const Jet r = geom_loss_t(frame, triplet, K, nullptr, nullptr);
  return {r.v, r.g};
}

double point_matching_loss(const Pose& pose, const Pose& pose_gt,
                           const TriangleMesh& mesh) {
  mesh.validate();
  const Mat3d R = pose.rotation(), Rg = pose_gt.rotation();
  double sum = 0;
  for (const Vec3d& v : mesh.vertices) {
    const Vec3d a = R * v + pose.t();
    const Vec3d b = Rg * v + pose_gt.t();
    sum += std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z);
  }
  return sum / static_cast<double>(mesh.vertices.size());
}

// ---------------------------------------------------------------------------
// LossContext

LossContext::LossContext(const Frame& frame, const FeatureExtractor& fx,
                         const LossToggles& toggles)
    : frame_(frame), fx_(&fx) {
  frame_.validate();
  if (fx.levels() != kPerceptualLevels)
    throw ConfigurationError("feature extractor must produce 5 levels");
  const auto [pos, neg] = mask_counts(frame_.mask);
  n_pos_ = pos;
  n_neg_ = neg;
  if (n_pos_ == 0) throw DegenerateMaskError("observed mask empty");
  masked_rgb_ = masked_rgb(frame_.rgb, frame_.mask);
  obs_ab_ = rgb_to_ab(masked_rgb_);
  obs_feats_ = fx.extract(masked_rgb_);
  const MsssimObs stats = msssim_prepare(masked_rgb_, kMsssimScales);
  msssim_.x = stats.x;
  msssim_.mux = stats.mux;
  msssim_.sigx2 = stats.sigx2;
  msssim_.scales = stats.scales;
  if (toggles.geom) {
    obs_cloud_ = subsample_cloud(backproject(frame_.depth, frame_.mask,
                                             frame_.K));
    if (!obs_cloud_.empty())
      obs_grid_ = std::make_unique<NnGrid>(obs_cloud_);
  }
}

template <class S>
LossBreakdown LossContext::total_t(const Triplet<S>& triplet,
                                   const LossWeights& weights,
                                   const LossToggles& toggles) const {
  weights.validate();
  if (!toggles.any())
    throw InvalidArgumentError("all loss terms disabled");
  if (triplet.height() != frame_.rgb.height() ||
      triplet.width() != frame_.rgb.width())
    throw InvalidArgumentError("triplet does not match frame dimensions");

  S mask_v(0.0), ab_v(0.0), ms_v(0.0), perc_v(0.0), geom_v(0.0);
  if (toggles.mask)
    mask_v = mask_loss_t(frame_.mask, triplet.silhouette, n_pos_, n_neg_);
  if (toggles.ab) ab_v = ab_loss_t(obs_ab_, triplet.color, n_pos_);
  if (toggles.ms_ssim) ms_v = ms_ssim_loss_from(msssim_, triplet.color);
  if (toggles.perceptual)
    perc_v = perceptual_from_feats(obs_feats_, fx_->extract(triplet.color));
  if (toggles.geom) {
    if (obs_cloud_.empty())
      throw DegenerateGeometryError("observed cloud empty");
    geom_v = geom_loss_t(frame_, triplet, frame_.K, &obs_cloud_,
                         obs_grid_.get());
  }

  const S visual = mask_v + weights.alpha * ab_v + weights.beta * ms_v +
                   weights.gamma * perc_v;
  const S total = visual + weights.eta * geom_v;

  LossBreakdown out;
  out.mask = value_of(mask_v);
  out.ab = value_of(ab_v);
  out.ms_ssim = value_of(ms_v);
  out.perceptual = value_of(perc_v);
  out.visual = value_of(visual);
  out.geom = value_of(geom_v);
  out.total = value_of(total);
  out.grad_total = grad_of(total);
  out.ms_ssim_scales = toggles.ms_ssim ? msssim_.scales : 0;
  return out;
}

LossBreakdown LossContext::total(const TripletD& triplet,
                                 const LossWeights& weights,
                                 const LossToggles& toggles) const {
  return total_t(triplet, weights, toggles);
}
LossBreakdown LossContext::total(const TripletJ& triplet,
                                 const LossWeights& weights,
                                 const LossToggles& toggles) const {
  return total_t(triplet, weights, toggles);
}

LossBreakdown total_self_loss(const Frame& frame, const TripletD& triplet,
                              const LossWeights& weights,
                              const FeatureExtractor& fx,
                              const LossToggles& toggles) {
  return LossContext(frame, fx, toggles).total(triplet, weights, toggles);
}
LossBreakdown total_self_loss(const Frame& frame, const TripletJ& triplet,
                              const LossWeights& weights,
                              const FeatureExtractor& fx,
                              const LossToggles& toggles) {
  return LossContext(frame, fx, toggles).total(triplet, weights, toggles);
}

}  // namespace posefit
