#include "posefit/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace posefit {

CameraIntrinsics crop_intrinsics(const CameraIntrinsics& K,
                                 const PixelRect& rect) {
  K.validate();
  if (rect.empty()) throw InvalidArgumentError("empty crop rectangle");
  if (rect.x < 0 || rect.y < 0 || rect.x + rect.w > K.width ||
      rect.y + rect.h > K.height)
    throw InvalidArgumentError("crop rectangle outside image bounds");
  CameraIntrinsics out = K;
  out.cx = K.cx - rect.x;
  out.cy = K.cy - rect.y;
  out.width = rect.w;
  out.height = rect.h;
  return out;
}

PixelRect mask_bbox(const ImageD& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(y, x) > 0.5) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) throw DegenerateMaskError("mask has no foreground pixels");
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

PixelRect projected_bbox(const Pose& pose, const CameraIntrinsics& K,
                         const TriangleMesh& mesh) {
  const Mat3d R = pose.rotation();
  double u0 = 1e30, v0 = 1e30, u1 = -1e30, v1 = -1e30;
  bool any = false;
  for (const Vec3d& v : mesh.vertices) {
    const Vec3d p = R * v + pose.t();
    if (!(p.z > kZNear)) continue;
    const double u = K.fx * p.x / p.z + K.cx;
    const double w = K.fy * p.y / p.z + K.cy;
    u0 = std::min(u0, u);
    v0 = std::min(v0, w);
    u1 = std::max(u1, u);
    v1 = std::max(v1, w);
    any = true;
  }
  if (!any) throw BehindCameraError("entire mesh behind near plane");
  const int x0 = std::clamp(static_cast<int>(std::floor(u0)), 0, K.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(v0)), 0, K.height - 1);
  const int x1 = std::clamp(static_cast<int>(std::ceil(u1)), 0, K.width - 1);
  const int y1 = std::clamp(static_cast<int>(std::ceil(v1)), 0, K.height - 1);
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

PixelRect dilate_rect(const PixelRect& rect, double frac, int width,
                      int height) {
  const int dx = static_cast<int>(std::ceil(rect.w * frac * 0.5));
  const int dy = static_cast<int>(std::ceil(rect.h * frac * 0.5));
  const int x0 = std::max(0, rect.x - dx);
  const int y0 = std::max(0, rect.y - dy);
  const int x1 = std::min(width - 1, rect.x + rect.w - 1 + dx);
  const int y1 = std::min(height - 1, rect.y + rect.h - 1 + dy);
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

PixelRect union_rect(const PixelRect& a, const PixelRect& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const int x0 = std::min(a.x, b.x);
  const int y0 = std::min(a.y, b.y);
  const int x1 = std::max(a.x + a.w, b.x + b.w);
  const int y1 = std::max(a.y + a.h, b.y + b.h);
  return {x0, y0, x1 - x0, y1 - y0};
}

namespace {

// Screen-space data for one projected face, in scalar type S.
template <class S>
struct FaceData {
  V2<S> p[3];
  S iz[3];        // inverse camera depth per vertex
  V2<S> e[3];     // edge vectors p[(i+1)%3] - p[i]
  S inv_ee[3];    // 1 / |e|^2
  S inv_area2;    // 1 / signed twice-area (valid unless degenerate)
  bool degenerate = false;
  V3<S> col_iz[3];  // vertex color * iz (perspective-correct interpolation)
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // candidate pixel range, inclusive
};

// Closest point to `px` on the projected triangle, chosen by scalar value;
// returns the signed squared distance (positive inside) and the barycentric
// coordinates of the clamped closest point, both in S.
template <class S>
void signed_sq_distance(const FaceData<S>& f, const Vec2d& px, S& delta,
                        S (&bary)[3]) {
  // Branch decisions on plain values.
  double d2v[3], tv[3];
  for (int k = 0; k < 3; ++k) {
    const double ex = value_of(f.e[k].x), ey = value_of(f.e[k].y);
    const double ax = px.x - value_of(f.p[k].x);
    const double ay = px.y - value_of(f.p[k].y);
    double t = (ax * ex + ay * ey) * value_of(f.inv_ee[k]);
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    const double dx = ax - t * ex, dy = ay - t * ey;
    tv[k] = t;
    d2v[k] = dx * dx + dy * dy;
  }
  int k = 0;
  if (d2v[1] < d2v[k]) k = 1;
  if (d2v[2] < d2v[k]) k = 2;

  bool inside = false;
  if (!f.degenerate) {
    const double c0 = (value_of(f.e[0].x)) * (px.y - value_of(f.p[0].y)) -
                      (value_of(f.e[0].y)) * (px.x - value_of(f.p[0].x));
    const double c1 = (value_of(f.e[1].x)) * (px.y - value_of(f.p[1].y)) -
                      (value_of(f.e[1].y)) * (px.x - value_of(f.p[1].x));
    const double c2 = (value_of(f.e[2].x)) * (px.y - value_of(f.p[2].y)) -
                      (value_of(f.e[2].y)) * (px.x - value_of(f.p[2].x));
    inside = (c0 >= 0 && c1 >= 0 && c2 >= 0) || (c0 <= 0 && c1 <= 0 && c2 <= 0);
  }

  // Winning-edge distance in S.
  const S ax = px.x - f.p[k].x;
  const S ay = px.y - f.p[k].y;
  S t = (ax * f.e[k].x + ay * f.e[k].y) * f.inv_ee[k];
  t = clamp(t, 0.0, 1.0);
  const S dx = ax - t * f.e[k].x;
  const S dy = ay - t * f.e[k].y;
  const S d2 = dx * dx + dy * dy;

  if (inside) {
    delta = d2;
    // Barycentric coordinates of the pixel itself.
    const S w0 = ((f.p[1].x - px.x) * (f.p[2].y - px.y) -
                  (f.p[1].y - px.y) * (f.p[2].x - px.x)) *
                 f.inv_area2;
    const S w1 = ((f.p[2].x - px.x) * (f.p[0].y - px.y) -
                  (f.p[2].y - px.y) * (f.p[0].x - px.x)) *
                 f.inv_area2;
    bary[0] = w0;
    bary[1] = w1;
    bary[2] = 1.0 - w0 - w1;
  } else {
    delta = -d2;
    bary[0] = S(0.0);
    bary[1] = S(0.0);
    bary[2] = S(0.0);
    bary[k] = 1.0 - t;
    bary[(k + 1) % 3] = t;
  }
}

template <class S>
std::vector<FaceData<S>> project_faces(const std::array<S, 7>& params,
                                       const CameraIntrinsics& K,
                                       const TriangleMesh& mesh,
                                       double dilate_px, int width,
                                       int height) {
  const M3<S> R = quat_to_rotmat_t<S>(params[0], params[1], params[2],
                                      params[3]);
  const V3<S> t{params[4], params[5], params[6]};

  const int nv = static_cast<int>(mesh.vertices.size());
  std::vector<V2<S>> screen(nv);
  std::vector<S> iz(nv);
  std::vector<char> ok(nv, 0);
  double max_z = -1e30;
  for (int i = 0; i < nv; ++i) {
    const V3<S> c = R * mesh.vertices[i] + t;
    max_z = std::max(max_z, value_of(c.z));
    if (value_of(c.z) <= kZNear) continue;
    ok[i] = 1;
    iz[i] = 1.0 / c.z;
    screen[i] = {K.fx * c.x * iz[i] + K.cx, K.fy * c.y * iz[i] + K.cy};
  }
  if (max_z <= kZNear)
    throw BehindCameraError("entire mesh behind near plane");

  std::vector<FaceData<S>> faces;
  faces.reserve(mesh.faces.size());
  bool any_pixels = false;
  for (const auto& tri : mesh.faces) {
    if (!ok[tri[0]] || !ok[tri[1]] || !ok[tri[2]]) continue;
    FaceData<S> f;
    for (int k = 0; k < 3; ++k) {
      f.p[k] = screen[tri[k]];
      f.iz[k] = iz[tri[k]];
      f.col_iz[k] = mesh.colors[tri[k]] * f.iz[k];
    }
    for (int k = 0; k < 3; ++k) {
      f.e[k] = f.p[(k + 1) % 3] - f.p[k];
      const S ee = f.e[k].x * f.e[k].x + f.e[k].y * f.e[k].y;
      f.inv_ee[k] = value_of(ee) > 1e-24 ? 1.0 / ee : S(0.0);
    }
    const S area2 = cross(f.e[0], f.p[2] - f.p[0]);
    f.degenerate = std::abs(value_of(area2)) < 1e-12;
    f.inv_area2 = f.degenerate ? S(0.0) : 1.0 / area2;

    double u0 = 1e30, v0 = 1e30, u1 = -1e30, v1 = -1e30;
    for (int k = 0; k < 3; ++k) {
      u0 = std::min(u0, value_of(f.p[k].x));
      v0 = std::min(v0, value_of(f.p[k].y));
      u1 = std::max(u1, value_of(f.p[k].x));
      v1 = std::max(v1, value_of(f.p[k].y));
    }
    f.x0 = std::max(0, static_cast<int>(std::ceil(u0 - dilate_px)));
    f.x1 = std::min(width - 1, static_cast<int>(std::floor(u1 + dilate_px)));
    f.y0 = std::max(0, static_cast<int>(std::ceil(v0 - dilate_px)));
    f.y1 = std::min(height - 1, static_cast<int>(std::floor(v1 + dilate_px)));
    if (f.x0 <= f.x1 && f.y0 <= f.y1) any_pixels = true;
    faces.push_back(std::move(f));
  }
  if (faces.empty() || !any_pixels)
    throw DegenerateRenderError("mesh projects outside the image");
  return faces;
}

template <class S>
Triplet<S> render_impl(const std::array<S, 7>& params,
                       const CameraIntrinsics& K_in, const TriangleMesh& mesh,
                       const RenderConfig& cfg) {
  cfg.validate();
  mesh.validate();
  const CameraIntrinsics K =
      cfg.crop ? crop_intrinsics(K_in, *cfg.crop) : K_in;
  K.validate();
  const int W = K.width, H = K.height;
  const double diag2 = static_cast<double>(W) * W + static_cast<double>(H) * H;
  const double sigma_px = cfg.sigma * diag2;
  const double inv_sigma = 1.0 / sigma_px;
  const double inv_gamma = 1.0 / cfg.gamma;
  // Pixels beyond the coverage tail contribute < sigmoid(-16) ~ 1e-7.
  const double dilate_px = 4.0 * std::sqrt(sigma_px) + 0.5;

  auto faces = project_faces<S>(params, K, mesh, dilate_px, W, H);
  const int nf = static_cast<int>(faces.size());

  // Candidate lists in CSR form, face indices ascending per pixel.
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(W) * H + 1, 0);
  for (const auto& f : faces)
    for (int y = f.y0; y <= f.y1; ++y)
      for (int x = f.x0; x <= f.x1; ++x)
        ++counts[static_cast<std::size_t>(y) * W + x + 1];
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  std::vector<std::uint32_t> cand(counts.back());
  {
    std::vector<std::uint32_t> cursor(counts.begin(), counts.end() - 1);
    for (int fi = 0; fi < nf; ++fi) {
      const auto& f = faces[fi];
      for (int y = f.y0; y <= f.y1; ++y)
        for (int x = f.x0; x <= f.x1; ++x)
          cand[cursor[static_cast<std::size_t>(y) * W + x]++] = fi;
    }
  }

  Triplet<S> out;
  out.color = Image<S>(H, W, 3, S(0.0));
  out.depth = Image<S>(H, W, 1, S(cfg.background_depth));
  out.silhouette = Image<S>(H, W, 1, S(0.0));

  struct Contrib {
    S s;       // log D - zbar / gamma
    S zbar;
    V3<S> color;
  };
  std::vector<Contrib> scratch;
  scratch.reserve(64);

  const double s_bg = -cfg.background_depth * inv_gamma;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t pi = static_cast<std::size_t>(y) * W + x;
      const std::uint32_t begin = counts[pi], end = counts[pi + 1];
      if (begin == end) continue;
      const Vec2d px{static_cast<double>(x), static_cast<double>(y)};

      scratch.clear();
      S log_one_minus = S(0.0);
      double smax = s_bg;
      for (std::uint32_t ci = begin; ci < end; ++ci) {
        const FaceData<S>& f = faces[cand[ci]];
        S delta;
        S bary[3];
        signed_sq_distance(f, px, delta, bary);
        const S a = delta * inv_sigma;
        log_one_minus += log_sigmoid(-a);
        const S iz_interp =
            bary[0] * f.iz[0] + bary[1] * f.iz[1] + bary[2] * f.iz[2];
        const S zbar = 1.0 / iz_interp;
        V3<S> col{bary[0] * f.col_iz[0].x + bary[1] * f.col_iz[1].x +
                      bary[2] * f.col_iz[2].x,
                  bary[0] * f.col_iz[0].y + bary[1] * f.col_iz[1].y +
                      bary[2] * f.col_iz[2].y,
                  bary[0] * f.col_iz[0].z + bary[1] * f.col_iz[1].z +
                      bary[2] * f.col_iz[2].z};
        col = col * zbar;
        Contrib c;
        c.s = log_sigmoid(a) - zbar * inv_gamma;
        c.zbar = zbar;
        c.color = col;
        smax = std::max(smax, value_of(c.s));
        scratch.push_back(std::move(c));
      }

      // Softmax over faces plus the background term; subtracting the max
      // value leaves the function (and its gradient) unchanged.
      S denom = S(std::exp(s_bg - smax));
      S num_d = denom * cfg.background_depth;
      V3<S> num_c{S(0.0), S(0.0), S(0.0)};
      for (const Contrib& c : scratch) {
        const S w = exp(c.s - smax);
        denom += w;
        num_d += w * c.zbar;
        num_c = num_c + c.color * w;
      }
      const S inv_denom = 1.0 / denom;
      const S sil = -expm1(log_one_minus);
      out.silhouette(y, x) = sil;
      out.depth(y, x) = num_d * inv_denom;
      // Composite against the silhouette so background pixels render black.
      out.color(y, x, 0) = clamp(sil * num_c.x * inv_denom, 0.0, 1.0);
      out.color(y, x, 1) = clamp(sil * num_c.y * inv_denom, 0.0, 1.0);
      out.color(y, x, 2) = clamp(sil * num_c.z * inv_denom, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace

TripletD render(const Pose& pose, const CameraIntrinsics& K,
                const TriangleMesh& mesh, const RenderConfig& cfg) {
  return render_impl<double>(pose.params(), K, mesh, cfg);
}

TripletJ render_with_grad(const Pose& pose, const CameraIntrinsics& K,
                          const TriangleMesh& mesh, const RenderConfig& cfg) {
  const std::array<double, 7> v = pose.params();
  std::array<Jet, 7> params;
  for (int i = 0; i < 7; ++i) params[i] = Jet(v[i], i);
  return render_impl<Jet>(params, K, mesh, cfg);
}

TripletD rasterize_hard(const Pose& pose, const CameraIntrinsics& K_in,
                        const TriangleMesh& mesh,
                        const std::optional<PixelRect>& crop) {
  mesh.validate();
  const CameraIntrinsics K = crop ? crop_intrinsics(K_in, *crop) : K_in;
  K.validate();
  const int W = K.width, H = K.height;
  auto faces = project_faces<double>(pose.params(), K, mesh, 0.0, W, H);

  TripletD out;
  out.color = ImageD(H, W, 3, 0.0);
  out.depth = ImageD(H, W, 1, 0.0);
  out.silhouette = ImageD(H, W, 1, 0.0);
  std::size_t covered = 0;

  for (const auto& f : faces) {
    if (f.degenerate) continue;
    for (int y = f.y0; y <= f.y1; ++y) {
      for (int x = f.x0; x <= f.x1; ++x) {
        const double c0 = f.e[0].x * (y - f.p[0].y) - f.e[0].y * (x - f.p[0].x);
        const double c1 = f.e[1].x * (y - f.p[1].y) - f.e[1].y * (x - f.p[1].x);
        const double c2 = f.e[2].x * (y - f.p[2].y) - f.e[2].y * (x - f.p[2].x);
        const bool inside =
            (c0 >= 0 && c1 >= 0 && c2 >= 0) || (c0 <= 0 && c1 <= 0 && c2 <= 0);
        if (!inside) continue;
        const double w0 = ((f.p[1].x - x) * (f.p[2].y - y) -
                           (f.p[1].y - y) * (f.p[2].x - x)) *
                          f.inv_area2;
        const double w1 = ((f.p[2].x - x) * (f.p[0].y - y) -
                           (f.p[2].y - y) * (f.p[0].x - x)) *
                          f.inv_area2;
        const double w2 = 1.0 - w0 - w1;
        const double iz = w0 * f.iz[0] + w1 * f.iz[1] + w2 * f.iz[2];
        const double z = 1.0 / iz;
        double& zbuf = out.depth(y, x);
        if (zbuf != 0.0 && zbuf <= z) continue;
        if (zbuf == 0.0) ++covered;
        zbuf = z;
        out.silhouette(y, x) = 1.0;
        out.color(y, x, 0) = posefit::clamp(
            (w0 * f.col_iz[0].x + w1 * f.col_iz[1].x + w2 * f.col_iz[2].x) * z,
            0.0, 1.0);
        out.color(y, x, 1) = posefit::clamp(
            (w0 * f.col_iz[0].y + w1 * f.col_iz[1].y + w2 * f.col_iz[2].y) * z,
            0.0, 1.0);
        out.color(y, x, 2) = posefit::clamp(
            (w0 * f.col_iz[0].z + w1 * f.col_iz[1].z + w2 * f.col_iz[2].z) * z,
            0.0, 1.0);
      }
    }
  }
  if (covered == 0)
    throw DegenerateRenderError("no pixel covered by the projected mesh");
  return out;
}

}  // namespace posefit
