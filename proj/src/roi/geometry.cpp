#include "alebk/roi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alebk::roi {

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

LandmarkSet LandmarkSet::from_points(std::span<const Point> points, std::size_t width, std::size_t height) {
  if (points.size() != kLandmarkCount) {
    throw std::invalid_argument("landmarks: expected 68 points, got " + std::to_string(points.size()));
  }
  if (width == 0 || height == 0) throw std::invalid_argument("landmarks: image dimensions must be positive");
  LandmarkSet set;
  set.width = width;
  set.height = height;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    set.points[i] = {std::clamp(points[i].x, 0.0, static_cast<double>(width - 1)),
                     std::clamp(points[i].y, 0.0, static_cast<double>(height - 1))};
  }
  return set;
}

namespace {

Point mean_of(const LandmarkSet& lm, std::size_t first) {
  Point c;
  for (std::size_t i = first; i < first + kEyePoints; ++i) {
    c.x += lm.points[i].x;
    c.y += lm.points[i].y;
  }
  c.x /= static_cast<double>(kEyePoints);
  c.y /= static_cast<double>(kEyePoints);
  return c;
}

Tensor as_three_channels(const Tensor& image) {
  if (image.rank() != 3) throw ShapeError("image must be H x W x C, got " + shape_string(image.shape()));
  if (image.dim(2) == 3) return image;
  if (image.dim(2) != 1) throw ShapeError("image must have 1 or 3 channels, got " + shape_string(image.shape()));
  Tensor out({image.dim(0), image.dim(1), 3});
  for (std::size_t i = 0; i < image.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) out[i * 3 + c] = image[i];
  }
  return out;
}

}  // namespace

EyeCenters eye_centers(const LandmarkSet& landmarks) {
  return {mean_of(landmarks, kLeftEyeBegin), mean_of(landmarks, kRightEyeBegin)};
}

Point rotate_point(Point p, Point center, double angle) noexcept {
  const double c = std::cos(angle), s = std::sin(angle);
  const double dx = p.x - center.x, dy = p.y - center.y;
  return {center.x + c * dx - s * dy, center.y + s * dx + c * dy};
}

LandmarkSet rotate_landmarks(const LandmarkSet& landmarks, Point center, double angle) {
  LandmarkSet out = landmarks;
  for (auto& p : out.points) p = rotate_point(p, center, angle);
  return out;
}

double sample_bilinear(const Tensor& image, double x, double y, std::size_t c, Border border) noexcept {
  const auto H = static_cast<long>(image.dim(0)), W = static_cast<long>(image.dim(1));
  const double fx0 = std::floor(x), fy0 = std::floor(y);
  const double fx = x - fx0, fy = y - fy0;
  const long x0 = static_cast<long>(fx0), y0 = static_cast<long>(fy0);
  auto tap = [&](long yy, long xx) -> double {
    if (border == Border::Clamp) {
      yy = std::clamp(yy, 0L, H - 1);
      xx = std::clamp(xx, 0L, W - 1);
    } else if (yy < 0 || yy >= H || xx < 0 || xx >= W) {
      return 0.0;
    }
    return image.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx), c);
  };
  const double top = tap(y0, x0) * (1.0 - fx) + (fx == 0.0 ? 0.0 : tap(y0, x0 + 1) * fx);
  if (fy == 0.0) return top;
  const double bottom = tap(y0 + 1, x0) * (1.0 - fx) + (fx == 0.0 ? 0.0 : tap(y0 + 1, x0 + 1) * fx);
  return top * (1.0 - fy) + bottom * fy;
}

AlignedFace align_face(const Tensor& image, const LandmarkSet& landmarks) {
  if (image.rank() != 3) throw ShapeError("align_face: image must be H x W x C, got " + shape_string(image.shape()));
  const auto [left, right] = eye_centers(landmarks);
  const double dx = right.x - left.x, dy = right.y - left.y;
  if (dx == 0.0 && dy == 0.0) throw std::invalid_argument("align_face: eye centres coincide");

  AlignedFace out;
  out.angle = -std::atan2(dy, dx);
  out.center = {(left.x + right.x) / 2.0, (left.y + right.y) / 2.0};
  out.landmarks = rotate_landmarks(landmarks, out.center, out.angle);
  if (out.angle == 0.0) {
    out.image = image;
    return out;
  }
  const std::size_t H = image.dim(0), W = image.dim(1), C = image.dim(2);
  out.image = Tensor({H, W, C});
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      // Inverse map: the source of output pixel (x, y).
      const Point src = rotate_point({static_cast<double>(x), static_cast<double>(y)}, out.center, -out.angle);
      for (std::size_t c = 0; c < C; ++c) out.image.at(y, x, c) = sample_bilinear(image, src.x, src.y, c, Border::Zero);
    }
  }
  return out;
}

Tensor resize_bilinear(const Tensor& image, std::size_t out_height, std::size_t out_width) {
  if (image.rank() != 3) throw ShapeError("resize: image must be H x W x C, got " + shape_string(image.shape()));
  if (out_height == 0 || out_width == 0) throw ShapeError("resize: output size must be positive");
  const std::size_t C = image.dim(2);
  const double sy = static_cast<double>(image.dim(0)) / static_cast<double>(out_height);
  const double sx = static_cast<double>(image.dim(1)) / static_cast<double>(out_width);
  Tensor out({out_height, out_width, C});
  for (std::size_t y = 0; y < out_height; ++y) {
    const double src_y = (static_cast<double>(y) + 0.5) * sy - 0.5;
    for (std::size_t x = 0; x < out_width; ++x) {
      const double src_x = (static_cast<double>(x) + 0.5) * sx - 0.5;
      for (std::size_t c = 0; c < C; ++c) out.at(y, x, c) = sample_bilinear(image, src_x, src_y, c, Border::Clamp);
    }
  }
  return out;
}

Tensor resample_box(const Tensor& image, const Box& box, std::size_t out_size) {
  if (image.rank() != 3) throw ShapeError("resample: image must be H x W x C, got " + shape_string(image.shape()));
  if (!(box.side > 0.0)) throw std::invalid_argument("resample: box side must be positive");
  const double W = static_cast<double>(image.dim(1)), H = static_cast<double>(image.dim(0));
  if (box.x0 >= W - 0.5 || box.y0 >= H - 0.5 || box.x0 + box.side <= -0.5 || box.y0 + box.side <= -0.5) {
    throw std::invalid_argument("resample: box lies entirely outside the image");
  }
  const std::size_t C = image.dim(2);
  const double scale = box.side / static_cast<double>(out_size);
  Tensor out({out_size, out_size, C});
  for (std::size_t y = 0; y < out_size; ++y) {
    const double src_y = box.y0 + (static_cast<double>(y) + 0.5) * scale;
    for (std::size_t x = 0; x < out_size; ++x) {
      const double src_x = box.x0 + (static_cast<double>(x) + 0.5) * scale;
      for (std::size_t c = 0; c < C; ++c) out.at(y, x, c) = sample_bilinear(image, src_x, src_y, c, Border::Zero);
    }
  }
  return out;
}

Box eye_box(const LandmarkSet& landmarks, std::size_t first_point, double margin) {
  if (margin < 0.0) throw std::invalid_argument("eye box: margin must be non-negative");
  double min_x = landmarks.points[first_point].x, max_x = min_x;
  double min_y = landmarks.points[first_point].y, max_y = min_y;
  for (std::size_t i = first_point; i < first_point + kEyePoints; ++i) {
    min_x = std::min(min_x, landmarks.points[i].x);
    max_x = std::max(max_x, landmarks.points[i].x);
    min_y = std::min(min_y, landmarks.points[i].y);
    max_y = std::max(max_y, landmarks.points[i].y);
  }
  const double w = (max_x - min_x) * (1.0 + 2.0 * margin);
  const double h = (max_y - min_y) * (1.0 + 2.0 * margin);
  const double side = std::max(w, h);
  if (!(side > 0.0)) throw std::invalid_argument("eye box: landmarks are degenerate");
  const double cx = (min_x + max_x) / 2.0, cy = (min_y + max_y) / 2.0;
  return {cx - side / 2.0, cy - side / 2.0, side};
}

std::pair<Tensor, Tensor> crop_and_resize(const AlignedFace& aligned, double margin) {
  const Tensor image = as_three_channels(aligned.image);
  constexpr std::size_t kOut = 50;
  return {resample_box(image, eye_box(aligned.landmarks, kLeftEyeBegin, margin), kOut),
          resample_box(image, eye_box(aligned.landmarks, kRightEyeBegin, margin), kOut)};
}

}  // namespace alebk::roi
