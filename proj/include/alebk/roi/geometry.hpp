#pragma once

// Landmarks -> aligned face -> 50x50x3 eye crops.
//
// Coordinates are in pixels with pixel centres at integer positions, x to
// the right and y down. Images are H x W x C tensors with values in [0, 1].

#include <array>
#include <span>
#include <utility>

#include "alebk/tensor.hpp"

namespace alebk::roi {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b) noexcept;

inline constexpr std::size_t kLandmarkCount = 68;
// iBUG 68-point indices of the two eye contours.
inline constexpr std::size_t kLeftEyeBegin = 36;
inline constexpr std::size_t kRightEyeBegin = 42;
inline constexpr std::size_t kEyePoints = 6;

struct LandmarkSet {
  std::array<Point, kLandmarkCount> points{};
  std::size_t width = 0;
  std::size_t height = 0;

  /// Checks the point count and clamps every point into the image.
  static LandmarkSet from_points(std::span<const Point> points, std::size_t width, std::size_t height);
};

struct EyeCenters {
  Point left;   // mean of points 36-41
  Point right;  // mean of points 42-47
};

EyeCenters eye_centers(const LandmarkSet& landmarks);

/// Rotation by `angle` radians about `center` (positive turns +x towards +y).
Point rotate_point(Point p, Point center, double angle) noexcept;
/// Rotated copy; points are not clamped so the rotation stays invertible.
LandmarkSet rotate_landmarks(const LandmarkSet& landmarks, Point center, double angle);

struct AlignedFace {
  Tensor image;
  LandmarkSet landmarks;
  /// Rotation that was applied, radians.
  double angle = 0.0;
  /// Inter-eye midpoint the rotation was taken about.
  Point center;
};

/// Rotates image and landmarks about the inter-eye midpoint by
/// -atan2(dy, dx) so the eye centres land on a horizontal line. The image is
/// resampled bilinearly with zero fill. Throws if the eye centres coincide.
AlignedFace align_face(const Tensor& image, const LandmarkSet& landmarks);

enum class Border { Zero, Clamp };

/// Bilinear sample of channel `c` at continuous position (x, y).
double sample_bilinear(const Tensor& image, double x, double y, std::size_t c, Border border) noexcept;

/// Bilinear resize with half-pixel-centre alignment and edge clamping.
Tensor resize_bilinear(const Tensor& image, std::size_t out_height, std::size_t out_width);

/// Square region in edge coordinates: it spans [x0, x0 + side] x [y0, y0 + side],
/// where pixel k covers [k - 0.5, k + 0.5].
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double side = 0.0;
};

/// Samples `box` onto an out_size x out_size grid, zero outside the image.
/// Throws if the box lies entirely outside the image.
Tensor resample_box(const Tensor& image, const Box& box, std::size_t out_size);

/// Landmark extent of one eye, grown by `margin` times the extent on each
/// side, then squared about its centre.
Box eye_box(const LandmarkSet& landmarks, std::size_t first_point, double margin);

inline constexpr double kDefaultEyeMargin = 0.4;

/// Left and right 50 x 50 x 3 crops. Single-channel images are replicated
/// to three channels.
std::pair<Tensor, Tensor> crop_and_resize(const AlignedFace& aligned, double margin = kDefaultEyeMargin);

}  // namespace alebk::roi
