#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace litterbot {

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Shortest signed rotation taking `from` onto `to`, in (-pi, pi].
inline double angle_diff(double to, double from) { return normalize_angle(to - from); }

struct GroundPoint {
  double x = 0.0;
  double y = 0.0;

  GroundPoint operator+(const GroundPoint& o) const { return {x + o.x, y + o.y}; }
  GroundPoint operator-(const GroundPoint& o) const { return {x - o.x, y - o.y}; }
  GroundPoint operator*(double k) const { return {x * k, y * k}; }
  bool operator==(const GroundPoint&) const = default;

  double norm() const { return std::hypot(x, y); }
};

inline double distance(const GroundPoint& a, const GroundPoint& b) { return (a - b).norm(); }
inline double dot(const GroundPoint& a, const GroundPoint& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const GroundPoint& a, const GroundPoint& b) { return a.x * b.y - a.y * b.x; }

/// Planar pose. The heading is kept in (-pi, pi] by every constructor and setter.
class Pose2D {
 public:
  Pose2D() = default;
  Pose2D(double x, double y, double theta) : x_(x), y_(y), theta_(normalize_angle(theta)) {}
  Pose2D(const GroundPoint& p, double theta) : Pose2D(p.x, p.y, theta) {}

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }
  GroundPoint position() const { return {x_, y_}; }
  GroundPoint heading() const { return {std::cos(theta_), std::sin(theta_)}; }

  bool operator==(const Pose2D&) const = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

/// base ∘ offset: `offset` expressed in the frame of `base`.
Pose2D compose(const Pose2D& base, const Pose2D& offset);
Pose2D inverse(const Pose2D& p);
/// Map-frame coordinates of a point given in the frame of `frame`.
GroundPoint transform_point(const Pose2D& frame, const GroundPoint& local);
/// Coordinates of a map-frame point in the frame of `frame`.
GroundPoint to_local(const Pose2D& frame, const GroundPoint& world);

/// Forward-looking pinhole camera mounted on the robot, zero tilt.
struct CameraModel {
  double image_width = 640.0;
  double image_height = 480.0;
  double hfov = 1.2;  // rad
  double vfov = 1.6;  // rad
  double mount_height = 0.3;
  double forward_offset = 0.1;
  double max_range = 5.0;  // depth channel cutoff, m

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct BoundingBox {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;
  double confidence = 0.0;
  double depth = 0.0;  // range to the box center, m

  double u_center() const { return 0.5 * (u_min + u_max); }
  double v_center() const { return 0.5 * (v_min + v_max); }
  void validate(const CameraModel& cam) const;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Depth shorter than the camera's mount height: no ground intersection.
class DegenerateDepth : public GeometryError {
 public:
  explicit DegenerateDepth(double depth);
};

class CoincidentPoint : public GeometryError {
 public:
  CoincidentPoint() : GeometryError("target coincides with robot position") {}
};

/// Horizontal angle of the box center off the optical axis, CCW (left) positive.
double bearing_from_pixel(const BoundingBox& bbox, const CameraModel& cam);

/// Projects a detection to the map-frame ground plane using the depth at the box center.
GroundPoint project_detection(const Pose2D& robot, const BoundingBox& bbox, const CameraModel& cam);

/// Image-space center and depth of a ground point seen from `robot`; inverse of
/// project_detection. `in_frustum` is false if the point is outside the camera view.
struct PixelObservation {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool in_frustum = false;
};
PixelObservation render_point(const Pose2D& robot, const GroundPoint& point, const CameraModel& cam);

enum class Side { Left, Right, Ahead };

Side left_or_right(const Pose2D& robot, const GroundPoint& target);

/// Signed heading change that makes `robot` face `target`.
double angle_to(const Pose2D& robot, const GroundPoint& target);

std::string to_string(Side side);

}  // namespace litterbot
