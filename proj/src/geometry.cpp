#include "litterbot/geometry.hpp"

#include <fmt/format.h>

namespace litterbot {

double normalize_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::remainder(angle, two_pi);  // [-pi, pi]
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

Pose2D compose(const Pose2D& base, const Pose2D& offset) {
  const double c = std::cos(base.theta());
  const double s = std::sin(base.theta());
  return {base.x() + c * offset.x() - s * offset.y(), base.y() + s * offset.x() + c * offset.y(),
          base.theta() + offset.theta()};
}

Pose2D inverse(const Pose2D& p) {
  const double c = std::cos(p.theta());
  const double s = std::sin(p.theta());
  return {-c * p.x() - s * p.y(), s * p.x() - c * p.y(), -p.theta()};
}

GroundPoint transform_point(const Pose2D& frame, const GroundPoint& local) {
  const double c = std::cos(frame.theta());
  const double s = std::sin(frame.theta());
  return {frame.x() + c * local.x - s * local.y, frame.y() + s * local.x + c * local.y};
}

GroundPoint to_local(const Pose2D& frame, const GroundPoint& world) {
  const double c = std::cos(frame.theta());
  const double s = std::sin(frame.theta());
  const double dx = world.x - frame.x();
  const double dy = world.y - frame.y();
  return {c * dx + s * dy, -s * dx + c * dy};
}

void CameraModel::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw std::invalid_argument(fmt::format("camera.{} out of range", field));
  };
  require(image_width > 0.0, "image_width");
  require(image_height > 0.0, "image_height");
  require(hfov > 0.0 && hfov < std::numbers::pi, "hfov");
  require(vfov > 0.0 && vfov < std::numbers::pi, "vfov");
  require(mount_height > 0.0, "mount_height");
  require(std::isfinite(forward_offset), "forward_offset");
  require(max_range > 0.0, "max_range");
}

void BoundingBox::validate(const CameraModel& cam) const {
  if (!(u_min < u_max && u_max <= cam.image_width && u_min >= 0.0))
    throw std::invalid_argument("bounding box u extent invalid for camera");
  if (!(v_min < v_max && v_max <= cam.image_height && v_min >= 0.0))
    throw std::invalid_argument("bounding box v extent invalid for camera");
  if (!(confidence >= 0.0 && confidence <= 1.0))
    throw std::invalid_argument("bounding box confidence outside [0,1]");
}

DegenerateDepth::DegenerateDepth(double depth)
    : GeometryError(fmt::format("depth {} m is shorter than the camera mount height", depth)) {}

double bearing_from_pixel(const BoundingBox& bbox, const CameraModel& cam) {
  const double offset = 0.5 - bbox.u_center() / cam.image_width;
  return std::atan(offset * 2.0 * std::tan(0.5 * cam.hfov));
}

GroundPoint project_detection(const Pose2D& robot, const BoundingBox& bbox, const CameraModel& cam) {
  if (!(bbox.depth > 0.0) || bbox.depth < cam.mount_height) throw DegenerateDepth(bbox.depth);
  const double ground_range =
      std::sqrt(std::max(bbox.depth * bbox.depth - cam.mount_height * cam.mount_height, 0.0));
  const double heading = robot.theta() + bearing_from_pixel(bbox, cam);
  const GroundPoint camera = robot.position() + robot.heading() * cam.forward_offset;
  return {camera.x + ground_range * std::cos(heading), camera.y + ground_range * std::sin(heading)};
}

PixelObservation render_point(const Pose2D& robot, const GroundPoint& point, const CameraModel& cam) {
  const Pose2D camera_pose = compose(robot, Pose2D(cam.forward_offset, 0.0, 0.0));
  const GroundPoint local = to_local(camera_pose, point);
  const double fwd = local.x;
  const double left = local.y;

  PixelObservation obs;
  obs.depth = std::sqrt(fwd * fwd + left * left + cam.mount_height * cam.mount_height);
  if (!(fwd > 0.0)) return obs;

  const double tan_h = std::tan(0.5 * cam.hfov);
  const double tan_v = std::tan(0.5 * cam.vfov);
  const double lateral = left / fwd;
  const double downward = cam.mount_height / fwd;
  obs.u = cam.image_width * (0.5 - lateral / (2.0 * tan_h));
  obs.v = cam.image_height * (0.5 + downward / (2.0 * tan_v));
  obs.in_frustum = std::abs(lateral) < tan_h && downward < tan_v;
  return obs;
}

Side left_or_right(const Pose2D& robot, const GroundPoint& target) {
  const double c = cross(robot.heading(), target - robot.position());
  if (std::abs(c) < 1e-12) return Side::Ahead;
  return c > 0.0 ? Side::Left : Side::Right;
}

double angle_to(const Pose2D& robot, const GroundPoint& target) {
  const GroundPoint d = target - robot.position();
  if (d.norm() < 1e-9) throw CoincidentPoint();
  return angle_diff(std::atan2(d.y, d.x), robot.theta());
}

std::string to_string(Side side) {
  switch (side) {
    case Side::Left: return "Left";
    case Side::Right: return "Right";
    case Side::Ahead: return "Ahead";
  }
  return "?";
}

}  // namespace litterbot
