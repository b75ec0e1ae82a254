#pragma once

#include <optional>

#include "posefit/image.hpp"
#include "posefit/pose.hpp"

namespace posefit {

// One observed RGB-D view: color in [0,1], depth in meters (0 = invalid),
// binary object mask, intrinsics, and the generating pose when known
// (synthetic data carries it; real data may not).
struct Frame {
  ImageD rgb;    // H x W x 3
  ImageD depth;  // H x W
  ImageD mask;   // H x W, values 0 or 1
  CameraIntrinsics K;
  std::optional<Pose> gt_pose;

  void validate() const {
    K.validate();
    if (rgb.height() != K.height || rgb.width() != K.width ||
        rgb.channels() != 3)
      throw InvalidArgumentError("rgb layer does not match intrinsics");
    if (!depth.same_shape(ImageD(rgb.height(), rgb.width(), 1)) ||
        !mask.same_shape(ImageD(rgb.height(), rgb.width(), 1)))
      throw InvalidArgumentError("frame layers must share dimensions");
    for (std::size_t i = 0; i < depth.size(); ++i)
      if (depth.data()[i] < 0)
        throw InvalidArgumentError("depth must be non-negative");
  }
};

}  // namespace posefit
