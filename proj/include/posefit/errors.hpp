#pragma once

#include <stdexcept>
#include <string>

namespace posefit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: mismatched dimensions, empty meshes, invalid values.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Geometry behind the near plane where projection is undefined.
class BehindCameraError : public Error {
 public:
  using Error::Error;
};

// A render that produced no usable pixels (mesh projects outside the image).
class DegenerateRenderError : public Error {
 public:
  using Error::Error;
};

// A mask with no foreground (or no background) pixels.
class DegenerateMaskError : public Error {
 public:
  using Error::Error;
};

// An empty point cloud where a non-empty one is required.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

// Inconsistent component wiring, e.g. a feature extractor with the wrong
// number of levels.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Message carries line number or byte offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Missing required file.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Refinement could not evaluate the objective at the initial pose.
class InitFailureError : public Error {
 public:
  using Error::Error;
};

}  // namespace posefit
