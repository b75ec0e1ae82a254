#include "posefit/color.hpp"

namespace posefit {

template Image<double> rgb_to_ab(const Image<double>&);
template Image<Jet> rgb_to_ab(const Image<Jet>&);

}  // namespace posefit
