#pragma once

namespace cageloop {

// Open-gripper geometry. Lengths in meters.
struct GripperSpec {
  double h = 0.12;               // finger length; total stretch is 2h
  double r = 0.01;               // finger sweep radius
  double approach_depth = 0.03;  // height of the approach cone
  double spread_deg = 60.0;      // finger spread from the forward axis
  double palm_offset = 0.3;      // palm distance from the origin, fraction of h

  void validate() const;
};

}  // namespace cageloop
