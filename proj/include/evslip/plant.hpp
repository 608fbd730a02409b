#ifndef EVSLIP_PLANT_HPP
#define EVSLIP_PLANT_HPP

#include <vector>

#include "evslip/event.hpp"

namespace evslip {

/// Object held between two frictional fingers, sliding vertically.
/// y_pos is measured downward from the grasp point, in metres.
struct PlantState {
  double object_mass = 0.3;          // kg
  double load_mass = 0.0;            // kg
  double mu = 0.5;
  double grip_percent = 0.0;         // 0..100
  double newtons_per_percent = 0.2;  // normal force per contact per grip percent
  double y_pos = 0.0;
  double y_vel = 0.0;
  bool slipping = false;

  double total_mass() const noexcept { return object_mass + load_mass; }
  double normal_force() const noexcept { return grip_percent * newtons_per_percent; }
  /// Largest tangential load the two contacts can hold: 2 mu F_n.
  double friction_capacity() const noexcept { return 2.0 * mu * normal_force(); }
};

struct PlantInputs {
  double gravity = 9.81;
  /// Upward acceleration of the gripper; adds to the apparent weight.
  double arm_accel = 0.0;
  /// Object resting on a support surface.
  bool supported = false;
};

/// Advances the plant by dt seconds with semi-implicit Euler. At rest the
/// object sticks while its apparent weight is within the friction capacity;
/// in motion it decelerates at capacity / mass and sticks when it stops.
PlantState step_plant(PlantState s, double dt, const PlantInputs& in = {});

/// Adds a dropped load: mass joins the object and the momentum it carries
/// (impact_velocity, m/s downward) is shared inelastically.
PlantState apply_load(PlantState s, double load_mass, double impact_velocity);

/// First-order grip actuator with dead time and optional overshoot.
struct ActuatorParams {
  double time_constant_s = 0.030;
  double delay_s = 0.001;
  /// Transient target overshoot as a fraction of each command step.
  double overshoot = 0.0;

  void validate() const;
};

class GripActuator {
 public:
  explicit GripActuator(ActuatorParams params = {}, double initial_percent = 0.0);

  /// Schedules a setpoint issued at t_us; it takes effect after the delay.
  void command(TimeUs t_us, double percent);

  /// Advances to t_us (dt_s since the previous call) and returns the grip.
  double update(TimeUs t_us, double dt_s);

  double grip() const noexcept { return actual_; }
  double setpoint() const noexcept { return setpoint_; }

 private:
  struct Pending {
    TimeUs effective_us;
    double percent;
  };
  ActuatorParams params_;
  double actual_;
  double setpoint_;
  double step_ = 0.0;
  TimeUs step_time_us_ = 0;
  std::vector<Pending> pending_;
};

}  // namespace evslip

#endif  // EVSLIP_PLANT_HPP
